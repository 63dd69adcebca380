"""Shared generators for seeded randomized tests.

All randomness flows through explicit `random.Random(seed)` instances so every
test is replayable; no global RNG state is touched.
"""
from __future__ import annotations

import random
import sys
from fractions import Fraction
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))


def pytest_runtest_logreport(report):
    # One visible pass/fail line per acceptance criterion.
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    sys.stdout.write(f"\n{name}: {'PASS' if report.passed else 'FAIL'}\n")
    sys.stdout.flush()

from bottleneck_ot.measures import make_measure
from bottleneck_ot.spaces import build_space


def random_space(rng: random.Random, n_points: int, dim: int = 2):
    """Euclidean points drawn uniformly from [0, 1]^dim."""
    coords = [[rng.random() for _ in range(dim)] for _ in range(n_points)]
    return build_space([f"p{i}" for i in range(n_points)], "euclidean", coords=coords)


def random_probability_weights(rng: random.Random, n_atoms: int, max_denominator: int = 16):
    """Positive rational weights summing to 1 with reduced denominators <= max."""
    denominator = rng.choice([d for d in (2, 4, 8, 16) if d <= max_denominator and d >= n_atoms])
    cuts = sorted(rng.sample(range(1, denominator), n_atoms - 1)) if n_atoms > 1 else []
    bounds = [0] + cuts + [denominator]
    return [Fraction(bounds[k + 1] - bounds[k], denominator) for k in range(n_atoms)]


def random_probability_measure(rng: random.Random, space, max_atoms: int = 5,
                               max_denominator: int = 16):
    n_atoms = rng.randint(1, min(max_atoms, space.n_points))
    atoms = rng.sample(range(space.n_points), n_atoms)
    weights = random_probability_weights(rng, n_atoms, max_denominator)
    return make_measure(space, list(zip(atoms, weights)))


def convergence_suite():
    """Ten fixed sequences whose prefix evidence is unambiguous: the
    separating-set verdict and the direct bottleneck-distance verdict must
    agree on every one of them."""
    from bottleneck_ot.convergence import MeasureSequence
    from bottleneck_ot.measures import point_mass

    two = build_space(["x", "y"], "euclidean", coords=[[0.0], [1.0]])
    line6 = build_space([f"p{i}" for i in range(6)], "euclidean",
                        coords=[[float(i)] for i in range(6)])
    line3 = build_space(["a", "b", "c"], "euclidean",
                        coords=[[0.0], [1.0], [2.0]])
    stray = build_space(["u", "v", "far"], "euclidean",
                        coords=[[0.0], [0.1], [1.0]])
    plane = build_space([f"q{i}" for i in range(5)], "euclidean",
                        coords=[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0],
                                [1.0, 1.0], [0.5, 0.5]])

    def m(space, pairs):
        return make_measure(space, pairs)

    suite = []

    fifty = m(two, [(0, Fraction(1, 2)), (1, Fraction(1, 2))])
    suite.append(("constant", MeasureSequence.build([fifty] * 8, fifty)))

    limit2 = m(two, [(0, Fraction(1, 4)), (1, Fraction(3, 4))])
    terms2 = [
        m(two, [(0, Fraction(1, 2)), (1, Fraction(1, 2))]) if n < 5 else limit2
        for n in range(10)
    ]
    suite.append(("weight-stabilizing", MeasureSequence.build(terms2, limit2)))

    vanishing_terms = [
        m(two, [(0, Fraction(1, n)), (1, Fraction(n - 1, n))]) for n in range(2, 12)
    ]
    suite.append(("vanishing-atom", MeasureSequence.build(vanishing_terms, point_mass(two, 1))))

    drift_terms = [point_mass(line6, max(4 - n, 0)) for n in range(8)]
    suite.append(("support-drift", MeasureSequence.build(drift_terms, point_mass(line6, 0))))

    mixed_terms = [
        m(two, [(0, Fraction(n + 1, 2 * n)), (1, Fraction(n - 1, 2 * n))])
        for n in range(2, 12)
    ]
    suite.append(("mixed-counterexample", MeasureSequence.build(mixed_terms, fifty)))

    limit6 = m(line3, [(0, Fraction(1, 2)), (2, Fraction(1, 2))])
    pre6 = m(line3, [(1, Fraction(1, 2)), (2, Fraction(1, 2))])
    terms6 = [pre6 if n < 4 else limit6 for n in range(8)]
    suite.append(("merge-convergent", MeasureSequence.build(terms6, limit6)))

    far = m(two, [(0, Fraction(1, 2)), (1, Fraction(1, 2))])
    alt_terms = [point_mass(two, 1) if n % 2 == 0 else far for n in range(8)]
    suite.append(("alternating", MeasureSequence.build(alt_terms, point_mass(two, 1))))

    limit8 = m(plane, [(0, Fraction(1, 2)), (3, Fraction(1, 2))])
    wander = m(plane, [(4, Fraction(1, 2)), (3, Fraction(1, 2))])
    terms8 = [wander if n < 3 else limit8 for n in range(8)]
    suite.append(("atom-drift-2d", MeasureSequence.build(terms8, limit8)))

    limit9 = m(stray, [(0, Fraction(1, 2)), (1, Fraction(1, 2))])
    stray_terms = [
        m(stray, [(0, Fraction(1, 2) - Fraction(1, n + 4)),
                  (1, Fraction(1, 2)), (2, Fraction(1, n + 4))])
        for n in range(8)
    ]
    suite.append(("vanishing-far-stray", MeasureSequence.build(stray_terms, limit9)))

    late_terms = [
        m(two, [(0, Fraction(1, 3)), (1, Fraction(2, 3))]) if n < 7 else limit2
        for n in range(10)
    ]
    suite.append(("late-stabilizing", MeasureSequence.build(late_terms, limit2)))

    return suite


def drifting_inconclusive_sequence():
    """Atoms still approaching the limit when the prefix ends: inconclusive."""
    from bottleneck_ot.convergence import MeasureSequence
    from bottleneck_ot.measures import point_mass

    line6 = build_space([f"p{i}" for i in range(6)], "euclidean",
                        coords=[[float(i)] for i in range(6)])
    terms = [point_mass(line6, 5 - n) for n in range(5)]
    return MeasureSequence.build(terms, point_mass(line6, 0))
