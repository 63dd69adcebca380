"""Stability probes for pushforward dynamics on measures.

A finite map system induces a dynamical system on probability measures via the
pushforward.  Sets of points lift to sets of measures (all measures supported
inside the set); the bottleneck distance from a measure to a lift has the
closed form max over support atoms of the point-to-set distance, which ties
point-level and measure-level stability together.

Stability verdicts are resolution-qualified: probes are sampled at the tested
perturbation sizes, witnesses are exact and replayable, and a "stable" verdict
never claims more than the grids it was given.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .errors import EmptySet, NotInvariant, NotInvariantMeasure
from .measures import DiscreteMeasure, make_measure, point_mass, pushforward
from .spaces import FiniteMetricSpace, build_space, hausdorff
from .transport import w_infinity

STABLE = "StableAtResolution"
UNSTABLE = "UnstableWitness"
INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class MapSystem:
    """A total map on a finite space, with cached iterates."""

    space: FiniteMetricSpace
    mapping: tuple  # mapping[i] is the image atom of atom i

    @classmethod
    def build(cls, space: FiniteMetricSpace, mapping) -> "MapSystem":
        if callable(mapping):
            table = tuple(space.check_atom(mapping(i)) for i in range(space.n_points))
        elif isinstance(mapping, dict):
            table = tuple(space.check_atom(mapping[i]) for i in range(space.n_points))
        else:
            table = tuple(space.check_atom(j) for j in mapping)
            if len(table) != space.n_points:
                raise ValueError("mapping must cover every point")
        return cls(space, table)

    def iterate(self, n: int) -> tuple:
        if n < 0:
            raise ValueError("iterates are defined for n >= 0")
        return _iterate_table(self.mapping, n)

    def apply_point(self, atom: int, n: int = 1) -> int:
        return self.iterate(n)[atom]

    def image_of_set(self, atoms, n: int = 1) -> frozenset:
        table = self.iterate(n)
        return frozenset(table[a] for a in atoms)

    def push(self, mu: DiscreteMeasure, n: int = 1) -> DiscreteMeasure:
        return pushforward(mu, self.iterate(n))

    def is_invariant_set(self, atoms) -> bool:
        atoms = frozenset(atoms)
        return self.image_of_set(atoms) <= atoms

    def is_fixed_measure(self, mu: DiscreteMeasure) -> bool:
        return self.push(mu) == mu


@lru_cache(maxsize=4096)
def _iterate_table(mapping: tuple, n: int) -> tuple:
    if n == 0:
        return tuple(range(len(mapping)))
    if n == 1:
        return mapping
    half = _iterate_table(mapping, n // 2)
    squared = tuple(half[v] for v in half)
    if n % 2:
        return tuple(mapping[v] for v in squared)
    return squared


@dataclass(frozen=True)
class LiftedSet:
    """The set of all probability measures supported inside ``atoms``."""

    space: FiniteMetricSpace
    atoms: frozenset

    def __post_init__(self):
        if not self.atoms:
            raise EmptySet("a lift needs a nonempty base set")

    def contains(self, mu: DiscreteMeasure) -> bool:
        return mu.support() <= self.atoms


def dist_to_lift(mu: DiscreteMeasure, atoms) -> float:
    """Bottleneck distance from a measure to the lift of a set.

    Closed form: the farthest support atom decides, because every atom's mass
    must travel into the set and nothing caps how the set's measures spread.
    Validated against solver brute force in the test suite before being
    trusted here.
    """
    atoms = list(atoms)
    if not atoms:
        raise EmptySet("distance to the lift of an empty set")
    space = mu.space
    return max(space.set_distance(a, atoms) for a in mu.support())


def lift_hausdorff(space: FiniteMetricSpace, U, V) -> float:
    """Hausdorff distance between two lifts; equals d_H of the base sets.

    Both routes are evaluated: the matrix sup-inf form and the lifted form
    through point-mass probes; they must agree to float precision.
    """
    U, V = frozenset(U), frozenset(V)
    if not U or not V:
        raise EmptySet("lift Hausdorff of an empty set")
    base = hausdorff(space, U, V)
    lifted = max(
        max(dist_to_lift(point_mass(space, u), V) for u in U),
        max(dist_to_lift(point_mass(space, v), U) for v in V),
    )
    assert abs(base - lifted) <= 1e-12
    return base


@dataclass(frozen=True)
class ProbeRecord:
    label: str
    seed: int | None
    weights: tuple  # ((atom, numerator, denominator), ...)
    distances: tuple  # distance per step 0..horizon
    sup_distance: float
    argmax_step: int
    allowance: float | None = None

    def exceeded(self) -> bool:
        return self.allowance is not None and self.sup_distance > self.allowance


@dataclass(frozen=True)
class StabilityReport:
    notion: str
    params: dict
    verdict: str
    witness: ProbeRecord | None
    records: tuple
    notes: tuple = field(default_factory=tuple)

    def trace_csv(self) -> str:
        lines = ["n,probe,distance"]
        for record in self.records:
            for n, dist in enumerate(record.distances):
                lines.append(f"{n},{record.label},{dist:.12g}")
        return "\n".join(lines) + "\n"


def _freeze_weights(mu: DiscreteMeasure) -> tuple:
    return tuple(
        (a, w.numerator, w.denominator) for a, w in sorted(mu.weights.items())
    )


def measure_from_frozen(space: FiniteMetricSpace, frozen) -> DiscreteMeasure:
    return make_measure(space, [(a, Fraction(n, d)) for a, n, d in frozen])


def _random_weights(rng: random.Random, n_atoms: int) -> list:
    denominator = rng.choice([4, 8, 16])
    while denominator < n_atoms:
        denominator *= 2
    cuts = sorted(rng.sample(range(1, denominator), n_atoms - 1)) if n_atoms > 1 else []
    bounds = [0] + cuts + [denominator]
    return [Fraction(bounds[k + 1] - bounds[k], denominator) for k in range(n_atoms)]


def _orbit_record(system: MapSystem, probe: DiscreteMeasure, horizon: int,
                  distance_fn, label: str, seed: int | None,
                  allowance: float | None = None) -> ProbeRecord:
    distances = []
    current = probe
    for n in range(horizon + 1):
        distances.append(distance_fn(current))
        if n < horizon:
            current = system.push(current)
    sup = max(distances)
    return ProbeRecord(
        label=label,
        seed=seed,
        weights=_freeze_weights(probe),
        distances=tuple(distances),
        sup_distance=sup,
        argmax_step=distances.index(sup),
        allowance=allowance,
    )


def _sample_lift_probe(rng: random.Random, space: FiniteMetricSpace, candidates) -> DiscreteMeasure:
    size = rng.randint(1, min(3, len(candidates)))
    atoms = rng.sample(sorted(candidates), size)
    return make_measure(space, list(zip(atoms, _random_weights(rng, size))))


def probe_lyapunov(system: MapSystem, A, eps_grid, delta_grid, horizon: int,
                   probes_per_cell: int, seed: int = 0) -> StabilityReport:
    """Point-set Lyapunov probe: do small lift-neighborhoods stay inside each
    epsilon over the horizon?  Stable per epsilon when some tested delta works."""
    A = frozenset(A)
    if not system.is_invariant_set(A):
        raise NotInvariant("probe target must satisfy f(A) within A")
    space = system.space
    records = []
    cell_worst: dict[float, ProbeRecord] = {}
    for d_idx, delta in enumerate(sorted(delta_grid)):
        candidates = space.neighborhood(A, delta, closed=True)
        probes = [
            (f"delta{delta:.6g}/point{x}", None, point_mass(space, x))
            for x in sorted(candidates)
        ]
        for k in range(probes_per_cell):
            child_seed = seed * 1_000_003 + d_idx * 1_009 + k
            rng = random.Random(child_seed)
            probes.append(
                (f"delta{delta:.6g}/sample{k}", child_seed,
                 _sample_lift_probe(rng, space, candidates))
            )
        for label, child_seed, probe in probes:
            record = _orbit_record(
                system, probe, horizon,
                lambda m: dist_to_lift(m, A), label, child_seed,
            )
            records.append(record)
            worst = cell_worst.get(delta)
            if worst is None or record.sup_distance > worst.sup_distance:
                cell_worst[delta] = record
    per_eps = {}
    escapes = {}
    for eps in sorted(eps_grid):
        winners = [d for d in cell_worst if cell_worst[d].sup_distance <= eps]
        if winners:
            # Some tested perturbation size keeps every probe inside eps.
            per_eps[eps] = ("stable", min(winners))
            continue
        # A probe that starts inside eps and later leaves is a dynamical
        # escape: it refutes every delta large enough to admit it.  Probes
        # that start beyond eps prove nothing about this eps.
        escape = next(
            (r for r in records
             if r.distances[0] <= eps and r.sup_distance > eps),
            None,
        )
        if escape is not None:
            per_eps[eps] = ("unstable", None)
            escapes[eps] = escape
        else:
            per_eps[eps] = ("inconclusive", None)
    statuses = [status for status, _ in per_eps.values()]
    if all(s == "stable" for s in statuses):
        verdict, witness = STABLE, None
    elif "unstable" in statuses:
        verdict = UNSTABLE
        witness = escapes[min(escapes)]
    else:
        verdict, witness = INCONCLUSIVE, None
    return StabilityReport(
        notion="lyapunov",
        params={
            "set": sorted(A), "eps_grid": sorted(eps_grid),
            "delta_grid": sorted(delta_grid), "horizon": horizon,
            "probes_per_cell": probes_per_cell, "seed": seed,
            "per_eps": {f"{e:.12g}": s for e, (s, _) in per_eps.items()},
        },
        verdict=verdict,
        witness=witness,
        records=tuple(records),
    )


def _support_translation_probe(rng: random.Random, space, mu, delta) -> DiscreteMeasure:
    pairs = []
    for a, w in sorted(mu.weights.items()):
        targets = sorted(space.neighborhood([a], delta, closed=True))
        pairs.append((rng.choice(targets), w))
    return make_measure(space, pairs)


def _weight_leak_probe(rng: random.Random, space, mu, delta) -> DiscreteMeasure:
    atoms = sorted(mu.weights)
    a = rng.choice(atoms)
    targets = sorted(space.neighborhood([a], delta, closed=True))
    z = rng.choice(targets)
    share = Fraction(rng.randint(1, 3), 4)
    moved = mu.weights[a] * share
    adjusted = dict(mu.weights)
    adjusted[a] = adjusted[a] - moved
    adjusted[z] = adjusted.get(z, Fraction(0)) + moved
    return make_measure(space, adjusted.items())


def probe_measure_lyapunov(system: MapSystem, mu: DiscreteMeasure, delta_grid,
                           horizon: int, probes_per_cell: int, seed: int = 0,
                           extra_probes=()) -> StabilityReport:
    """Measure-level Lyapunov probe around a fixed measure of the pushforward.

    Sampled probes stay within each tested delta in the bottleneck metric
    (support translations and local mass leaks, verified by the solver).  The
    ``extra_probes`` hook injects named perturbation families regardless of
    their bottleneck distance — e.g. a tiny mass leaked onto a fixed point far
    away, which is weak*-small yet permanently displaced; orbits exceeding the
    per-delta allowance are reported as exact witnesses.
    """
    if not system.is_fixed_measure(mu):
        raise NotInvariantMeasure("the probed measure must be a pushforward fixed point")
    space = system.space
    gap = space.min_positive_gap()
    deltas = sorted(delta_grid)
    records = []
    witness = None
    for d_idx, delta in enumerate(deltas):
        allowance = 2.0 * (delta + gap)
        for k in range(probes_per_cell):
            child_seed = seed * 1_000_003 + d_idx * 1_009 + k
            rng = random.Random(child_seed)
            maker = _support_translation_probe if k % 2 == 0 else _weight_leak_probe
            probe = maker(rng, space, mu, delta)
            check = w_infinity(probe, mu).value
            assert check <= delta + 1e-12, "sampled probe escaped its delta ball"
            record = _orbit_record(
                system, probe, horizon,
                lambda m: w_infinity(m, mu).value,
                f"delta{delta:.6g}/{maker.__name__.strip('_')}{k}",
                child_seed, allowance,
            )
            records.append(record)
            if witness is None and record.exceeded():
                witness = record
    extra_allowance = 2.0 * ((deltas[-1] if deltas else gap) + gap)
    for label, probe in extra_probes:
        record = _orbit_record(
            system, probe, horizon,
            lambda m: w_infinity(m, mu).value,
            f"extra/{label}", None, extra_allowance,
        )
        records.append(record)
        if witness is None and record.exceeded():
            witness = record
    return StabilityReport(
        notion="measure-lyapunov",
        params={
            "measure": [(a, f"{w}") for a, w in sorted(mu.weights.items())],
            "delta_grid": deltas, "horizon": horizon,
            "probes_per_cell": probes_per_cell, "seed": seed,
            "allowance_rule": "2*(delta + min positive gap)",
        },
        verdict=UNSTABLE if witness is not None else STABLE,
        witness=witness,
        records=tuple(records),
        notes=(
            "sampled probes obey w_infinity(probe, measure) <= delta; "
            "extra probes are evaluated against the largest-delta allowance",
        ),
    )


def probe_asymptotic(system: MapSystem, A, eps: float, horizon: int,
                     probes: int, seed: int = 0, tol: float = 0.0) -> StabilityReport:
    """Do all orbits started in the eps-lift-neighborhood fall back into the lift?"""
    A = frozenset(A)
    if not system.is_invariant_set(A):
        raise NotInvariant("probe target must satisfy f(A) within A")
    space = system.space
    candidates = space.neighborhood(A, eps, closed=True)
    probe_list = [
        (f"point{x}", None, point_mass(space, x)) for x in sorted(candidates)
    ]
    for k in range(probes):
        child_seed = seed * 1_000_003 + k
        rng = random.Random(child_seed)
        probe_list.append(
            (f"sample{k}", child_seed, _sample_lift_probe(rng, space, candidates))
        )
    records = []
    witness = None
    for label, child_seed, probe in probe_list:
        record = _orbit_record(
            system, probe, horizon, lambda m: dist_to_lift(m, A), label, child_seed,
        )
        records.append(record)
        if min(record.distances) > tol and witness is None:
            witness = record
    return StabilityReport(
        notion="asymptotic",
        params={"set": sorted(A), "eps": eps, "horizon": horizon,
                "probes": probes, "seed": seed, "tol": tol},
        verdict=UNSTABLE if witness is not None else STABLE,
        witness=witness,
        records=tuple(records),
    )


def probe_attractor(system: MapSystem, A, eps: float, n_max: int) -> StabilityReport:
    """Exact attractor check: the neighborhood must re-enter itself and its
    forward intersection must come back to exactly A."""
    A = frozenset(A)
    if not system.is_invariant_set(A):
        raise NotInvariant("probe target must satisfy f(A) within A")
    space = system.space
    U = space.neighborhood(A, eps)
    reentry = None
    for n in range(1, n_max + 1):
        if system.image_of_set(U, n) <= U:
            reentry = n
            break
    # The forward images of U are eventually periodic; intersect through one
    # full cycle for the exact infinite intersection.
    seen: dict[frozenset, int] = {}
    images = []
    current = U
    while True:
        current = system.image_of_set(current)
        if current in seen:
            break
        seen[current] = len(images)
        images.append(current)
    intersection = frozenset(range(space.n_points))
    for img in images:
        intersection &= img
    notes = [
        "measure-level verdict transfers through the lift identities "
        "(pushforward of a lift is the lift of the image)",
    ]
    if reentry is None:
        point = min(system.image_of_set(U, n_max) - U, default=min(U))
        witness = _orbit_record(
            system, point_mass(space, point), n_max,
            lambda m: dist_to_lift(m, A), f"escape/point{point}", None,
        )
        verdict = UNSTABLE
        notes.append(f"no n <= {n_max} with f^n(U) inside U")
    elif intersection != A:
        stray = min(intersection ^ A)
        witness = _orbit_record(
            system, point_mass(space, stray), n_max,
            lambda m: dist_to_lift(m, A), f"intersection/point{stray}", None,
        )
        verdict = UNSTABLE
        notes.append("forward intersection of the neighborhood differs from the set")
    else:
        witness = None
        verdict = STABLE
        notes.append(f"f^{reentry}(U) inside U; forward intersection equals the set")
    return StabilityReport(
        notion="attractor",
        params={"set": sorted(A), "eps": eps, "n_max": n_max,
                "neighborhood": sorted(U), "reentry": reentry,
                "intersection": sorted(intersection)},
        verdict=verdict,
        witness=witness,
        records=(),
        notes=tuple(notes),
    )


def _log_linear_fit(points):
    xs = [float(n) for n, _ in points]
    ys = [math.log(v) for _, v in points]
    n = len(points)
    mean_x = sum(xs) / n
    mean_y = sum(ys) / n
    sxx = sum((x - mean_x) ** 2 for x in xs)
    if sxx == 0.0:
        return 0.0, mean_y, 1.0
    slope = sum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys)) / sxx
    intercept = mean_y - slope * mean_x
    ss_res = sum((y - (slope * x + intercept)) ** 2 for x, y in zip(xs, ys))
    ss_tot = sum((y - mean_y) ** 2 for y in ys)
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return slope, intercept, r2


def probe_exponential(system: MapSystem, A, eps: float, delta_grid, horizon: int,
                      r2_floor: float = 0.99) -> StabilityReport:
    """Fit a decay rate to the Hausdorff distance of shrinking closed
    neighborhoods; stable when every tested neighborhood decays geometrically."""
    A = frozenset(A)
    if not system.is_invariant_set(A):
        raise NotInvariant("probe target must satisfy f(A) within A")
    space = system.space
    fits = {}
    witness = None
    records = []
    stable = True
    for delta in sorted(delta_grid):
        if delta >= eps:
            continue
        U = space.neighborhood(A, delta, closed=True)
        h = []
        current = U
        for n in range(horizon + 1):
            h.append(hausdorff(space, A, current) if current != A else 0.0)
            # Identity check along the orbit: base and lifted Hausdorff agree.
            assert abs(h[-1] - (lift_hausdorff(space, A, current) if current else 0.0)) <= 1e-12
            current = system.image_of_set(current)
        record = ProbeRecord(
            label=f"delta{delta:.6g}/neighborhood",
            seed=None,
            weights=tuple((a, 1, len(U)) for a in sorted(U)),
            distances=tuple(h),
            sup_distance=max(h),
            argmax_step=h.index(max(h)),
        )
        records.append(record)
        positive = [(n, v) for n, v in enumerate(h) if n >= 1 and v > 0.0]
        if len(positive) < 2:
            fits[delta] = {"lambda": None, "C": None, "r2": None,
                           "collapsed": True}
            continue
        slope, intercept, r2 = _log_linear_fit(positive)
        lam = -slope
        h0 = h[0] if h[0] > 0 else max(h)
        C = max(v * math.exp(lam * n) / h0 for n, v in positive)
        fits[delta] = {"lambda": lam, "C": C, "r2": r2, "collapsed": False}
        if not (lam > 0.0 and r2 >= r2_floor):
            stable = False
            if witness is None:
                witness = record
    return StabilityReport(
        notion="exponential",
        params={"set": sorted(A), "eps": eps, "delta_grid": sorted(delta_grid),
                "horizon": horizon, "r2_floor": r2_floor,
                "fits": {f"{d:.12g}": v for d, v in fits.items()}},
        verdict=STABLE if stable else UNSTABLE,
        witness=witness,
        records=tuple(records),
        notes=("hausdorff distances along the orbit equal their lifted "
               "counterparts (identity checked each step)",),
    )


@dataclass(frozen=True)
class SinkSourceScenario:
    """A line of basin points draining into a sink, with a fixed source at the end."""

    system: MapSystem
    sink: int
    source: int
    d_xy: float
    delta_sink: DiscreteMeasure
    delta_source: DiscreteMeasure
    default_delta_grid: tuple
    default_eps_grid: tuple

    def mu_eps(self, eps: Fraction) -> DiscreteMeasure:
        eps = Fraction(eps)
        return make_measure(
            self.system.space, [(self.sink, 1 - eps), (self.source, eps)]
        )

    def named_probe_family(self):
        return [
            (f"mu_eps_{eps}", self.mu_eps(eps))
            for eps in (Fraction(1, 8), Fraction(1, 4))
        ]


def scenario_sink_source(n_basin: int, d_xy: float = 1.0) -> SinkSourceScenario:
    if n_basin < 1:
        raise ValueError("need at least one basin point")
    ids = ["sink"] + [f"b{k}" for k in range(1, n_basin + 1)] + ["source"]
    step = d_xy / (n_basin + 1)
    coords = [[k * step] for k in range(n_basin + 2)]
    space = build_space(ids, "euclidean", coords=coords)
    source = n_basin + 1
    mapping = [0] + list(range(0, n_basin)) + [source]
    system = MapSystem.build(space, mapping)
    return SinkSourceScenario(
        system=system,
        sink=0,
        source=source,
        d_xy=d_xy,
        delta_sink=point_mass(space, 0),
        delta_source=point_mass(space, source),
        default_delta_grid=(d_xy / 8, d_xy / 4),
        default_eps_grid=(d_xy / 8, d_xy / 4),
    )


@dataclass(frozen=True)
class TorusShearScenario:
    """N x N grid on the flat torus under the shear (x, y) -> (x + y, y)."""

    system: MapSystem
    n: int

    def atom(self, i: int, j: int) -> int:
        return (j % self.n) * self.n + (i % self.n)

    def row_atoms(self, j: int) -> list:
        return [self.atom(i, j) for i in range(self.n)]

    def uniform_row(self, j: int) -> DiscreteMeasure:
        return make_measure(
            self.system.space,
            [(a, Fraction(1, self.n)) for a in self.row_atoms(j)],
        )

    def lopsided_row(self, j: int) -> DiscreteMeasure:
        # Three quarters of the mass at one column, the rest antipodal.  A
        # uniformly loaded semicircle is too forgiving: the optimal plan splits
        # its surplus both ways around the circle and never moves mass farther
        # than 6/n.  Concentrating the imbalance forces a half-circumference
        # move at the half turn.
        half = self.n // 2
        return make_measure(
            self.system.space,
            [(self.atom(0, j), Fraction(3, 4)), (self.atom(half, j), Fraction(1, 4))],
        )

    @property
    def default_delta_grid(self):
        return (1.0 / self.n, 2.0 / self.n)


def scenario_torus_shear(n: int) -> TorusShearScenario:
    # Even n keeps the half-turn step n/2 integral, which makes the
    # instability witness land exactly on the antipodal configuration.
    if n < 4 or n % 2:
        raise ValueError("need an even grid size n >= 4")
    return _torus_scenario_cached(n)


@lru_cache(maxsize=8)
def _torus_scenario_cached(n: int) -> TorusShearScenario:
    ids = [f"x{i}y{j}" for j in range(n) for i in range(n)]
    coords = [[i / n, j / n] for j in range(n) for i in range(n)]
    space = build_space(ids, "flat-torus", coords=coords, validate=False)
    mapping = [
        (j * n) + ((i + j) % n) for j in range(n) for i in range(n)
    ]
    system = MapSystem.build(space, mapping)
    return TorusShearScenario(system=system, n=n)
