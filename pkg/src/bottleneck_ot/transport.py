"""Exact bottleneck (infinity-Wasserstein) transport plus W1/W2 comparison solvers.

The bottleneck value between finitely supported probability measures is the
smallest threshold t, among the pairwise support distances, at which a coupling
confined to pairs within distance t exists.  Feasibility is an exact max-flow
question with rational capacities, so the returned value is always a verbatim
entry of the distance matrix (or 0) and never a rounded quantity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import NotProbability, SpaceMismatch, TooLarge, UnsupportedP
from .flows import max_flow, min_cost_max_flow
from .measures import ZERO, DiscreteMeasure
from .spaces import same_space


@dataclass(frozen=True)
class TransportPlan:
    """Sparse coupling between two measures with exact marginals."""

    mu: DiscreteMeasure
    nu: DiscreteMeasure
    entries: tuple  # ((source atom, target atom, Fraction mass), ...)

    def __post_init__(self):
        rows: dict[int, Fraction] = {}
        cols: dict[int, Fraction] = {}
        for i, j, mass in self.entries:
            if mass <= 0:
                raise ValueError("plan entries must carry positive mass")
            rows[i] = rows.get(i, ZERO) + mass
            cols[j] = cols.get(j, ZERO) + mass
        if rows != dict(self.mu.weights) or cols != dict(self.nu.weights):
            raise ValueError("plan marginals do not match the measures")

    def bottleneck(self) -> float:
        space = self.mu.space
        return max((space.d(i, j) for i, j, _ in self.entries), default=0.0)

    def cost(self, p: int) -> float:
        """(sum of d^p * mass)^(1/p), masses exact, costs compensated floats."""
        space = self.mu.space
        total = math.fsum(
            space.d(i, j) ** p * float(mass) for i, j, mass in self.entries
        )
        return total ** (1.0 / p)


@dataclass(frozen=True)
class SolveReport:
    value: float
    plan: TransportPlan
    thresholds_tested: int
    feasibility_calls: int


def bottleneck_of_plan(plan: TransportPlan) -> float:
    """Max distance over positive-mass entries (the plan's essential sup)."""
    return plan.bottleneck()


def _require_comparable(mu: DiscreteMeasure, nu: DiscreteMeasure, probability: bool = True):
    if not same_space(mu.space, nu.space):
        raise SpaceMismatch("measures live on different spaces")
    if probability and not (mu.is_probability and nu.is_probability):
        raise NotProbability(
            f"need probability measures, got masses {mu.total_mass} and {nu.total_mass}"
        )


def _flow_at_threshold(mu: DiscreteMeasure, nu: DiscreteMeasure, t: float):
    """Exact max flow on the bipartite graph of pairs with d <= t."""
    space = mu.space
    sources = sorted(mu.weights)
    targets = sorted(nu.weights)
    s_pos = {a: 1 + k for k, a in enumerate(sources)}
    t_pos = {b: 1 + len(sources) + k for k, b in enumerate(targets)}
    sink = 1 + len(sources) + len(targets)
    edges = []
    for a in sources:
        edges.append((0, s_pos[a], mu.weights[a]))
    admissible = []
    for a in sources:
        for b in targets:
            if space.d(a, b) <= t:
                admissible.append((a, b))
                edges.append((s_pos[a], t_pos[b], mu.total_mass))
    for b in targets:
        edges.append((t_pos[b], sink, nu.weights[b]))
    value, flows = max_flow(sink + 1, edges, 0, sink)
    plan_entries = []
    offset = len(sources)
    for k, (a, b) in enumerate(admissible):
        f = flows.get(offset + k)
        if f:
            plan_entries.append((a, b, f))
    return value, tuple(sorted(plan_entries))


def feasible_at_threshold(mu: DiscreteMeasure, nu: DiscreteMeasure, t: float) -> bool:
    """True iff a coupling supported on pairs with d(i, j) <= t exists."""
    _require_comparable(mu, nu)
    value, _ = _flow_at_threshold(mu, nu, t)
    return value == mu.total_mass


def candidate_thresholds(mu: DiscreteMeasure, nu: DiscreteMeasure) -> list[float]:
    """Sorted distinct pairwise distances between the two supports, plus 0."""
    space = mu.space
    values = {0.0}
    for a in mu.weights:
        for b in nu.weights:
            values.add(space.d(a, b))
    return sorted(values)


def w_infinity(mu: DiscreteMeasure, nu: DiscreteMeasure) -> SolveReport:
    """Bottleneck transport value with an optimal plan as witness.

    Binary search over the sorted distinct distances: feasibility is monotone
    in the threshold and the optimum is attained at a matrix entry.
    """
    _require_comparable(mu, nu)
    thresholds = candidate_thresholds(mu, nu)
    lo, hi = 0, len(thresholds) - 1
    calls = 0
    plans: dict[int, tuple] = {}
    # The largest threshold admits the full bipartite graph and is always
    # feasible for probability measures, so the search space is never empty.
    while lo < hi:
        mid = (lo + hi) // 2
        value, plan_entries = _flow_at_threshold(mu, nu, thresholds[mid])
        calls += 1
        if value == mu.total_mass:
            hi = mid
            plans[mid] = plan_entries
        else:
            lo = mid + 1
    if lo not in plans:
        value, plans[lo] = _flow_at_threshold(mu, nu, thresholds[lo])
        calls += 1
        assert value == mu.total_mass
    plan = TransportPlan(mu, nu, plans[lo])
    return SolveReport(
        value=thresholds[lo],
        plan=plan,
        thresholds_tested=len(thresholds),
        feasibility_calls=calls,
    )


def w_infinity_bruteforce(mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
    """Independent oracle: smallest t with mu(S) <= nu(N_t(S)) for every S.

    For each subset S of supp(mu) the minimal adequate threshold is found by
    scanning targets in distance order; the answer is the max over subsets.
    This never touches the flow code.
    """
    _require_comparable(mu, nu)
    space = mu.space
    sources = sorted(mu.weights)
    targets = sorted(nu.weights)
    if len(sources) * len(targets) > 36:
        raise TooLarge("bruteforce oracle capped at |supp mu| * |supp nu| <= 36")
    answer = 0.0
    for mask in range(1, 1 << len(sources)):
        subset = [sources[k] for k in range(len(sources)) if mask >> k & 1]
        need = sum((mu.weights[a] for a in subset), start=ZERO)
        reach = sorted(
            (min(space.d(a, b) for a in subset), b) for b in targets
        )
        got = ZERO
        for dist_to_subset, b in reach:
            got += nu.weights[b]
            if got >= need:
                answer = max(answer, dist_to_subset)
                break
        else:
            raise AssertionError("probability measures always cover at max distance")
    return answer


def _wp_min_cost_flow(mu: DiscreteMeasure, nu: DiscreteMeasure, p: int):
    space = mu.space
    sources = sorted(mu.weights)
    targets = sorted(nu.weights)
    s_pos = {a: 1 + k for k, a in enumerate(sources)}
    t_pos = {b: 1 + len(sources) + k for k, b in enumerate(targets)}
    sink = 1 + len(sources) + len(targets)
    edges = []
    for a in sources:
        edges.append((0, s_pos[a], mu.weights[a], 0.0))
    pairs = []
    for a in sources:
        for b in targets:
            pairs.append((a, b))
            edges.append((s_pos[a], t_pos[b], mu.total_mass, space.d(a, b) ** p))
    for b in targets:
        edges.append((t_pos[b], sink, nu.weights[b], 0.0))
    value, cost, flows = min_cost_max_flow(sink + 1, edges, 0, sink)
    assert value == mu.total_mass
    offset = len(sources)
    entries = tuple(
        sorted(
            (a, b, flows[offset + k])
            for k, (a, b) in enumerate(pairs)
            if flows.get(offset + k)
        )
    )
    return cost, TransportPlan(mu, nu, entries)


def w_p_enumerate(mu: DiscreteMeasure, nu: DiscreteMeasure, p: int) -> float:
    """Exhaustive minimum over the transport polytope's vertices (<= 6x6 supports).

    Every vertex arises from some greedy saturation order (pick a cell, route
    min(row, column) mass, drop the exhausted side), so a memoized recursion
    over residual states covers the whole vertex set.
    """
    if p not in (1, 2):
        raise UnsupportedP(f"p must be 1 or 2, got {p}")
    _require_comparable(mu, nu)
    if len(mu.weights) > 6 or len(nu.weights) > 6:
        raise TooLarge("vertex enumeration capped at 6x6 supports")
    space = mu.space
    costs = {
        (a, b): space.d(a, b) ** p for a in mu.weights for b in nu.weights
    }

    @lru_cache(maxsize=None)
    def best(rows, cols) -> float:
        if not rows:
            return 0.0
        out = math.inf
        for ri, (a, ra) in enumerate(rows):
            for ci, (b, rb) in enumerate(cols):
                moved = min(ra, rb)
                if ra <= rb:
                    nrows = rows[:ri] + rows[ri + 1:]
                    left = rb - ra
                    ncols = (
                        cols[:ci] + ((b, left),) + cols[ci + 1:]
                        if left else cols[:ci] + cols[ci + 1:]
                    )
                else:
                    ncols = cols[:ci] + cols[ci + 1:]
                    nrows = rows[:ri] + ((a, ra - rb),) + rows[ri + 1:]
                out = min(out, costs[(a, b)] * float(moved) + best(nrows, ncols))
        return out

    rows = tuple(sorted(mu.weights.items()))
    cols = tuple(sorted(nu.weights.items()))
    return best(rows, cols) ** (1.0 / p)


def w_p(mu: DiscreteMeasure, nu: DiscreteMeasure, p: int, method: str = "flow") -> float:
    """p-Wasserstein distance for p in {1, 2}: exact masses, float costs.

    The min-cost flow handles every support size; ``method="enumerate"``
    routes small instances through the polytope-vertex oracle instead.
    """
    if p not in (1, 2):
        raise UnsupportedP(f"p must be 1 or 2, got {p}")
    _require_comparable(mu, nu)
    if method == "enumerate":
        return w_p_enumerate(mu, nu, p)
    if method != "flow":
        raise ValueError(f"unknown method {method!r}")
    cost, _ = _wp_min_cost_flow(mu, nu, p)
    return cost ** (1.0 / p)


def w_p_plan(mu: DiscreteMeasure, nu: DiscreteMeasure, p: int):
    """Like ``w_p`` but also returns the optimal plan found by the flow."""
    if p not in (1, 2):
        raise UnsupportedP(f"p must be 1 or 2, got {p}")
    _require_comparable(mu, nu)
    cost, plan = _wp_min_cost_flow(mu, nu, p)
    return cost ** (1.0 / p), plan
