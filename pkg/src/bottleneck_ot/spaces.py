"""Finite metric spaces: validated distance matrices, neighborhoods, Hausdorff distance.

A space is a fixed list of labeled points together with an exact symmetric
distance matrix.  All other modules reference points by their integer index
into ``point_ids``; labels only matter at the file-format boundary.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import EmptySet, MetricViolation, UnknownAtom

# Relative slack for the triangle-inequality check: Euclidean matrices satisfy
# the triangle inequality in exact arithmetic but float rounding can overshoot
# by a few ulps.
_TRIANGLE_SLACK = 1e-9

METRIC_RULES = ("euclidean", "flat-torus", "explicit-matrix")


@dataclass(frozen=True)
class FiniteMetricSpace:
    """Labeled points with an n-by-n distance matrix.

    Instances are immutable; any operation may share one across threads.
    """

    point_ids: tuple
    dist: tuple  # tuple of tuples of float
    metric_rule: str = "explicit-matrix"
    coords: tuple | None = None
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(
            self, "_index", {pid: i for i, pid in enumerate(self.point_ids)}
        )

    @property
    def n_points(self) -> int:
        return len(self.point_ids)

    def index_of(self, point_id) -> int:
        try:
            return self._index[point_id]
        except KeyError:
            raise UnknownAtom(f"unknown point id {point_id!r}") from None

    def d(self, i: int, j: int) -> float:
        return self.dist[i][j]

    def check_atom(self, i: int) -> int:
        if not isinstance(i, int) or not 0 <= i < self.n_points:
            raise UnknownAtom(f"atom index {i!r} outside space of {self.n_points} points")
        return i

    def diameter(self) -> float:
        n = self.n_points
        return max((self.dist[i][j] for i in range(n) for j in range(i + 1, n)), default=0.0)

    def min_positive_gap(self) -> float:
        """Smallest nonzero pairwise distance; the resolution of the space."""
        n = self.n_points
        gaps = [self.dist[i][j] for i in range(n) for j in range(i + 1, n)]
        return min(gaps) if gaps else 0.0

    def set_distance(self, i: int, atoms: Iterable[int]) -> float:
        """d(x, A) = min over a in A of d(x, a)."""
        atoms = list(atoms)
        if not atoms:
            raise EmptySet("set distance to an empty set")
        return min(self.dist[i][a] for a in atoms)

    def neighborhood(self, atoms: Iterable[int], eps: float, closed: bool = False) -> frozenset:
        """Points within distance eps of the set (strict by default, per the open
        epsilon-neighborhood convention)."""
        atoms = frozenset(atoms)
        if not atoms:
            raise EmptySet("neighborhood of an empty set")
        if closed:
            return frozenset(
                x for x in range(self.n_points)
                if min(self.dist[x][a] for a in atoms) <= eps
            )
        return frozenset(
            x for x in range(self.n_points)
            if min(self.dist[x][a] for a in atoms) < eps
        )

    def distance_csv(self) -> str:
        """Distance matrix as CSV with a label header row/column."""
        buf = io.StringIO()
        buf.write("," + ",".join(str(p) for p in self.point_ids) + "\n")
        for i, pid in enumerate(self.point_ids):
            row = ",".join(f"{self.dist[i][j]:.12g}" for j in range(self.n_points))
            buf.write(f"{pid},{row}\n")
        return buf.getvalue()


def _euclidean(a: Sequence[float], b: Sequence[float]) -> float:
    return math.sqrt(math.fsum((x - y) ** 2 for x, y in zip(a, b)))


def _flat_torus(a: Sequence[float], b: Sequence[float]) -> float:
    # Coordinate-wise wraparound (period 1) before the Euclidean norm.
    acc = []
    for x, y in zip(a, b):
        t = abs(x - y) % 1.0
        acc.append(min(t, 1.0 - t) ** 2)
    return math.sqrt(math.fsum(acc))


def _validate_matrix(dist, n: int) -> None:
    for i in range(n):
        if dist[i][i] != 0.0:
            raise MetricViolation(f"nonzero diagonal at {i}")
        for j in range(n):
            if dist[i][j] != dist[j][i]:
                raise MetricViolation(f"asymmetry at ({i}, {j})")
            if i != j and not dist[i][j] > 0.0:
                raise MetricViolation(f"non-positive off-diagonal at ({i}, {j})")
    scale = max(max(row) for row in dist) if n else 0.0
    tol = _TRIANGLE_SLACK * max(scale, 1.0)
    for i in range(n):
        for j in range(n):
            for k in range(n):
                if dist[i][k] > dist[i][j] + dist[j][k] + tol:
                    raise MetricViolation(
                        f"triangle failure: d({i},{k}) > d({i},{j}) + d({j},{k})"
                    )


def build_space(points, metric_rule: str = "euclidean", *, coords=None, matrix=None,
                validate: bool = True) -> FiniteMetricSpace:
    """Build a validated space from coordinates or an explicit matrix.

    ``points`` is a sequence of distinct hashable labels.  For the coordinate
    rules, ``coords`` gives one real vector per point; ``flat-torus`` wraps
    each coordinate modulo 1 before taking the Euclidean norm.
    """
    points = tuple(points)
    if not points:
        raise MetricViolation("a space needs at least one point")
    if len(set(points)) != len(points):
        raise MetricViolation("duplicate point labels")
    if metric_rule not in METRIC_RULES:
        raise MetricViolation(f"unknown metric rule {metric_rule!r}")
    n = len(points)

    if metric_rule == "explicit-matrix":
        if matrix is None:
            raise MetricViolation("explicit-matrix rule requires a matrix")
        dist = tuple(tuple(float(v) for v in row) for row in matrix)
        if len(dist) != n or any(len(row) != n for row in dist):
            raise MetricViolation("matrix shape does not match the point count")
        kept_coords = None
    else:
        if coords is None:
            raise MetricViolation(f"{metric_rule} rule requires coordinates")
        kept_coords = tuple(tuple(float(c) for c in vec) for vec in coords)
        if len(kept_coords) != n:
            raise MetricViolation("coordinate count does not match the point count")
        fn = _euclidean if metric_rule == "euclidean" else _flat_torus
        dist = tuple(
            tuple(fn(kept_coords[i], kept_coords[j]) for j in range(n)) for i in range(n)
        )

    if validate:
        _validate_matrix(dist, n)
    return FiniteMetricSpace(points, dist, metric_rule, kept_coords)


def same_space(a: FiniteMetricSpace, b: FiniteMetricSpace) -> bool:
    return a is b or (a.point_ids == b.point_ids and a.dist == b.dist)


def directed_distance(space: FiniteMetricSpace, A: Iterable[int], B: Iterable[int]) -> float:
    """d(A, B) = sup over x in A of d(x, B)."""
    A, B = list(A), list(B)
    if not A or not B:
        raise EmptySet("directed distance of an empty set")
    return max(space.set_distance(a, B) for a in A)


def hausdorff(space: FiniteMetricSpace, A: Iterable[int], B: Iterable[int]) -> float:
    """d_H(A, B) = max of the two directed sup-inf distances."""
    A, B = list(A), list(B)
    return max(directed_distance(space, A, B), directed_distance(space, B, A))
