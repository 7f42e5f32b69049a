"""
Directions, projections and fiber partitions of finite point sets
"""
import logging
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property
from typing import FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from . import config
from .exceptions import DimensionMismatchError, InvalidDirectionError, InvalidPointSetError

logger = logging.getLogger(__name__)

Number = Union[float, Fraction]

# Rows compared at once by the duplicate-point scan
_DUPLICATE_BLOCK = 256


def to_number(value, exact: bool = False) -> Number:
    """
    Coerce a scalar to the working number type

    Args:
        value: int, float, Fraction or a string such as "3/4" or "1.75"
        exact: Return a Fraction instead of a float

    Returns:
        Fraction in exact mode, float otherwise
    """
    if isinstance(value, bool):
        raise TypeError(f"Boolean is not a coordinate: {value!r}")
    if exact:
        if isinstance(value, Fraction):
            return value
        if isinstance(value, float):
            # repr keeps the decimal the user wrote (0.1 -> 1/10); float() unwraps numpy scalars
            return Fraction(repr(float(value)))
        if isinstance(value, str):
            return Fraction(value.strip())
        return Fraction(value)
    if isinstance(value, str):
        return float(Fraction(value.strip()))
    return float(value)


def as_array(values: Iterable[Number], exact: bool) -> np.ndarray:
    """Pack numbers into a float array, or an object array of Fractions in exact mode"""
    return np.array(list(values), dtype=object if exact else float)


@dataclass(frozen=True)
class Direction:
    """A nonzero vector a defining the linear functional x -> a·x"""

    coords: Tuple[Number, ...]

    def __post_init__(self):
        coords = tuple(self.coords)
        if any(isinstance(c, Fraction) for c in coords):
            coords = tuple(Fraction(c) if not isinstance(c, float) else Fraction(repr(float(c))) for c in coords)
        else:
            coords = tuple(float(c) for c in coords)
        object.__setattr__(self, "coords", coords)
        if not coords or all(c == 0 for c in coords):
            raise InvalidDirectionError(f"Direction must be a nonzero vector, got {coords}")

    @classmethod
    def of(cls, values: Union["Direction", Sequence], exact: bool = False) -> "Direction":
        if isinstance(values, Direction):
            values = values.coords
        return cls(tuple(to_number(v, exact) for v in values))

    @property
    def exact(self) -> bool:
        return isinstance(self.coords[0], Fraction)

    def __len__(self) -> int:
        return len(self.coords)

    def __iter__(self):
        return iter(self.coords)

    def as_array(self) -> np.ndarray:
        return as_array(self.coords, self.exact)


@dataclass(frozen=True)
class ToleranceParams:
    """
    Scalar equality predicate

    s and t are equal iff |s - t| <= abs_tol + rel_tol * max(|s|, |t|).
    In exact mode equality is plain ==.
    """

    abs_tol: float = config.DEFAULT_ABS_TOL
    rel_tol: float = config.DEFAULT_REL_TOL
    exact: bool = False

    def __post_init__(self):
        if self.abs_tol < 0 or self.rel_tol < 0:
            raise ValueError(f"Tolerances must be non-negative, got abs={self.abs_tol} rel={self.rel_tol}")

    def slack(self, s: Number, t: Number) -> Number:
        if self.exact:
            return 0
        return self.abs_tol + self.rel_tol * max(abs(s), abs(t))

    def equal(self, s: Number, t: Number) -> bool:
        if self.exact:
            return s == t
        return abs(s - t) <= self.slack(s, t)


def project(d: Direction, x: Sequence[Number]) -> Number:
    """
    Inner product a·x

    Raises:
        DimensionMismatchError: len(d) != len(x)
    """
    coords = tuple(x)
    if len(coords) != len(d):
        raise DimensionMismatchError(f"Direction has {len(d)} coordinates, point has {len(coords)}")
    terms = [a * b for a, b in zip(d.coords, coords)]
    if any(isinstance(t, Fraction) for t in terms) and not any(isinstance(t, float) for t in terms):
        return sum(terms, Fraction(0))
    return math.fsum(terms)


def directions_independent(dir1: Direction, dir2: Direction, exact: bool = False) -> bool:
    """Rank-2 test of the 2 x n matrix [dir1; dir2]"""
    if len(dir1) != len(dir2):
        raise DimensionMismatchError(f"Directions have {len(dir1)} and {len(dir2)} coordinates")
    if exact:
        a = [Fraction(c) for c in dir1.coords]
        b = [Fraction(c) for c in dir2.coords]
        n = len(a)
        return any(a[i] * b[j] - a[j] * b[i] != 0 for i in range(n) for j in range(i + 1, n))
    m = np.vstack([np.asarray(dir1.coords, dtype=float), np.asarray(dir2.coords, dtype=float)])
    m = m / np.linalg.norm(m, axis=1, keepdims=True)
    return int(np.linalg.matrix_rank(m, tol=config.RANK_TOL)) == 2


@dataclass(frozen=True)
class FiberPartition:
    """Partition of point indices by equal projection under one direction"""

    direction_index: int
    classes: Tuple[Tuple[int, ...], ...]
    class_value: Tuple[Number, ...]
    class_of: Tuple[int, ...]
    spread: Tuple[Number, ...]

    def __len__(self) -> int:
        return len(self.classes)

    def members_of(self, point_index: int) -> Tuple[int, ...]:
        return self.classes[self.class_of[point_index]]

    def as_sets(self) -> FrozenSet[FrozenSet[int]]:
        return frozenset(frozenset(c) for c in self.classes)

    def labels_array(self) -> np.ndarray:
        return np.asarray(self.class_of, dtype=int)

    def merged_classes(self) -> List[int]:
        """Class ids whose members have distinct (tolerance-merged) projection values"""
        return [k for k, s in enumerate(self.spread) if s != 0]


@dataclass(frozen=True, eq=False)
class PointSet:
    """Finite labeled point set X with the direction pair a^1, a^2 and its tolerance predicate"""

    points: np.ndarray
    dir1: Direction
    dir2: Direction
    tol: ToleranceParams = field(default_factory=ToleranceParams)
    labels: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        if self.points.ndim != 2 or self.points.shape[0] == 0:
            raise InvalidPointSetError("Point set must contain at least one point")
        n = self.points.shape[1]
        if n == 0:
            raise InvalidPointSetError("Points must have at least one coordinate")
        for name, d in (("dir1", self.dir1), ("dir2", self.dir2)):
            if len(d) != n:
                raise DimensionMismatchError(f"{name} has {len(d)} coordinates, points have {n}")
        if self.labels is not None and len(self.labels) != self.points.shape[0]:
            raise InvalidPointSetError(
                f"Got {len(self.labels)} labels for {self.points.shape[0]} points"
            )
        if not directions_independent(self.dir1, self.dir2, self.tol.exact):
            raise InvalidDirectionError(
                f"Directions {self.dir1.coords} and {self.dir2.coords} are linearly dependent"
            )
        duplicate = _find_duplicate(self.points, self.tol)
        if duplicate is not None:
            i, j = duplicate
            raise InvalidPointSetError(f"Points {i} and {j} coincide under the tolerance predicate")
        self.points.setflags(write=False)

    @classmethod
    def from_coordinates(
        cls,
        points: Sequence[Sequence],
        dir1: Union[Direction, Sequence],
        dir2: Union[Direction, Sequence],
        labels: Optional[Sequence[str]] = None,
        tol: Optional[ToleranceParams] = None,
        exact: bool = False,
    ) -> "PointSet":
        """
        Build a validated PointSet from plain rows

        Args:
            points: Rows of coordinates (numbers or "p/q" strings)
            dir1, dir2: The directions a^1 and a^2
            labels: Optional per-point identifiers
            tol: Equality predicate (default: configured tolerances)
            exact: Use Fractions and exact comparisons
        """
        exact = exact or (tol is not None and tol.exact)
        rows = [[to_number(v, exact) for v in row] for row in points]
        if not rows:
            raise InvalidPointSetError("Point set must contain at least one point")
        widths = {len(r) for r in rows}
        if len(widths) != 1:
            raise InvalidPointSetError(f"Rows have differing dimensions: {sorted(widths)}")
        arr = np.empty((len(rows), widths.pop()), dtype=object if exact else float)
        for i, row in enumerate(rows):
            arr[i, :] = row
        if tol is None:
            tol = ToleranceParams(exact=exact)
        elif exact and not tol.exact:
            tol = replace(tol, exact=True)
        return cls(
            points=arr,
            dir1=Direction.of(dir1, exact),
            dir2=Direction.of(dir2, exact),
            tol=tol,
            labels=tuple(str(s) for s in labels) if labels is not None else None,
        )

    @property
    def n_points(self) -> int:
        return int(self.points.shape[0])

    @property
    def dim(self) -> int:
        return int(self.points.shape[1])

    @property
    def exact(self) -> bool:
        return self.tol.exact

    def __len__(self) -> int:
        return self.n_points

    def direction(self, which: int) -> Direction:
        if which == 1:
            return self.dir1
        if which == 2:
            return self.dir2
        raise ValueError(f"Direction index must be 1 or 2, got {which}")

    def point(self, index: int) -> Tuple[Number, ...]:
        return tuple(self.points[index].tolist())

    def label(self, index: int) -> str:
        return self.labels[index] if self.labels is not None else str(index)

    @cached_property
    def _projections(self) -> Tuple[np.ndarray, np.ndarray]:
        return (self.points @ self.dir1.as_array(), self.points @ self.dir2.as_array())

    def projections(self, which: int) -> np.ndarray:
        """Projection values a^which·x for every point"""
        self.direction(which)
        return self._projections[which - 1]

    @cached_property
    def partitions(self) -> Tuple["FiberPartition", "FiberPartition"]:
        return (fibers(self, 1), fibers(self, 2))

    def partition(self, which: int) -> FiberPartition:
        self.direction(which)
        return self.partitions[which - 1]

    def subset(self, indices: Sequence[int]) -> "PointSet":
        """Restriction to the given point indices, in the given order"""
        idx = list(indices)
        return PointSet(
            points=np.array(self.points[idx], dtype=self.points.dtype),
            dir1=self.dir1,
            dir2=self.dir2,
            tol=self.tol,
            labels=tuple(self.labels[i] for i in idx) if self.labels is not None else None,
        )


def _find_duplicate(points: np.ndarray, tol: ToleranceParams) -> Optional[Tuple[int, int]]:
    if tol.exact or points.dtype == object:
        seen = {}
        for i, row in enumerate(points.tolist()):
            key = tuple(row)
            if key in seen:
                return seen[key], i
            seen[key] = i
        return None
    mags = np.abs(points)
    n = points.shape[0]
    for start in range(0, n, _DUPLICATE_BLOCK):
        block = points[start:start + _DUPLICATE_BLOCK]
        diff = np.abs(block[:, None, :] - points[None, :, :])
        slack = tol.abs_tol + tol.rel_tol * np.maximum(mags[start:start + _DUPLICATE_BLOCK][:, None, :], mags[None, :, :])
        same = np.all(diff <= slack, axis=2)
        rows, cols = np.nonzero(same)
        for r, c in zip(rows.tolist(), cols.tolist()):
            if c > start + r:
                return start + r, c
    return None


def fibers(ps: PointSet, which: int) -> FiberPartition:
    """
    Partition point indices by equal projection under direction `which`

    Projection values are sorted and split wherever two consecutive values are
    not equal under the tolerance predicate, so the result is an equivalence
    even though pairwise tolerance is not transitive.
    """
    values = ps.projections(which)
    order = sorted(range(ps.n_points), key=lambda i: (values[i], i))

    groups: List[List[int]] = [[order[0]]]
    for prev, cur in zip(order, order[1:]):
        if ps.tol.equal(values[prev], values[cur]):
            groups[-1].append(cur)
        else:
            groups.append([cur])

    class_of = [0] * ps.n_points
    classes = []
    class_value = []
    spread = []
    for k, group in enumerate(groups):
        for i in group:
            class_of[i] = k
        member_values = [values[i] for i in group]
        if ps.exact:
            class_value.append(sum(member_values, Fraction(0)) / len(group))
        else:
            class_value.append(math.fsum(member_values) / len(group))
        spread.append(values[group[-1]] - values[group[0]])
        classes.append(tuple(sorted(group)))

    partition = FiberPartition(
        direction_index=which,
        classes=tuple(classes),
        class_value=tuple(class_value),
        class_of=tuple(class_of),
        spread=tuple(spread),
    )
    merged = partition.merged_classes()
    if merged and not ps.exact:
        logger.debug(f"Direction {which}: {len(merged)} fiber classes merge distinct projection values")
    return partition


def complete_basis(ps: PointSet) -> List[Direction]:
    """
    Complete a^1, a^2 to a basis of R^n

    The added n - 2 vectors span the orthogonal complement of span(a^1, a^2),
    obtained by orthogonalizing the standard basis vectors.
    """
    return complete_directions(ps.dir1, ps.dir2, ps.dim, exact=ps.exact)


def complete_directions(dir1: Direction, dir2: Direction, n: int, exact: bool = False) -> List[Direction]:
    if len(dir1) != n or len(dir2) != n:
        raise DimensionMismatchError(f"Directions must have {n} coordinates")
    if not directions_independent(dir1, dir2, exact):
        raise InvalidDirectionError(f"Directions {dir1.coords} and {dir2.coords} are linearly dependent")

    if exact:
        ortho = []
        for vec in (dir1.coords, dir2.coords):
            ortho.append(_residual_exact([Fraction(c) for c in vec], ortho))
        added = []
        for k in range(n):
            if len(ortho) == n:
                break
            e = [Fraction(int(i == k)) for i in range(n)]
            r = _residual_exact(e, ortho)
            if any(c != 0 for c in r):
                ortho.append(r)
                added.append(Direction(tuple(r)))
    else:
        ortho = []
        for vec in (dir1.coords, dir2.coords):
            r = _residual_float(np.asarray(vec, dtype=float), ortho)
            ortho.append(r / np.linalg.norm(r))
        added = []
        for k in range(n):
            if len(ortho) == n:
                break
            r = _residual_float(np.eye(n)[k], ortho)
            norm = np.linalg.norm(r)
            if norm > config.BASIS_DROP_TOL:
                r = r / norm
                r[np.abs(r) < config.BASIS_DROP_TOL] = 0.0
                ortho.append(r)
                added.append(Direction(tuple(r.tolist())))

    basis = [dir1, dir2] + added
    m = np.array([np.asarray(b.coords, dtype=float) for b in basis])
    m = m / np.linalg.norm(m, axis=1, keepdims=True)
    det = float(np.linalg.det(m))
    if len(basis) != n or abs(det) <= config.DET_TOL:
        raise InvalidDirectionError(f"Basis completion is degenerate (|det| = {abs(det):.3e})")
    logger.debug(f"Completed basis with {len(added)} vectors, |det| = {abs(det):.6f}")
    return basis


def _residual_exact(vec: List[Fraction], ortho: List[List[Fraction]]) -> List[Fraction]:
    r = list(vec)
    for q in ortho:
        qq = sum((a * a for a in q), Fraction(0))
        coef = sum((a * b for a, b in zip(r, q)), Fraction(0)) / qq
        r = [a - coef * b for a, b in zip(r, q)]
    return r


def _residual_float(vec: np.ndarray, ortho: List[np.ndarray]) -> np.ndarray:
    r = np.array(vec, dtype=float)
    # two passes keep the residual orthogonal in floating point
    for _ in range(2):
        for q in ortho:
            r = r - np.dot(r, q) * q
    return r


def ridge_coordinates(ps: PointSet, basis: Sequence[Direction]) -> np.ndarray:
    """
    Coordinates x -> (a^1·x, ..., a^k·x) for every point

    Returns:
        Array of shape (n_points, len(basis))
    """
    for i, b in enumerate(basis):
        if len(b) != ps.dim:
            raise DimensionMismatchError(f"Basis vector {i} has {len(b)} coordinates, points have {ps.dim}")
    if not basis:
        return np.zeros((ps.n_points, 0), dtype=ps.points.dtype)
    columns = [ps.points @ Direction.of(b, ps.exact).as_array() for b in basis]
    return np.column_stack(columns)
