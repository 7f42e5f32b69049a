"""
Minimax approximation by sums of two ridge functions on a finite point set
"""
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from . import config
from .exceptions import (
    DimensionMismatchError,
    InterpolationError,
    InvalidPathError,
    NotRidgeFieldError,
)
from .geometry import Number, PointSet, as_array, to_number
from .paths import (
    ClosedPathCertificate,
    Path,
    StepKind,
    enumerate_closed_paths,
    is_closed_path,
    orbits,
    validate_path,
)
from .simplex import Tableau

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Target function values, one per point index"""

    values: np.ndarray

    @classmethod
    def of(cls, values: Union["ScalarField", Sequence], exact: bool = False) -> "ScalarField":
        if isinstance(values, ScalarField):
            values = values.values.tolist()
        return cls(as_array((to_number(v, exact) for v in values), exact))

    @property
    def exact(self) -> bool:
        return self.values.dtype == object

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, index: int) -> Number:
        return self.values[index]

    def tolist(self) -> List[Number]:
        return self.values.tolist()


@dataclass(frozen=True)
class RidgeSum:
    """Tabulated summands: u per a^1-fiber class, v per a^2-fiber class"""

    u: Tuple[Number, ...]
    v: Tuple[Number, ...]

    def at(self, ps: PointSet, index: int) -> Number:
        p1, p2 = ps.partitions
        return self.u[p1.class_of[index]] + self.v[p2.class_of[index]]

    def evaluate(self, ps: PointSet) -> np.ndarray:
        """u[class1(x)] + v[class2(x)] for every point"""
        p1, p2 = ps.partitions
        if len(self.u) != len(p1) or len(self.v) != len(p2):
            raise DimensionMismatchError(
                f"Ridge sum has {len(self.u)}/{len(self.v)} entries for {len(p1)}/{len(p2)} fiber classes"
            )
        u = as_array(self.u, ps.exact)
        v = as_array(self.v, ps.exact)
        return u[p1.labels_array()] + v[p2.labels_array()]


@dataclass(frozen=True)
class ApproxResult:
    error: Number
    ridge_sum: RidgeSum
    certificate: Optional[ClosedPathCertificate] = None
    iterations: int = 0
    method: str = "lp"
    history: Tuple[Number, ...] = field(default_factory=tuple)


@dataclass(frozen=True)
class VariationReport:
    """Both sides of the orbit-versus-fiber variation inequality"""

    lhs: Number
    rhs: Number
    ratio: Number
    worst_orbit: int = 0
    worst_fiber: int = 0

    def satisfies(self, c: Number, slack: float = 1e-9) -> bool:
        return self.lhs <= c * self.rhs + slack


class CrossValidation(NamedTuple):
    lp_error: Number
    alternating_error: Number
    gap: Number


class MatchRate(NamedTuple):
    """Instances whose best closed path attains the LP optimum"""

    matched: int
    total: int
    skipped: int = 0

    @property
    def rate(self) -> float:
        return self.matched / self.total if self.total else 0.0


def field_for(ps: PointSet, f: Union[ScalarField, Sequence]) -> ScalarField:
    """Coerce f to a ScalarField matching the point set's arithmetic"""
    if isinstance(f, ScalarField) and f.exact == ps.exact:
        field_ = f
    else:
        field_ = ScalarField.of(f.values.tolist() if isinstance(f, ScalarField) else f, ps.exact)
    if len(field_) != ps.n_points:
        raise DimensionMismatchError(f"Field has {len(field_)} values for {ps.n_points} points")
    return field_


def _zero(ps: PointSet) -> Number:
    return Fraction(0) if ps.exact else 0.0


def max_residual(ps: PointSet, f: ScalarField, ridge_sum: RidgeSum) -> Number:
    """sup-norm of f minus the ridge sum over the point set"""
    residual = np.abs(f.values - ridge_sum.evaluate(ps))
    worst = residual.max()
    return worst if ps.exact else float(worst)


def closed_path_functional(ps: PointSet, f: Union[ScalarField, Sequence], path: Union[Path, Sequence[int]]) -> ClosedPathCertificate:
    """
    Alternating sum of f along a closed path

    Signs start at +1 on the first point, so each summand value shared by a
    consecutive pair cancels. The functional value |sum| / m lower-bounds the
    minimax error.

    Raises:
        InvalidPathError: path is not closed
    """
    f = field_for(ps, f)
    if not isinstance(path, Path):
        path = validate_path(ps, path)
    if not is_closed_path(ps, path):
        raise InvalidPathError(f"Path {list(path.point_indices)} is not closed")
    terms = [f[i] if k % 2 == 0 else -f[i] for k, i in enumerate(path.point_indices)]
    total = sum(terms, Fraction(0)) if ps.exact else math.fsum(terms)
    return ClosedPathCertificate(path=path, alternating_sum=total, functional_value=abs(total) / len(path))


def interpolate_on_path(ps: PointSet, path: Union[Path, Sequence[int]], f: Union[ScalarField, Sequence]) -> RidgeSum:
    """
    Exact ridge-sum interpolant of f along a path

    The start fiber of a^1 gets u = 0. A PerpToA1 step keeps u and forces
    v at the next a^2-fiber; a PerpToA2 step keeps v and forces u. Fibers the
    path never meets get 0.

    Raises:
        InterpolationError: closed path with nonzero alternating sum, or a
            revisited fiber with a conflicting forced value
    """
    f = field_for(ps, f)
    if not isinstance(path, Path):
        path = validate_path(ps, path)
    if len(path) >= 2 and is_closed_path(ps, path):
        cert = closed_path_functional(ps, f, path)
        if not ps.tol.equal(cert.alternating_sum, 0):
            raise InterpolationError(
                f"Closed path has nonzero alternating sum {cert.alternating_sum}; no exact interpolant",
                alternating_sum=cert.alternating_sum,
            )

    p1, p2 = ps.partitions
    u: List[Optional[Number]] = [None] * len(p1)
    v: List[Optional[Number]] = [None] * len(p2)

    def assign(table: List[Optional[Number]], name: str, cls: int, value: Number):
        if table[cls] is None:
            table[cls] = value
        elif not ps.tol.equal(table[cls], value):
            raise InterpolationError(
                f"Path forces {name}[{cls}] to both {table[cls]} and {value}",
                alternating_sum=value - table[cls],
            )

    start = path.point_indices[0]
    assign(u, "u", p1.class_of[start], _zero(ps))
    assign(v, "v", p2.class_of[start], f[start])
    for q, kind in zip(path.point_indices[1:], path.steps):
        if kind is StepKind.PERP_TO_A1:
            assign(v, "v", p2.class_of[q], f[q] - u[p1.class_of[q]])
        else:
            assign(u, "u", p1.class_of[q], f[q] - v[p2.class_of[q]])

    zero = _zero(ps)
    return RidgeSum(
        u=tuple(zero if x is None else x for x in u),
        v=tuple(zero if x is None else x for x in v),
    )


def minimax_fit(
    ps: PointSet,
    f: Union[ScalarField, Sequence],
    certify: bool = True,
    max_closed_points: int = config.CLOSED_PATH_LENGTH_LIMIT,
    force_enumeration: bool = False,
) -> ApproxResult:
    """
    Best sup-norm approximation of f by u[class1(x)] + v[class2(x)]

    Solves min e subject to -e <= f(x) - u - v <= e with the tableau simplex.
    The first u value is pinned to 0. Free variables are split into positive
    and negative parts. The start (u, v, e) = (0, 0, max|f|) is reached with a
    single pivot of e, then Bland's rule runs to optimality.

    Args:
        ps: Point set
        f: Field values, one per point
        certify: Search closed paths for a matching lower bound on small sets
        max_closed_points: Length cap for that search
        force_enumeration: Lift the point and length limits of the closed-path search

    Returns:
        ApproxResult with the recomputed max residual as error
    """
    f = field_for(ps, f)
    p1, p2 = ps.partitions
    n_u, n_v = len(p1) - 1, len(p2)
    # columns: u+ (classes 1..), u-, v+, v-, e
    n_cols = 2 * n_u + 2 * n_v + 1
    e_col = n_cols - 1
    zero = _zero(ps)
    one = Fraction(1) if ps.exact else 1.0

    rows, rhs = [], []
    for x in range(ps.n_points):
        i, j = p1.class_of[x], p2.class_of[x]
        row = [zero] * n_cols
        if i > 0:
            row[i - 1] = one
            row[n_u + i - 1] = -one
        row[2 * n_u + j] = one
        row[2 * n_u + n_v + j] = -one
        row[e_col] = -one
        rows.append(row)
        rhs.append(f[x])
        rows.append([-a for a in row[:e_col]] + [-one])
        rhs.append(-f[x])

    cost = [zero] * n_cols
    cost[e_col] = one
    tableau = Tableau(cost, rows, rhs, exact=ps.exact)
    tableau.restore_feasibility(e_col)
    tableau.solve()

    x = tableau.solution()
    u = [zero] + [x[k] - x[n_u + k] for k in range(n_u)]
    v = [x[2 * n_u + k] - x[2 * n_u + n_v + k] for k in range(n_v)]
    if not ps.exact:
        u = [float(a) for a in u]
        v = [float(a) for a in v]
    ridge_sum = RidgeSum(u=tuple(u), v=tuple(v))
    error = max_residual(ps, f, ridge_sum)
    logger.debug(f"LP fit on {ps.n_points} points: error {error} after {tableau.pivots} pivots")

    certificate = None
    if certify:
        certificate = _best_certificate(ps, f, error, max_closed_points, force_enumeration)
    return ApproxResult(error=error, ridge_sum=ridge_sum, certificate=certificate, iterations=tableau.pivots, method="lp")


def best_closed_path(
    ps: PointSet,
    f: Union[ScalarField, Sequence],
    max_closed_points: int = config.CLOSED_PATH_LENGTH_LIMIT,
    force: bool = False,
) -> Optional[ClosedPathCertificate]:
    """
    Closed path with the largest functional value

    Without force the search is skipped above the configured point limit and
    the length cap is clamped to the configured length limit.

    Returns:
        None when no closed path was enumerated
    """
    if not force and ps.n_points > config.CLOSED_PATH_POINT_LIMIT:
        logger.debug(f"Closed-path search skipped: {ps.n_points} points exceed the enumeration limit")
        return None
    cap = max_closed_points if force else min(max_closed_points, config.CLOSED_PATH_LENGTH_LIMIT)
    cap -= cap % 2
    if cap < 4:
        return None
    best = None
    for skeleton in enumerate_closed_paths(ps, max_points=cap, force=force):
        cert = closed_path_functional(ps, f, skeleton.path)
        if best is None or cert.functional_value > best.functional_value:
            best = cert
    return best


def _best_certificate(
    ps: PointSet, f: ScalarField, error: Number, max_closed_points: int, force: bool = False
) -> Optional[ClosedPathCertificate]:
    best = best_closed_path(ps, f, max_closed_points, force)
    if best is None:
        return None
    if abs(best.functional_value - error) <= config.CERTIFICATE_TOL:
        return best
    logger.warning(
        f"No closed path with at most {max_closed_points} points matches the LP error "
        f"(best {float(best.functional_value):.6g} vs {float(error):.6g}); certificate omitted"
    )
    return None


def alternating_algorithm(
    ps: PointSet,
    f: Union[ScalarField, Sequence],
    max_rounds: int = config.ALT_MAX_ROUNDS,
    stop_tol: float = config.ALT_STOP_TOL,
) -> ApproxResult:
    """
    Diliberto-Straus style alternating centering

    Each round subtracts the per-fiber midrange (max + min) / 2 of the
    residual over every a^1-fiber into u, then over every a^2-fiber into v.
    The achieved error may stay above the true optimum.
    """
    f = field_for(ps, f)
    p1, p2 = ps.partitions
    zero = _zero(ps)
    u = [zero] * len(p1)
    v = [zero] * len(p2)
    residual = f.values.copy()

    def sup(r: np.ndarray) -> Number:
        worst = np.abs(r).max()
        return worst if ps.exact else float(worst)

    history = [sup(residual)]
    rounds = 0
    for rounds in range(1, max_rounds + 1):
        for table, partition in ((u, p1), (v, p2)):
            for k, members in enumerate(partition.classes):
                idx = list(members)
                chunk = residual[idx]
                shift = (chunk.max() + chunk.min()) / 2
                table[k] = table[k] + shift
                residual[idx] = chunk - shift
        history.append(sup(residual))
        if history[-2] - history[-1] <= stop_tol:
            break

    gauge = u[0]
    u = [a - gauge for a in u]
    v = [b + gauge for b in v]
    if not ps.exact:
        u = [float(a) for a in u]
        v = [float(b) for b in v]
    ridge_sum = RidgeSum(u=tuple(u), v=tuple(v))
    error = max_residual(ps, f, ridge_sum)
    logger.debug(f"Alternating algorithm: error {error} after {rounds} rounds")
    return ApproxResult(
        error=error, ridge_sum=ridge_sum, iterations=rounds, method="alternating", history=tuple(history)
    )


def cross_validate(ps: PointSet, f: Union[ScalarField, Sequence], **kwargs) -> CrossValidation:
    """LP optimum next to the alternating algorithm's error on the same data"""
    lp = minimax_fit(ps, f, certify=False)
    alt = alternating_algorithm(ps, f, **kwargs)
    return CrossValidation(lp_error=lp.error, alternating_error=alt.error, gap=alt.error - lp.error)


def certificate_match_rate(
    instances: Iterable[Tuple[PointSet, Union[ScalarField, Sequence]]],
    max_closed_points: int = config.CLOSED_PATH_LENGTH_LIMIT,
    tol: float = config.CERTIFICATE_TOL,
) -> MatchRate:
    """
    Empirical rate at which closed paths certify the LP optimum

    A set without closed paths has best value 0. Sets above the enumeration
    limit are skipped.
    """
    matched = total = skipped = 0
    for ps, f in instances:
        if ps.n_points > config.CLOSED_PATH_POINT_LIMIT:
            skipped += 1
            continue
        error = minimax_fit(ps, f, certify=False).error
        best = best_closed_path(ps, f, max_closed_points)
        value = best.functional_value if best is not None else _zero(ps)
        total += 1
        if abs(value - error) <= tol:
            matched += 1
    result = MatchRate(matched=matched, total=total, skipped=skipped)
    logger.info(
        f"Closed-path certificates matched the LP optimum on {matched}/{total} instances "
        f"({result.rate:.1%}, {skipped} skipped)"
    )
    return result


def variation(f: Union[ScalarField, Sequence], subset) -> Number:
    """max - min of f over the index subset"""
    values = f.values if isinstance(f, ScalarField) else list(f)
    idx = sorted(set(subset))
    if not idx:
        raise ValueError("Variation over an empty subset")
    chosen = [values[i] for i in idx]
    return max(chosen) - min(chosen)


def check_ridge_field(ps: PointSet, f: ScalarField):
    """
    Raises:
        NotRidgeFieldError: f varies within some a^1-fiber beyond tolerance
    """
    for k, members in enumerate(ps.partition(1).classes):
        chosen = [f[i] for i in members]
        if not ps.tol.equal(max(chosen), min(chosen)):
            raise NotRidgeFieldError(
                f"Field varies by {max(chosen) - min(chosen)} on a^1-fiber {k} (points {list(members)})"
            )


def variation_inequality_report(ps: PointSet, f: Union[ScalarField, Sequence]) -> VariationReport:
    """
    Largest variation over an orbit against the largest over an a^2-fiber

    The ratio is 0 when both sides vanish and infinite when only the right
    side does.
    """
    f = field_for(ps, f)
    check_ridge_field(ps, f)
    orbit_vars = [variation(f, orbit) for orbit in orbits(ps).classes]
    fiber_vars = [variation(f, fiber) for fiber in ps.partition(2).classes]
    worst_orbit = max(range(len(orbit_vars)), key=lambda k: (orbit_vars[k], -k))
    worst_fiber = max(range(len(fiber_vars)), key=lambda k: (fiber_vars[k], -k))
    lhs, rhs = orbit_vars[worst_orbit], fiber_vars[worst_fiber]
    if rhs == 0:
        ratio = _zero(ps) if lhs == 0 else math.inf
    else:
        ratio = lhs / rhs
    return VariationReport(lhs=lhs, rhs=rhs, ratio=ratio, worst_orbit=worst_orbit, worst_fiber=worst_fiber)
