"""
Concrete constructions: the divergent telescoping path, the l_k / g_k square
family and the three sampled solids, each with a self-check
"""
import bisect
import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from . import config
from .approx import ScalarField, VariationReport, interpolate_on_path, minimax_fit, variation_inequality_report
from .criteria import Theorem21Report, check_theorem_2_1
from .exceptions import InvalidPathError, ReproductionError
from .geometry import Number, PointSet, ToleranceParams
from .paths import StepKind, validate_path

logger = logging.getLogger(__name__)

SECTION1_DIRECTIONS = ((1, -1), (1, 1))
SQUARE_DIRECTIONS = ((1, 1), (1, Fraction(1, 2)))
EXAMPLE_DIRECTIONS = {
    "a": ((1, 0, 0), (0, 1, 0)),
    "b": ((1, 1, 0), (1, -1, 0)),
    "b-bad": ((1, 2, 0), (2, -1, 0)),
    "c": ((0, 1, 0), (1, 0, 0)),
}
PRISM_TRIANGLES = (
    ((0.0, 0.0), (1.0, 2.0), (2.0, 0.0)),
    ((1.5, 1.0), (2.5, -1.0), (3.5, 1.0)),
)
PRISM_PROBE = (1.75, 0.0, 0.0)
# (x1, x2) lines through the probe column, sampled at every height
PRISM_COLUMN = ((1.75, 0.0), (1.75, 1.0))


@dataclass(frozen=True)
class SeriesSpec:
    """Positive terms c_1, c_2, ... of a divergent series"""

    kind: str = "harmonic"
    rule: Optional[Callable[[int], Number]] = None

    def __post_init__(self):
        if self.kind not in ("harmonic", "custom"):
            raise ValueError(f"Unknown series kind {self.kind!r}")
        if self.kind == "custom" and self.rule is None:
            raise ValueError("Custom series needs a rule")

    @classmethod
    def harmonic(cls) -> "SeriesSpec":
        return cls("harmonic")

    @classmethod
    def constant(cls, value: Number = 1) -> "SeriesSpec":
        return cls("custom", lambda n: value)

    @classmethod
    def parse(cls, text: str) -> "SeriesSpec":
        """'harmonic' or 'constant[:value]'"""
        name, _, arg = text.partition(":")
        if name == "harmonic":
            return cls.harmonic()
        if name == "constant":
            return cls.constant(Fraction(arg) if arg else 1)
        raise ValueError(f"Unknown series {text!r} (expected harmonic or constant[:value])")

    def term(self, n: int, exact: bool = True) -> Number:
        if n < 1:
            raise ValueError(f"Series terms start at n = 1, got {n}")
        if self.kind == "harmonic":
            value = Fraction(1, n)
        else:
            value = self.rule(n)
        if not value > 0:
            raise ReproductionError(f"Series term c_{n} = {value} is not positive")
        return Fraction(value) if exact else float(value)

    def terms(self, count: int, exact: bool = True) -> List[Number]:
        return [self.term(n, exact) for n in range(1, count + 1)]


class PiecewiseLinear:
    """Univariate piecewise-linear function, constant beyond its first and last breakpoint"""

    def __init__(self, *points: Tuple[Number, Number]):
        points = sorted(points, key=lambda p: p[0])
        xs, ys = [], []
        for x, y in points:
            if xs and x == xs[-1]:
                if y != ys[-1]:
                    raise ValueError(f"Inconsistent definition at {x}")
                continue
            xs.append(x)
            ys.append(y)
        if not xs:
            raise ValueError("Need at least one breakpoint")
        self.xs = xs
        self.ys = ys

    def __call__(self, t: Number) -> Number:
        if t <= self.xs[0]:
            return self.ys[0]
        if t >= self.xs[-1]:
            return self.ys[-1]
        k = bisect.bisect_right(self.xs, t)
        x0, x1 = self.xs[k - 1], self.xs[k]
        y0, y1 = self.ys[k - 1], self.ys[k]
        return y0 + (t - x0) * (y1 - y0) / (x1 - x0)

    @property
    def breakpoints(self) -> List[Tuple[Number, Number]]:
        return list(zip(self.xs, self.ys))


class G2Row(NamedTuple):
    k: int
    partial_sum: Number
    g2_span: Number
    minimax_error: Optional[Number]


@dataclass(frozen=True)
class SquareVerification:
    """Variation report on the l_k instance plus any failed expectation"""

    k: int
    report: VariationReport
    diagnostics: Tuple[str, ...]

    @property
    def passed(self) -> bool:
        return not self.diagnostics


class ExampleRow(NamedTuple):
    case: str
    probe: int
    delta: float
    delta0: float
    passed: bool


def _num(value, exact: bool) -> Number:
    return Fraction(value) if exact else float(value)


def section1_points(N: int, exact: bool = True) -> List[Tuple[Number, Number]]:
    """
    First N points of the divergent telescoping path

    x^0 = (2, 2/3), x^1 = (2/3, -2/3), x^2 = (0, 0), x^3 = (1, 1) and
    x^{3+j} = x^{2+j} + 2^-j (1, (-1)^j). The points converge to x^0.
    """
    if N < 3:
        raise ValueError(f"Need at least 3 points, got {N}")
    head = [(2, Fraction(2, 3)), (Fraction(2, 3), Fraction(-2, 3)), (0, 0), (1, 1)]
    points = [tuple(Fraction(c) for c in p) for p in head[:N]]
    for j in range(1, N - 3):
        step = Fraction(1, 2 ** j)
        prev = points[-1]
        points.append((prev[0] + step, prev[1] + step * (-1) ** j))
    return [tuple(_num(c, exact) for c in p) for p in points]


def build_section1(N: int, series: Optional[SeriesSpec] = None, exact: bool = True) -> Tuple[PointSet, ScalarField]:
    """
    The telescoping path with f0 = 0 at even points and c_{k+1} at x^{2k+1}

    Each point is checked to extend the alternating path (PerpToA1 first).

    Raises:
        ReproductionError: a point breaks the alternation
    """
    series = series or SeriesSpec.harmonic()
    points = section1_points(N, exact)
    ps = PointSet.from_coordinates(points, *SECTION1_DIRECTIONS, exact=exact)
    try:
        path = validate_path(ps, range(N))
    except InvalidPathError as e:
        raise ReproductionError(f"Telescoping path breaks at step {e.position}: {e}") from e
    if N > 1 and path.steps[0] is not StepKind.PERP_TO_A1:
        raise ReproductionError("Telescoping path must start with a PerpToA1 step")
    values = [series.term(i // 2 + 1, exact) if i % 2 else _num(0, exact) for i in range(N)]
    return ps, ScalarField.of(values, exact)


def verify_g2_divergence(
    N: int,
    series: Optional[SeriesSpec] = None,
    field: Optional[Sequence[Number]] = None,
    with_minimax: bool = True,
    exact: bool = True,
) -> List[G2Row]:
    """
    Growth of the forced g_2 values along truncations of the telescoping path

    For each k with 2k+1 < N, the interpolant's v-difference between the
    fibers of x^{2k+1} and x^0 must equal the telescoped sum
    sum_{n<=k} f(x^{2n+1}) - f(x^{2n}), which is c_1 + ... + c_{k+1} for f0.

    Args:
        N: Odd number of points, at least 3
        series: Terms c_n (harmonic by default)
        field: Values replacing f0
        with_minimax: Also solve the minimax problem on x^0..x^{2k+1}
        exact: Rational arithmetic

    Raises:
        ReproductionError: telescoped sum and forced span disagree
    """
    if N < 3 or N % 2 == 0:
        raise ValueError(f"N must be odd and at least 3, got {N}")
    ps, f = build_section1(N, series, exact)
    if field is not None:
        f = ScalarField.of(field, exact)
    ridge = interpolate_on_path(ps, validate_path(ps, range(N)), f)
    p2 = ps.partition(2)
    base = ridge.v[p2.class_of[0]]

    rows = []
    partial = _num(0, exact)
    for k in range((N - 1) // 2):
        odd = 2 * k + 1
        partial = partial + f[odd] - f[odd - 1]
        span = ridge.v[p2.class_of[odd]] - base
        if abs(span - partial) > 1e-9:
            raise ReproductionError(f"k={k}: forced span {span} differs from telescoped sum {partial}")
        error = None
        if with_minimax:
            head = list(range(odd + 1))
            error = minimax_fit(ps.subset(head), [f[i] for i in head], certify=False).error
        rows.append(G2Row(k=k, partial_sum=partial, g2_span=span, minimax_error=error))
    logger.info(f"Telescoping path N={N}: g2 span reaches {float(rows[-1].g2_span):.6f}")
    return rows


def l_k(k: int, exact: bool = True) -> List[Tuple[Number, Number]]:
    """(1, 0), (0, 1), (1/2, 0), (0, 1/2), ..., (1/2^k, 0), (0, 1/2^k)"""
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    points = []
    for j in range(k + 1):
        h = _num(Fraction(1, 2 ** j), exact)
        zero = _num(0, exact)
        points.append((h, zero))
        points.append((zero, h))
    return points


def g_k(k: int, exact: bool = True) -> PiecewiseLinear:
    """g_k(1/2^{k-i}) = i for i = 0..k, linear in between, 0 below 1/2^k and k above 1"""
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    return PiecewiseLinear(*((_num(Fraction(1, 2 ** (k - i)), exact), _num(i, exact)) for i in range(k + 1)))


def build_unit_square_instance(k: int, extra_grid: int = 0, exact: bool = True) -> Tuple[PointSet, ScalarField]:
    """
    l_k plus an extra_grid x extra_grid sample of [0, 1]^2 with f = g_k(a^1·x)

    The l_k points come first, in path order.
    """
    points = l_k(k, exact)
    seen = set(points)
    if extra_grid > 0:
        ticks = [_num(Fraction(i, extra_grid - 1) if extra_grid > 1 else 0, exact) for i in range(extra_grid)]
        for x, y in itertools.product(ticks, ticks):
            if (x, y) not in seen:
                seen.add((x, y))
                points.append((x, y))
    ps = PointSet.from_coordinates(points, *SQUARE_DIRECTIONS, exact=exact)
    g = g_k(k, exact)
    return ps, ScalarField.of([g(t) for t in ps.projections(1).tolist()], exact)


def verify_square_ratio(k: int, extra_grid: int = 0, field: Optional[Sequence[Number]] = None) -> SquareVerification:
    """Variation report for g_k(a^1·x), expecting lhs = k and rhs <= 1"""
    ps, f = build_unit_square_instance(k, extra_grid, exact=True)
    if field is not None:
        f = field
    report = variation_inequality_report(ps, f)
    diagnostics = []
    if report.lhs != k:
        diagnostics.append(f"lhs = {report.lhs}, expected {k}")
    if report.rhs > 1 + 1e-12:
        diagnostics.append(f"rhs = {report.rhs} exceeds 1")
    if report.rhs > 0 and report.ratio < k:
        diagnostics.append(f"ratio = {report.ratio} below {k}")
    for line in diagnostics:
        logger.warning(f"Square k={k}: {line}")
    return SquareVerification(k=k, report=report, diagnostics=tuple(diagnostics))


def _in_triangle(p: Tuple[float, float], tri, eps: float = 1e-12) -> bool:
    (ax, ay), (bx, by), (cx, cy) = tri
    det = (by - cy) * (ax - cx) + (cx - bx) * (ay - cy)
    l1 = ((by - cy) * (p[0] - cx) + (cx - bx) * (p[1] - cy)) / det
    l2 = ((cy - ay) * (p[0] - cx) + (ax - cx) * (p[1] - cy)) / det
    return l1 >= -eps and l2 >= -eps and 1 - l1 - l2 >= -eps


def in_prism_base(x1: float, x2: float) -> bool:
    return any(_in_triangle((x1, x2), tri) for tri in PRISM_TRIANGLES)


def build_example_sets(
    which: str,
    density: int,
    directions: Optional[Tuple[Sequence[float], Sequence[float]]] = None,
    forced: Optional[Sequence[Sequence[float]]] = None,
) -> PointSet:
    """
    Sampled solids in R^3

    a: grid points of [-1, 1]^3 inside the unit ball
    b, b-bad: the unit cube on the lattice i + j even with spacing 1/(density - 1)
    c: grid points of the prism over two triangles, plus every triangle vertex
       and the column points (1.75, 0) and (1.75, 1) at each height, and the
       probe (1.75, 0, 0)

    Args:
        which: "a", "b", "b-bad" or "c"
        density: Nodes per axis, at least 2
        directions: Override for the default direction pair
        forced: Extra points always included
    """
    if which not in EXAMPLE_DIRECTIONS:
        raise ValueError(f"Unknown example {which!r}, expected one of {sorted(EXAMPLE_DIRECTIONS)}")
    if density < 2:
        raise ValueError(f"density must be at least 2, got {density}")
    dir1, dir2 = directions or EXAMPLE_DIRECTIONS[which]

    points: List[Tuple[float, float, float]] = []
    if which == "a":
        axis = np.linspace(-1.0, 1.0, density)
        for x in itertools.product(axis, axis, axis):
            if math.fsum(c * c for c in x) <= 1 + 1e-12:
                points.append(tuple(float(c) for c in x))
    elif which in ("b", "b-bad"):
        h = 1.0 / (density - 1)
        for i, j, k in itertools.product(range(density), repeat=3):
            if (i + j) % 2 == 0:
                points.append((i * h, j * h, k * h))
    else:
        # rounding lets grid nodes that land on a forced point dedupe exactly
        xs = np.round(np.linspace(0.0, 3.5, density), 12)
        ys = np.round(np.linspace(-1.0, 2.0, density), 12)
        zs = np.round(np.linspace(0.0, 1.0, density), 12)
        for x1, x2 in itertools.product(xs, ys):
            if in_prism_base(x1, x2):
                points.extend((float(x1), float(x2), float(z)) for z in zs)
        for vx, vy in [v for tri in PRISM_TRIANGLES for v in tri] + list(PRISM_COLUMN):
            points.extend((vx, vy, float(z)) for z in zs)
        points.append(PRISM_PROBE)
    if forced:
        points.extend(tuple(float(c) for c in p) for p in forced)

    unique = list(dict.fromkeys(points))
    logger.debug(f"Example {which}: {len(unique)} points at density {density}")
    return PointSet.from_coordinates(unique, dir1, dir2, tol=ToleranceParams())


def find_point(ps: PointSet, target: Sequence[float], tol: float = 1e-12) -> int:
    """Index of the sample point equal to target"""
    hits = np.nonzero(np.all(np.abs(np.asarray(ps.points, dtype=float) - np.asarray(target, dtype=float)) <= tol, axis=1))[0]
    if len(hits) == 0:
        raise ReproductionError(f"Point {tuple(target)} is not in the sample")
    return int(hits[0])


def verify_examples(
    which: str,
    density: int = 9,
    deltas: Optional[Sequence[float]] = None,
    probe: Optional[Sequence[float]] = None,
) -> Tuple[Theorem21Report, List[ExampleRow]]:
    """
    Basis-completion check on a sampled solid, flattened to one row per delta0 attempt

    Example c probes (1.75, 0, 0) with delta = 1.75 unless told otherwise.
    """
    ps = build_example_sets(which, density)
    probes = None
    if which == "c":
        probes = [find_point(ps, probe or PRISM_PROBE)]
        deltas = deltas or (1.75,)
    elif probe is not None:
        probes = [find_point(ps, probe)]
    report = check_theorem_2_1(ps, deltas=deltas or config.DEFAULT_DELTAS, probes=probes)
    rows = [
        ExampleRow(case=which, probe=o.probe, delta=o.delta, delta0=a.delta0, passed=a.passed)
        for o in report.per_probe
        for a in o.attempts
    ]
    return report, rows


# Builders addressable by name
CONSTRUCTS: Dict[str, Callable] = {
    "section1": build_section1,
    "section1_points": section1_points,
    "f0": lambda N, series=None, exact=True: build_section1(N, series, exact)[1],
    "unit_square": build_unit_square_instance,
    "l_k": l_k,
    "g_k": g_k,
    "example_a": lambda density, **kw: build_example_sets("a", density, **kw),
    "example_b": lambda density, **kw: build_example_sets("b", density, **kw),
    "example_c": lambda density, **kw: build_example_sets("c", density, **kw),
}
