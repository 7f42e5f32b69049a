from fractions import Fraction

import numpy as np
import pytest

from ridgeprox.approx import minimax_fit
from ridgeprox.criteria import check_theorem_2_1
from ridgeprox.exceptions import ReproductionError
from ridgeprox.paths import enumerate_closed_paths, irreducible_bound, orbits, validate_path
from ridgeprox.repro import (
    CONSTRUCTS,
    PRISM_PROBE,
    PiecewiseLinear,
    SeriesSpec,
    build_example_sets,
    build_section1,
    build_unit_square_instance,
    find_point,
    g_k,
    in_prism_base,
    l_k,
    section1_points,
    verify_examples,
    verify_g2_divergence,
    verify_square_ratio,
)


class TestSeriesSpec:
    def test_harmonic(self):
        assert SeriesSpec.harmonic().terms(3) == [1, Fraction(1, 2), Fraction(1, 3)]

    def test_parse(self):
        assert SeriesSpec.parse("harmonic").kind == "harmonic"
        assert SeriesSpec.parse("constant").term(7) == 1
        assert SeriesSpec.parse("constant:1/2").term(3) == Fraction(1, 2)
        with pytest.raises(ValueError):
            SeriesSpec.parse("geometric")

    def test_non_positive_term(self):
        with pytest.raises(ReproductionError):
            SeriesSpec.constant(-1).term(1)

    def test_float_terms(self):
        assert SeriesSpec.harmonic().term(4, exact=False) == 0.25


class TestSection1:
    def test_first_points(self):
        points = section1_points(6)
        assert points[:4] == [(2, Fraction(2, 3)), (Fraction(2, 3), Fraction(-2, 3)), (0, 0), (1, 1)]
        assert points[4] == (Fraction(3, 2), Fraction(1, 2))
        assert points[5] == (Fraction(7, 4), Fraction(3, 4))

    def test_converges_to_first_point(self):
        N = 14
        points = section1_points(N)
        gap = max(abs(a - b) for a, b in zip(points[-1], points[0]))
        assert gap <= 2 * Fraction(1, 2 ** (N - 4))

    def test_alternating_path(self):
        ps, f = build_section1(11)
        path = validate_path(ps, range(11))
        assert path.steps[0].direction_index == 1
        assert len(orbits(ps)) == 1
        assert enumerate_closed_paths(ps) == []
        assert f.tolist() == [0, 1, 0, Fraction(1, 2), 0, Fraction(1, 3), 0, Fraction(1, 4), 0, Fraction(1, 5), 0]

    def test_harmonic_span(self):
        rows = verify_g2_divergence(21)
        assert len(rows) == 10
        harmonic_10 = sum(Fraction(1, n) for n in range(1, 11))
        assert rows[9].g2_span == harmonic_10
        assert abs(float(rows[9].g2_span) - 2.928968253968254) <= 1e-9
        assert all(r.minimax_error == 0 for r in rows)
        spans = [r.g2_span for r in rows]
        assert spans == sorted(spans)

    def test_constant_series(self):
        rows = verify_g2_divergence(11, SeriesSpec.constant(1), with_minimax=False)
        assert [r.g2_span for r in rows] == [1, 2, 3, 4, 5]
        assert all(r.minimax_error is None for r in rows)

    def test_zero_field(self):
        rows = verify_g2_divergence(9, field=[0] * 9, with_minimax=False)
        assert all(r.g2_span == 0 for r in rows)

    def test_float_mode(self):
        rows = verify_g2_divergence(9, exact=False, with_minimax=False)
        assert rows[-1].g2_span == pytest.approx(1 + 1 / 2 + 1 / 3 + 1 / 4)

    def test_even_n_rejected(self):
        with pytest.raises(ValueError):
            verify_g2_divergence(8)


class TestUnitSquare:
    def test_l_k_points(self):
        assert l_k(1) == [(1, 0), (0, 1), (Fraction(1, 2), 0), (0, Fraction(1, 2))]
        with pytest.raises(ValueError):
            l_k(0)

    def test_g_k_shape(self):
        for k in range(1, 8):
            g = g_k(k)
            assert g(Fraction(1)) == k
            assert g(Fraction(1, 2 ** k)) == 0
            assert g(Fraction(0)) == 0
            assert g(Fraction(2)) == k
            for i in range(k + 1):
                assert g(Fraction(1, 2 ** (k - i))) == i

    def test_field_values(self, square_instance):
        for k in (1, 4, 10):
            ps, f = square_instance(k)
            assert f[0] == k
            assert f[2 * k + 1] == 0
            assert irreducible_bound(ps) == 2 * k + 2

    def test_ratio_grows_with_k(self):
        for k in range(1, 11):
            check = verify_square_ratio(k)
            assert check.passed
            assert check.report.lhs == k
            assert check.report.rhs <= 1
            assert check.report.ratio >= k

    def test_constant_field_flags_lhs(self):
        ps, _ = build_unit_square_instance(3)
        check = verify_square_ratio(3, field=[1] * ps.n_points)
        assert check.report.lhs == 0
        assert not check.passed

    def test_g_k_is_a_ridge_sum_on_l_k(self, square_instance):
        ps, f = square_instance(5)
        assert minimax_fit(ps, f).error == 0

    def test_extra_grid(self):
        ps, f = build_unit_square_instance(2, extra_grid=3)
        assert ps.n_points == 6 + 9 - 4
        assert len(f) == ps.n_points


class TestExampleSets:
    def test_ball(self):
        ps = build_example_sets("a", 5)
        norms = np.sum(np.asarray(ps.points, dtype=float) ** 2, axis=1)
        assert np.all(norms <= 1 + 1e-12)
        assert find_point(ps, (0, 0, 0)) >= 0

    def test_cube_checkerboard(self):
        ps = build_example_sets("b", 3)
        pts = np.asarray(ps.points, dtype=float)
        assert pts.min() == 0.0 and pts.max() == 1.0
        assert ps.n_points == 5 * 3
        assert np.all(np.round((pts[:, 0] + pts[:, 1]) * 2) % 2 == 0)

    def test_prism(self):
        ps = build_example_sets("c", 9)
        probe = find_point(ps, PRISM_PROBE)
        assert ps.point(probe) == PRISM_PROBE
        for z in np.linspace(0.0, 1.0, 9):
            find_point(ps, (1.0, 2.0, float(z)))
        with pytest.raises(ReproductionError):
            find_point(ps, (3.0, 2.0, 0.0))
        assert in_prism_base(1.75, 0.0)
        assert not in_prism_base(3.0, 2.0)

    def test_prism_column_admits_quarter_delta0(self):
        ps = build_example_sets("c", 9)
        x0 = find_point(ps, PRISM_PROBE)
        for z in np.linspace(0.0, 1.0, 9):
            find_point(ps, (1.75, 0.0, float(z)))
            find_point(ps, (1.75, 1.0, float(z)))
        report = check_theorem_2_1(ps, deltas=(1.75,), probes=[x0], shrink=0.25 / 1.75, max_steps=1)
        (outcome,) = report.per_probe
        assert not outcome.attempts[0].passed
        assert outcome.attempts[1].passed
        assert outcome.delta0_found == pytest.approx(0.25)
        assert outcome.sigma_witness is not None

    def test_forced_points_and_directions(self):
        ps = build_example_sets("b", 3, directions=((1, 2, 0), (2, -1, 0)), forced=[(0.5, 0.25, 0.0)])
        assert ps.dir1.coords == (1.0, 2.0, 0.0)
        find_point(ps, (0.5, 0.25, 0.0))

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            build_example_sets("z", 5)
        with pytest.raises(ValueError):
            build_example_sets("b", 1)

    def test_verify_prism(self):
        report, rows = verify_examples("c", 9)
        assert report.passes
        assert rows[0].delta == 1.75
        assert rows[0].delta0 == 1.75
        assert not rows[0].passed
        assert rows[-1].passed
        assert rows[-1].delta0 <= 0.25


def test_piecewise_linear_clamps():
    f = PiecewiseLinear((0, 0), (1, 2), (3, 2))
    assert f(-5) == 0
    assert f(0.5) == 1
    assert f(2) == 2
    assert f(10) == 2
    with pytest.raises(ValueError):
        PiecewiseLinear((0, 0), (0, 1))


def test_constructs_registry():
    assert {"section1", "unit_square", "l_k", "g_k", "f0", "example_a", "example_b", "example_c"} <= set(CONSTRUCTS)
    assert CONSTRUCTS["f0"](5).tolist() == [0, 1, 0, Fraction(1, 2), 0]
    assert CONSTRUCTS["example_b"](3).n_points == 15
