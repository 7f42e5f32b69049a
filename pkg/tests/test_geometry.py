from fractions import Fraction

import numpy as np
import pytest

from ridgeprox.exceptions import DimensionMismatchError, InvalidDirectionError, InvalidPointSetError
from ridgeprox.geometry import (
    Direction,
    PointSet,
    ToleranceParams,
    complete_basis,
    complete_directions,
    directions_independent,
    fibers,
    project,
    ridge_coordinates,
    to_number,
)


class TestProject:
    def test_exact_value(self):
        d = Direction.of((1, -1), exact=True)
        assert project(d, (Fraction(2), Fraction(2, 3))) == Fraction(4, 3)

    def test_zero_projection(self):
        assert project(Direction.of((1, 1)), (0.0, 0.0)) == 0.0

    def test_fractional_direction(self):
        assert project(Direction.of((1, 0.5)), (0.0, 1.0)) == 0.5

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            project(Direction.of((1, 0, 0)), (1.0, 2.0))

    def test_bilinear(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            d = Direction.of(rng.normal(size=4).tolist())
            x, y = rng.normal(size=4), rng.normal(size=4)
            alpha, beta = rng.normal(size=2)
            lhs = project(d, (alpha * x + beta * y).tolist())
            rhs = alpha * project(d, x.tolist()) + beta * project(d, y.tolist())
            assert abs(lhs - rhs) <= 1e-12 * (1 + abs(lhs))


class TestDirection:
    def test_zero_vector_rejected(self):
        with pytest.raises(InvalidDirectionError):
            Direction.of((0, 0, 0))

    def test_string_coordinates(self):
        d = Direction.of(("1/2", "3"), exact=True)
        assert d.coords == (Fraction(1, 2), Fraction(3))
        assert d.exact

    def test_float_decimal_kept_in_exact_mode(self):
        assert to_number(0.1, exact=True) == Fraction(1, 10)

    def test_numpy_scalars_in_exact_mode(self):
        assert to_number(np.float64(0.25), exact=True) == Fraction(1, 4)
        assert to_number(np.int64(3), exact=True) == 3
        d = Direction.of(np.array([0.5, 0.0]), exact=True)
        assert d.coords == (Fraction(1, 2), Fraction(0))

    def test_dependent_pair(self):
        assert not directions_independent(Direction.of((1, 1)), Direction.of((2, 2)))
        assert directions_independent(Direction.of((1, 1)), Direction.of((1, -1)))


class TestPointSet:
    def test_duplicate_points_rejected(self):
        with pytest.raises(InvalidPointSetError):
            PointSet.from_coordinates([(0, 0), (1, 1), (0, 0)], (1, 0), (0, 1), exact=True)

    def test_near_duplicates_rejected_in_float_mode(self):
        with pytest.raises(InvalidPointSetError):
            PointSet.from_coordinates([(0.0, 0.0), (1e-12, 0.0)], (1, 0), (0, 1))

    def test_dependent_directions_rejected(self):
        with pytest.raises(InvalidDirectionError):
            PointSet.from_coordinates([(0, 0), (1, 2)], (1, 1), (2, 2))

    def test_empty_rejected(self):
        with pytest.raises(InvalidPointSetError):
            PointSet.from_coordinates([], (1, 0), (0, 1))

    def test_ragged_rows_rejected(self):
        with pytest.raises(InvalidPointSetError):
            PointSet.from_coordinates([(0, 0), (1, 2, 3)], (1, 0), (0, 1))

    def test_direction_dimension_checked(self):
        with pytest.raises(DimensionMismatchError):
            PointSet.from_coordinates([(0, 0, 0)], (1, 0), (0, 1))

    def test_label_count_checked(self):
        with pytest.raises(InvalidPointSetError):
            PointSet.from_coordinates([(0, 0), (1, 1)], (1, 0), (0, 1), labels=["a"])

    def test_negative_tolerance_rejected(self):
        with pytest.raises(ValueError):
            ToleranceParams(abs_tol=-1.0)

    def test_numpy_array_in_exact_mode(self):
        points = np.array([[0.0, 0.0], [0.0, 0.1], [0.5, 0.0], [0.5, 0.1]])
        ps = PointSet.from_coordinates(points, np.array([1.0, 0.0]), np.array([0.0, 1.0]), exact=True)
        assert ps.exact
        assert ps.point(1) == (Fraction(0), Fraction(1, 10))
        assert len(ps.partition(1)) == 2

    def test_subset_keeps_order(self, grid3):
        sub = grid3.subset([8, 0, 4])
        assert sub.n_points == 3
        assert sub.point(0) == grid3.point(8)
        assert sub.point(2) == grid3.point(4)


class TestFibers:
    def test_section1_prefix(self, section1_7):
        ps, _ = section1_7
        sub = ps.subset(range(4))
        assert sub.partition(1).as_sets() == frozenset({frozenset({0, 1}), frozenset({2, 3})})

    def test_grid(self, grid2):
        # rows of grid2: (0,0), (0,1), (1,0), (1,1)
        assert grid2.partition(1).as_sets() == frozenset({frozenset({0, 1}), frozenset({2, 3})})
        assert grid2.partition(2).as_sets() == frozenset({frozenset({0, 2}), frozenset({1, 3})})

    def test_single_point(self):
        ps = PointSet.from_coordinates([(3, 4)], (1, 0), (0, 1))
        assert fibers(ps, 1).classes == ((0,),)
        assert fibers(ps, 2).classes == ((0,),)

    def test_partition_covers_every_point(self, grid3):
        for which in (1, 2):
            part = grid3.partition(which)
            members = sorted(i for c in part.classes for i in c)
            assert members == list(range(grid3.n_points))
            for k, c in enumerate(part.classes):
                assert all(part.class_of[i] == k for i in c)

    def test_class_values_ascending(self, grid3):
        values = grid3.partition(1).class_value
        assert list(values) == sorted(values)
        assert values == (0, 1, 2)

    def test_permutation_invariance(self, grid3):
        perm = [4, 7, 1, 0, 8, 2, 6, 3, 5]
        shuffled = grid3.subset(perm)
        for which in (1, 2):
            mapped = frozenset(frozenset(perm[i] for i in c) for c in shuffled.partition(which).classes)
            assert mapped == grid3.partition(which).as_sets()

    def test_tolerance_chain_merges_and_reports_spread(self):
        ps = PointSet.from_coordinates([(0.0, 0.0), (0.8e-9, 1.0), (1.6e-9, 2.0)], (1, 0), (0, 1))
        part = ps.partition(1)
        assert len(part) == 1
        assert part.merged_classes() == [0]
        assert part.spread[0] == pytest.approx(1.6e-9)

    def test_exact_mode_keeps_tiny_gaps(self):
        ps = PointSet.from_coordinates([("0", "0"), ("1/1000000000000", "1")], (1, 0), (0, 1), exact=True)
        assert len(ps.partition(1)) == 2
        assert ps.partition(1).merged_classes() == []

    def test_invalid_direction_index(self, grid2):
        with pytest.raises(ValueError):
            grid2.partition(3)


class TestBasisCompletion:
    def test_cube_directions(self):
        ps = PointSet.from_coordinates([(0, 0, 0)], (1, 1, 0), (1, -1, 0))
        basis = complete_basis(ps)
        assert len(basis) == 3
        assert basis[2].coords == (0.0, 0.0, 1.0)

    def test_exact_completion(self):
        ps = PointSet.from_coordinates([(0, 0, 0)], (1, 2, 0), (2, -1, 0), exact=True)
        basis = complete_basis(ps)
        assert basis[2].coords == (Fraction(0), Fraction(0), Fraction(1))

    def test_plane_needs_nothing(self, grid2):
        basis = complete_basis(grid2)
        assert basis == [grid2.dir1, grid2.dir2]

    def test_full_rank_in_four_dimensions(self):
        basis = complete_directions(Direction.of((1, 1, 0, 0)), Direction.of((0, 1, 1, 0)), 4)
        m = np.array([b.coords for b in basis], dtype=float)
        assert len(basis) == 4
        assert abs(np.linalg.det(m)) > 1e-6
        for extra in basis[2:]:
            for d in basis[:2]:
                assert abs(np.dot(extra.coords, d.coords)) < 1e-12

    def test_dependent_pair_rejected(self):
        with pytest.raises(InvalidDirectionError):
            complete_directions(Direction.of((1, 0, 0)), Direction.of((2, 0, 0)), 3)

    def test_ridge_coordinates_shape(self, grid3):
        coords = ridge_coordinates(grid3, [grid3.dir1, grid3.dir2])
        assert coords.shape == (9, 2)
        assert coords[5].tolist() == [1, 2]
