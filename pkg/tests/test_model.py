import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from neuralgas import (
    AnnealingSchedule,
    Codebook,
    DissimilarityMatrix,
    InvalidInputError,
    InvalidParameterError,
    RankAssignment,
    ValidationError,
    VectorDataset,
    lambda_at,
    lattice_distance,
    make_lattice,
    neighborhood_weight,
)


class TestLattice:
    @pytest.mark.parametrize("n, side", [(9, 3), (10, 3), (1, 1), (2, 1), (3, 2), (13, 4)])
    def test_make_lattice_rounds_to_nearest(self, n, side):
        lattice = make_lattice(n)
        assert (lattice.rows, lattice.cols) == (side, side)
        assert lattice.n == side * side

    @given(st.integers(1, 500))
    def test_lattice_size_is_rounded_square(self, n):
        lattice = make_lattice(n)
        assert lattice.rows * lattice.cols == round(math.sqrt(n)) ** 2

    def test_invalid(self):
        with pytest.raises(InvalidParameterError):
            make_lattice(0)

    def test_distances(self):
        lattice = make_lattice(9)
        assert lattice_distance(lattice, 4, 4) == 0
        assert lattice_distance(lattice, 0, 1) == 1
        assert lattice_distance(lattice, 0, 8) == 4
        assert lattice_distance(lattice, 2, 6) == 4

    def test_coordinates_unique_and_metric_symmetric(self):
        lattice = make_lattice(16)
        coords = {tuple(c) for c in lattice.coordinates}
        assert len(coords) == 16
        d = lattice.distances
        assert np.array_equal(d, d.T)
        assert np.all((d == 0) == np.eye(16, dtype=bool))


class TestNeighborhoodWeight:
    def test_values(self):
        assert neighborhood_weight(0, 3.7) == 1.0
        assert neighborhood_weight(1, 1) == pytest.approx(0.367879, abs=1e-6)
        assert neighborhood_weight(4, 2) == pytest.approx(0.135335, abs=1e-6)

    @pytest.mark.parametrize("lam", [0.0, -1.0])
    def test_invalid_lambda(self, lam):
        with pytest.raises(InvalidParameterError):
            neighborhood_weight(1, lam)

    @given(st.floats(0, 50), st.floats(0.01, 50), st.floats(0.01, 100))
    def test_monotone(self, t, dt, lam):
        t2 = t + dt
        if math.exp(-t2 / lam) == 0.0:
            return
        assert neighborhood_weight(t, lam) > neighborhood_weight(t2, lam)


class TestSchedule:
    def test_endpoints(self):
        s = AnnealingSchedule(8, 0.01, 2)
        assert lambda_at(s, 0) == 8
        assert lambda_at(s, 1) == 0.01

    def test_midpoint(self):
        assert lambda_at(AnnealingSchedule(4, 1, 3), 1) == pytest.approx(2.0, rel=1e-15)

    def test_constant(self):
        s = AnnealingSchedule(5, 5, 10)
        assert all(lambda_at(s, t) == 5 for t in range(10))

    def test_single_epoch(self):
        assert lambda_at(AnnealingSchedule(3, 1, 1), 0) == 3

    @pytest.mark.parametrize("t", [-1, 10])
    def test_out_of_range(self, t):
        with pytest.raises(InvalidParameterError):
            lambda_at(AnnealingSchedule(3, 1, 10), t)

    def test_rejects_increasing(self):
        with pytest.raises(InvalidParameterError):
            AnnealingSchedule(1, 2, 5)

    @given(st.floats(0.01, 100), st.floats(0.01, 0.99), st.integers(2, 200))
    def test_strictly_decreasing(self, start, ratio, epochs):
        values = AnnealingSchedule(start, start * ratio, epochs).values()
        assert np.all(np.diff(values) < 0)
        assert values[0] == start and values[-1] == start * ratio


class TestTypes:
    def test_dataset_invariants(self):
        data = VectorDataset([[1.0, 2.0], [3.0, 4.0]], labels=[1, 2])
        assert (data.p, data.m) == (2, 2)
        with pytest.raises(InvalidInputError):
            VectorDataset([[1.0], [2.0]], labels=[1])
        with pytest.raises(InvalidInputError):
            VectorDataset(np.empty((0, 2)))

    def test_dataset_is_read_only(self):
        data = VectorDataset([[1.0, 2.0]])
        with pytest.raises(ValueError):
            data.points[0, 0] = 5.0

    def test_matrix_invariants(self):
        DissimilarityMatrix([[0, 1], [1, 0]])
        with pytest.raises(ValidationError):
            DissimilarityMatrix([[0, 1], [2, 0]])
        with pytest.raises(ValidationError):
            DissimilarityMatrix([[1, 1], [1, 0]])
        with pytest.raises(ValidationError):
            DissimilarityMatrix([[0, -1], [-1, 0]])

    def test_matrix_symmetry_tolerance(self):
        DissimilarityMatrix([[0, 1], [1 + 1e-10, 0]])

    def test_codebook(self):
        assert Codebook.from_vectors([[0.0], [1.0]]).n == 2
        cb = Codebook.from_indices([0, 3])
        cb.check_against(4)
        with pytest.raises(InvalidInputError):
            cb.check_against(3)
        with pytest.raises(InvalidInputError):
            Codebook.from_indices([-1])

    def test_rank_assignment_forms(self):
        RankAssignment([[1, 0, 2], [0, 2, 1]])
        with pytest.raises(InvalidInputError):
            RankAssignment([[0, 0, 2]])
        winners = RankAssignment.from_winners([2, 0], 3)
        assert winners.ranks.tolist() == [[1, 1, 0], [0, 1, 1]]
        assert winners.winners.tolist() == [2, 0]
        with pytest.raises(InvalidInputError):
            RankAssignment([[0, 0, 1]], form="winner")

    @given(st.integers(1, 12), st.integers(1, 10), st.integers(0, 2**32 - 1))
    def test_ng_rows_sum(self, n, p, seed):
        rng = np.random.default_rng(seed)
        ranks = np.array([rng.permutation(n) for _ in range(p)])
        ra = RankAssignment(ranks)
        assert np.all(ra.ranks.sum(axis=1) == n * (n - 1) // 2)
