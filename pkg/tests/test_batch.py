import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from neuralgas import (
    AnnealingSchedule,
    Codebook,
    InvalidConfigurationError,
    SomLattice,
    VectorDataset,
    batch_kmeans_epoch,
    batch_ng_epoch,
    batch_som_epoch,
    compute_ranks,
    heskes_winner,
    kmeans_cost,
    make_lattice,
    newton_step,
    ng_cost,
    ng_gradient,
    online_ng_step,
    som_cost,
    train,
)
from neuralgas.batch import prototype_distances

E1 = math.exp(-1.0)


def vectors(*rows):
    return Codebook.from_vectors(np.array(rows, dtype=float).reshape(len(rows), -1))


def random_instance(rng, p=None, m=None, n=None):
    p = p or int(rng.integers(1, 60))
    m = m or int(rng.integers(1, 5))
    n = n or int(rng.integers(1, 8))
    points = rng.normal(size=(p, m))
    return VectorDataset(points), Codebook.from_vectors(rng.normal(size=(n, m)))


class TestRanks:
    def test_sort_order(self):
        assert compute_ranks([0.0], vectors(2, 1, 3)).tolist() == [1, 0, 2]

    def test_tie_break_by_index(self):
        assert compute_ranks([0.0], vectors(1, -1, 1)).tolist() == [0, 1, 2]

    def test_single_prototype(self):
        assert compute_ranks([5.0, 1.0], vectors([0, 0])).tolist() == [0]

    @given(st.integers(0, 2**32 - 1), st.booleans())
    def test_always_a_permutation(self, seed, integer_grid):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 10))
        protos = rng.integers(-2, 3, size=(n, 2)) if integer_grid else rng.normal(size=(n, 2))
        ranks = compute_ranks(rng.integers(-2, 3, size=2), Codebook.from_vectors(protos))
        assert sorted(ranks.tolist()) == list(range(n))


class TestOnlineStep:
    def test_full_step_single_prototype(self):
        new = online_ng_step([3.0, -1.0], vectors([0, 0]), lam=1e-9, epsilon=1.0)
        np.testing.assert_array_equal(new.vectors, [[3.0, -1.0]])

    def test_zero_rate(self):
        cb = vectors(0, 10)
        assert online_ng_step([2.0], cb, 1.0, 0.0) == cb

    def test_hand_evaluation(self):
        new = online_ng_step([2.0], vectors(0, 10), lam=1.0, epsilon=0.5)
        assert new.vectors[0, 0] == pytest.approx(1.0, rel=1e-15)
        assert new.vectors[1, 0] == pytest.approx(10 - 0.5 * E1 * 8, rel=1e-15)
        assert new.vectors[1, 0] == pytest.approx(8.5285, abs=1e-4)

    @given(st.integers(0, 2**32 - 1), st.floats(0, 1), st.floats(0.01, 10))
    def test_no_overshoot(self, seed, eps, lam):
        rng = np.random.default_rng(seed)
        x = rng.normal(size=2)
        cb = Codebook.from_vectors(rng.normal(size=(4, 2)))
        new = online_ng_step(x, cb, lam, eps)
        before = np.linalg.norm(cb.vectors - x, axis=1)
        after = np.linalg.norm(new.vectors - x, axis=1)
        assert np.all(after <= before + 1e-12)


class TestBatchNG:
    def test_single_prototype_is_mean(self):
        data = VectorDataset([[0.0, 1.0], [2.0, 3.0], [7.0, -1.0]])
        new, _ = batch_ng_epoch(data, vectors([5, 5]), lam=0.7)
        np.testing.assert_allclose(new.vectors, [data.points.mean(axis=0)], rtol=1e-15)

    def test_single_point(self):
        new, _ = batch_ng_epoch(VectorDataset([[1.0, 2.0]]), vectors([0, 0], [4, 4], [9, 1]), 2.0)
        np.testing.assert_allclose(new.vectors, [[1.0, 2.0]] * 3, rtol=1e-15)

    def test_hand_evaluation(self):
        data = VectorDataset([[0.0], [1.0], [10.0]])
        new, ranks = batch_ng_epoch(data, vectors(0, 10), lam=1.0)
        assert ranks.ranks[:, 0].tolist() == [0, 0, 1]
        assert ranks.ranks[:, 1].tolist() == [1, 1, 0]
        w0 = (0 + 1 + 10 * E1) / (2 + E1)
        w1 = (0 * E1 + 1 * E1 + 10) / (1 + 2 * E1)
        np.testing.assert_allclose(new.vectors[:, 0], [w0, w1], rtol=1e-14)
        assert w0 == pytest.approx(1.9759, abs=1e-4) and w1 == pytest.approx(5.9731, abs=1e-4)

    def test_tiny_lambda_with_idle_prototype_stays_finite(self):
        data = VectorDataset(np.arange(10.0).reshape(-1, 1))
        cb = vectors(*[[v] for v in np.linspace(0, 9, 12)], [1000.0])
        new, _ = batch_ng_epoch(data, cb, lam=0.01)
        assert np.all(np.isfinite(new.vectors))

    @given(st.integers(0, 2**32 - 1), st.floats(0.01, 20))
    def test_stays_in_bounding_box(self, seed, lam):
        data, cb = random_instance(np.random.default_rng(seed))
        new, _ = batch_ng_epoch(data, cb, lam)
        lo, hi = data.points.min(axis=0), data.points.max(axis=0)
        assert np.all(new.vectors >= lo - 1e-12) and np.all(new.vectors <= hi + 1e-12)


class TestHeskesWinner:
    def test_collapses_to_nearest(self):
        cb = vectors(0, 3, 5, 9)
        lattice = SomLattice(2, 2)
        assert heskes_winner([4.2], cb, lattice, 1e-9) == 2

    def test_identical_prototypes(self):
        assert heskes_winner([1.0], vectors(2, 2, 2, 2), SomLattice(2, 2), 1.0) == 0

    def test_hand_evaluation(self):
        # score(0) = 0 + e^-1 * 16 ~ 5.886, score(1) = 16 + e^-1 * 0
        assert heskes_winner([0.0], vectors(0, 4), SomLattice(1, 2), 1.0) == 0
        assert heskes_winner([4.0], vectors(0, 4), SomLattice(1, 2), 1.0) == 1

    def test_lattice_mismatch(self):
        with pytest.raises(InvalidConfigurationError):
            heskes_winner([0.0], vectors(0, 4, 5), SomLattice(1, 2), 1.0)


class TestBatchSOM:
    def test_single_neuron(self):
        data = VectorDataset([[0.0], [2.0], [7.0]])
        new, _ = batch_som_epoch(data, vectors(1), SomLattice(1, 1), 1.0)
        assert new.vectors[0, 0] == pytest.approx(3.0, rel=1e-15)

    def test_small_lambda_matches_kmeans(self):
        rng = np.random.default_rng(5)
        data = VectorDataset(rng.normal(size=(40, 2)))
        cb = Codebook.from_vectors(data.points[:4])
        som, _ = batch_som_epoch(data, cb, SomLattice(2, 2), 1e-6)
        km, _ = batch_kmeans_epoch(data, cb)
        np.testing.assert_allclose(som.vectors, km.vectors, rtol=1e-12)

    def test_hand_evaluation(self):
        data = VectorDataset([[0.0], [8.0]])
        new, ranks = batch_som_epoch(data, vectors(0, 8), SomLattice(1, 2), 1.0)
        assert ranks.winners.tolist() == [0, 1]
        w0 = 8 * E1 / (1 + E1)
        np.testing.assert_allclose(new.vectors[:, 0], [w0, 8 - w0], rtol=1e-14)
        assert w0 == pytest.approx(2.1515, abs=1e-4)


class TestBatchKMeans:
    def test_single_prototype(self):
        data = VectorDataset([[0.0], [3.0], [9.0]])
        new, _ = batch_kmeans_epoch(data, vectors(100))
        assert new.vectors[0, 0] == 4.0

    def test_fixed_point(self):
        data = VectorDataset([[0.0, 1.0], [5.0, 5.0], [9.0, 2.0]])
        cb = Codebook.from_vectors(data.points)
        assert batch_kmeans_epoch(data, cb)[0] == cb

    def test_hand_evaluation(self):
        new, ranks = batch_kmeans_epoch(VectorDataset([[0.0], [2.0], [10.0]]), vectors(1, 9))
        assert new.vectors[:, 0].tolist() == [1.0, 10.0]
        assert ranks.winners.tolist() == [0, 0, 1]

    def test_empty_field_is_idle(self):
        new, _ = batch_kmeans_epoch(VectorDataset([[0.0], [1.0]]), vectors(0, 50))
        assert new.vectors[1, 0] == 50.0


class TestCosts:
    def test_ng_cost(self):
        assert ng_cost(VectorDataset([[1.0, 2.0]]), vectors([1, 2]), 1.0) == 0
        assert ng_cost(VectorDataset([[0.0]]), vectors(0, 3), 1.0) == pytest.approx(9 * E1)
        assert 9 * E1 == pytest.approx(3.3109, abs=1e-4)

    def test_ng_cost_limit_is_quantization_cost(self):
        rng = np.random.default_rng(2)
        data, cb = random_instance(rng, p=30, m=2, n=5)
        assert ng_cost(data, cb, 1e-6) == pytest.approx(kmeans_cost(data, cb), rel=1e-12)

    def test_som_cost(self):
        data = VectorDataset([[0.0], [3.0]])
        assert som_cost(data, vectors(1), SomLattice(1, 1), 1.0) == 1 + 4
        assert som_cost(VectorDataset([[0.0]]), vectors(0, 4), SomLattice(1, 2), 1.0) \
            == pytest.approx(16 * E1)
        assert 16 * E1 == pytest.approx(5.8861, abs=1e-4)

    def test_som_cost_limit(self):
        rng = np.random.default_rng(4)
        data, cb = random_instance(rng, p=30, m=2, n=4)
        assert som_cost(data, cb, SomLattice(2, 2), 1e-6) == pytest.approx(
            kmeans_cost(data, cb), rel=1e-12)


class TestNewton:
    def test_fixed_point_gives_zero_step(self):
        data = VectorDataset([[0.0], [1.0], [10.0]])
        cb = vectors(0, 10)
        for _ in range(200):
            cb, _ = batch_ng_epoch(data, cb, 1.0)
        np.testing.assert_allclose(newton_step(data, cb, 1.0), 0.0, atol=1e-12)

    def test_single_prototype(self):
        data = VectorDataset([[0.0, 2.0], [4.0, 0.0]])
        np.testing.assert_allclose(newton_step(data, vectors([1, 1]), 3.0), [[1.0, 0.0]])

    def test_hand_instance(self):
        data = VectorDataset([[0.0], [1.0], [10.0]])
        delta = newton_step(data, vectors(0, 10), 1.0)
        w0 = (1 + 10 * E1) / (2 + E1)
        w1 = (E1 + 10) / (1 + 2 * E1)
        np.testing.assert_allclose(delta[:, 0], [w0, w1 - 10], rtol=1e-13)
        assert delta[1, 0] == pytest.approx(-4.0269, abs=1e-4)

    @given(st.integers(0, 2**32 - 1), st.floats(0.05, 10))
    @settings(max_examples=50)
    def test_newton_equals_batch(self, seed, lam):
        data, cb = random_instance(np.random.default_rng(seed))
        expected, _ = batch_ng_epoch(data, cb, lam)
        scale = np.abs(data.points).max()
        np.testing.assert_allclose(cb.vectors + newton_step(data, cb, lam), expected.vectors,
                                   rtol=1e-12, atol=1e-12 * scale)

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(11)
        data, cb = random_instance(rng, p=25, m=2, n=4)
        grad = ng_gradient(data, cb, 1.3)
        h = 1e-6
        fd = np.zeros_like(grad)
        for i in range(cb.n):
            for k in range(data.m):
                step = np.zeros_like(cb.vectors)
                step[i, k] = h
                fd[i, k] = (ng_cost(data, Codebook.from_vectors(cb.vectors + step), 1.3)
                            - ng_cost(data, Codebook.from_vectors(cb.vectors - step), 1.3)) / (2 * h)
        np.testing.assert_allclose(fd, grad, rtol=1e-4)


class TestInvariances:
    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=30)
    def test_translation_equivariance(self, seed):
        rng = np.random.default_rng(seed)
        # continuous data: exact distance ties, which rounding could flip, have measure zero
        points = rng.normal(scale=5.0, size=(30, 2))
        protos = rng.normal(scale=5.0, size=(4, 2))
        shift = rng.uniform(-100, 100, size=2)
        lattice = SomLattice(2, 2)
        for step in (lambda d, c: batch_ng_epoch(d, c, 1.5),
                     lambda d, c: batch_som_epoch(d, c, lattice, 0.8),
                     batch_kmeans_epoch):
            a, ra = Codebook.from_vectors(protos), None
            b = Codebook.from_vectors(protos + shift)
            for _ in range(3):
                gaps = prototype_distances(a.vectors, a.vectors) + np.eye(4)
                if gaps.min() < 1e-12:
                    # coinciding prototypes tie exactly in one frame only
                    break
                a, ra = step(VectorDataset(points), a)
                b, rb = step(VectorDataset(points + shift), b)
                assert np.array_equal(ra.ranks, rb.ranks)
                np.testing.assert_allclose(b.vectors, a.vectors + shift, rtol=0, atol=1e-9)


class TestTrain:
    def test_zero_epochs(self):
        data = VectorDataset(np.arange(6.0).reshape(3, 2))
        init = Codebook.from_vectors([[1.0, 1.0], [2.0, 2.0]])
        cb, trace = train("batch-ng", data, 2, AnnealingSchedule(1, 0.01, 0), seed=1, init=init)
        assert cb == init and len(trace) == 0

    def test_kmeans_on_own_prototypes(self):
        data = VectorDataset([[0.0, 0.0], [3.0, 1.0], [8.0, 8.0]])
        init = Codebook.from_vectors(data.points)
        cb, trace = train("batch-kmeans", data, 3, AnnealingSchedule(1, 1, 7), init=init)
        assert cb == init and len(trace) == 7

    def test_two_blobs(self):
        rng = np.random.default_rng(0)
        points = np.concatenate([rng.normal(0, 1, 20), rng.normal(10, 1, 20)]).reshape(-1, 1)
        data = VectorDataset(points)
        cb, trace = train("batch-ng", data, 2, AnnealingSchedule(1, 0.01, 50), seed=3)
        left, right = points[:20, 0], points[20:, 0]
        protos = np.sort(cb.vectors[:, 0])
        assert left.min() <= protos[0] <= left.max()
        assert right.min() <= protos[1] <= right.max()
        near = np.argmin(np.abs(points - cb.vectors[:, 0][None, :]), axis=1)
        assert len(set(near[:20])) == 1 and len(set(near[20:])) == 1
        assert set(near[:20]) != set(near[20:])

    @pytest.mark.parametrize("algorithm", ["online-ng", "batch-ng", "batch-som", "batch-kmeans"])
    def test_deterministic(self, algorithm):
        data = VectorDataset(np.random.default_rng(1).normal(size=(30, 2)))
        schedule = AnnealingSchedule(2, 0.01, 10)
        a, ta = train(algorithm, data, 4, schedule, seed=9)
        b, tb = train(algorithm, data, 4, schedule, seed=9)
        assert a == b
        assert np.array_equal(ta.costs, tb.costs)
        assert len(ta) == 10

    def test_som_uses_square_lattice(self):
        data = VectorDataset(np.random.default_rng(1).normal(size=(30, 2)))
        cb, _ = train("batch-som", data, 10, AnnealingSchedule(2, 0.01, 3), seed=0)
        assert cb.n == 9

    def test_invalid(self):
        data = VectorDataset([[0.0]])
        with pytest.raises(InvalidConfigurationError):
            train("median-ng", data, 1, AnnealingSchedule(1, 1, 1))
        with pytest.raises(InvalidConfigurationError):
            train("batch-ng", data, 1, AnnealingSchedule(1, 1, 1),
                  init=Codebook.from_indices([0]))
