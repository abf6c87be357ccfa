"""Sampler tests: determinant contracts, operator norms, window acceptance,
basis reduction, and statistical smoke checks of the exact-law tier."""

import math

import numpy as np
import pytest

from genlat.core import lp_norm, max_norm, mix_seed
from genlat.haar import (
    CompactWindow,
    UnimodularMap,
    identity_map,
    lll_reduce,
    operator_norm,
    sample_asl,
    sample_grid_exact,
    sample_in_window,
    sample_lattice_exact,
    sample_sl,
)


class TestUnimodularMap:
    def test_identity(self):
        g = identity_map(3)
        assert g.n == 3 and not g.is_affine
        assert np.array_equal(g.apply(np.array([1.0, 2.0, 3.0])), [1.0, 2.0, 3.0])

    def test_apply_matches_columns(self):
        rng = np.random.default_rng(4)
        g = sample_asl(3, rng, shift_bound=1.0)
        assert np.allclose(g.apply(np.zeros(3)), g.z)
        for i in range(3):
            e = np.zeros(3)
            e[i] = 1.0
            assert np.allclose(g.apply(e) - g.z, g.h[:, i])

    def test_apply_batch_matches_single(self):
        rng = np.random.default_rng(5)
        g = sample_asl(2, rng, shift_bound=2.0)
        pts = rng.uniform(-3, 3, size=(50, 2))
        batch = g.apply(pts)
        for p, w in zip(pts, batch):
            assert np.allclose(g.apply(p), w)

    def test_rejects_non_unimodular(self):
        with pytest.raises(ValueError, match="det"):
            UnimodularMap(2.0 * np.eye(2), np.zeros(2))

    def test_rejects_shape_mismatch(self):
        with pytest.raises(ValueError):
            UnimodularMap(np.eye(2), np.zeros(3))
        with pytest.raises(ValueError):
            UnimodularMap(np.ones((2, 3)), np.zeros(2))

    def test_fields_read_only(self):
        g = identity_map(2)
        with pytest.raises(ValueError):
            g.h[0, 0] = 5.0


class TestSampleSL:
    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_determinant_batch(self, n):
        rng = np.random.default_rng(0)
        for _ in range(1000):
            g = sample_sl(n, rng)
            assert abs(np.linalg.det(g.h) - 1.0) <= 1e-9
            assert not g.is_affine

    def test_distinct_seeds_distinct_draws(self):
        a = sample_sl(2, np.random.default_rng(1))
        b = sample_sl(2, np.random.default_rng(2))
        assert not np.allclose(a.h, b.h)

    def test_deterministic_for_fixed_seed(self):
        a = sample_sl(3, np.random.default_rng(7))
        b = sample_sl(3, np.random.default_rng(7))
        assert np.array_equal(a.h, b.h)

    def test_renormalization_idempotent(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            h = sample_sl(3, rng).h
            again = h / np.linalg.det(h) ** (1.0 / 3)
            assert np.all(np.abs(again - h) <= 1e-12 * (1.0 + np.abs(h)))

    def test_rejects_small_n(self):
        with pytest.raises(ValueError):
            sample_sl(1, np.random.default_rng(0))


class TestSampleASL:
    def test_zero_shift_is_linear(self):
        g = sample_asl(2, np.random.default_rng(0), shift_bound=0.0)
        assert np.array_equal(g.z, np.zeros(2))

    def test_max_norm_shift_in_cube(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            g = sample_asl(2, rng, shift_bound=1.0)
            assert np.all(np.abs(g.z) <= 1.0)

    def test_euclidean_shift_in_ball(self):
        rng = np.random.default_rng(2)
        nu = lp_norm(3, 2.0)
        for _ in range(200):
            g = sample_asl(3, rng, shift_bound=1.0, norm=nu)
            assert nu(g.z) <= 1.0
            assert abs(np.linalg.det(g.h) - 1.0) <= 1e-9

    def test_rejects_bad_arguments(self):
        rng = np.random.default_rng(0)
        with pytest.raises(ValueError):
            sample_asl(2, rng, shift_bound=-1.0)
        with pytest.raises(ValueError):
            sample_asl(2, rng, shift_bound=1.0, norm=max_norm(3))


class TestOperatorNorm:
    def test_identity(self):
        est, upper = operator_norm(np.eye(3), max_norm(3))
        assert est == 1.0 and upper == 1.0

    def test_diagonal_scaling(self):
        est, upper = operator_norm(np.diag([2.0, 0.5]), max_norm(2))
        assert abs(est - 2.0) <= 1e-12
        assert abs(upper - 2.0) <= 1e-12

    def test_sup_norm_is_max_row_sum(self):
        rng = np.random.default_rng(8)
        for _ in range(20):
            h = rng.standard_normal((3, 3))
            est, upper = operator_norm(h, max_norm(3))
            row_sum = np.abs(h).sum(axis=1).max()
            assert abs(upper - row_sum) <= 1e-12
            assert abs(est - row_sum) <= 1e-9 * row_sum  # sign probe achieves it

    def test_euclidean_matches_spectral(self):
        rng = np.random.default_rng(9)
        nu = lp_norm(3, 2.0)
        for _ in range(10):
            h = rng.standard_normal((3, 3))
            spectral = np.linalg.svd(h, compute_uv=False)[0]
            est, upper = operator_norm(h, nu)
            assert est <= spectral * (1 + 1e-9)
            assert upper >= spectral * (1 - 1e-12)
            assert est >= 0.97 * spectral  # ascent gets close

    def test_estimate_never_exceeds_upper(self):
        rng = np.random.default_rng(10)
        nu = lp_norm(2, 3.0)
        for _ in range(20):
            h = rng.standard_normal((2, 2))
            est, upper = operator_norm(h, nu)
            assert est <= upper * (1 + 1e-12)

    def test_rejects_mismatched_norm(self):
        with pytest.raises(ValueError):
            operator_norm(np.eye(2), max_norm(3))


class TestWindowSampling:
    def test_loose_window_accepts_quickly(self):
        rng = np.random.default_rng(0)
        window = CompactWindow(op_norm_bound=1e6, shift_bound=0.0)
        total_tries = 0
        for _ in range(100):
            g, tries = sample_in_window(2, rng, window)
            total_tries += tries
        assert total_tries <= 110  # acceptance ~ 1

    def test_accepted_samples_satisfy_window(self):
        rng = np.random.default_rng(1)
        nu = max_norm(3)
        window = CompactWindow(op_norm_bound=5.0, shift_bound=1.0)
        for _ in range(20):
            g, _ = sample_in_window(3, rng, window, norm=nu)
            assert operator_norm(g.h, nu).upper <= 5.0
            assert operator_norm(g.inverse_h(), nu).upper <= 5.0
            assert nu(g.z) <= 1.0

    def test_isometry_window_infeasible(self):
        rng = np.random.default_rng(2)
        window = CompactWindow(op_norm_bound=1.0)
        with pytest.raises(RuntimeError, match="tight"):
            sample_in_window(2, rng, window, max_tries=200)

    def test_window_validation(self):
        with pytest.raises(ValueError):
            CompactWindow(op_norm_bound=0.5)
        with pytest.raises(ValueError):
            CompactWindow(op_norm_bound=2.0, shift_bound=-1.0)


class TestSeedMixing:
    def test_deterministic(self):
        assert mix_seed(12345, 7) == mix_seed(12345, 7)

    def test_distinct_indices_decorrelate(self):
        seeds = {mix_seed(0, i) for i in range(10000)}
        assert len(seeds) == 10000

    def test_64_bit_range(self):
        for i in range(100):
            s = mix_seed(2**63, i)
            assert 0 <= s < 2**64


class TestLLL:
    def lattice_equal(self, a, b):
        u = np.linalg.inv(a) @ b
        return np.allclose(u, np.round(u), atol=1e-9) and abs(
            abs(np.linalg.det(u)) - 1.0
        ) <= 1e-9

    def test_preserves_lattice(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            basis = sample_sl(3, rng).h
            red = lll_reduce(basis)
            assert self.lattice_equal(basis, red)

    def test_shortens_skewed_basis(self):
        basis = np.array([[1.0, 100.0], [0.0, 1.0]])
        red = lll_reduce(basis)
        assert self.lattice_equal(basis, red)
        assert np.abs(red).max() <= 2.0

    def test_identity_fixed(self):
        assert np.allclose(lll_reduce(np.eye(3)), np.eye(3))

    def test_rejects_bad_delta(self):
        with pytest.raises(ValueError):
            lll_reduce(np.eye(2), delta=1.5)


def count_in_ball(basis: np.ndarray, radius: float, shift: np.ndarray | None = None):
    """Tiny reference enumerator: (nonzero count, primitive count) of lattice
    (or grid) points in the Euclidean ball.  Test-local on purpose."""
    n = basis.shape[0]
    hinv = np.linalg.inv(basis)
    center = np.zeros(n) if shift is None else hinv @ shift
    reach = np.abs(hinv).sum(axis=1) * radius
    ranges = [
        np.arange(math.floor(-c - r), math.floor(c + r) + 2)
        for c, r in zip(-center, reach)
    ]
    grids = np.meshgrid(*ranges, indexing="ij")
    coeffs = np.stack([g.ravel() for g in grids], axis=1)
    pts = coeffs @ basis.T + (0.0 if shift is None else shift)
    inside = (pts * pts).sum(axis=1) <= radius * radius
    nonzero = (coeffs != 0).any(axis=1)
    if shift is None:
        count_all = int((inside & nonzero).sum())
        prim = np.gcd.reduce(np.abs(coeffs), axis=1) == 1
        return count_all, int((inside & prim).sum())
    return int(inside.sum()), 0


class TestExactSamplers:
    def test_plane_basis_determinant_and_determinism(self):
        rng = np.random.default_rng(0)
        for _ in range(500):
            basis, w = sample_lattice_exact(2, rng)
            assert w == 1.0
            assert abs(np.linalg.det(basis) - 1.0) <= 1e-12
        a, _ = sample_lattice_exact(2, np.random.default_rng(42))
        b, _ = sample_lattice_exact(2, np.random.default_rng(42))
        assert np.array_equal(a, b)

    def test_space_basis_contract(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            basis, w = sample_lattice_exact(3, rng)
            assert abs(np.linalg.det(basis) - 1.0) <= 1e-9
            assert 0.0 < w < math.inf

    def test_grid_shift_inside_fundamental_cell(self):
        rng = np.random.default_rng(2)
        g, w = sample_grid_exact(2, rng)
        theta = np.linalg.solve(g.h, g.z)
        assert np.all(theta >= 0.0) and np.all(theta < 1.0)

    def test_plane_mean_count_statistical(self):
        # invariant-law mean of the nonzero count in a ball of volume V is V;
        # 1500 exact plane samples put the check at the 4-sigma level
        volume = 20.0
        radius = math.sqrt(volume / math.pi)
        rng = np.random.default_rng(11)
        counts = []
        for _ in range(1500):
            basis, _ = sample_lattice_exact(2, rng)
            counts.append(count_in_ball(basis, radius)[0])
        counts = np.asarray(counts, dtype=float)
        stderr = counts.std(ddof=1) / math.sqrt(len(counts))
        assert abs(counts.mean() - volume) <= 4.0 * stderr

    def test_space_weighted_mean_count_statistical(self):
        # self-normalized importance-sampling mean against the same constant
        volume = 30.0
        radius = (volume / (4.0 * math.pi / 3.0)) ** (1.0 / 3.0)
        rng = np.random.default_rng(13)
        counts, weights = [], []
        for _ in range(1200):
            basis, w = sample_lattice_exact(3, rng)
            counts.append(count_in_ball(basis, radius)[0])
            weights.append(w)
        counts = np.asarray(counts, dtype=float)
        weights = np.asarray(weights)
        mean = (weights * counts).sum() / weights.sum()
        se = math.sqrt((weights**2 * (counts - mean) ** 2).sum()) / weights.sum()
        assert abs(mean - volume) <= 4.0 * se
        ess = weights.sum() ** 2 / (weights**2).sum()
        assert ess >= 0.5 * len(counts)  # the proposal is close to the target

    def test_gaussian_tier_is_biased_where_exact_is_not(self):
        # the reason tier 2 exists: the normalized Gaussian draw over-weights
        # well-rounded lattices and visibly under-counts on mean statistics
        volume = 20.0
        radius = math.sqrt(volume / math.pi)
        rng = np.random.default_rng(17)
        counts = []
        for _ in range(1500):
            g = sample_sl(2, rng)
            counts.append(count_in_ball(g.h, radius)[0])
        counts = np.asarray(counts, dtype=float)
        stderr = counts.std(ddof=1) / math.sqrt(len(counts))
        assert (volume - counts.mean()) / stderr > 8.0

    def test_rejects_small_n(self):
        with pytest.raises(ValueError):
            sample_lattice_exact(1, np.random.default_rng(0))
