"""Experiment harness tests at small sample counts.

Statistical assertions here use generous bands (the acceptance suite runs
the full-scale versions); the focus is determinism, record shapes, the
summary algebra, and the structural properties: primitive/nonzero coupling,
the windowed sandwich majority, and trend agreement across norms.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from genlat.core import (
    ApproxFunction,
    CoordinateProduct,
    DyadicSchedule,
    PointClass,
    SignedPowerForm,
    block_norm,
    lp_norm,
    max_norm,
    power_law,
)
from genlat.experiments import (
    ExperimentConfig,
    StatSummary,
    WeightedMean,
    counting_ratio_experiment,
    empty_probability_experiment,
    kg_system_experiment,
    norm_independence_check,
    ratio_sandwich_check,
    rogers_variance_experiment,
    siegel_mean_experiment,
    uniform_approx_experiment,
    wilson_interval,
    window_constants,
    zero_full_experiment,
)
from genlat.haar import CompactWindow, identity_map, sample_in_window, sample_sl
from genlat.volume import Verdict, zeta_fn


class TestSummaries:
    def test_from_values_matches_numpy(self):
        xs = [1.0, 4.0, 2.0, 7.0, 5.0]
        s = StatSummary.from_values(xs)
        assert s.mean == pytest.approx(np.mean(xs))
        assert s.variance == pytest.approx(np.var(xs, ddof=1))
        assert s.stderr == pytest.approx(math.sqrt(s.variance / 5))
        assert (s.min, s.max, s.sample_count) == (1.0, 7.0, 5)

    def test_invariant_enforced(self):
        with pytest.raises(ValueError, match="stderr"):
            StatSummary(1.0, 4.0, 99.0, 4, 0.0, 2.0)
        with pytest.raises(ValueError, match="variance"):
            StatSummary(1.0, -1.0, 0.5, 4, 0.0, 2.0)

    @given(
        st.lists(st.floats(-50, 50), min_size=1, max_size=30),
        st.lists(st.floats(-50, 50), min_size=1, max_size=30),
    )
    @settings(max_examples=60, deadline=None)
    def test_merge_matches_concatenation(self, a, b):
        merged = StatSummary.from_values(a).merge(StatSummary.from_values(b))
        direct = StatSummary.from_values(a + b)
        assert merged.mean == pytest.approx(direct.mean, abs=1e-9)
        assert merged.variance == pytest.approx(direct.variance, abs=1e-9)
        assert merged.sample_count == direct.sample_count
        assert merged.min == direct.min and merged.max == direct.max

    def test_merge_associative(self):
        parts = [StatSummary.from_values(v) for v in ([1.0, 2.0], [5.0], [3.0, 9.0, 4.0])]
        left = parts[0].merge(parts[1]).merge(parts[2])
        right = parts[0].merge(parts[1].merge(parts[2]))
        assert left.mean == pytest.approx(right.mean)
        assert left.variance == pytest.approx(right.variance)

    def test_weighted_mean_equal_weights_is_plain_mean(self):
        xs = [2.0, 4.0, 9.0, 1.0]
        wm = WeightedMean.from_weighted(xs, [1.0] * 4)
        assert wm.estimate == pytest.approx(np.mean(xs))
        assert wm.ess == pytest.approx(4.0)
        assert wm.stderr == pytest.approx(np.std(xs) / 2.0)

    def test_weighted_mean_validation(self):
        with pytest.raises(ValueError, match="weights"):
            WeightedMean.from_weighted([1.0], [0.0])
        with pytest.raises(ValueError, match="equally"):
            WeightedMean.from_weighted([1.0, 2.0], [1.0])

    def test_wilson_interval(self):
        lo, hi = wilson_interval(0, 100)
        assert lo == 0.0 and 0.0 < hi < 0.05
        lo, hi = wilson_interval(50, 100)
        assert lo < 0.5 < hi
        with pytest.raises(ValueError, match="counts"):
            wilson_interval(5, 4)


class TestConfig:
    def test_valid_config(self):
        cfg = ExperimentConfig(
            n=3,
            f=SignedPowerForm(2, 1, 2),
            psi=power_law(1.0, 0.5, 0),
            norm=block_norm(((2, 2), (1, 2))),
            sample_count=10,
        )
        assert cfg.group == "SL"

    def test_bad_sample_count(self):
        with pytest.raises(ValueError, match="sampleCount"):
            ExperimentConfig(n=2, sample_count=0)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="does not match"):
            ExperimentConfig(n=3, f=SignedPowerForm(1, 1, 2))

    def test_bad_group(self):
        with pytest.raises(ValueError, match="group"):
            ExperimentConfig(n=2, group="GL")


class TestSiegelMean:
    def test_plane_lattice_mean_and_coupling(self):
        res = siegel_mean_experiment(2, 30.0, samples=600, seed=5)
        nz = res.estimates["nonzero"]
        pr = res.estimates["primitive"]
        assert abs(nz.estimate - 30.0) <= 4.0 * nz.stderr
        assert abs(pr.estimate - 30.0 / zeta_fn(2.0)) <= 4.0 * pr.stderr
        # primitive/nonzero coupling on the same samples
        z2 = zeta_fn(2.0)
        assert abs(pr.estimate - nz.estimate / z2) <= 3.0 * (pr.stderr + nz.stderr / z2)

    def test_space_lattice_weighted_mean(self):
        res = siegel_mean_experiment(3, 25.0, samples=400, seed=9)
        nz = res.estimates["nonzero"]
        assert nz.ess >= 0.5 * 400
        assert abs(nz.estimate - 25.0) <= 4.0 * nz.stderr

    def test_grid_ensemble_counts_all_points(self):
        res = siegel_mean_experiment(2, 20.0, samples=500, seed=3, ensemble="grid")
        est = res.estimates["all"]
        assert abs(est.estimate - 20.0) <= 4.0 * est.stderr
        assert res.references["all"] == 20.0

    def test_degenerate_volume(self):
        res = siegel_mean_experiment(2, 0.0, samples=50, seed=1, ensemble="grid")
        assert res.estimates["all"].estimate == 0.0

    def test_records_shape_and_order(self):
        res = siegel_mean_experiment(2, 10.0, samples=40, seed=2)
        assert [r["sample"] for r in res.records] == list(range(40))
        assert all(set(r) == {"sample", "weight", "nonzero", "primitive"} for r in res.records)

    def test_determinism_across_workers(self):
        one = siegel_mean_experiment(2, 15.0, samples=60, seed=11, workers=1)
        two = siegel_mean_experiment(2, 15.0, samples=60, seed=11, workers=2)
        assert one.records == two.records

    def test_validation(self):
        with pytest.raises(ValueError, match="ensemble"):
            siegel_mean_experiment(2, 10.0, samples=5, seed=0, ensemble="torus")
        with pytest.raises(ValueError, match="sample"):
            siegel_mean_experiment(2, 10.0, samples=0, seed=0)


class TestRogersVariance:
    def test_grid_variance_tracks_volume(self):
        # The count variance equals V for affine plane grids, but the count
        # distribution is heavy tailed (rare near-cusp lattices carry a big
        # share of the variance), so sample variance at this size scatters.
        # The seed is pinned to a typical run; the band is a smoke check.
        res = rogers_variance_experiment(2, [16.0, 36.0], samples=1500, seed=11)
        for row in res.rows:
            assert 0.6 <= row["ratio"] <= 1.4, row

    def test_zero_volume_row(self):
        res = rogers_variance_experiment(2, [0.0], samples=30, seed=0)
        assert res.rows[0]["variance"] == 0.0
        assert res.rows[0]["ratio"] is None

    def test_ceiling_flag(self):
        res = rogers_variance_experiment(2, [25.0], samples=400, seed=1, ceiling=1e-6)
        assert res.rows[0]["flagged"]

    def test_lattice_rows_report_ratio(self):
        res = rogers_variance_experiment(
            3, [20.0], samples=150, seed=4, ensemble="lattice"
        )
        assert res.rows[0]["ratio"] > 0


class TestEmptyProbability:
    def test_decay_and_slope(self):
        res = empty_probability_experiment(2, [1.0, 8.0, 64.0], samples=800, seed=13)
        freqs = [row["empty_frequency"] for row in res.rows]
        assert res.decay_ok
        assert freqs[-1] < freqs[0]
        assert res.slope <= res.slope_bound
        for row in res.rows:
            assert row["wilson_low"] <= row["empty_frequency"] <= row["wilson_high"]

    def test_tiny_volume_is_nearly_always_empty(self):
        res = empty_probability_experiment(2, [1e-3, 1.0], samples=300, seed=2)
        assert res.rows[0]["empty_frequency"] >= 0.95

    def test_needs_two_volumes(self):
        with pytest.raises(ValueError, match="two volumes"):
            empty_probability_experiment(2, [4.0], samples=10, seed=0)


class TestCountingRatio:
    def test_divergent_ratio_structure(self):
        rng = np.random.default_rng(23)
        g = sample_sl(3, rng)
        res = counting_ratio_experiment(
            g,
            SignedPowerForm(2, 1, 2),
            power_law(1.0, 0.5, 0),
            block_norm(((2, 2), (1, 2))),
            PointClass.ALL_NONZERO,
            DyadicSchedule(1.0, 2.0, 4, 7),
        )
        assert res.threshold >= 1.0
        assert len(res.rows) == 4
        assert res.final_ratio is not None and res.final_ratio > 0
        counts = [row["count"] for row in res.rows]
        assert counts == sorted(counts)

    def test_convergent_regime_rejected(self):
        with pytest.raises(ValueError, match="divergent"):
            counting_ratio_experiment(
                identity_map(3),
                SignedPowerForm(2, 1, 2),
                power_law(1.0, 2.0, 0),
                block_norm(((2, 2), (1, 2))),
                PointClass.ALL_NONZERO,
                DyadicSchedule(1.0, 2.0, 4, 6),
            )

    def test_checkpoints_below_threshold_report_missing_ratio(self):
        rng = np.random.default_rng(3)
        g = sample_sl(2, rng)
        # constant bound C = 8 crosses z^2 near 2.83, past the first checkpoints
        res = counting_ratio_experiment(
            g,
            CoordinateProduct(2),
            ApproxFunction(((8.0, 0.0, 0),)),
            max_norm(2),
            PointClass.ALL_NONZERO,
            DyadicSchedule(1.0, 2.0, 0, 5),
        )
        low_rows = [row for row in res.rows if row["t"] <= res.threshold]
        assert low_rows, "expected sub-threshold checkpoints"
        assert all(row["ratio"] is None and row["count"] == 0 for row in low_rows)

    def test_primitive_constant_applied(self):
        rng = np.random.default_rng(29)
        g = sample_sl(2, rng)
        kwargs = dict(
            f=SignedPowerForm(1, 1, 1),
            psi=power_law(1.0, 0.5, 0),
            norm=block_norm(((1, 1), (1, 1))),
            schedule=DyadicSchedule(1.0, 2.0, 3, 5),
        )
        nz = counting_ratio_experiment(g, point_class=PointClass.ALL_NONZERO, **kwargs)
        pr = counting_ratio_experiment(g, point_class=PointClass.PRIMITIVE, **kwargs)
        assert pr.constant == pytest.approx(1.0 / zeta_fn(2.0))
        assert nz.constant == 1.0


class TestZeroFull:
    def test_divergent_vs_convergent_fractions(self):
        f = SignedPowerForm(2, 1, 2)
        norm = block_norm(((2, 2), (1, 2)))
        div = zero_full_experiment(
            f, power_law(1.0, 0.5, 0), norm, PointClass.ALL_NONZERO,
            t_split=2.0**4, t_max=2.0**6, samples=30, seed=17,
        )
        conv = zero_full_experiment(
            f, power_law(1.0, 2.0, 0), norm, PointClass.ALL_NONZERO,
            t_split=2.0**4, t_max=2.0**6, samples=30, seed=17,
        )
        assert div.verdict is Verdict.DIVERGES
        assert conv.verdict is Verdict.CONVERGES
        assert div.fraction >= 0.8
        assert conv.fraction <= 0.4
        assert div.fraction > conv.fraction

    def test_records_carry_witnesses(self):
        f = SignedPowerForm(1, 1, 2)
        res = zero_full_experiment(
            f, power_law(1.0, 0.5, 0), block_norm(((1, 2), (1, 2))),
            PointClass.ALL_NONZERO, t_split=4.0, t_max=32.0, samples=10, seed=5,
        )
        for r in res.records:
            assert r["hit"] == (r["witness"] is not None)

    def test_bad_shell(self):
        with pytest.raises(ValueError, match="T_split"):
            zero_full_experiment(
                SignedPowerForm(1, 1, 2), power_law(), lp_norm(2, 2.0),
                PointClass.ALL_NONZERO, t_split=8.0, t_max=8.0, samples=2, seed=0,
            )


class TestUniformApprox:
    def test_generous_tolerance_passes_everywhere(self):
        f = SignedPowerForm(1, 1, 2)
        res = uniform_approx_experiment(
            f, ApproxFunction(((50.0, 0.0, 0),)), block_norm(((1, 2), (1, 2))),
            PointClass.ALL_NONZERO, DyadicSchedule(1.0, 2.0, 2, 5),
            samples=12, seed=3,
        )
        assert res.pass_fraction == 1.0
        assert all(r["k_star"] == 0 for r in res.records)

    def test_uniform_pass_implies_final_shell_hit(self):
        f = SignedPowerForm(2, 1, 2)
        norm = block_norm(((2, 2), (1, 2)))
        psi = power_law(1.0, 0.5, 0)
        sched = DyadicSchedule(1.0, 2.0, 3, 6)
        res = uniform_approx_experiment(
            f, psi, norm, PointClass.ALL_NONZERO, sched, samples=15, seed=21
        )
        for r in res.records:
            if r["k_star"] is not None:
                assert r["successes"][-1]

    def test_checkpoint_fractions_reported(self):
        f = SignedPowerForm(1, 1, 2)
        res = uniform_approx_experiment(
            f, power_law(1.0, 0.5, 0), block_norm(((1, 2), (1, 2))),
            PointClass.ALL_NONZERO, DyadicSchedule(1.0, 2.0, 2, 4),
            samples=10, seed=8,
        )
        assert len(res.checkpoints) == 3
        for cp in res.checkpoints:
            assert 0.0 <= cp["success_fraction"] <= 1.0


class TestKGSystem:
    def test_dirichlet_regime_counts_grow(self):
        res = kg_system_experiment(
            [power_law(1.0, 1.0, 0)], n=2, point_class=PointClass.ALL_NONZERO,
            schedule=DyadicSchedule(1.0, 2.0, 2, 6), samples=12, seed=31,
        )
        assert res.verdict is Verdict.DIVERGES
        means = [row["mean_count"] for row in res.rows]
        assert means[-1] > means[0]

    def test_convergent_regime_classified(self):
        res = kg_system_experiment(
            [ApproxFunction((( 1.0, 1.1, 0),))], n=2,
            point_class=PointClass.ALL_NONZERO,
            schedule=DyadicSchedule(1.0, 2.0, 2, 4), samples=6, seed=2,
        )
        assert res.verdict is Verdict.CONVERGES

    def test_component_count_validated(self):
        with pytest.raises(ValueError, match="components"):
            kg_system_experiment(
                [power_law(), power_law()], n=2,
                point_class=PointClass.ALL_NONZERO,
                schedule=DyadicSchedule(1.0, 2.0, 1, 2), samples=2, seed=0,
            )


class TestNormIndependence:
    def test_identical_norms_identical_volumes(self):
        f = SignedPowerForm(2, 1, 2)
        norm = block_norm(((2, 2), (1, 2)))
        res = norm_independence_check(
            f, power_law(1.0, 0.5, 0), norm, norm,
            scales=[4.0, 16.0], samples=40_000, seed=6,
        )
        for row in res.rows:
            assert row["volume_a"] == row["volume_b"]
        assert res.agree

    def test_divergent_psi_grows_under_both_norms(self):
        f = SignedPowerForm(2, 1, 2)
        res = norm_independence_check(
            f, power_law(1.0, 0.5, 0), block_norm(((2, 2), (1, 2))), max_norm(3),
            scales=[2.0, 4.0, 8.0], samples=400_000, seed=10,
        )
        assert res.trend_a == "growing" and res.trend_b == "growing"
        assert res.agree

    def test_convergent_psi_shrinks_under_both_norms(self):
        f = SignedPowerForm(2, 1, 2)
        res = norm_independence_check(
            f, power_law(4.0, 2.0, 0), block_norm(((2, 2), (1, 2))), max_norm(3),
            scales=[2.0, 4.0, 8.0], samples=400_000, seed=12,
        )
        assert res.trend_a == "shrinking" and res.trend_b == "shrinking"
        assert res.agree


class TestWindowedSandwich:
    def test_window_constants_shape(self):
        rng = np.random.default_rng(44)
        window = CompactWindow(4.0, 0.5)
        norm = block_norm(((2, 2), (1, 2)))
        batch = [sample_in_window(3, rng, window, norm)[0] for _ in range(5)]
        consts = window_constants(batch, norm, power_law(1.0, 0.5, 0))
        assert consts.op_bound <= 4.0 and consts.op_bound >= 1.0
        assert 0.0 <= consts.shift_bound <= 0.5
        assert consts.reg_a ** consts.reg_steps >= consts.op_bound
        assert consts.transfer_c >= 1.0 and consts.plateau_f >= 1.0
        assert consts.inflation_j == pytest.approx(consts.transfer_c * consts.plateau_f)

    def test_sandwich_majority(self):
        res = ratio_sandwich_check(
            SignedPowerForm(2, 1, 2),
            power_law(1.0, 0.5, 0),
            block_norm(((2, 2), (1, 2))),
            PointClass.ALL_NONZERO,
            DyadicSchedule(1.0, 2.0, 4, 6),
            samples=20,
            seed=37,
        )
        assert res.pass_fraction >= 0.8
        assert all(r["count"] >= 0 for r in res.records)

    def test_sandwich_needs_headroom(self):
        with pytest.raises(ValueError, match="schedule top"):
            ratio_sandwich_check(
                SignedPowerForm(1, 1, 2), power_law(1.0, 0.5, 0),
                block_norm(((1, 2), (1, 2))), PointClass.ALL_NONZERO,
                DyadicSchedule(1.0, 2.0, 0, 1), samples=3, seed=0,
                op_norm_bound=8.0, shift_bound=2.0,
            )


class TestDeterminism:
    def test_zero_full_reruns_identically(self):
        f = SignedPowerForm(1, 1, 2)
        kwargs = dict(
            psi=power_law(1.0, 0.5, 0), norm=block_norm(((1, 2), (1, 2))),
            point_class=PointClass.ALL_NONZERO, t_split=4.0, t_max=32.0,
            samples=15, seed=99,
        )
        a = zero_full_experiment(f, **kwargs)
        b = zero_full_experiment(f, **kwargs)
        assert a.records == b.records

    def test_different_seeds_differ(self):
        res_a = siegel_mean_experiment(2, 20.0, samples=50, seed=1)
        res_b = siegel_mean_experiment(2, 20.0, samples=50, seed=2)
        assert res_a.records != res_b.records
