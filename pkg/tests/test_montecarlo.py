"""Tests for the Monte-Carlo outage estimator and its auxiliaries."""

import math

import pytest
import scipy.stats

from ris_sop.analysis import sop_exact_numeric
from ris_sop.channel import CONTINUOUS, SystemConfig, db_to_linear
from ris_sop.distributions import legit_stats
from ris_sop.montecarlo import (
    BATCH_TRIALS,
    CAPTURE_COLUMNS,
    ComponentMoments,
    McConfig,
    McSopResult,
    TrialRecord,
    capture_trials,
    estimate_component_moments,
    estimate_ratio_probability,
    estimate_sop,
    write_trial_records,
    _binomial_half_width,
)


def make_config(n=8, b=2, srd_db=0.0, sre_db=0.0, se_db=-5.0, c_th=0.05):
    return SystemConfig(
        n_elements=n,
        quant_bits=b,
        gamma_srd_bar=db_to_linear(srd_db),
        gamma_sre_bar=db_to_linear(sre_db),
        gamma_se_bar=db_to_linear(se_db),
        c_th=c_th,
    )


class TestConfigTypes:
    def test_defaults(self):
        mc = McConfig(trials=100, master_seed=1)
        assert mc.workers == 1
        assert mc.confidence_level == 0.95

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(trials=0, master_seed=1),
            dict(trials=-5, master_seed=1),
            dict(trials=1.5, master_seed=1),
            dict(trials=10, master_seed=-1),
            dict(trials=10, master_seed=2**64),
            dict(trials=10, master_seed=1, workers=0),
            dict(trials=10, master_seed=1, confidence_level=0.0),
            dict(trials=10, master_seed=1, confidence_level=1.0),
        ],
    )
    def test_rejects_invalid(self, kwargs):
        with pytest.raises(ValueError):
            McConfig(**kwargs)

    def test_result_validates_ratio(self):
        with pytest.raises(ValueError):
            McSopResult(
                sop_hat=0.5,
                ci_half_width=0.1,
                outage_count=3,
                trials=10,
                elapsed_seconds=0.0,
            )
        with pytest.raises(ValueError):
            McSopResult(
                sop_hat=0.3,
                ci_half_width=-0.1,
                outage_count=3,
                trials=10,
                elapsed_seconds=0.0,
            )

    def test_trial_record_requires_consistent_split(self):
        with pytest.raises(ValueError):
            TrialRecord(
                gamma_d=10.0,
                gamma_e=1.0,
                x_component=3.0,
                y_component=1.0,
                gamma_d1=9.0,
                gamma_d2=0.5,
            )
        with pytest.raises(ValueError):
            TrialRecord(
                gamma_d=1.0,
                gamma_e=-1.0,
                x_component=1.0,
                y_component=0.0,
                gamma_d1=1.0,
                gamma_d2=0.0,
            )


class TestEstimateSop:
    def test_replay_determinism_across_workers(self):
        cfg = make_config(n=8, b=2, srd_db=5.0)
        results = [
            estimate_sop(cfg, McConfig(trials=3 * BATCH_TRIALS + 100, master_seed=99, workers=w))
            for w in (1, 4, 16)
        ]
        assert results[0].outage_count == results[1].outage_count
        assert results[0].outage_count == results[2].outage_count
        assert results[0].sop_hat == results[1].sop_hat == results[2].sop_hat
        assert results[0].ci_half_width == results[1].ci_half_width

    def test_unusable_legitimate_link_always_fails(self):
        cfg = make_config(n=8, b=1, srd_db=-100.0)
        result = estimate_sop(cfg, McConfig(trials=10_000, master_seed=3))
        assert result.sop_hat == 1.0
        assert result.outage_count == 10_000

    def test_negligible_eavesdropper_never_fails(self):
        # gamma_e is deterministically ~0 next to gamma_d, and with zero
        # target rate the secrecy capacity is surely positive.
        cfg = SystemConfig(
            n_elements=8,
            quant_bits=1,
            gamma_srd_bar=1.0,
            gamma_sre_bar=1e-300,
            gamma_se_bar=1e-300,
            c_th=0.0,
        )
        result = estimate_sop(cfg, McConfig(trials=10_000, master_seed=3))
        assert result.sop_hat == 0.0

    def test_matches_exact_numeric_within_interval(self):
        # Bound sits near 1e-2 here; the numeric SOP and the simulation
        # must agree to within three CI half-widths at this trial count.
        cfg = make_config(n=30, b=1, srd_db=0.0)
        exact = sop_exact_numeric(cfg).value
        result = estimate_sop(cfg, McConfig(trials=20_000, master_seed=1234, workers=2))
        assert abs(result.sop_hat - exact) <= 3.0 * result.ci_half_width

    def test_outage_count_monotone_in_rate(self):
        counts = []
        for c_th in (0.0, 0.05, 0.2, 1.0):
            cfg = make_config(n=8, b=2, srd_db=5.0, c_th=c_th)
            counts.append(
                estimate_sop(cfg, McConfig(trials=30_000, master_seed=77)).outage_count
            )
        assert all(a <= b for a, b in zip(counts, counts[1:]))

    def test_partial_batch_and_tiny_runs(self):
        cfg = make_config()
        r1 = estimate_sop(cfg, McConfig(trials=7, master_seed=5))
        assert r1.trials == 7
        assert 0 <= r1.outage_count <= 7
        assert r1.elapsed_seconds >= 0.0

    def test_rejects_oversized_phase_table(self):
        cfg = make_config(b=25)
        with pytest.raises(ValueError):
            estimate_sop(cfg, McConfig(trials=10, master_seed=1))

    def test_ci_calibration(self):
        # Frozen-seed calibration: the 95% interval must cover the
        # numeric SOP in at least 90 of 100 runs.  The configuration is
        # one where the Gaussian-approximation bias of the numeric value
        # is far below the interval width at this trial count.
        cfg = make_config(n=30, b=1, srd_db=-12.0)
        exact = sop_exact_numeric(cfg).value
        covered = sum(
            abs(
                (r := estimate_sop(cfg, McConfig(trials=8000, master_seed=5000 + i))).sop_hat
                - exact
            )
            <= r.ci_half_width
            for i in range(100)
        )
        assert covered >= 90


class TestConfidenceIntervals:
    @pytest.mark.parametrize("count", [0, 1, 5, 29])
    def test_small_counts_use_exact_interval(self, count):
        # Dual route: the equal-tailed binomial interval from the beta
        # quantiles must match scipy's exact proportion CI.
        trials = 10_000
        half = _binomial_half_width(count, trials, 0.95)
        ci = scipy.stats.binomtest(count, trials).proportion_ci(
            confidence_level=0.95, method="exact"
        )
        p_hat = count / trials
        expected = max(p_hat - ci.low, ci.high - p_hat)
        assert half == pytest.approx(expected, rel=1e-9)
        assert half > 0.0

    def test_large_counts_use_normal_approximation(self):
        count, trials = 500, 10_000
        p_hat = count / trials
        z = scipy.stats.norm.ppf(0.975)
        expected = z * math.sqrt(p_hat * (1 - p_hat) / trials)
        assert _binomial_half_width(count, trials, 0.95) == pytest.approx(
            expected, rel=1e-9
        )

    def test_width_shrinks_with_trials(self):
        a = _binomial_half_width(100, 1_000, 0.95)
        b = _binomial_half_width(1_000, 10_000, 0.95)
        assert b < a


@pytest.fixture(scope="module")
def moments():
    cfg = make_config(n=30, b=2, srd_db=10.0)
    return cfg, estimate_component_moments(
        cfg, McConfig(trials=200_000, master_seed=2025, workers=2)
    )


class TestComponentMoments:
    def test_x_mean_matches_model(self, moments):
        cfg, m = moments
        stats = legit_stats(cfg)
        assert abs(m.x.mean - stats.m1) <= 3.0 * m.x.mean_std_err

    def test_x_variance_matches_model(self, moments):
        cfg, m = moments
        stats = legit_stats(cfg)
        # standard error of a sample variance ~ sigma^2 sqrt(2/n)
        tol = 4.0 * stats.sigma1_sq * math.sqrt(2.0 / m.trials)
        assert abs(m.x.variance - stats.sigma1_sq) <= tol

    def test_y_symmetric_with_model_variance(self, moments):
        cfg, m = moments
        stats = legit_stats(cfg)
        assert abs(m.y.mean) <= 3.0 * m.y.mean_std_err
        tol = 4.0 * stats.sigma2_sq * math.sqrt(2.0 / m.trials)
        assert abs(m.y.variance - stats.sigma2_sq) <= tol

    def test_eavesdropper_mean_snr(self, moments):
        cfg, m = moments
        expected = cfg.n_elements * cfg.gamma_sre_bar + cfg.gamma_se_bar
        assert abs(m.gamma_e.mean - expected) <= 4.0 * m.gamma_e.mean_std_err

    def test_bounced_sum_components(self, moments):
        cfg, m = moments
        # each of Re Z, Im Z is zero-mean with variance N/2
        for summary in (m.z_re, m.z_im):
            assert abs(summary.mean) <= 3.0 * summary.mean_std_err
            tol = 4.0 * (cfg.n_elements / 2.0) * math.sqrt(2.0 / m.trials)
            assert abs(summary.variance - cfg.n_elements / 2.0) <= tol

    def test_bounced_sum_components_uncorrelated(self, moments):
        _, m = moments
        assert abs(m.corr_z) < 0.01
        assert m.corr_std_err == pytest.approx(1.0 / math.sqrt(m.trials))

    def test_continuous_control_zeroes_sine_component(self):
        cfg = make_config(n=16, b=CONTINUOUS, srd_db=5.0)
        m = estimate_component_moments(cfg, McConfig(trials=20_000, master_seed=8))
        assert m.y.mean == 0.0
        assert m.y.variance == 0.0

    def test_worker_independence_is_bitwise(self):
        cfg = make_config(n=8, b=3, srd_db=5.0)
        m1 = estimate_component_moments(
            cfg, McConfig(trials=2 * BATCH_TRIALS + 17, master_seed=6, workers=1)
        )
        m7 = estimate_component_moments(
            cfg, McConfig(trials=2 * BATCH_TRIALS + 17, master_seed=6, workers=7)
        )
        assert m1 == m7


class TestRatioProbability:
    def test_continuous_is_certain(self):
        cfg = make_config(n=8, b=CONTINUOUS)
        p = estimate_ratio_probability(cfg, McConfig(trials=5_000, master_seed=4), 0.1)
        assert p == 1.0

    def test_huge_threshold_is_certain(self):
        cfg = make_config(n=8, b=1)
        p = estimate_ratio_probability(cfg, McConfig(trials=5_000, master_seed=4), 1e12)
        assert p == 1.0

    def test_meets_analytic_floor(self):
        cfg = make_config(n=30, b=1, srd_db=10.0)
        p = estimate_ratio_probability(cfg, McConfig(trials=100_000, master_seed=21), 0.1)
        assert p >= 1.0 - 20.0 / 31.0

    def test_monotone_in_threshold(self):
        cfg = make_config(n=16, b=1)
        mc = McConfig(trials=50_000, master_seed=9)
        values = [
            estimate_ratio_probability(cfg, mc, t) for t in (0.02, 0.1, 0.5, 2.0)
        ]
        assert all(a <= b for a, b in zip(values, values[1:]))

    def test_rejects_nonpositive_threshold(self):
        cfg = make_config()
        with pytest.raises(ValueError):
            estimate_ratio_probability(cfg, McConfig(trials=10, master_seed=1), 0.0)


class TestCapture:
    def test_records_reproduce_outage_count(self):
        cfg = make_config(n=8, b=2, srd_db=5.0)
        mc = McConfig(trials=5_000, master_seed=55)
        records = capture_trials(cfg, mc)
        assert len(records) == mc.trials
        varphi = math.exp(cfg.c_th)
        recount = sum(
            1 for r in records if r.gamma_d < (1.0 + r.gamma_e) * varphi - 1.0
        )
        assert recount == estimate_sop(cfg, mc).outage_count

    def test_record_component_consistency(self):
        cfg = make_config(n=8, b=2, srd_db=5.0)
        records = capture_trials(cfg, McConfig(trials=100, master_seed=55))
        for r in records:
            assert r.gamma_d1 == pytest.approx(
                cfg.gamma_srd_bar * r.x_component**2, rel=1e-12
            )
            assert r.gamma_d2 == pytest.approx(
                cfg.gamma_srd_bar * r.y_component**2, rel=1e-12, abs=1e-300
            )

    def test_csv_round_trip(self, tmp_path):
        cfg = make_config(n=4, b=1)
        records = capture_trials(cfg, McConfig(trials=50, master_seed=7))
        path = tmp_path / "trials.csv"
        write_trial_records(records, path)
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == ",".join(CAPTURE_COLUMNS)
        assert len(lines) == 51
        for line, rec in zip(lines[1:], records):
            fields = [float(f) for f in line.split(",")]
            assert fields == [getattr(rec, col) for col in CAPTURE_COLUMNS]
