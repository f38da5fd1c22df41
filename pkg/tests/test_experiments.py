"""Tests for the Monte-Carlo experiment presets and drivers.

Oracle strategy: preset parameters are pinned against their published
values (a golden-parameter test); aggregate definitions are re-derived
from per-repetition records; closed-form scales and oracle error rates
are verified by plugging back into the normal CDF; the drivers are
exercised at tiny repetition counts where exact bookkeeping can be
asserted.
"""
from __future__ import annotations

import math

import numpy as np
import pytest

from npclass.classifier import NpMethod, TrainOptions
from npclass.data import Ar1, CompoundSymmetry, LdaModelSpec, mu_from_beta
from npclass.errors import DomainError
from npclass.experiments import (
    EigenBoundReport,
    ExperimentReport,
    ExperimentSpec,
    Setting,
    example2_scale,
    oracle_type2,
    preset,
    preset_ids,
    run_eigenbound_study,
    run_experiment,
    run_split_study,
)
from npclass.statcore import normal_cdf, normal_quantile


def _small_setting(n0=120, n1=80, label="s", test=800, tau=0.5):
    sigma = Ar1(0.5).matrix(3)
    beta = 1.2 * np.ones(3)
    mu1 = mu_from_beta(beta, sigma, np.zeros(3))
    model = LdaModelSpec(mu0=np.zeros(3), mu1=mu1, covariance=Ar1(0.5))
    delta = float(np.sqrt(beta @ (sigma @ beta)))
    return Setting(label=label, model=model, n0_total=n0, n1=n1, alpha=0.1,
                   delta0=0.1, tau=tau, test0=test, test1=test,
                   oracle_delta=delta)


class TestPresetGoldenParameters:
    def test_ids_complete(self):
        assert preset_ids() == [
            "ex1a", "ex1b", "ex1c", "ex1d", "ex2a", "ex2b", "ex2c", "ex2d",
            "ex3", "ex4", "ex5", "ex6a", "ex6b", "ex7", "ex8",
        ]

    def test_ex3_parameters(self):
        spec = preset("ex3")
        assert spec.reps == 1000 and spec.seed == 42
        (s,) = spec.settings
        assert s.model.d == 1000 and s.n0_total == 200 and s.n1 == 200
        assert s.alpha == 0.1 and s.delta0 == 0.1 and s.tau == 0.5
        assert s.test0 == 10_000 and s.test1 == 10_000
        assert isinstance(s.model.covariance, Ar1) and s.model.covariance.rho == 0.5
        # discriminant direction 0.556 * (3, 1.5, 0, 0, 2, 0, ...)
        sigma = s.model.sigma()
        beta = np.linalg.solve(sigma, s.model.mu1 - s.model.mu0)
        expected = np.zeros(1000)
        expected[:5] = 0.556 * np.array([3.0, 1.5, 0.0, 0.0, 2.0])
        np.testing.assert_allclose(beta, expected, atol=1e-8)
        assert spec.methods == ["np-slda", "np-penlog", "np-svm", "pnp-slda", "slda"]

    def test_ex4_ex5_parameters(self):
        s4 = preset("ex4").settings[0]
        assert s4.model.d == 2000 and s4.n0_total == 300 and s4.n1 == 300
        assert isinstance(s4.model.covariance, CompoundSymmetry)
        assert s4.model.covariance.rho == 0.5
        assert s4.alpha == 0.1 and s4.delta0 == 0.1
        s5 = preset("ex5").settings[0]
        assert s5.model.d == 3000 and s5.n0_total == 400 and s5.n1 == 400
        assert s5.alpha == 0.2 and s5.delta0 == 0.1

    def test_ex1_grids(self):
        a = preset("ex1a")
        assert [s.n0_total for s in a.settings] == [20, 70, 120, 170, 220, 270, 320, 370]
        assert all(s.n1 == s.n0_total and s.model.d == 3 for s in a.settings)
        b = preset("ex1b")
        assert all(s.n1 == 500 for s in b.settings)
        c = preset("ex1c")
        assert [s.model.d for s in c.settings] == [3, 6, 9, 12, 15, 18, 21, 24, 26, 30]
        assert all(s.n0_total == 125 and s.n1 == 125 for s in c.settings)
        assert a.methods == ["np-lda", "np-slda", "pnp-lda", "pnp-slda"]

    def test_ex1_separation_constant_across_grids(self):
        # the active direction is 1.2 on the first three coordinates
        # regardless of d, so the separation sqrt(beta' Sigma beta) is
        # the same for every ex1 setting
        sigma3 = Ar1(0.5).matrix(3)
        beta3 = 1.2 * np.ones(3)
        expected = math.sqrt(beta3 @ sigma3 @ beta3)
        for spec_id in ("ex1a", "ex1b", "ex1c", "ex1d"):
            for s in preset(spec_id).settings:
                assert abs(s.oracle_delta - expected) < 1e-12

    def test_ex2_oracle_type2_constant_in_d(self):
        for spec_id in ("ex2b", "ex2c"):
            for s in preset(spec_id).settings:
                assert abs(oracle_type2(s) - 0.112) < 1e-10

    def test_ex6_ex7_grids(self):
        a = preset("ex6a")
        assert [s.n1 // s.n0_total for s in a.settings] == [1, 2, 4, 8, 16, 32, 64, 128, 256]
        assert all(s.n0_total == 100 and s.test0 == 0 and s.test1 == 100_000
                   for s in a.settings)
        b = preset("ex6b")
        assert [s.n0_total for s in b.settings] == [100, 150, 200, 250, 300, 350, 400, 450, 500]
        e7 = preset("ex7")
        assert all(s.model.d == 20 for s in e7.settings)
        assert [s.n1 // s.n0_total for s in e7.settings] == [1, 2, 4, 8, 16]

    def test_reps_override(self):
        assert preset("ex3", reps=7).reps == 7

    def test_unknown_id(self):
        with pytest.raises(DomainError, match="ex1a"):
            preset("nope")

    def test_reps_validation(self):
        with pytest.raises(DomainError):
            ExperimentSpec("x", [], [], reps=0)


class TestExample2Scale:
    def test_closed_form(self):
        # c = (z_{1-alpha} - z_{target}) / sqrt(1' Sigma 1)
        for d in (3, 6, 12):
            sigma = Ar1(0.5).matrix(d)
            ones = np.ones(d)
            expected = (normal_quantile(0.9) - normal_quantile(0.112)) / math.sqrt(
                ones @ sigma @ ones
            )
            assert abs(example2_scale(d) - expected) < 1e-12

    def test_oracle_type2_missing_delta(self):
        s = _small_setting()
        s.oracle_delta = None
        with pytest.raises(DomainError):
            oracle_type2(s)


class TestRunExperiment:
    def test_single_rep_echoes_error_pair(self):
        spec = ExperimentSpec("custom", [_small_setting()], ["np-lda"], reps=1, seed=5)
        report = run_experiment(spec, keep_per_rep=True)
        agg = report.per_setting["s"]["np-lda"]
        assert agg.status == "ok" and agg.n_reps == 1
        (pair,) = agg.per_rep
        assert agg.type1_mean == pair[0] and agg.type2_mean == pair[1]
        assert agg.type2_sd == 0.0
        assert agg.violation_rate == float(pair[0] > 0.1)

    def test_violation_rate_definition(self):
        # the aggregate must equal the indicator average recomputed from
        # the per-repetition records
        spec = ExperimentSpec("custom", [_small_setting()], ["np-lda", "pnp-lda"],
                              reps=6, seed=9)
        report = run_experiment(spec, keep_per_rep=True)
        for agg in report.per_setting["s"].values():
            t1 = np.array([p[0] for p in agg.per_rep])
            t2 = np.array([p[1] for p in agg.per_rep])
            assert agg.violation_rate == float(np.mean(t1 > 0.1))
            assert abs(agg.type2_mean - t2.mean()) < 1e-15
            assert abs(agg.type2_sd - t2.std(ddof=1)) < 1e-15

    def test_determinism(self):
        spec = ExperimentSpec("custom", [_small_setting()], ["np-lda"], reps=3, seed=11)
        a = run_experiment(spec, keep_per_rep=True)
        b = run_experiment(spec, keep_per_rep=True)
        assert a.per_setting["s"]["np-lda"].per_rep == b.per_setting["s"]["np-lda"].per_rep
        assert a.to_csv() == b.to_csv()

    def test_unsupported_methods_reported(self):
        spec = ExperimentSpec("custom", [_small_setting()],
                              ["np-lda", "np-penlog", "np-svm", "np-randomforest"],
                              reps=1, seed=3)
        report = run_experiment(spec)
        for name in ("np-penlog", "np-svm", "np-randomforest"):
            assert report.per_setting["s"][name].status == "unsupported"

    def test_infeasible_setting_recorded_na(self):
        # N0=20 at alpha=delta0=.1 leaves 10 < 22 for the umbrella
        spec = ExperimentSpec("custom", [_small_setting(n0=20, n1=80)],
                              ["np-lda", "pnp-lda"], reps=1, seed=3)
        report = run_experiment(spec)
        na = report.per_setting["s"]["np-lda"]
        assert na.status == "NA" and "below minimum" in na.note
        assert report.per_setting["s"]["pnp-lda"].status == "ok"

    def test_csv_shape(self):
        spec = ExperimentSpec("custom", [_small_setting()],
                              ["np-lda", "np-penlog"], reps=1, seed=3)
        csv = run_experiment(spec).to_csv()
        lines = csv.strip().split("\n")
        assert lines[0] == "setting,method,violation_rate,type2_mean,type2_sd,n_reps"
        assert len(lines) == 3
        assert lines[2] == "s,np-penlog,unsupported,unsupported,unsupported,0"

    def test_json_roundtrip_fields(self):
        import json

        spec = ExperimentSpec("custom", [_small_setting()], ["np-lda"], reps=2, seed=3)
        doc = json.loads(run_experiment(spec).to_json())
        assert doc["experiment_id"] == "custom"
        assert doc["config"]["reps"] == 2
        assert "np-lda" in doc["per_setting"]["s"]

    def test_ex8_rejected(self):
        with pytest.raises(DomainError, match="eigenvalue"):
            run_experiment(preset("ex8"))

    def test_type2_tracks_oracle(self):
        # with generous samples the trained type II error is near the
        # closed-form oracle level (within Monte-Carlo slack)
        setting = _small_setting(n0=400, n1=400, test=4000)
        spec = ExperimentSpec("custom", [setting], ["np-lda"], reps=10, seed=21)
        report = run_experiment(spec)
        t2 = report.per_setting["s"]["np-lda"].type2_mean
        target = oracle_type2(setting)
        assert t2 >= target - 0.02  # no estimator beats the oracle
        assert t2 <= target + 0.15


class TestRunSplitStudy:
    def test_single_rep_degenerate(self):
        setting = _small_setting(n0=200, n1=100, test=500)
        spec = ExperimentSpec("custom", [setting], ["np-lda"], reps=1, seed=7)
        report = run_split_study(spec, method=NpMethod.NP_LDA,
                                 tau_grid=(0.3, 0.5), folds=3)
        stats = report.per_setting["s"]
        # with one repetition the adaptive median equals the grid value
        # at the chosen proportion and tau_opt is the single argmin
        assert stats["tau_ada"] in (0.3, 0.5)
        assert stats["tau_opt"] in (0.3, 0.5)
        assert stats["ave_adaptive_median"] in stats["ave_fixed"].values()
        assert set(stats["ave_fixed"]) == {0.3, 0.5}

    def test_single_feasible_tau(self):
        # N0=25: only tau=.1 leaves >= 22 left-out points
        setting = _small_setting(n0=25, n1=60, test=300)
        spec = ExperimentSpec("custom", [setting], ["np-lda"], reps=2, seed=13)
        report = run_split_study(spec, method=NpMethod.NP_LDA, folds=3)
        stats = report.per_setting["s"]
        assert set(stats["ave_fixed"]) == {0.1}
        assert stats["tau_opt"] == 0.1 and stats["tau_ada"] == 0.1

    def test_csv_layout(self):
        setting = _small_setting(n0=200, n1=60, test=200)
        spec = ExperimentSpec("custom", [setting], ["np-lda"], reps=1, seed=17)
        report = run_split_study(spec, method=NpMethod.NP_LDA,
                                 tau_grid=(0.5,), folds=3)
        lines = report.to_csv().strip().split("\n")
        assert lines[0] == "setting,statistic,value"
        assert any("ave_fixed_tau=0.5" in ln for ln in lines)


class TestRunEigenboundStudy:
    def test_small_study_high_coverage(self):
        report = run_eigenbound_study(reps=40, seed=1, dims=(3,), rhos=(0.5,),
                                      n0_grid=(100,))
        rows = report.rows
        assert len(rows) == 2  # AR1 and CS
        for row in rows:
            assert row["probability"] >= 0.95
            assert row["n_reps"] == 40

    def test_csv_header(self):
        report = run_eigenbound_study(reps=2, seed=1, dims=(3,), rhos=(0.5,),
                                      n0_grid=(60,))
        lines = report.to_csv().strip().split("\n")
        assert lines[0] == "d,covariance,rho,n0,probability,n_reps"
        assert len(lines) == 3

    def test_determinism(self):
        a = run_eigenbound_study(reps=5, seed=2, dims=(3,), rhos=(0.9,), n0_grid=(80,))
        b = run_eigenbound_study(reps=5, seed=2, dims=(3,), rhos=(0.9,), n0_grid=(80,))
        assert a.rows == b.rows
