"""Tests for dataset containers, class-0 splits, and the Gaussian
generative models.

Oracle strategy: covariance matrices are checked against hand-written
entries; the structured O(n*d) samplers are checked against the generic
Cholesky route distributionally (both must reproduce the population
covariance); split sizes are checked against an independent rounding
oracle; oracle error rates are checked against closed forms evaluated
with plain math.
"""
from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from npclass.data import (
    Ar1,
    Class0Split,
    CompoundSymmetry,
    Explicit,
    LabeledDataset,
    LdaModelSpec,
    generate,
    materialize_covariance,
    mu_from_beta,
    oracle_errors,
    signal_strength,
    split_class0,
)
from npclass.errors import DomainError, SingularMatrixError
from npclass.statcore import RngStream, normal_quantile, sample_mvn, spd_solve


def _spec(mu1, cov, d=None):
    mu1 = np.asarray(mu1, dtype=float)
    return LdaModelSpec(mu0=np.zeros(mu1.size), mu1=mu1, covariance=cov)


class TestCovarianceKinds:
    def test_ar1_d3_hand_entries(self):
        sigma = Ar1(0.5).matrix(3)
        expected = np.array([[1, 0.5, 0.25], [0.5, 1, 0.5], [0.25, 0.5, 1.0]])
        np.testing.assert_allclose(sigma, expected, rtol=0, atol=0)

    def test_cs_rho0_is_identity(self):
        np.testing.assert_array_equal(CompoundSymmetry(0.0).matrix(4), np.eye(4))

    def test_cs_d2_hand_entries(self):
        np.testing.assert_array_equal(
            CompoundSymmetry(0.5).matrix(2), np.array([[1.0, 0.5], [0.5, 1.0]])
        )

    def test_ar1_rho_out_of_range(self):
        with pytest.raises(DomainError):
            Ar1(1.0).matrix(3)

    def test_cs_rho_below_pd_limit(self):
        # rho must exceed -1/(d-1) for positive definiteness
        with pytest.raises(DomainError):
            CompoundSymmetry(-0.5).matrix(4)

    def test_explicit_non_pd_rejected(self):
        bad = np.array([[1.0, 2.0], [2.0, 1.0]])  # eigenvalues 3, -1
        with pytest.raises(SingularMatrixError):
            Explicit(bad).matrix(2)

    def test_explicit_shape_mismatch(self):
        with pytest.raises(DomainError):
            Explicit(np.eye(3)).matrix(2)

    @given(rho=st.floats(-0.9, 0.9), d=st.integers(1, 8))
    def test_ar1_always_positive_definite(self, rho, d):
        sigma = Ar1(rho).matrix(d)
        assert np.linalg.eigvalsh(sigma).min() > 0

    def test_materialize_covariance_delegates(self):
        spec = _spec([1.0, 1.0, 1.0], Ar1(0.5))
        np.testing.assert_array_equal(materialize_covariance(spec), Ar1(0.5).matrix(3))


class TestLabeledDataset:
    def test_class_accessors(self):
        ds = LabeledDataset(np.arange(8.0).reshape(4, 2), np.array([0, 1, 0, 1]))
        np.testing.assert_array_equal(ds.class_indices(0), [0, 2])
        np.testing.assert_array_equal(ds.class_matrix(1), [[2.0, 3.0], [6.0, 7.0]])
        assert ds.d == 2

    def test_rejects_bad_labels(self):
        with pytest.raises(DomainError):
            LabeledDataset(np.zeros((2, 2)), np.array([0, 2]))

    def test_rejects_nonfinite_features(self):
        with pytest.raises(DomainError):
            LabeledDataset(np.array([[np.nan, 0.0]]), np.array([0]))

    def test_rejects_label_length_mismatch(self):
        with pytest.raises(DomainError):
            LabeledDataset(np.zeros((3, 2)), np.array([0, 1]))


class TestModelSpec:
    def test_equal_means_rejected(self):
        with pytest.raises(DomainError):
            LdaModelSpec(mu0=np.zeros(2), mu1=np.zeros(2), covariance=Ar1(0.5))

    def test_bad_prior_rejected(self):
        with pytest.raises(DomainError):
            LdaModelSpec(
                mu0=np.zeros(2), mu1=np.ones(2), covariance=Ar1(0.5), pi0=1.0
            )

    def test_mu_from_beta_identity_covariance(self):
        np.testing.assert_array_equal(
            mu_from_beta(np.array([1.0, 2.0]), np.eye(2), np.zeros(2)), [1.0, 2.0]
        )

    def test_mu_from_beta_matches_matrix_product(self):
        sigma = Ar1(0.5).matrix(3)
        beta = 1.2 * np.ones(3)
        np.testing.assert_allclose(
            mu_from_beta(beta, sigma, np.zeros(3)), sigma @ beta, rtol=1e-15
        )

    def test_mu_from_beta_roundtrip(self):
        # recovering beta via an SPD solve must invert mu_from_beta
        rng = np.random.default_rng(7)
        for _ in range(20):
            d = int(rng.integers(2, 12))
            sigma = Ar1(0.6).matrix(d)
            beta = rng.normal(size=d)
            mu1 = mu_from_beta(beta, sigma, np.zeros(d))
            np.testing.assert_allclose(spd_solve(sigma, mu1), beta, atol=1e-8)

    def test_mu_from_beta_dimension_mismatch(self):
        with pytest.raises(DomainError):
            mu_from_beta(np.ones(3), np.eye(2), np.zeros(2))


class TestGenerate:
    def test_empty(self):
        spec = _spec([1.0, 1.0], Ar1(0.5))
        ds = generate(spec, 0, 0, RngStream(1))
        assert ds.features.shape == (0, 2) and ds.labels.size == 0

    def test_reproducible(self):
        spec = _spec([1.0, 1.0, 1.0], Ar1(0.5))
        a = generate(spec, 10, 10, RngStream(3))
        b = generate(spec, 10, 10, RngStream(3))
        np.testing.assert_array_equal(a.features, b.features)

    def test_class_means_clt(self):
        # d=3 AR(1) setting: class means within 4*sigma/sqrt(n) per coordinate
        sigma = Ar1(0.5).matrix(3)
        mu1 = mu_from_beta(1.2 * np.ones(3), sigma, np.zeros(3))
        spec = LdaModelSpec(mu0=np.zeros(3), mu1=mu1, covariance=Ar1(0.5))
        n = 100_000
        ds = generate(spec, n, n, RngStream(11))
        tol = 4.0 / math.sqrt(n)
        assert np.abs(ds.class_matrix(0).mean(axis=0)).max() < tol
        assert np.abs(ds.class_matrix(1).mean(axis=0) - mu1).max() < tol

    def test_empirical_covariance_matches_materialized(self):
        # pooled (mean-removed) second moments over 1e5 draws recover Sigma
        sigma = Ar1(0.5).matrix(3)
        mu1 = mu_from_beta(1.2 * np.ones(3), sigma, np.zeros(3))
        spec = LdaModelSpec(mu0=np.zeros(3), mu1=mu1, covariance=Ar1(0.5))
        ds = generate(spec, 50_000, 50_000, RngStream(13))
        x0 = ds.class_matrix(0) - ds.class_matrix(0).mean(axis=0)
        x1 = ds.class_matrix(1) - ds.class_matrix(1).mean(axis=0)
        pooled = (x0.T @ x0 + x1.T @ x1) / (ds.features.shape[0] - 2)
        assert np.abs(pooled - sigma).max() < 3e-2

    @pytest.mark.parametrize(
        "cov", [Ar1(0.5), Ar1(-0.4), CompoundSymmetry(0.5), CompoundSymmetry(0.9)]
    )
    def test_fast_samplers_match_cholesky_route_distributionally(self, cov):
        # the structured O(n*d) samplers must agree with the generic
        # Cholesky sampler in mean and covariance (they use different
        # draws, so only moments can match)
        d, n = 5, 60_000
        sigma = cov.matrix(d)
        spec = LdaModelSpec(mu0=np.zeros(d), mu1=np.ones(d), covariance=cov)
        fast = generate(spec, n, 0, RngStream(17)).class_matrix(0)
        from npclass.statcore import cholesky

        ref = sample_mvn(np.zeros(d), cholesky(sigma), n, RngStream(19))
        for sample in (fast, ref):
            xc = sample - sample.mean(axis=0)
            emp = xc.T @ xc / (n - 1)
            assert np.abs(emp - sigma).max() < 4e-2
        assert np.abs(fast.mean(axis=0) - ref.mean(axis=0)).max() < 3e-2

    def test_negative_sizes_rejected(self):
        with pytest.raises(DomainError):
            generate(_spec([1.0], Explicit(np.eye(1))), -1, 0, RngStream(0))


class TestSplitClass0:
    def _dataset(self, n0, n1=3):
        feats = np.arange(float(n0 + n1)).reshape(-1, 1)
        labels = np.concatenate([np.zeros(n0, dtype=int), np.ones(n1, dtype=int)])
        return LabeledDataset(feats, labels)

    def test_even_split(self):
        s = split_class0(self._dataset(10), 0.5, RngStream(1))
        assert s.train_indices.size == 5 and s.threshold_indices.size == 5

    def test_round_half_up(self):
        # 31 * 0.5 = 15.5 rounds up to 16 on the training side
        s = split_class0(self._dataset(31), 0.5, RngStream(1))
        assert s.train_indices.size == 16 and s.threshold_indices.size == 15

    def test_tau_03(self):
        s = split_class0(self._dataset(100), 0.3, RngStream(1))
        assert s.train_indices.size == 30 and s.threshold_indices.size == 70

    def test_empty_side_rejected(self):
        with pytest.raises(DomainError):
            split_class0(self._dataset(3), 0.05, RngStream(1))

    def test_tau_bounds(self):
        with pytest.raises(DomainError):
            split_class0(self._dataset(10), 0.0, RngStream(1))
        with pytest.raises(DomainError):
            split_class0(self._dataset(10), 1.0, RngStream(1))

    @given(
        n0=st.integers(2, 400),
        tau=st.floats(0.05, 0.95),
        seed=st.integers(0, 10_000),
    )
    @settings(max_examples=1000, deadline=None)
    def test_partition_property(self, n0, tau, seed):
        # union/disjointness plus the documented size rule, or a clean
        # rejection when one side would be empty
        ds = self._dataset(n0)
        n_train = int(math.floor(tau * n0 + 0.5))
        if n_train < 1 or n_train >= n0:
            with pytest.raises(DomainError):
                split_class0(ds, tau, RngStream(seed))
            return
        s = split_class0(ds, tau, RngStream(seed))
        union = np.union1d(s.train_indices, s.threshold_indices)
        np.testing.assert_array_equal(union, ds.class_indices(0))
        assert np.intersect1d(s.train_indices, s.threshold_indices).size == 0
        assert s.train_indices.size == n_train

    def test_split_only_touches_class0(self):
        ds = self._dataset(20, n1=7)
        s = split_class0(ds, 0.5, RngStream(5))
        assert set(np.concatenate([s.train_indices, s.threshold_indices])) == set(
            ds.class_indices(0)
        )


class TestOracleErrors:
    def test_delta_twice_quantile(self):
        # separation 2*Phi^{-1}(.9) at alpha=.1 puts the oracle type II
        # error exactly at .1 (the Bayes-error-10% construction)
        delta = 2.0 * normal_quantile(0.9)
        spec = LdaModelSpec(
            mu0=np.zeros(1), mu1=np.array([delta]), covariance=Explicit(np.eye(1))
        )
        t1, t2 = oracle_errors(spec, 0.1)
        assert t1 == 0.1
        assert abs(t2 - 0.1) < 1e-12

    def test_alpha_to_one_drives_type2_to_zero(self):
        spec = LdaModelSpec(
            mu0=np.zeros(1), mu1=np.array([1.0]), covariance=Explicit(np.eye(1))
        )
        assert oracle_errors(spec, 1.0 - 1e-12)[1] < 1e-6

    def test_alpha_domain(self):
        spec = LdaModelSpec(
            mu0=np.zeros(1), mu1=np.array([1.0]), covariance=Explicit(np.eye(1))
        )
        with pytest.raises(DomainError):
            oracle_errors(spec, 0.0)

    def test_signal_strength_closed_form(self):
        # with Sigma = I the Mahalanobis separation is the Euclidean norm
        spec = LdaModelSpec(
            mu0=np.zeros(2), mu1=np.array([3.0, 4.0]), covariance=Explicit(np.eye(2))
        )
        assert abs(signal_strength(spec) - 5.0) < 1e-12

    def test_monotone_in_alpha(self):
        spec = LdaModelSpec(
            mu0=np.zeros(1), mu1=np.array([1.5]), covariance=Explicit(np.eye(1))
        )
        t2 = [oracle_errors(spec, a)[1] for a in (0.05, 0.1, 0.2, 0.5)]
        assert all(b < a for a, b in zip(t2, t2[1:]))


class TestClass0SplitType:
    def test_fields(self):
        s = Class0Split(
            train_indices=np.array([0]), threshold_indices=np.array([1]), tau=0.5
        )
        assert s.tau == 0.5
