"""Conditional functionals: identities against the analytic jittered density,
then statistical checks on fitted KDE models."""

import numpy as np
import pytest
import scipy.stats
from numpy.testing import assert_allclose

from jitterkit import (
    AnalyticJitteredDensity,
    ColumnSchema,
    DiscretePmf,
    FunctionalQuery,
    GaussianConditional,
    InvalidParameterError,
    JitteredDataset,
    KdeModel,
    MixedDataset,
    NoLocalDataError,
    NoiseSpec,
    Standardization,
    SyntheticMixedModel,
    classify,
    cond_cdf,
    cond_mean,
    cond_quantile,
    dummy_code,
    fit_kde,
    get_kernel,
    true_conditional,
)

from conftest import discrete_dataset

PMFS = {
    "bernoulli": DiscretePmf.bernoulli(0.3),
    "binomial": DiscretePmf.binomial(4, 0.3),
}


def _mean_q():
    return FunctionalQuery(kind="mean", response_index=0, response_kind="discrete")


def _cdf_q(t):
    return FunctionalQuery(kind="cdf", response_index=0, response_kind="discrete",
                           threshold=t)


def _quantile_q(alpha):
    return FunctionalQuery(kind="quantile", response_index=0, response_kind="discrete",
                           alpha=alpha)


class TestAnalyticIdentities:
    """The correction-term identity: functionals of the exact jittered
    density reproduce the original discrete functionals."""

    @pytest.mark.parametrize("name", list(PMFS))
    def test_mean(self, name, battery_spec):
        pmf = PMFS[name]
        dens = AnalyticJitteredDensity.from_pmf(pmf, battery_spec)
        est = cond_mean(dens, _mean_q())
        assert est.value == pytest.approx(pmf.mean(), abs=1e-8)
        assert est.denominator_mass == pytest.approx(1.0, abs=1e-8)

    @pytest.mark.parametrize("name", list(PMFS))
    def test_cdf_every_integer(self, name, battery_spec):
        pmf = PMFS[name]
        dens = AnalyticJitteredDensity.from_pmf(pmf, battery_spec)
        for t in range(pmf.support_min - 1, pmf.support_max + 2):
            est = cond_cdf(dens, _cdf_q(t))
            assert est.value == pytest.approx(pmf.cdf(t), abs=1e-8)

    @pytest.mark.parametrize("name", list(PMFS))
    def test_quantile_grid(self, name, battery_spec):
        # levels kept away from the CDF jump values, where the quantile
        # function is discontinuous and any float comparison is knife-edge
        pmf = PMFS[name]
        dens = AnalyticJitteredDensity.from_pmf(pmf, battery_spec)
        for alpha in (0.05, 0.24, 0.3, 0.5, 0.65, 0.9, 0.99):
            est = cond_quantile(dens, _quantile_q(alpha))
            assert est.value == pmf.quantile(alpha)

    def test_quantile_alpha_zero_is_window_floor(self, binom43):
        dens = AnalyticJitteredDensity.from_pmf(binom43, NoiseSpec(0.8, 5, dims=1))
        est = cond_quantile(dens, _quantile_q(0.0))
        assert est.value == binom43.support_min - 2

    def test_correction_decomposition_theta_zero(self):
        """Bernoulli(0.3), uniform noise: the partial integral up to 0 and
        the correction term are each 0.35, summing to the true CDF 0.7."""
        pmf = DiscretePmf.bernoulli(0.3)
        spec = NoiseSpec(theta=0.0, nu=1, dims=1)
        dens = AnalyticJitteredDensity.from_pmf(pmf, spec)
        sl = dens.response_slice(0, {})
        from jitterkit import adaptive_integral

        denom = adaptive_integral(sl.density, sl.lower, sl.upper, tol=1e-12,
                                  breakpoints=sl.breakpoints)
        partial = adaptive_integral(sl.density, sl.lower, 0.0, tol=1e-12,
                                    breakpoints=sl.breakpoints)
        correction = sl.density(0.0) / (2.0 * denom)
        assert partial / denom == pytest.approx(0.35, abs=1e-10)
        assert correction == pytest.approx(0.35, abs=1e-10)
        est = cond_cdf(dens, _cdf_q(0))
        assert est.value == pytest.approx(0.7, abs=1e-10)

    def test_cdf_thresholds_beyond_range(self, binom43):
        dens = AnalyticJitteredDensity.from_pmf(binom43, NoiseSpec(0.4, 2, dims=1))
        assert cond_cdf(dens, _cdf_q(binom43.support_min - 2)).value == 0.0
        assert cond_cdf(dens, _cdf_q(binom43.support_max + 2)).value == pytest.approx(
            1.0, abs=1e-10
        )

    def test_cdf_monotone_in_threshold(self, binom43):
        dens = AnalyticJitteredDensity.from_pmf(binom43, NoiseSpec(0.8, 5, dims=1))
        vals = [cond_cdf(dens, _cdf_q(t)).value for t in range(-2, 7)]
        assert np.all(np.diff(vals) >= -1e-12)


class TestAnalyticContinuousResponse:
    """With a continuous response the functionals carry no correction term
    and match the conditional gaussian closed forms."""

    def _density(self):
        pmf = DiscretePmf.binomial(4, 0.3)
        cont = GaussianConditional(mean_intercept=1.0, mean_slope=2.0, scale_intercept=0.5)
        model = SyntheticMixedModel(margin=pmf, continuous=cont)
        return AnalyticJitteredDensity(model=model, spec=NoiseSpec(0.8, 5, dims=1))

    def test_conditional_mean(self):
        dens = self._density()
        q = FunctionalQuery(kind="mean", response_index=1, response_kind="continuous",
                            covariate_point={0: 2.0})
        assert cond_mean(dens, q).value == pytest.approx(5.0, abs=1e-8)

    def test_conditional_cdf(self):
        dens = self._density()
        q = FunctionalQuery(kind="cdf", response_index=1, response_kind="continuous",
                            covariate_point={0: 2.0}, threshold=5.0)
        assert cond_cdf(dens, q).value == pytest.approx(0.5, abs=1e-8)

    def test_conditional_quantile_bisection(self):
        dens = self._density()
        q = FunctionalQuery(kind="quantile", response_index=1, response_kind="continuous",
                            covariate_point={0: 2.0}, alpha=0.975)
        expected = scipy.stats.norm.ppf(0.975, loc=5.0, scale=0.5)
        assert cond_quantile(dens, q).value == pytest.approx(expected, abs=1e-7)

    def test_marginal_mean_over_discrete(self):
        # marginalizing the jittered coordinate: E[X] = 1 + 2 E[Z] = 3.4
        dens = self._density()
        q = FunctionalQuery(kind="mean", response_index=1, response_kind="continuous")
        assert cond_mean(dens, q).value == pytest.approx(3.4, abs=1e-8)

    def test_mean_then_true_conditional_agree(self):
        dens = self._density()
        q = FunctionalQuery(kind="mean", response_index=1, response_kind="continuous",
                            covariate_point={0: 3.0})
        expected = true_conditional(dens.model, "mean", given_z=3)
        assert cond_mean(dens, q).value == pytest.approx(expected, abs=1e-8)

    def test_cdf_monotone_on_fine_grid(self):
        dens = self._density()
        vals = []
        for t in np.linspace(2.0, 8.0, 61):
            q = FunctionalQuery(kind="cdf", response_index=1, response_kind="continuous",
                                covariate_point={0: 2.0}, threshold=float(t))
            vals.append(cond_cdf(dens, q).value)
        assert np.all(np.diff(vals) >= -1e-10)
        assert all(0.0 <= v <= 1.0 for v in vals)


class TestQueryValidation:
    def test_bad_kind(self):
        with pytest.raises(InvalidParameterError):
            FunctionalQuery(kind="mode", response_index=0, response_kind="discrete")

    def test_alpha_out_of_range(self):
        with pytest.raises(InvalidParameterError):
            FunctionalQuery(kind="quantile", response_index=0, response_kind="discrete",
                            alpha=1.5)

    def test_non_integer_threshold_for_discrete(self):
        with pytest.raises(InvalidParameterError):
            FunctionalQuery(kind="cdf", response_index=0, response_kind="discrete",
                            threshold=0.5)

    def test_covariate_point_includes_response(self):
        with pytest.raises(InvalidParameterError):
            FunctionalQuery(kind="mean", response_index=0, response_kind="discrete",
                            covariate_point={0: 1.0})

    def test_class_probs_needs_columns(self):
        with pytest.raises(InvalidParameterError):
            FunctionalQuery(kind="class_probs", response_index=0, response_kind="discrete")

    def test_kind_mismatch_raises(self, binom43):
        dens = AnalyticJitteredDensity.from_pmf(binom43, NoiseSpec(0.0, 1, dims=1))
        with pytest.raises(InvalidParameterError):
            cond_mean(dens, _cdf_q(0))


def _constant_response_model(c=2.0, n=40):
    """Hand-built KDE over (y, x) with constant response; the automatic
    fit would reject the zero-variance column, the estimator itself is fine."""
    rng = np.random.default_rng(0)
    rows = np.column_stack([np.full(n, c), rng.uniform(0, 1, n)])
    origin = MixedDataset(
        (ColumnSchema("y", "continuous"), ColumnSchema("x", "continuous")), rows
    )
    spec = NoiseSpec(theta=0.8, nu=5, dims=0)
    rep = JitteredDataset(origin=origin, noise=spec, seed=0, replicate_index=0, rows=rows)
    return KdeModel(
        kernel=get_kernel("gaussian"),
        noise=spec,
        seed=0,
        bandwidths=np.array([0.3, 0.3]),
        transform=Standardization(means=np.zeros(2), scales=np.ones(2)),
        replicates=(rep,),
    )


class TestKdeFunctionals:
    def test_constant_response_mean(self):
        model = _constant_response_model(c=2.0)
        q = FunctionalQuery(kind="mean", response_index=0, response_kind="continuous",
                            covariate_point={1: 0.5})
        assert cond_mean(model, q).value == pytest.approx(2.0, abs=1e-9)

    def test_binomial_mean_consistency(self, binom43):
        ds = discrete_dataset(binom43, 8000, seed=31)
        model = fit_kde(ds, NoiseSpec(0.8, 5, dims=1), seed=32)
        est = cond_mean(model, _mean_q())
        assert est.value == pytest.approx(1.2, abs=0.05)
        assert est.denominator_mass == pytest.approx(1.0, abs=1e-3)

    def test_binomial_cdf_and_median(self, binom43):
        ds = discrete_dataset(binom43, 4000, seed=33)
        model = fit_kde(ds, NoiseSpec(0.8, 5, dims=1), seed=34)
        assert cond_cdf(model, _cdf_q(1)).value == pytest.approx(0.6517, abs=0.04)
        assert cond_quantile(model, _quantile_q(0.5)).value == 1.0

    def test_mean_sandwich(self, binom43):
        ds = discrete_dataset(binom43, 400, seed=35)
        model = fit_kde(ds, NoiseSpec(0.8, 5, dims=1), num_jitters=2, seed=36)
        est = cond_mean(model, _mean_q())
        assert ds.rows[:, 0].min() <= est.value <= ds.rows[:, 0].max()

    def test_cdf_monotone_on_kde(self, binom43):
        ds = discrete_dataset(binom43, 500, seed=37)
        model = fit_kde(ds, NoiseSpec(0.8, 5, dims=1), seed=38)
        vals = [cond_cdf(model, _cdf_q(t)).value for t in range(-2, 7)]
        assert np.all(np.diff(vals) >= -1e-10)
        assert all(0.0 <= v <= 1.0 for v in vals)

    def test_quantile_cdf_coherence_on_kde(self, binom43):
        ds = discrete_dataset(binom43, 1000, seed=39)
        model = fit_kde(ds, NoiseSpec(0.8, 5, dims=1), seed=40)
        for alpha in (0.1, 0.3, 0.5, 0.7, 0.9):
            t = cond_quantile(model, _quantile_q(alpha)).value
            assert cond_cdf(model, _cdf_q(int(t))).value >= alpha - 1e-8

    def test_no_local_data_raises(self):
        rng = np.random.default_rng(4)
        rows = np.column_stack([rng.integers(0, 3, 60).astype(float),
                                rng.normal(size=60)])
        ds = MixedDataset(
            (ColumnSchema("z", "discrete_ordered"), ColumnSchema("x", "continuous")), rows
        )
        model = fit_kde(ds, NoiseSpec(0.8, 5, dims=1), seed=5)
        q = FunctionalQuery(kind="mean", response_index=0, response_kind="discrete",
                            covariate_point={1: 500.0})
        with pytest.raises(NoLocalDataError):
            cond_mean(model, q)


def _two_class_dataset(n, seed, balanced=True):
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, 2, n) if balanced else np.zeros(n, dtype=int)
    x = rng.normal(size=n)
    schema = (ColumnSchema("c", "categorical", ("a", "b")), ColumnSchema("x", "continuous"))
    ds = MixedDataset(schema, np.column_stack([labels.astype(float), x]))
    return dummy_code(ds, "c")


class TestClassify:
    def test_balanced_classes(self):
        ds = _two_class_dataset(4000, seed=50)
        model = fit_kde(ds, NoiseSpec(0.8, 5, dims=2), seed=51)
        q = FunctionalQuery(kind="class_probs", response_index=0, response_kind="discrete",
                            covariate_point={2: 0.0}, class_columns=(0, 1))
        est = classify(model, q)
        assert_allclose(est.value, [0.5, 0.5], atol=0.06)
        assert est.value.sum() == pytest.approx(1.0, abs=1e-12)

    def test_deterministic_class(self):
        # all rows in class a, encoded directly as dummy columns; the
        # jittered dummy means carry O(1/sqrt(n)) noise, so the estimate
        # approaches (1, 0) rather than hitting it exactly
        n = 2000
        rng = np.random.default_rng(52)
        rows = np.column_stack([np.ones(n), np.zeros(n), rng.normal(size=n)])
        schema = (
            ColumnSchema("c=a", "discrete_ordered"),
            ColumnSchema("c=b", "discrete_ordered"),
            ColumnSchema("x", "continuous"),
        )
        ds = MixedDataset(schema, rows)
        model = fit_kde(ds, NoiseSpec(0.8, 5, dims=2), num_jitters=3, seed=53)
        q = FunctionalQuery(kind="class_probs", response_index=0, response_kind="discrete",
                            covariate_point={2: 0.0}, class_columns=(0, 1))
        est = classify(model, q)
        assert est.value[0] == pytest.approx(1.0, abs=0.05)
        assert est.value[1] == pytest.approx(0.0, abs=0.05)
        assert est.value.sum() == pytest.approx(1.0, abs=1e-12)

    def test_probabilities_sum_to_one(self):
        ds = _two_class_dataset(500, seed=54)
        model = fit_kde(ds, NoiseSpec(0.4, 2, dims=2), num_jitters=2, seed=55)
        for x0 in (-1.0, 0.0, 1.5):
            q = FunctionalQuery(kind="class_probs", response_index=0,
                                response_kind="discrete", covariate_point={2: x0},
                                class_columns=(0, 1))
            est = classify(model, q)
            assert est.value.sum() == pytest.approx(1.0, abs=1e-12)
            assert np.all(est.value >= 0.0)

    def test_non_dummy_column_rejected(self, binom43):
        ds = discrete_dataset(binom43, 100, seed=56)
        model = fit_kde(ds, NoiseSpec(0.8, 5, dims=1), seed=57)
        from jitterkit import SchemaError

        q = FunctionalQuery(kind="class_probs", response_index=0, response_kind="discrete",
                            class_columns=(0,))
        with pytest.raises(SchemaError):
            classify(model, q)
