"""Licensed under The MIT License (MIT) - Copyright (c) 2023-present the gumbel-phcs authors. See LICENSE"""

from __future__ import annotations

import numpy as np
import pytest

from gumbel_phcs import (
    AdaptiveCensoredSample,
    CensoringPlan,
    DomainError,
    Estimator,
    EstimationError,
    FitReport,
    Params,
    fit_mle,
    generate,
    loglik,
    observed_information,
    profile_loglik,
    sample_iid,
    score,
)
from gumbel_phcs.mle import newton_fit

TRUTH = Params(1.5, 0.75)


def numeric_gradient(f, p: Params, h: float = 1e-6) -> np.ndarray:
    gradient = np.empty(2)
    for index in range(2):
        step = np.zeros(2)
        step[index] = h * p.as_array()[index]
        upper, lower = Params.from_array(p.as_array() + step), Params.from_array(p.as_array() - step)
        gradient[index] = (f(upper) - f(lower)) / (2 * step[index])
    return gradient


class TestCovid:
    def test_published_fit(self, covid: np.ndarray) -> None:
        report = fit_mle(AdaptiveCensoredSample.complete(covid))
        assert report.converged
        assert report.method is Estimator.MLE
        assert report.estimate.alpha == pytest.approx(2.0130, rel=5e-3)
        assert report.estimate.beta == pytest.approx(82.7737, rel=5e-3)
        assert -report.loglik == pytest.approx(300.6597, abs=0.01)

    def test_standard_errors(self, covid: np.ndarray) -> None:
        report = fit_mle(AdaptiveCensoredSample.complete(covid))
        errors = report.standard_errors()
        assert np.all(errors > 0)
        np.testing.assert_allclose(np.diag(report.covariance()), errors**2)


class TestDerivatives:
    @pytest.mark.parametrize("point", [Params(1.5, 0.75), Params(1.1, 0.6), Params(2.2, 1.0)])
    def test_score_matches_differences(self, censored: AdaptiveCensoredSample, point: Params) -> None:
        numeric = numeric_gradient(lambda p: loglik(p, censored), point)
        np.testing.assert_allclose(score(point, censored), numeric, rtol=1e-5, atol=1e-6)

    @pytest.mark.parametrize("point", [Params(1.5, 0.75), Params(1.1, 0.6)])
    def test_score_on_adapted_sample(self, adapted: AdaptiveCensoredSample, point: Params) -> None:
        assert adapted.is_adapted
        numeric = numeric_gradient(lambda p: loglik(p, adapted), point)
        np.testing.assert_allclose(score(point, adapted), numeric, rtol=1e-5, atol=1e-6)

    @pytest.mark.parametrize("point", [Params(1.5, 0.75), Params(2.2, 1.0)])
    def test_information_matches_differences(self, adapted: AdaptiveCensoredSample, point: Params) -> None:
        rows = [numeric_gradient(lambda p, i=i: score(p, adapted)[i], point, h=1e-5) for i in range(2)]
        np.testing.assert_allclose(observed_information(point, adapted), -np.array(rows), rtol=1e-5, atol=1e-5)

    def test_information_symmetric(self, censored: AdaptiveCensoredSample) -> None:
        info = observed_information(TRUTH, censored)
        assert info[0, 1] == pytest.approx(info[1, 0])


class TestFit:
    @pytest.mark.parametrize("kind", [1, 2, 3])
    def test_score_vanishes(self, kind: int) -> None:
        sample = generate(TRUTH, CensoringPlan.from_scheme(kind, 40, 15, 1.5), 21)
        report = fit_mle(sample)
        assert report.converged
        assert np.max(np.abs(score(report.estimate, sample))) < 1e-6
        assert np.all(np.linalg.eigvalsh(report.observed_info) > 0)

    def test_adapted_sample(self, adapted: AdaptiveCensoredSample) -> None:
        report = fit_mle(adapted)
        assert report.converged
        assert report.loglik >= loglik(TRUTH, adapted)

    @pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0, 3.0])
    def test_closed_form_beta(self, alpha: float) -> None:
        data = sample_iid(TRUTH, 20, 8)
        report = fit_mle(AdaptiveCensoredSample.complete(data), fixed_alpha=alpha)
        assert report.estimate.alpha == alpha
        assert report.estimate.beta == pytest.approx(20 / np.sum(data**-alpha), rel=1e-8)

    def test_init_is_used(self, censored: AdaptiveCensoredSample) -> None:
        default = fit_mle(censored)
        started = fit_mle(censored, init=default.estimate)
        assert started.iterations <= 1
        assert started.estimate.alpha == pytest.approx(default.estimate.alpha, rel=1e-8)

    def test_invalid_options(self, censored: AdaptiveCensoredSample) -> None:
        with pytest.raises(DomainError):
            fit_mle(censored, tol=0.0)
        with pytest.raises(DomainError):
            fit_mle(censored, fixed_alpha=1.0, fixed_beta=1.0)

    def test_never_finite(self, censored: AdaptiveCensoredSample) -> None:
        def objective(p: Params, s: AdaptiveCensoredSample) -> float:
            return float("nan")

        with pytest.raises(EstimationError):
            newton_fit(censored, objective, score, observed_information, method=Estimator.MLE)

    def test_saddle_is_not_converged(self, censored: AdaptiveCensoredSample) -> None:
        # saddle point at (1, 2)
        def objective(p: Params, s: AdaptiveCensoredSample) -> float:
            return -((p.alpha - 1) ** 2) + (p.beta - 2) ** 2

        def gradient(p: Params, s: AdaptiveCensoredSample) -> np.ndarray:
            return np.array([-2 * (p.alpha - 1), 2 * (p.beta - 2)])

        def hessian(p: Params, s: AdaptiveCensoredSample) -> np.ndarray:
            return np.diag([-2.0, 2.0])

        report = newton_fit(censored, objective, gradient, hessian, method=Estimator.MLE, init=Params(1.0, 2.0))
        assert not report.converged

    def test_local_maximum(self, censored: AdaptiveCensoredSample, rng: np.random.Generator) -> None:
        report = fit_mle(censored)
        np.linalg.cholesky(report.observed_info)
        best = loglik(report.estimate, censored)
        for factors in rng.uniform(0.99, 1.01, size=(100, 2)):
            assert loglik(Params.from_array(report.estimate.as_array() * factors), censored) <= best


class TestFitReport:
    def test_singular(self) -> None:
        report = FitReport(TRUTH, 0.0, 1, True, np.zeros((2, 2)))
        with pytest.raises(EstimationError, match="singular"):
            report.covariance()

    def test_standard_errors(self) -> None:
        report = FitReport(TRUTH, 0.0, 1, True, np.diag([4.0, 25.0]))
        np.testing.assert_allclose(report.standard_errors(), [0.5, 0.2])


class TestProfile:
    def test_bounded_by_maximum(self, censored: AdaptiveCensoredSample) -> None:
        fit = fit_mle(censored)
        alpha, beta = fit.estimate
        profile = profile_loglik(censored, np.linspace(0.6, 1.4, 9) * alpha, np.linspace(0.6, 1.4, 9) * beta)
        assert list(profile.alpha.columns) == ["value", "loglik", "inner", "converged"]
        assert len(profile.alpha) == len(profile.beta) == 9
        assert profile.alpha["converged"].all()
        assert (profile.alpha["loglik"] <= fit.loglik + 1e-6).all()
        assert (profile.beta["loglik"] <= fit.loglik + 1e-6).all()
        assert profile.alpha["loglik"].iloc[4] == pytest.approx(fit.loglik, abs=1e-6)

    def test_rejects_bad_grid(self, censored: AdaptiveCensoredSample) -> None:
        with pytest.raises(DomainError):
            profile_loglik(censored, [], [1.0])
        with pytest.raises(DomainError):
            profile_loglik(censored, [-1.0], [1.0])
