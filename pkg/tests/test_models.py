"""Licensed under The MIT License (MIT) - Copyright (c) 2023-present the gumbel-phcs authors. See LICENSE"""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import integrate, stats

from gumbel_phcs import (
    COVID19_COMPARATORS,
    ComparatorFamily,
    ComparatorModel,
    DomainError,
    Params,
    comparator_loglik,
    sample_iid,
)

P = Params(1.5, 0.75)


class TestParams:
    @pytest.mark.parametrize("alpha, beta", [(0.0, 1.0), (1.0, -1.0), (math.nan, 1.0), (1.0, math.inf)])
    def test_rejects_invalid(self, alpha: float, beta: float) -> None:
        with pytest.raises(DomainError):
            Params(alpha, beta)

    def test_iter_and_array(self) -> None:
        assert tuple(P) == (1.5, 0.75)
        assert Params.from_array(P.as_array()) == P


class TestDistribution:
    def test_quantile_inverts_cdf(self) -> None:
        x = np.array([0.2, 0.5, 1.0, 2.0, 5.0])
        np.testing.assert_allclose(P.quantile(P.cdf(x)), x, rtol=1e-10)

    def test_pdf_is_cdf_derivative(self) -> None:
        x = np.array([0.3, 0.8, 1.7, 4.0])
        h = 1e-6
        numeric = (P.cdf(x + h) - P.cdf(x - h)) / (2 * h)
        np.testing.assert_allclose(P.pdf(x), numeric, rtol=1e-6)

    def test_hazard(self) -> None:
        x = np.array([0.3, 0.8, 1.7, 4.0])
        np.testing.assert_allclose(P.hazard(x), P.pdf(x) / (1 - P.cdf(x)), rtol=1e-10)

    def test_hazard_vanishes_far_out(self) -> None:
        assert 0 <= P.hazard(1e8) < 1e-6

    def test_scalar_in_scalar_out(self) -> None:
        assert isinstance(P.cdf(1.0), float)
        assert P.cdf(1.0) == pytest.approx(math.exp(-0.75))

    @pytest.mark.parametrize("x", [0.0, -1.0])
    def test_support(self, x: float) -> None:
        with pytest.raises(DomainError):
            P.cdf(x)

    def test_density_integrates_to_one(self, rng: np.random.Generator) -> None:
        for alpha, beta in zip(rng.uniform(0.5, 4.0, size=10), rng.uniform(0.2, 5.0, size=10)):
            p = Params(float(alpha), float(beta))
            median = p.quantile(0.5)
            lower, _ = integrate.quad(p.pdf, 0, median)
            upper, _ = integrate.quad(p.pdf, median, np.inf)
            assert lower + upper == pytest.approx(1.0, abs=1e-6)

    def test_decreasing_hazard(self) -> None:
        hazard = Params(0.5, 1.0).hazard(np.linspace(0.5, 10, 200))
        assert np.all(np.diff(hazard) < 0)

    @pytest.mark.parametrize("u", [0.0, 1.0, 1.5])
    def test_quantile_levels(self, u: float) -> None:
        with pytest.raises(DomainError, match="between 0 and 1"):
            P.quantile(u)


class TestSampling:
    def test_reproducible(self) -> None:
        np.testing.assert_array_equal(sample_iid(P, 50, 3), sample_iid(P, 50, 3))

    def test_positive(self) -> None:
        assert np.all(sample_iid(P, 1000, 1) > 0)

    def test_median(self) -> None:
        draws = sample_iid(P, 20000, 5)
        assert np.mean(draws <= P.quantile(0.5)) == pytest.approx(0.5, abs=0.02)

    def test_kolmogorov_smirnov(self) -> None:
        result = stats.kstest(sample_iid(P, 100_000, 12), P.cdf)
        assert result.statistic < 0.01
        assert result.pvalue > 0.001

    def test_count(self) -> None:
        with pytest.raises(DomainError):
            sample_iid(P, 0, 1)


class TestComparators:
    @pytest.mark.parametrize("model", COVID19_COMPARATORS, ids=lambda m: m.family.value)
    def test_quantile_inverts_cdf(self, model: ComparatorModel) -> None:
        u = np.array([0.1, 0.5, 0.9])
        np.testing.assert_allclose(model.cdf(model.quantile(u)), u, rtol=1e-8)

    @pytest.mark.parametrize("model", COVID19_COMPARATORS, ids=lambda m: m.family.value)
    def test_pdf_is_cdf_derivative(self, model: ComparatorModel) -> None:
        x = np.array([5.0, 12.0, 25.0])
        h = 1e-5
        numeric = (model.cdf(x + h) - model.cdf(x - h)) / (2 * h)
        np.testing.assert_allclose(model.pdf(x), numeric, rtol=1e-5)

    @pytest.mark.parametrize(
        "family, expected",
        [(ComparatorFamily.BurrIII, 300.7166), (ComparatorFamily.IKum, 300.6774)],
    )
    def test_published_loglik(self, covid: np.ndarray, family: ComparatorFamily, expected: float) -> None:
        model = next(m for m in COVID19_COMPARATORS if m.family is family)
        assert -comparator_loglik(model, covid) == pytest.approx(expected, abs=0.05)

    def test_nh_fits_worse(self, covid: np.ndarray) -> None:
        nll = -comparator_loglik(COVID19_COMPARATORS[0], covid)
        assert math.isfinite(nll)
        assert nll > -np.sum(Params(2.0130, 82.7737).logpdf(covid))

    def test_rejects_invalid(self) -> None:
        with pytest.raises(DomainError):
            ComparatorModel(ComparatorFamily.NH, 1.0, 0.0)
