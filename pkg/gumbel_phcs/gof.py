"""Licensed under The MIT License (MIT) - Copyright (c) 2023-present the gumbel-phcs authors. See LICENSE"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Iterable, Mapping
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np
import numpy.typing as npt
import pandas as pd
from scipy.optimize import minimize
from typing_extensions import TypeAlias

from .censoring import AdaptiveCensoredSample
from .enums import ComparatorFamily
from .errors import DomainError, EstimationError, EvaluationError
from .mle import fit_mle
from .models import COVID19_COMPARATORS, ComparatorModel, Params, comparator_loglik, sample_iid
from .utils import FloatArray, SeedLike, child_seeds, make_rng

__all__ = (
    "GofReport",
    "PlotData",
    "information_criteria",
    "cvm_ad",
    "fit_comparator",
    "at_search_bound",
    "gof_pvalue",
    "gof_report",
    "compare_models",
    "plot_data",
    "write_tables",
)

log = logging.getLogger(__name__)

Model: TypeAlias = Union[Params, ComparatorModel]

U_CLIP = 1e-12
MIN_PVALUE_REPLICATES = 200
SEARCH_BOUND = 1e12
"""Comparator refits keep both parameters in ``[1 / SEARCH_BOUND, SEARCH_BOUND]``."""
LOG_BOUND = math.log(SEARCH_BOUND)


def _label(model: Model) -> str:
    return "GT-II" if isinstance(model, Params) else model.family.value


def _parameters(model: Model) -> tuple[float, float]:
    return (model.alpha, model.beta) if isinstance(model, Params) else (model.p1, model.p2)


@dataclass(frozen=True, slots=True)
class GofReport:
    """Goodness-of-fit measures of one fitted model on complete data."""

    model: str
    parameters: tuple[float, float]
    neg_loglik: float
    aic: float
    bic: float
    cvm: float
    """The Cramer-von Mises statistic."""
    ad: float
    """The Anderson-Darling statistic."""
    p_value: float | None = None
    """The parametric bootstrap p-value of :attr:`ad`, ``None`` when it was not computed."""
    at_bound: bool = False
    """Whether a refitted comparator stopped at the parameter search bound."""

    def as_row(self) -> dict[str, object]:
        p1, p2 = self.parameters
        return {
            "model": self.model,
            "p1": p1,
            "p2": p2,
            "neg_loglik": self.neg_loglik,
            "aic": self.aic,
            "bic": self.bic,
            "cvm": self.cvm,
            "ad": self.ad,
            "p_value": self.p_value,
            "at_bound": self.at_bound,
        }


def information_criteria(neg_loglik: float, k: int, n: int) -> tuple[float, float]:
    """``(AIC, BIC) = (2k + 2 nll, k log(n) + 2 nll)``.

    Raises
    ------
    DomainError
        ``k`` or ``n`` is below 1.
    """
    if k < 1 or n < 1:
        raise DomainError(f"need k >= 1 and n >= 1, got k={k} n={n}")
    return 2 * k + 2 * neg_loglik, k * math.log(n) + 2 * neg_loglik


def cvm_ad(data: npt.ArrayLike, cdf: Callable[[FloatArray], npt.ArrayLike]) -> tuple[float, float]:
    """The Cramer-von Mises and Anderson-Darling statistics of ``data`` against ``cdf``.

    With ``u_i = cdf(x_(i))``, ``C = 1 / (12 n) + sum((u_i - (2i - 1) / (2n)) ** 2)`` and
    ``A = -n - sum((2i - 1) (log(u_i) + log(1 - u_(n + 1 - i)))) / n``. The ``u_i`` are clipped to
    ``[1e-12, 1 - 1e-12]``.
    """
    x = np.sort(np.asarray(data, dtype=float))
    n = len(x)
    if n == 0:
        raise DomainError("no data to test")
    u = np.asarray(cdf(x), dtype=float)
    clipped = np.clip(u, U_CLIP, 1 - U_CLIP)
    if np.any(clipped != u):
        log.warning("Clipped %d u-values to [%g, 1 - %g]", int(np.count_nonzero(clipped != u)), U_CLIP, U_CLIP)
    i = np.arange(1, n + 1)
    cvm = 1 / (12 * n) + float(np.sum((clipped - (2 * i - 1) / (2 * n)) ** 2))
    ad = -n - float(np.sum((2 * i - 1) * (np.log(clipped) + np.log1p(-clipped[::-1])))) / n
    return cvm, ad


def fit_comparator(
    data: npt.ArrayLike, family: ComparatorFamily | str, init: ComparatorModel | None = None
) -> ComparatorModel:
    """Maximum likelihood fit of a comparator family over ``log(p1), log(p2)`` by Nelder-Mead.

    The search starts from ``init``, the published Covid-19 fit of the family and ``(1, 1)``, keeping the
    best result. Both parameters are bounded by :data:`SEARCH_BOUND`, a fit ending on that bound is logged
    and reported by :func:`at_search_bound`.

    Raises
    ------
    EstimationError
        No start reaches a finite log-likelihood.
    """
    family = ComparatorFamily(family)
    x = np.asarray(data, dtype=float)

    def objective(log_params: FloatArray) -> float:
        try:
            value = -comparator_loglik(ComparatorModel(family, *np.exp(log_params)), x)
        except DomainError:
            return math.inf
        return value if math.isfinite(value) else math.inf

    published = next(model for model in COVID19_COMPARATORS if model.family is family)
    starts = [init] if init is not None else []
    starts += [published, ComparatorModel(family, 1.0, 1.0)]

    best: tuple[float, FloatArray] | None = None
    for start in starts:
        with np.errstate(all="ignore"):
            result = minimize(
                objective,
                np.log([start.p1, start.p2]),
                method="Nelder-Mead",
                bounds=[(-LOG_BOUND, LOG_BOUND)] * 2,
                options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 4000, "maxfev": 8000},
            )
        if math.isfinite(result.fun) and (best is None or result.fun < best[0]):
            best = (float(result.fun), result.x)
    if best is None:
        raise EstimationError(f"{family.value} log-likelihood is not finite at any start")
    model = ComparatorModel(family, *(float(v) for v in np.exp(best[1])))
    log.debug("Fitted %r with -logL %.6f", model, best[0])
    if at_search_bound(model):
        log.warning("%r reached the search bound, the likelihood increases towards a limiting family", model)
    return model


def at_search_bound(model: ComparatorModel) -> bool:
    """Whether either parameter of ``model`` lies within a factor of e of the refit search bound."""
    return bool(np.any(np.abs(np.log([model.p1, model.p2])) > LOG_BOUND - 1))


def _neg_loglik(model: Model, data: FloatArray) -> float:
    if isinstance(model, Params):
        return -float(np.sum(model.logpdf(data)))
    return -comparator_loglik(model, data)


def _draw(model: Model, count: int, rng: np.random.Generator) -> FloatArray:
    if isinstance(model, Params):
        return sample_iid(model, count, rng)
    u = rng.uniform(np.nextafter(0.0, 1.0), 1.0, size=count)
    return np.asarray(model.quantile(u), dtype=float)


def _refit(model: Model, data: FloatArray) -> Model:
    if isinstance(model, Params):
        report = fit_mle(AdaptiveCensoredSample.complete(data), init=model)
        if not report.converged:
            raise EstimationError("bootstrap refit did not converge")
        return report.estimate
    return fit_comparator(data, model.family, init=model)


def gof_pvalue(data: npt.ArrayLike, model: Model, B: int = 1000, *, seed: SeedLike = 0) -> float:
    """Parametric bootstrap p-value of the Anderson-Darling statistic.

    ``B`` complete samples of ``len(data)`` are drawn from ``model``, each is refitted within its family
    and its statistic recomputed. The p-value is the share of replicates at least as large as the
    observed statistic.

    Raises
    ------
    DomainError
        ``B`` is below 200.
    EstimationError
        More than a tenth of the refits failed.
    """
    if B < MIN_PVALUE_REPLICATES:
        raise DomainError(f"the p-value needs B >= {MIN_PVALUE_REPLICATES}, got {B}")
    x = np.asarray(data, dtype=float)
    _, observed = cvm_ad(x, model.cdf)

    exceed = 0
    failures = 0
    for child in child_seeds(seed, count=B):
        rng = make_rng(child)
        synthetic = _draw(model, len(x), rng)
        try:
            refitted = _refit(model, synthetic)
            _, statistic = cvm_ad(synthetic, refitted.cdf)
        except (DomainError, EvaluationError, EstimationError) as exc:
            log.debug("p-value replicate failed: %s", exc)
            failures += 1
            continue
        exceed += int(statistic >= observed)

    if failures > 0.1 * B:
        raise EstimationError(f"{failures} of {B} p-value refits failed")
    return exceed / (B - failures)


def gof_report(data: npt.ArrayLike, model: Model, *, B: int | None = 1000, seed: SeedLike = 0) -> GofReport:
    """Every measure of :class:`GofReport` for ``model``, skipping the p-value when ``B`` is ``None``."""
    x = np.asarray(data, dtype=float)
    neg_loglik = _neg_loglik(model, x)
    aic, bic = information_criteria(neg_loglik, 2, len(x))
    cvm, ad = cvm_ad(x, model.cdf)
    p_value = gof_pvalue(x, model, B, seed=seed) if B is not None else None
    at_bound = isinstance(model, ComparatorModel) and at_search_bound(model)
    return GofReport(_label(model), _parameters(model), neg_loglik, aic, bic, cvm, ad, p_value, at_bound)


def compare_models(
    data: npt.ArrayLike,
    comparators: Iterable[ComparatorModel] = COVID19_COMPARATORS,
    *,
    refit: bool = False,
    B: int | None = 1000,
    seed: SeedLike = 0,
) -> pd.DataFrame:
    """The goodness-of-fit table of the Gumbel type-II MLE next to ``comparators``.

    Parameters
    ----------
    refit
        Refit every comparator family to ``data`` instead of using the given parameters.

    Raises
    ------
    EstimationError
        The Gumbel type-II fit did not converge.
    """
    x = np.asarray(data, dtype=float)
    fit = fit_mle(AdaptiveCensoredSample.complete(x))
    if not fit.converged:
        raise EstimationError("the Gumbel type-II fit did not converge")
    models: list[Model] = [fit.estimate]
    for comparator in comparators:
        models.append(fit_comparator(x, comparator.family, init=comparator) if refit else comparator)

    rows = []
    for model, child in zip(models, child_seeds(seed, count=len(models))):
        report = gof_report(x, model, B=B, seed=child)
        log.info("%s: -logL %.4f AIC %.4f A* %.4f", report.model, report.neg_loglik, report.aic, report.ad)
        rows.append(report.as_row())
    return pd.DataFrame(rows)


@dataclass(frozen=True, eq=False)
class PlotData:
    """Plot-ready tables for a fitted model.

    ``ecdf`` has ``x, empirical, fitted``, ``qq`` has ``probability, theoretical, observed``, ``boxplot``
    has ``statistic, value`` and ``ttt`` has ``i, u, ttt``.
    """

    ecdf: pd.DataFrame
    qq: pd.DataFrame
    boxplot: pd.DataFrame
    ttt: pd.DataFrame

    def tables(self) -> dict[str, pd.DataFrame]:
        return {"ecdf": self.ecdf, "qq": self.qq, "boxplot": self.boxplot, "ttt": self.ttt}


def plot_data(data: npt.ArrayLike, fitted: Model) -> PlotData:
    x = np.sort(np.asarray(data, dtype=float))
    n = len(x)
    if n == 0:
        raise DomainError("no data to tabulate")
    i = np.arange(1, n + 1)

    ecdf = pd.DataFrame({"x": x, "empirical": i / n, "fitted": np.asarray(fitted.cdf(x), dtype=float)})
    probability = (i - 0.5) / n
    qq = pd.DataFrame(
        {"probability": probability, "theoretical": np.asarray(fitted.quantile(probability)), "observed": x}
    )
    q1, median, q3 = np.quantile(x, [0.25, 0.5, 0.75])
    boxplot = pd.DataFrame(
        {
            "statistic": ["min", "q1", "median", "q3", "max", "mean"],
            "value": [x[0], q1, median, q3, x[-1], x.mean()],
        }
    )
    cumulative = np.cumsum(x)
    ttt = pd.DataFrame({"i": i, "u": i / n, "ttt": (cumulative + (n - i) * x) / cumulative[-1]})
    return PlotData(ecdf, qq, boxplot, ttt)


def write_tables(tables: Mapping[str, pd.DataFrame], directory: str | Path, delimiter: str = ",") -> list[Path]:
    """Write each table to ``directory/<name>.csv`` with a one-line header."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, frame in tables.items():
        path = directory / f"{name}.csv"
        frame.to_csv(path, sep=delimiter, index=False, float_format="%.10g")
        paths.append(path)
    log.info("Wrote %d tables to %s", len(paths), directory)
    return paths
