"""
Two-part hurdle model of citation counts.

Publications with at most ``hurdle`` citations and those above it are modelled
separately: a binomial logit model for the probability of clearing the hurdle
and Bayesian quantile regressions of the citation count above it.

The quantile part samples the posterior under the asymmetric-Laplace working
likelihood, written as a location-scale mixture of normals::

    y = x'β + θ·v + τ·sqrt(σ·v)·u,   v ~ Exp(mean σ),   u ~ N(0, 1)

with θ = (1 − 2q) / (q(1 − q)) and τ² = 2 / (q(1 − q)). Given the latent v
the coefficients are normal, 1/v is inverse Gaussian and σ inverse gamma.
"""
import logging
import math
import warnings
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import statsmodels.api as sm
from scipy.linalg import cho_solve, solve_triangular
from scipy.stats import norm
from statsmodels.tools import sm_exceptions
from statsmodels.tsa.stattools import acf

from .corpus import Publication, read_table
from .exceptions import ConfigError, CorpusError, DegenerateOutcomeError, DesignError
from .growth import GrowthRecord

logger = logging.getLogger(__name__)

INTERCEPT = "(Intercept)"
VARIABLES = ("growth_ratio", "num_authors", "num_references", "jif")
COEFFICIENTS = (INTERCEPT,) + VARIABLES
DECILES = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
DEFAULT_HURDLE = 3

SIGNIF_CODES = ((0.001, "***"), (0.01, "**"), (0.05, "*"), (0.1, "."), (1.0, " "))
SIGNIF_LEGEND = "0 '***' 0.001 '**' 0.01 '*' 0.05 '.' 0.1 ' ' 1"

LOGISTIC_COLUMNS = ["", "Estimate", "Exp. Estimate", "SE", "z-value", "p-value", "Signif."]
QUANTILE_COLUMNS = ["quantile", "variable", "mean", "lower", "upper"]

_separation_warning = getattr(sm_exceptions, "PerfectSeparationWarning", None)


@dataclass(frozen=True)
class RegressionRow:
    citations: int
    growth_ratio: float
    num_authors: int
    num_references: int
    jif: float
    pub_id: Optional[int] = None
    topic_id: Optional[int] = None

    def __post_init__(self):
        values = (self.citations, self.growth_ratio, self.num_authors, self.num_references, self.jif)
        if not all(math.isfinite(value) for value in values):
            raise DesignError(f"non-finite value in regression row for publication {self.pub_id}")

    @property
    def covariates(self) -> Tuple[float, ...]:
        return tuple(float(getattr(self, name)) for name in VARIABLES)


@dataclass(frozen=True)
class HurdleSplit:
    low: List[RegressionRow]
    high: List[RegressionRow]
    hurdle: int = DEFAULT_HURDLE


@dataclass(frozen=True)
class McmcConfig:
    ndraw: int = 10000
    thin: int = 10
    burnin_kept: int = 500
    quantiles: Tuple[float, ...] = DECILES
    seed: int = 0
    # β ~ N(0, I / prior_precision)
    prior_precision: float = 1e-6
    # σ ~ InvGamma(sigma_shape, sigma_scale)
    sigma_shape: float = 0.01
    sigma_scale: float = 0.01
    acf_lag: int = 50
    acf_threshold: float = 0.99
    min_variance: float = 1e-12

    def __post_init__(self):
        errors = {}
        if self.ndraw < 1 or self.thin < 1 or self.ndraw % self.thin:
            errors["thin"] = "ndraw must be a positive multiple of thin"
        elif not 0 <= self.burnin_kept < self.kept:
            errors["burnin_kept"] = f"burnin_kept must lie in [0, {self.kept})"
        if not self.quantiles or any(not 0 < q < 1 for q in self.quantiles):
            errors["quantiles"] = "quantiles must lie strictly between 0 and 1"
        if self.prior_precision < 0 or self.sigma_shape <= 0 or self.sigma_scale <= 0:
            errors["prior"] = "prior parameters must be positive"
        if errors:
            raise ConfigError(errors)

    @property
    def kept(self) -> int:
        return self.ndraw // self.thin


@dataclass(frozen=True, eq=False)
class QuantileFit:
    quantile: float
    names: Tuple[str, ...]
    mean: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    n_kept_draws: int
    converged: bool
    n: int
    seed: int = 0

    def rows(self) -> List[Dict]:
        return [
            {"quantile": self.quantile, "variable": name, "mean": mean, "lower": lower, "upper": upper}
            for name, mean, lower, upper in zip(
                self.names, self.mean.tolist(), self.lower.tolist(), self.upper.tolist()
            )
        ]

    def coefficient(self, name: str) -> float:
        return float(self.mean[list(self.names).index(name)])


@dataclass(frozen=True, eq=False)
class LogisticFit:
    n: int
    names: Tuple[str, ...]
    estimate: Optional[np.ndarray] = None
    se: Optional[np.ndarray] = None
    separated: bool = False
    converged: bool = True
    hurdle: int = DEFAULT_HURDLE

    @property
    def exp_estimate(self) -> np.ndarray:
        return np.exp(self.estimate)

    @property
    def z(self) -> np.ndarray:
        return self.estimate / self.se

    @property
    def p(self) -> np.ndarray:
        return 2 * norm.sf(np.abs(self.z))

    @property
    def signif(self) -> List[str]:
        return [signif_code(p) for p in self.p]

    def coefficient(self, name: str) -> float:
        return float(self.estimate[list(self.names).index(name)])


@dataclass(frozen=True)
class DisciplineFits:
    discipline: int
    logistic: Optional[LogisticFit] = None
    quantiles: List[QuantileFit] = field(default_factory=list)
    label: str = ""
    # focal publications of the discipline before the growth-eligibility join
    n_publications: int = 0
    # why the discipline could not be fitted
    skipped: Optional[str] = None


def signif_code(p: float) -> str:
    for threshold, code in SIGNIF_CODES:
        if p <= threshold:
            return code
    return " "


def derive_seed(seed: int, *keys: int) -> int:
    """
    A seed for one fit, independent of the order in which fits run.
    """
    return int(np.random.SeedSequence([seed, *keys]).generate_state(1)[0])


def quantile_key(q: float) -> int:
    return int(round(q * 1000))


def assemble_rows(
    pubs: Iterable[Publication],
    growth_records: Iterable[GrowthRecord],
    topic_assignment: Mapping[int, int],
    discipline_assignment: Mapping[int, int],
    discipline: int,
    warnings: Optional[Counter] = None,
) -> List[RegressionRow]:
    """
    One regression row per publication of the discipline whose topic has an
    eligible growth record. ``pubs`` are the focal publications with their
    citation counts attached.
    """
    records = {record.topic_id: record for record in growth_records}
    rows = []
    no_record = ineligible = 0
    for pub in sorted(pubs, key=lambda pub: pub.pub_id):
        if discipline_assignment.get(pub.pub_id) != discipline:
            continue
        topic = topic_assignment.get(pub.pub_id)
        record = records.get(topic)
        if record is None:
            no_record += 1
            continue
        if not record.eligible:
            ineligible += 1
            continue
        rows.append(
            RegressionRow(
                citations=pub.citation_count,
                growth_ratio=float(record.ratio),
                num_authors=pub.n_authors,
                num_references=pub.n_references,
                jif=pub.jif,
                pub_id=pub.pub_id,
                topic_id=topic,
            )
        )
    if no_record:
        logger.warning("Discipline %s: %d publication(s) whose topic has no growth record", discipline, no_record)
    if warnings is not None:
        warnings["rows_without_growth_record"] += no_record
        warnings["rows_in_small_topics"] += ineligible
    logger.info("Discipline %s: %d regression rows (%d in small topics)", discipline, len(rows), ineligible)
    return rows


def split_hurdle(rows: Iterable[RegressionRow], hurdle: int = DEFAULT_HURDLE) -> HurdleSplit:
    low, high = [], []
    for row in rows:
        (high if row.citations > hurdle else low).append(row)
    return HurdleSplit(low=low, high=high, hurdle=hurdle)


def check_loss(residuals, q: float) -> float:
    residuals = np.asarray(residuals, dtype=float)
    return float(np.sum(residuals * (q - (residuals < 0))))


def design_matrix(rows: Sequence[RegressionRow]) -> Tuple[np.ndarray, np.ndarray]:
    covariates = np.array([row.covariates for row in rows], dtype=float).reshape(-1, len(VARIABLES))
    X = np.column_stack([np.ones(len(rows)), covariates])
    y = np.array([row.citations for row in rows], dtype=float)
    return X, y


def _check_design(X: np.ndarray, y: np.ndarray):
    n, p = X.shape
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise DesignError("design contains non-finite values")
    if n < p + 1:
        raise DesignError(f"{n} observation(s) for {p} coefficient(s)")
    if np.linalg.matrix_rank(X) < p:
        raise DesignError("design matrix is rank deficient")


def _diagnose(draws: np.ndarray, config: McmcConfig) -> bool:
    for column in draws.T:
        if np.var(column) < config.min_variance:
            return False
        if len(column) > config.acf_lag:
            if acf(column, nlags=config.acf_lag, fft=True)[config.acf_lag] > config.acf_threshold:
                return False
    return True


def sample_quantile_posterior(
    X: np.ndarray,
    y: np.ndarray,
    q: float,
    config: McmcConfig,
    seed: Optional[int] = None,
    names: Sequence[str] = COEFFICIENTS,
) -> QuantileFit:
    """
    Gibbs sampler for Bayesian quantile regression of ``y`` on ``X``.

    Every ``thin``-th of ``ndraw`` draws is kept and the first ``burnin_kept``
    kept draws are discarded before summarizing.
    """
    _check_design(X, y)
    seed = config.seed if seed is None else seed
    rng = np.random.default_rng(seed)
    n, p = X.shape
    theta = (1 - 2 * q) / (q * (1 - q))
    tau2 = 2 / (q * (1 - q))
    prior = config.prior_precision * np.eye(p)

    beta = np.linalg.lstsq(X, y, rcond=None)[0]
    sigma = 1.0
    v = np.ones(n)
    kept = np.empty((config.kept, p))
    for draw in range(config.ndraw):
        weights = 1.0 / (tau2 * sigma * v)
        precision = (X.T * weights) @ X + prior
        chol = np.linalg.cholesky(precision)
        mean = cho_solve((chol, True), X.T @ (weights * (y - theta * v)))
        beta = mean + solve_triangular(chol.T, rng.standard_normal(p), lower=False)

        residual = y - X @ beta
        chi = np.maximum(residual**2 / (tau2 * sigma), 1e-12)
        psi = theta**2 / (tau2 * sigma) + 2 / sigma
        v = 1.0 / rng.wald(np.sqrt(psi / chi), psi)

        scale = config.sigma_scale + np.sum((residual - theta * v) ** 2 / (2 * tau2 * v)) + np.sum(v)
        sigma = scale / rng.gamma(config.sigma_shape + 1.5 * n)

        if (draw + 1) % config.thin == 0:
            kept[(draw + 1) // config.thin - 1] = beta

    draws = kept[config.burnin_kept :]
    converged = _diagnose(draws, config)
    if not converged:
        logger.warning("Quantile %.2f: sampler did not converge", q)
    return QuantileFit(
        quantile=q,
        names=tuple(names),
        mean=draws.mean(axis=0),
        lower=np.percentile(draws, 2.5, axis=0),
        upper=np.percentile(draws, 97.5, axis=0),
        n_kept_draws=len(draws),
        converged=converged,
        n=n,
        seed=seed,
    )


def fit_quantile(
    rows: Sequence[RegressionRow], q: float, config: McmcConfig, seed: Optional[int] = None
) -> QuantileFit:
    X, y = design_matrix(rows)
    return sample_quantile_posterior(X, y, q, config, seed=seed)


def fit_logistic(rows: Sequence[RegressionRow], hurdle: int = DEFAULT_HURDLE) -> LogisticFit:
    """
    Binomial logit model of clearing the hurdle, fitted by iteratively
    reweighted least squares.
    """
    X, counts = design_matrix(rows)
    return fit_logit(X, (counts > hurdle).astype(float), COEFFICIENTS, hurdle)


def fit_logit(
    X: np.ndarray, outcome: np.ndarray, names: Sequence[str] = COEFFICIENTS, hurdle: int = DEFAULT_HURDLE
) -> LogisticFit:
    if len(outcome) == 0 or outcome.min() == outcome.max():
        raise DegenerateOutcomeError(f"all {len(outcome)} publication(s) fall on one side of the hurdle")
    _check_design(X, outcome)

    separated = False
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            result = sm.GLM(outcome, X, family=sm.families.Binomial()).fit()
        except sm_exceptions.PerfectSeparationError:
            separated = True
    if not separated:
        separated = any(
            _separation_warning is not None and issubclass(item.category, _separation_warning) for item in caught
        ) or bool(np.all(np.abs(result.fittedvalues - outcome) < 1e-6))
    if separated:
        logger.warning("Logistic model: outcome perfectly separated, no estimates reported")
        return LogisticFit(n=len(outcome), names=tuple(names), separated=True, converged=False, hurdle=hurdle)

    converged = bool(getattr(result, "converged", True))
    if not converged:
        logger.warning("Logistic model: IRLS did not converge")
    return LogisticFit(
        n=len(outcome),
        names=tuple(names),
        estimate=np.asarray(result.params, dtype=float),
        se=np.asarray(result.bse, dtype=float),
        converged=converged,
        hurdle=hurdle,
    )


def format_sig(value: float, digits: int) -> str:
    if value is None or not math.isfinite(value):
        return "NA"
    return f"{value:.{digits}G}"


def format_p(value: float) -> str:
    """
    Two significant digits in E-notation without padding: ``9.8E-111``,
    ``4E-14``, ``2E-4``.
    """
    if value is None or not math.isfinite(value):
        return "NA"
    mantissa, exponent = f"{value:.1E}".split("E")
    if mantissa.endswith(".0"):
        mantissa = mantissa[:-2]
    return f"{mantissa}E{int(exponent)}"


def logistic_table(fit: LogisticFit) -> pd.DataFrame:
    if fit.separated:
        rows = [[name, "NA", "NA", "NA", "NA", "NA", ""] for name in fit.names]
    else:
        rows = [
            [
                name,
                format_sig(estimate, 2),
                format_sig(exp_estimate, 4),
                format_sig(se, 2),
                format_sig(z, 2),
                format_p(p),
                code,
            ]
            for name, estimate, exp_estimate, se, z, p, code in zip(
                fit.names,
                fit.estimate.tolist(),
                fit.exp_estimate.tolist(),
                fit.se.tolist(),
                fit.z.tolist(),
                fit.p.tolist(),
                fit.signif,
            )
        ]
    return pd.DataFrame(rows, columns=LOGISTIC_COLUMNS)


def quantile_table(fits: Iterable[QuantileFit]) -> pd.DataFrame:
    rows = [row for fit in fits if fit.converged for row in fit.rows()]
    return pd.DataFrame(rows, columns=QUANTILE_COLUMNS)


def summarize_fits(
    logistic: Optional[LogisticFit], quantile_fits: Iterable[QuantileFit]
) -> Tuple[Optional[pd.DataFrame], pd.DataFrame]:
    """
    The logistic table (one row per coefficient, significance codes as in R's
    coefficient printout) and the per-decile quantile table. Quantile fits
    that did not converge are left out; without a logistic fit there is no
    logistic table.
    """
    quantile_fits = list(quantile_fits)
    omitted = [fit.quantile for fit in quantile_fits if not fit.converged]
    if omitted:
        logger.info("Omitting non-converged quantile(s) %s from the report", omitted)
    return (None if logistic is None else logistic_table(logistic)), quantile_table(quantile_fits)


ROW_COLUMNS = ["pub_id", "topic_id", "citations", "growth_ratio", "num_authors", "num_references", "jif"]


def write_rows(rows: Sequence[RegressionRow], path):
    frame = pd.DataFrame([[getattr(row, column) for column in ROW_COLUMNS] for row in rows], columns=ROW_COLUMNS)
    frame.to_csv(path, sep="\t", index=False, lineterminator="\n")


def read_rows(path) -> List[RegressionRow]:
    frame = read_table(path, ROW_COLUMNS)
    try:
        return [
            RegressionRow(
                citations=int(row.citations),
                growth_ratio=float(row.growth_ratio),
                num_authors=int(row.num_authors),
                num_references=int(row.num_references),
                jif=float(row.jif),
                pub_id=int(row.pub_id),
                topic_id=int(row.topic_id),
            )
            for row in frame.itertuples(index=False)
        ]
    except (TypeError, ValueError) as exc:
        raise CorpusError(f"{path}: {exc}")
