"""Post-fit assessment: quantile residuals, normality testing, generalized
R-squared, EDF goodness-of-fit statistics, and simulated envelopes."""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri

from .distribution import UmwParams, alpha_of_mu, cum_hazard
from .errors import ConvergenceFailure, DegenerateProbability, DomainError
from .inference import Dataset, FitResult
from .regression import RegressionFit, fit_rq, make_spec, simulate_response

__all__ = [
    "ResidualReport",
    "EnvelopeBands",
    "GofReport",
    "quantile_residuals",
    "r2_generalized",
    "gof_stats",
    "simulated_envelope",
    "ad_normality",
]

# clamp for fitted CDF values before the normal quantile transform
_CDF_CLIP_LO = 1e-15
_CDF_CLIP_HI = 1.0 - 1e-15

AD_VARIANT = "anderson-darling normality, mean and variance estimated, asymptotic p-value"


@dataclass(frozen=True)
class ResidualReport:
    residuals: np.ndarray
    ad_statistic: float
    ad_p_value: float
    n_degenerate: int
    ad_variant: str = AD_VARIANT


@dataclass(frozen=True)
class EnvelopeBands:
    sorted_residuals: np.ndarray
    lower: np.ndarray
    median: np.ndarray
    upper: np.ndarray
    coverage_level: float
    n_sim: int
    n_failed: int


@dataclass(frozen=True)
class GofReport:
    ks: float
    ad: float
    cvm: float


def ad_normality(x) -> tuple[float, float]:
    """Anderson-Darling test of normality with estimated mean/variance.

    Returns (A2*, p) where A2* is the small-sample-adjusted statistic and p
    the standard asymptotic approximation for the estimated-parameters case.
    """
    arr = np.sort(np.asarray(x, dtype=float))
    n = arr.size
    if n < 8:
        raise DomainError("anderson-darling normality test needs n >= 8")
    sd = arr.std(ddof=1)
    if sd == 0.0:
        raise DomainError("degenerate sample: zero variance")
    z = ndtr((arr - arr.mean()) / sd)
    z = np.clip(z, 1e-300, 1.0 - 1e-16)
    i = np.arange(1, n + 1)
    a2 = -n - np.mean((2.0 * i - 1.0) * (np.log(z) + np.log1p(-z[::-1])))
    a2s = a2 * (1.0 + 0.75 / n + 2.25 / n**2)
    if a2s >= 0.6:
        p = math.exp(1.2937 - 5.709 * a2s + 0.0186 * a2s**2)
    elif a2s >= 0.34:
        p = math.exp(0.9177 - 4.279 * a2s - 1.38 * a2s**2)
    elif a2s >= 0.2:
        p = 1.0 - math.exp(-8.318 + 42.796 * a2s - 59.938 * a2s**2)
    else:
        p = 1.0 - math.exp(-13.436 + 101.14 * a2s - 223.73 * a2s**2)
    return float(a2s), float(min(max(p, 0.0), 1.0))


def _fitted_cdf(fit, d: Dataset | None) -> np.ndarray:
    """CDF values at the observations under a fitted model.

    `fit` may be a RegressionFit (its own response is used unless d is
    given), a distribution FitResult (d required), or raw UmwParams.
    """
    if isinstance(fit, RegressionFit):
        y = (d.values if d is not None else fit.spec.response.values)
        alpha = alpha_of_mu(fit.mu, fit.theta.gamma, fit.theta.lam, fit.spec.tau)
        return np.exp(-cum_hazard(alpha, fit.theta.gamma, fit.theta.lam, y))
    if isinstance(fit, UmwParams):
        p = fit
    elif isinstance(fit, FitResult):
        lam = fit.fixed.get("lam")
        p = (UmwParams(fit.estimates[0], fit.estimates[1], lam)
             if lam is not None else UmwParams(*fit.estimates))
    else:
        raise DomainError(f"cannot compute fitted CDF from {type(fit).__name__}")
    if d is None:
        raise DomainError("a Dataset is required for distribution fits")
    return np.exp(-cum_hazard(p.alpha, p.gamma, p.lam, d.values))


def quantile_residuals(fit, d: Dataset | None = None) -> ResidualReport:
    """Normal quantile residuals Phi^-1(F(y_t)) with an attached AD test.

    The AD statistic/p-value are NaN when the sample is too small for the
    asymptotic approximation (n < 8).
    """
    f = _fitted_cdf(fit, d)
    if np.any(f == 0.0) or np.any(f == 1.0):
        raise DegenerateProbability("a fitted CDF value equals 0 or 1 exactly")
    n_deg = int(np.sum((f < _CDF_CLIP_LO) | (f > _CDF_CLIP_HI)))
    r = ndtri(np.clip(f, _CDF_CLIP_LO, _CDF_CLIP_HI))
    try:
        stat, p = ad_normality(r)
    except DomainError:  # sample too small or zero-variance
        stat, p = math.nan, math.nan
    return ResidualReport(residuals=r, ad_statistic=stat, ad_p_value=p, n_degenerate=n_deg)


def r2_generalized(loglik_full: float, loglik_null: float, n: int) -> float:
    """Likelihood-ratio based R^2: 1 - exp(-2 (l_full - l_null) / n).

    Negative output flags a caller error (the null model was not nested).
    """
    if n < 1:
        raise DomainError("n must be positive")
    return float(1.0 - math.exp(-(2.0 / n) * (loglik_full - loglik_null)))


def gof_stats(p: UmwParams, d: Dataset) -> GofReport:
    """Kolmogorov-Smirnov, Anderson-Darling and Cramer-von-Mises statistics
    of the sample against the fitted CDF (sorted internally)."""
    f = np.sort(_fitted_cdf(p, d))
    n = f.size
    if np.any(f == 0.0) or np.any(f == 1.0):
        raise DegenerateProbability("a fitted CDF value equals 0 or 1 exactly")
    i = np.arange(1, n + 1)
    ks = float(np.max(np.maximum(i / n - f, f - (i - 1) / n)))
    ad = float(-n - np.sum((2.0 * i - 1.0) * (np.log(f) + np.log1p(-f[::-1]))) / n)
    cvm = float(np.sum((f - (2.0 * i - 1.0) / (2.0 * n)) ** 2) + 1.0 / (12.0 * n))
    return GofReport(ks=ks, ad=ad, cvm=cvm)


def _envelope_replicate(args):
    """One envelope draw: simulate at the fitted quantiles, refit, return
    sorted residuals (or None when the refit fails)."""
    design, mu, gamma, lam, tau, link_name, seed, b = args
    rng = np.random.default_rng(np.random.SeedSequence((seed, 3, b)))
    try:
        y_sim = simulate_response(mu, gamma, lam, tau, rng)
        refit = fit_rq(make_spec(design, y_sim, tau=tau, link=link_name))
        rep = quantile_residuals(refit)
    except (ConvergenceFailure, DomainError, DegenerateProbability):
        return None
    return np.sort(rep.residuals)


def simulated_envelope(
    fit: RegressionFit,
    n_sim: int = 100,
    level: float = 0.95,
    seed: int = 0,
    threads: int = 1,
) -> EnvelopeBands:
    """Order-statistic envelope bands for the sorted quantile residuals.

    Each replicate simulates a response vector from the fitted model at the
    observed design, refits from scratch, and contributes its sorted
    residuals; bands are per-position empirical percentiles.  Fails if more
    than 10% of replicates do not refit.
    """
    if n_sim < 20:
        raise DomainError("n_sim must be >= 20")
    if not 0.0 < level < 1.0:
        raise DomainError("level must be in (0, 1)")
    if not fit.converged:
        raise DomainError("envelope requires a converged fit")

    jobs = [
        (fit.spec.design, fit.mu, fit.theta.gamma, fit.theta.lam, fit.spec.tau,
         fit.spec.link.name, seed, b)
        for b in range(n_sim)
    ]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_envelope_replicate, jobs, chunksize=8))
    else:
        results = [_envelope_replicate(j) for j in jobs]

    kept = [r for r in results if r is not None]
    n_failed = n_sim - len(kept)
    if n_failed > 0.1 * n_sim:
        raise ConvergenceFailure(
            f"{n_failed}/{n_sim} envelope replicates failed to refit"
        )
    sims = np.vstack(kept)
    half = 100.0 * (1.0 - level) / 2.0
    lower = np.percentile(sims, half, axis=0, method="inverted_cdf")
    median = np.percentile(sims, 50.0, axis=0, method="inverted_cdf")
    upper = np.percentile(sims, 100.0 - half, axis=0, method="inverted_cdf")
    observed = np.sort(quantile_residuals(fit).residuals)
    return EnvelopeBands(
        sorted_residuals=observed, lower=lower, median=median, upper=upper,
        coverage_level=level, n_sim=n_sim, n_failed=n_failed,
    )
