"""Maximum-likelihood estimation for the three-parameter distribution.

Analytic score and observed information are used throughout; optimization is
bound-constrained L-BFGS-B started from (1, 1, 1), followed by a polish step
that snaps the scale to its semi-closed conditional MLE
alpha_hat(gamma, lambda) = n / sum((-log y_t)^gamma * y_t^-lambda).
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.special import ndtri
from scipy.stats import norm

from .distribution import UmwParams, _log_pdf_raw
from .errors import ConvergenceFailure, DomainError, SingularInformation

__all__ = [
    "Dataset",
    "ScoreWorkspace",
    "Criteria",
    "FitOptions",
    "FitResult",
    "WaldResult",
    "loglik_umw",
    "score_umw",
    "observed_info_umw",
    "score_workspace",
    "alpha_profile_mle",
    "fit_umw",
    "confidence_intervals",
    "wald_test",
    "info_criteria",
]

ALPHA_FLOOR = 1e-8
GAMMA_FLOOR = 1e-8
LAMBDA_FLOOR = 0.0

# objective value substituted when the log-likelihood is not finite; large
# enough that any feasible point wins the line-search comparison
_BIG_NLL = 1e300


@dataclass(frozen=True)
class Dataset:
    """An observed sample; every value strictly inside (0, 1)."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.atleast_1d(np.asarray(self.values, dtype=float))
        if arr.ndim != 1 or arr.size < 1:
            raise DomainError("dataset must be a nonempty 1-d sequence")
        if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0) or np.any(arr >= 1.0):
            raise DomainError("all dataset values must lie strictly inside (0, 1)")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def n(self) -> int:
        return int(self.values.size)

    def __len__(self) -> int:
        return self.n


@dataclass(frozen=True)
class ScoreWorkspace:
    """Per-observation first- and second-derivative terms of the log-density.

    r, s, u sum to the score in (alpha, gamma, lambda); the starred arrays
    sum to the second-derivative blocks of the observed information.
    """

    r: np.ndarray
    s: np.ndarray
    u: np.ndarray
    rstar: np.ndarray
    sstar: np.ndarray
    ustar: np.ndarray
    vstar: np.ndarray
    zstar: np.ndarray
    dstar: np.ndarray


@dataclass(frozen=True)
class Criteria:
    aic: float
    bic: float
    aicc: float


@dataclass(frozen=True)
class WaldResult:
    statistic: float
    p_value: float
    null_value: float
    index: str


@dataclass(frozen=True)
class FitOptions:
    """Optimizer configuration for fit_umw.

    fix_lambda pins lambda (e.g. 0 for the unit-Weibull submodel);
    profile_alpha optimizes only (gamma, lambda) with alpha concentrated out,
    off by default.
    """

    gradient_tolerance: float = 1e-6
    rel_objective_tolerance: float = 1e-10
    max_iterations: int = 500
    init: tuple = (1.0, 1.0, 1.0)
    fix_lambda: float | None = None
    profile_alpha: bool = False
    polish_alpha: bool = True


@dataclass(frozen=True)
class FitResult:
    estimates: np.ndarray
    std_errors: np.ndarray | None
    vcov: np.ndarray | None
    loglik: float
    n: int
    q: int
    converged: bool
    iterations: int
    criteria: Criteria
    param_names: tuple
    fixed: dict
    message: str


def loglik_umw(p: UmwParams, d: Dataset) -> float:
    """Sum of the log-density over the sample."""
    return float(np.sum(_log_pdf_raw(p.alpha, p.gamma, p.lam, d.values)))


def _derivative_terms(alpha, gamma, lam, y):
    """Shared intermediates: ly, lu, pw = (-log y)^gamma * y^-lambda, denom."""
    ly = np.log(y)
    u = -ly
    lu = np.log(u)
    pw = np.exp(gamma * lu + lam * u)
    denom = gamma - lam * ly
    return ly, lu, pw, denom


def score_workspace(p: UmwParams, d: Dataset) -> ScoreWorkspace:
    a, g, l = p.alpha, p.gamma, p.lam
    ly, lu, pw, den = _derivative_terms(a, g, l, d.values)
    apw = a * pw
    return ScoreWorkspace(
        r=1.0 / a - pw,
        s=1.0 / den - apw * lu + lu,
        u=-ly / den + apw * ly - ly,
        rstar=np.full_like(ly, -1.0 / a**2),
        sstar=-1.0 / den**2 - apw * lu**2,
        ustar=-(ly / den) ** 2 - apw * ly**2,
        vstar=-pw * lu,
        zstar=pw * ly,
        dstar=ly / den**2 + apw * ly * lu,
    )


def score_umw(p: UmwParams, d: Dataset) -> np.ndarray:
    """Score vector (d loglik / d alpha, d/d gamma, d/d lambda)."""
    ws = score_workspace(p, d)
    return np.array([ws.r.sum(), ws.s.sum(), ws.u.sum()])


def observed_info_umw(p: UmwParams, d: Dataset) -> np.ndarray:
    """Observed information: minus the Hessian of the log-likelihood."""
    ws = score_workspace(p, d)
    j_aa, j_gg, j_ll = ws.rstar.sum(), ws.sstar.sum(), ws.ustar.sum()
    j_ag, j_al, j_gl = ws.vstar.sum(), ws.zstar.sum(), ws.dstar.sum()
    return -np.array([[j_aa, j_ag, j_al], [j_ag, j_gg, j_gl], [j_al, j_gl, j_ll]])


def alpha_profile_mle(gamma: float, lam: float, d: Dataset) -> float:
    """Scale MLE given the shapes: n / sum((-log y_t)^gamma * y_t^-lambda)."""
    u = -np.log(d.values)
    s = np.sum(np.exp(gamma * np.log(u) + lam * u))
    return float(d.n / s)


def _nll_and_grad(x, y, fix_lambda):
    if fix_lambda is None:
        a, g, l = x
    else:
        a, g = x
        l = fix_lambda
    with np.errstate(over="ignore", invalid="ignore"):
        ly = np.log(y)
        u = -ly
        lu = np.log(u)
        pw = np.exp(g * lu + l * u)
        h = a * pw
        ll = np.sum(np.log(a) + np.log(g - l * ly) - (l + 1.0) * ly + (g - 1.0) * lu - h)
        if not np.isfinite(ll):
            return _BIG_NLL, np.zeros_like(np.asarray(x, dtype=float))
        den = g - l * ly
        d_a = np.sum(1.0 / a - pw)
        d_g = np.sum(1.0 / den - h * lu + lu)
        if fix_lambda is None:
            d_l = np.sum(-ly / den + h * ly - ly)
            return -ll, -np.array([d_a, d_g, d_l])
        return -ll, -np.array([d_a, d_g])


def _profile_nll_and_grad(x, y, n):
    # alpha concentrated out; by the envelope theorem the (gamma, lambda)
    # gradient at the profiled alpha is just (U_gamma, U_lambda)
    g, l = x
    with np.errstate(over="ignore", invalid="ignore"):
        ly = np.log(y)
        u = -ly
        lu = np.log(u)
        pw = np.exp(g * lu + l * u)
        a = n / np.sum(pw)
        h = a * pw
        ll = np.sum(np.log(a) + np.log(g - l * ly) - (l + 1.0) * ly + (g - 1.0) * lu - h)
        if not np.isfinite(ll):
            return _BIG_NLL, np.zeros(2)
        den = g - l * ly
        d_g = np.sum(1.0 / den - h * lu + lu)
        d_l = np.sum(-ly / den + h * ly - ly)
        return -ll, -np.array([d_g, d_l])


def _projected_gradient(grad, x, lower):
    """Gradient of the objective with components pointing out of the feasible
    box zeroed (lower bounds only; there are no upper bounds)."""
    pg = grad.copy()
    at_lb = (x <= lower + 1e-14) & (grad > 0.0)
    pg[at_lb] = 0.0
    return pg


_MACHEPS = float(np.finfo(float).eps)


def lbfgsb_maximize(nll_and_grad, x0, bounds, opts: "FitOptions", polish=None):
    """Bound-constrained quasi-Newton driver shared by both models.

    Runs L-BFGS-B restart cycles (optionally interleaved with a polish map
    such as the semi-closed alpha update) until either the projected score
    infinity-norm drops below gradient_tolerance or a full cycle changes the
    objective by less than rel_objective_tolerance.  Raises
    ConvergenceFailure once max_iterations is exhausted.
    Returns (x, iterations, converged).
    """
    lower = np.array([lo if lo is not None else -np.inf for lo, _ in bounds])
    x = np.asarray(x0, dtype=float)
    iterations = 0
    converged = False
    f_prev = None
    for _ in range(5):
        res = minimize(
            nll_and_grad, x, method="L-BFGS-B", jac=True, bounds=bounds,
            options={
                "maxiter": max(opts.max_iterations - iterations, 1),
                "ftol": _MACHEPS,
                "gtol": opts.gradient_tolerance,
                "maxls": 60,
            },
        )
        iterations += int(res.nit)
        x = res.x.copy()
        if res.status == 1 and iterations >= opts.max_iterations:
            raise ConvergenceFailure(f"iteration budget exhausted: {res.message}")
        if polish is not None:
            x = polish(x)
        f, grad = nll_and_grad(x)
        if np.max(np.abs(_projected_gradient(grad, x, lower))) <= opts.gradient_tolerance:
            converged = True
            break
        if f_prev is not None and abs(f_prev - f) <= opts.rel_objective_tolerance * max(
            abs(f), abs(f_prev), 1.0
        ):
            converged = True  # relative-objective-change criterion
            break
        f_prev = f
        if res.status == 2:
            break  # line-search failure; restarting will not help
    return x, iterations, converged


def _fd_hessian_of_score(theta, d, fix_lambda):
    """Central finite differences of the analytic score; fallback information."""
    k = theta.size
    jac = np.empty((k, k))
    idx = [0, 1] if fix_lambda is not None else [0, 1, 2]

    def full_score(t):
        if fix_lambda is None:
            p = UmwParams(t[0], t[1], t[2])
        else:
            p = UmwParams(t[0], t[1], fix_lambda)
        return score_umw(p, d)[idx]

    for i in range(k):
        h = 1e-6 * (1.0 + abs(theta[i]))
        tp, tm = theta.copy(), theta.copy()
        tp[i] += h
        tm[i] = max(tm[i] - h, ALPHA_FLOOR if i == 0 else (GAMMA_FLOOR if i == 1 else 0.0))
        jac[:, i] = (full_score(tp) - full_score(tm)) / (tp[i] - tm[i])
    return -0.5 * (jac + jac.T)


def _covariance_from_info(info):
    """Invert an observed information matrix; None on failure."""
    try:
        vcov = np.linalg.inv(info)
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(vcov)):
        return None
    return 0.5 * (vcov + vcov.T)


def _standard_errors(vcov):
    diag = np.diag(vcov)
    se = np.where(diag >= 0.0, np.sqrt(np.abs(diag)), np.nan)
    return se


def info_criteria(loglik: float, q: int, n: int) -> Criteria:
    """AIC, BIC and small-sample AICc from a maximized log-likelihood."""
    if q < 1 or n < 1:
        raise DomainError("q and n must be positive")
    aic = 2.0 * q - 2.0 * loglik
    bic = q * math.log(n) - 2.0 * loglik
    if n <= q + 1:
        raise DomainError(f"AICc undefined for n <= q + 1 (n={n}, q={q})")
    aicc = aic + (2.0 * q * q + 2.0 * q) / (n - q - 1.0)
    return Criteria(aic=aic, bic=bic, aicc=aicc)


def _criteria_or_nan(loglik, q, n):
    aic = 2.0 * q - 2.0 * loglik
    bic = q * math.log(n) - 2.0 * loglik
    aicc = aic + (2.0 * q * q + 2.0 * q) / (n - q - 1.0) if n > q + 1 else math.nan
    return Criteria(aic=aic, bic=bic, aicc=aicc)


def fit_umw(d: Dataset, opts: FitOptions | None = None) -> FitResult:
    """Maximum-likelihood fit of (alpha, gamma, lambda).

    Raises ConvergenceFailure when the iteration budget is exhausted.  When
    the observed information cannot be inverted (directly or through a
    finite-difference retry) the estimates are still returned with
    std_errors=None and an explanatory message.
    """
    opts = opts or FitOptions()
    fix = opts.fix_lambda
    if fix is not None and fix < 0:
        raise DomainError("fix_lambda must be >= 0")
    q = 2 if fix is not None else 3
    if d.n < 4:
        raise DomainError(f"need at least 4 observations, got {d.n}")
    y = d.values

    if opts.profile_alpha and fix is None:
        x, iterations, converged = lbfgsb_maximize(
            lambda t: _profile_nll_and_grad(t, y, d.n),
            np.asarray(opts.init[1:], dtype=float),
            [(GAMMA_FLOOR, None), (LAMBDA_FLOOR, None)],
            opts,
        )
        a_hat = max(alpha_profile_mle(x[0], x[1], d), ALPHA_FLOOR)
        theta = np.array([a_hat, x[0], x[1]])
    else:
        if fix is None:
            x0 = np.asarray(opts.init, dtype=float)
            bounds = [(ALPHA_FLOOR, None), (GAMMA_FLOOR, None), (LAMBDA_FLOOR, None)]
        else:
            x0 = np.asarray(opts.init[:2], dtype=float)
            bounds = [(ALPHA_FLOOR, None), (GAMMA_FLOOR, None)]

        polish = None
        if opts.polish_alpha:
            def polish(x):
                lam_here = fix if fix is not None else x[2]
                x = x.copy()
                x[0] = max(alpha_profile_mle(x[1], lam_here, d), ALPHA_FLOOR)
                return x

        x, iterations, converged = lbfgsb_maximize(
            lambda t: _nll_and_grad(t, y, fix), x0, bounds, opts, polish=polish,
        )
        theta = np.array([x[0], x[1], fix]) if fix is not None else x

    p_hat = UmwParams(theta[0], theta[1], theta[2])
    ll = loglik_umw(p_hat, d)

    free = np.array([theta[0], theta[1]]) if fix is not None else theta
    info = observed_info_umw(p_hat, d)
    if fix is not None:
        info = info[:2, :2]
    vcov = _covariance_from_info(info)
    message = ""
    if vcov is None:
        vcov = _covariance_from_info(_fd_hessian_of_score(free.copy(), d, fix))
        if vcov is not None:
            message = "information inverted from finite-difference Hessian"
    se = None
    if vcov is None:
        message = "singular information: standard errors unavailable"
    else:
        se = _standard_errors(vcov)

    names = ("alpha", "gamma") if fix is not None else ("alpha", "gamma", "lam")
    return FitResult(
        estimates=free,
        std_errors=se,
        vcov=vcov,
        loglik=ll,
        n=d.n,
        q=q,
        converged=converged,
        iterations=iterations,
        criteria=_criteria_or_nan(ll, q, d.n),
        param_names=names,
        fixed={} if fix is None else {"lam": float(fix)},
        message=message,
    )


def _resolve_index(f: FitResult, index) -> int:
    if isinstance(index, str):
        try:
            return f.param_names.index(index)
        except ValueError:
            raise DomainError(f"unknown parameter {index!r}; have {f.param_names}") from None
    i = int(index)
    if not 0 <= i < len(f.param_names):
        raise DomainError(f"parameter index {i} out of range for {f.param_names}")
    return i


def confidence_intervals(f: FitResult, level: float = 0.95) -> np.ndarray:
    """Wald intervals estimate +/- z_{nu/2} * se at confidence `level`; (q, 2)."""
    if not 0.0 < level < 1.0:
        raise DomainError("level must be in (0, 1)")
    if f.std_errors is None or np.any(np.isnan(f.std_errors)):
        raise SingularInformation("standard errors unavailable; no intervals")
    z = ndtri(0.5 + level / 2.0)
    half = z * f.std_errors
    return np.column_stack([f.estimates - half, f.estimates + half])


def wald_test(f: FitResult, index, null_value: float = 0.0) -> WaldResult:
    """Two-sided Wald test of parameter == null_value."""
    i = _resolve_index(f, index)
    if f.std_errors is None or np.isnan(f.std_errors[i]):
        raise SingularInformation(f"standard error unavailable for {f.param_names[i]}")
    se = float(f.std_errors[i])
    if se == 0.0:
        w = math.inf if f.estimates[i] != null_value else 0.0
    else:
        w = (float(f.estimates[i]) - null_value) / se
    p = 2.0 * norm.sf(abs(w))
    return WaldResult(statistic=float(w), p_value=float(p), null_value=float(null_value),
                      index=f.param_names[i])
