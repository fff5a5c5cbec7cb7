"""Quantile regression on the unit interval.

The tau-quantile of each response is linked to covariates through
g(mu_t) = x_t' beta; the response follows the quantile-parameterized
distribution with shared shapes (gamma, lambda).  Parameter order throughout
is theta = (gamma, lambda, beta_0, ..., beta_{k-1}).
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .distribution import alpha_of_mu, quantile_solve
from .errors import DomainError, RankDeficientDesign
from .inference import (
    Dataset,
    FitOptions,
    FitResult,
    GAMMA_FLOOR,
    LAMBDA_FLOOR,
    _BIG_NLL,
    _covariance_from_info,
    _criteria_or_nan,
    _standard_errors,
    lbfgsb_maximize,
)
from .links import LinkFunction, get_link

__all__ = [
    "RegressionSpec",
    "RegressionTheta",
    "RegressionWorkspace",
    "RegressionFit",
    "loglik_rq",
    "score_rq",
    "observed_info_rq",
    "fit_rq",
    "predict_quantile",
    "ols_init",
    "simulate_response",
]

# saturation clamp applied to fitted quantiles inside likelihood evaluation
_MU_CLIP_LO = 1e-12
_MU_CLIP_HI = 1.0 - 1e-12


@dataclass(frozen=True)
class RegressionSpec:
    """Design matrix, unit-interval response, quantile level and link."""

    design: np.ndarray
    response: Dataset
    tau: float
    link: LinkFunction

    def __post_init__(self):
        x = np.asarray(self.design, dtype=float)
        if x.ndim != 2:
            raise DomainError("design must be a 2-d matrix")
        if not np.all(np.isfinite(x)):
            raise DomainError("design must be finite")
        if x.shape[0] != self.response.n:
            raise DomainError(
                f"design has {x.shape[0]} rows but response has {self.response.n}"
            )
        if x.shape[1] < 1 or x.shape[1] >= x.shape[0]:
            raise DomainError("need 1 <= k < n covariate columns")
        if not 0.0 < self.tau < 1.0:
            raise DomainError(f"tau must be in (0, 1), got {self.tau}")
        x = x.copy()
        x.setflags(write=False)
        object.__setattr__(self, "design", x)

    @property
    def n(self) -> int:
        return int(self.design.shape[0])

    @property
    def k(self) -> int:
        return int(self.design.shape[1])


@dataclass(frozen=True)
class RegressionTheta:
    """Model parameters: shapes (gamma, lambda) plus coefficients beta."""

    gamma: float
    lam: float
    beta: np.ndarray

    def __post_init__(self):
        b = np.atleast_1d(np.asarray(self.beta, dtype=float))
        if b.ndim != 1 or not np.all(np.isfinite(b)):
            raise DomainError("beta must be a finite 1-d vector")
        if not (np.isfinite(self.gamma) and self.gamma > 0):
            raise DomainError(f"gamma must be > 0, got {self.gamma}")
        if not (np.isfinite(self.lam) and self.lam >= 0):
            raise DomainError(f"lam must be >= 0, got {self.lam}")
        b = b.copy()
        b.setflags(write=False)
        object.__setattr__(self, "beta", b)

    def as_vector(self) -> np.ndarray:
        return np.concatenate([[self.gamma, self.lam], self.beta])


@dataclass(frozen=True)
class RegressionWorkspace:
    """Per-observation score/curvature intermediates at given parameters."""

    mu: np.ndarray
    a: np.ndarray
    b: np.ndarray
    v: np.ndarray
    z: np.ndarray
    w: np.ndarray
    rdia: np.ndarray
    sdia: np.ndarray
    udia: np.ndarray
    vdia: np.ndarray
    zdia: np.ndarray
    wdia: np.ndarray


def _check_rank(x: np.ndarray):
    _, r, _ = scipy.linalg.qr(x, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    tol = 1e-10 * np.linalg.norm(x, 2)
    if np.sum(diag > tol) < x.shape[1]:
        raise RankDeficientDesign("design matrix is rank deficient")


def _mu_of(theta: RegressionTheta, spec: RegressionSpec):
    """Fitted quantiles for each row, clamped away from saturation.

    Returns (mu, n_clamped); the clamp keeps line searches finite when a
    link saturates.
    """
    eta = spec.design @ theta.beta
    mu = spec.link.inverse(eta)
    clamped = int(np.sum((mu < _MU_CLIP_LO) | (mu > _MU_CLIP_HI)))
    return np.clip(mu, _MU_CLIP_LO, _MU_CLIP_HI), clamped


def _loglik_terms(gamma, lam, mu, y, tau):
    """Per-observation log-likelihood using the quantile parameterization."""
    ly = np.log(y)
    lu = np.log(-ly)
    lmu = np.log(mu)
    llmu = np.log(-lmu)
    ltau = np.log(tau)
    # r0 = A_t / (y^lam * (-log mu)^gamma)  (negative); the exponent of the CDF is -r0
    r0 = ltau * np.exp(lam * (lmu - ly) + gamma * (lu - llmu))
    return (
        np.log(-ltau) + lam * lmu - gamma * llmu
        + np.log(gamma - lam * ly) - (lam + 1.0) * ly + (gamma - 1.0) * lu + r0
    )


def loglik_rq(theta: RegressionTheta, spec: RegressionSpec) -> float:
    """Regression log-likelihood at theta (fitted quantiles clamped)."""
    mu, _ = _mu_of(theta, spec)
    if np.any(mu <= 0.0) or np.any(mu >= 1.0):
        raise DomainError("a linear predictor mapped outside (0, 1)")
    return float(np.sum(_loglik_terms(theta.gamma, theta.lam, mu, spec.response.values,
                                      spec.tau)))


def regression_workspace(theta: RegressionTheta, spec: RegressionSpec) -> RegressionWorkspace:
    g, l = theta.gamma, theta.lam
    mu, _ = _mu_of(theta, spec)
    y = spec.response.values
    ly = np.log(y)
    lu = np.log(-ly)
    lmu = np.log(mu)
    llmu = np.log(-lmu)
    ltau = np.log(spec.tau)

    a = np.exp(l * lmu + g * lu) * ltau                      # mu^lam * log(tau) * (-log y)^gamma
    b = lu - llmu
    r0 = ltau * np.exp(l * (lmu - ly) + g * (lu - llmu))     # a / (y^lam (-log mu)^gamma)
    den = g - l * ly

    v = r0 * b + 1.0 / den + b
    z = r0 * (lmu - ly) - ly / den - ly + lmu
    w = (1.0 + r0) * (l * lmu - g) / (mu * lmu)

    rdia = r0 * b**2 - 1.0 / den**2
    sdia = r0 * (lmu - ly) ** 2 - (ly / den) ** 2
    udia = ly / den**2 + r0 * b * (lmu - ly)
    vdia = (-r0 * (b * (g - l * lmu) + 1.0) - 1.0) / (mu * lmu)
    zdia = -r0 * (ly - lmu) * (l * lmu - g) / (mu * lmu) + (1.0 + r0) / mu
    wdia = (
        g / (mu * lmu) ** 2
        - (g * lmu * ((2.0 * l - 1.0) * r0 - 1.0) - r0 * g * (g + 1.0)) / (mu * lmu) ** 2
        - l * (1.0 + (1.0 - l) * r0) / mu**2
    )
    return RegressionWorkspace(mu=mu, a=a, b=b, v=v, z=z, w=w,
                               rdia=rdia, sdia=sdia, udia=udia,
                               vdia=vdia, zdia=zdia, wdia=wdia)


def score_rq(theta: RegressionTheta, spec: RegressionSpec) -> np.ndarray:
    """Score in (gamma, lambda, beta): (sum v, sum z, X' T w) with T = 1/g'(mu)."""
    ws = regression_workspace(theta, spec)
    t = 1.0 / spec.link.deriv(ws.mu)
    return np.concatenate([[ws.v.sum(), ws.z.sum()], spec.design.T @ (t * ws.w)])


def observed_info_rq(theta: RegressionTheta, spec: RegressionSpec) -> np.ndarray:
    """Observed information: minus the Hessian assembled from closed forms."""
    ws = regression_workspace(theta, spec)
    x = spec.design
    gp = spec.link.deriv(ws.mu)
    t = 1.0 / gp
    tdia = -spec.link.deriv2(ws.mu) / gp**2
    l_bg = x.T @ (t * ws.vdia)
    l_bl = x.T @ (t * ws.zdia)
    m = ws.wdia * t + ws.w * tdia
    l_bb = x.T @ (x * (m * t)[:, None])
    k = spec.k
    hess = np.empty((2 + k, 2 + k))
    hess[0, 0] = ws.rdia.sum()
    hess[1, 1] = ws.sdia.sum()
    hess[0, 1] = hess[1, 0] = ws.udia.sum()
    hess[0, 2:] = hess[2:, 0] = l_bg
    hess[1, 2:] = hess[2:, 1] = l_bl
    hess[2:, 2:] = 0.5 * (l_bb + l_bb.T)
    return -hess


def ols_init(spec: RegressionSpec) -> RegressionTheta:
    """Starting values: least squares of g(y) on X; shapes start at 1."""
    _check_rank(spec.design)
    g_y = spec.link.g(spec.response.values)
    beta0, *_ = np.linalg.lstsq(spec.design, g_y, rcond=None)
    return RegressionTheta(gamma=1.0, lam=1.0, beta=beta0)


def _theta_of(x, k):
    return RegressionTheta(gamma=x[0], lam=x[1], beta=x[2:2 + k])


def _nll_and_grad_rq(x, spec):
    theta = RegressionTheta(gamma=max(x[0], GAMMA_FLOOR), lam=max(x[1], 0.0), beta=x[2:])
    with np.errstate(over="ignore", invalid="ignore"):
        mu, _ = _mu_of(theta, spec)
        ll = np.sum(_loglik_terms(theta.gamma, theta.lam, mu, spec.response.values,
                                  spec.tau))
        if not np.isfinite(ll):
            return _BIG_NLL, np.zeros_like(x)
        grad = score_rq(theta, spec)
    if not np.all(np.isfinite(grad)):
        return _BIG_NLL, np.zeros_like(x)
    return -ll, -grad


def _fd_info_rq(theta_vec, spec):
    k = spec.k
    dim = 2 + k
    jac = np.empty((dim, dim))
    for i in range(dim):
        h = 1e-6 * (1.0 + abs(theta_vec[i]))
        tp, tm = theta_vec.copy(), theta_vec.copy()
        tp[i] += h
        floor = GAMMA_FLOOR if i == 0 else (LAMBDA_FLOOR if i == 1 else -np.inf)
        tm[i] = max(tm[i] - h, floor)
        jac[:, i] = (
            score_rq(_theta_of(tp, k), spec) - score_rq(_theta_of(tm, k), spec)
        ) / (tp[i] - tm[i])
    return -0.5 * (jac + jac.T)


@dataclass(frozen=True)
class RegressionFit(FitResult):
    """FitResult plus the regression context and fitted quantiles."""

    spec: RegressionSpec
    theta: RegressionTheta
    mu: np.ndarray
    n_clamped: int


def fit_rq(spec: RegressionSpec, opts: FitOptions | None = None) -> RegressionFit:
    """Maximize the regression likelihood over (gamma, lambda, beta).

    gamma and lambda are floor-bounded, beta is free.  Standard errors come
    from the inverse observed information with a finite-difference retry.
    """
    opts = opts or FitOptions()
    k = spec.k
    if spec.n <= k + 2:
        raise DomainError(f"need n > k + 2 observations (n={spec.n}, k={k})")
    _check_rank(spec.design)

    theta0 = ols_init(spec)
    x0 = theta0.as_vector()
    bounds = [(GAMMA_FLOOR, None), (LAMBDA_FLOOR, None)] + [(None, None)] * k
    x_hat, iterations, converged = lbfgsb_maximize(
        lambda t: _nll_and_grad_rq(t, spec), x0, bounds, opts,
    )
    theta = _theta_of(x_hat, k)
    mu, n_clamped = _mu_of(theta, spec)
    ll = float(np.sum(_loglik_terms(theta.gamma, theta.lam, mu, spec.response.values,
                                    spec.tau)))

    info = observed_info_rq(theta, spec)
    vcov = _covariance_from_info(info)
    message = ""
    if vcov is None:
        vcov = _covariance_from_info(_fd_info_rq(x_hat.copy(), spec))
        if vcov is not None:
            message = "information inverted from finite-difference Hessian"
    se = None
    if vcov is None:
        message = "singular information: standard errors unavailable"
    else:
        se = _standard_errors(vcov)
    if n_clamped:
        flag = f"{n_clamped} fitted quantile(s) clamped at the saturation bound"
        message = f"{message}; {flag}" if message else flag

    q = 2 + k
    names = ("gamma", "lam") + tuple(f"beta{j}" for j in range(k))
    return RegressionFit(
        estimates=x_hat.copy(),
        std_errors=se,
        vcov=vcov,
        loglik=ll,
        n=spec.n,
        q=q,
        converged=converged,
        iterations=iterations,
        criteria=_criteria_or_nan(ll, q, spec.n),
        param_names=names,
        fixed={},
        message=message,
        spec=spec,
        theta=theta,
        mu=mu,
        n_clamped=n_clamped,
    )


def predict_quantile(fit: RegressionFit, x_new, tau_new: float | None = None):
    """Predicted quantile g^-1(x_new' beta); re-solves when tau_new differs."""
    x = np.asarray(x_new, dtype=float)
    squeeze = x.ndim == 1
    x2 = np.atleast_2d(x)
    if x2.shape[1] != fit.spec.k:
        raise DomainError(f"x_new has {x2.shape[1]} columns, expected {fit.spec.k}")
    mu = fit.spec.link.inverse(x2 @ fit.theta.beta)
    if tau_new is not None and tau_new != fit.spec.tau:
        alpha = alpha_of_mu(mu, fit.theta.gamma, fit.theta.lam, fit.spec.tau)
        mu = quantile_solve(alpha, fit.theta.gamma, fit.theta.lam, tau_new)
    return float(mu[0]) if squeeze else mu


def simulate_response(mu, gamma, lam, tau, rng: np.random.Generator) -> np.ndarray:
    """Inverse-transform draws from the quantile-parameterized model."""
    mu = np.asarray(mu, dtype=float)
    alpha = alpha_of_mu(mu, gamma, lam, tau)
    u = rng.integers(1, 1 << 53, size=mu.shape).astype(float) / float(1 << 53)
    return quantile_solve(alpha, gamma, lam, u)


def make_spec(design, response, tau: float = 0.5, link="logit") -> RegressionSpec:
    """Convenience constructor accepting a link name or LinkFunction."""
    if not isinstance(link, LinkFunction):
        link = get_link(link)
    if not isinstance(response, Dataset):
        response = Dataset(np.asarray(response, dtype=float))
    return RegressionSpec(design=np.asarray(design, dtype=float), response=response,
                          tau=float(tau), link=link)
