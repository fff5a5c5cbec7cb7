"""Unit-modified-Weibull distribution on (0, 1).

The distribution arises as Y = exp(-X) with X modified-Weibull, giving

    F(y) = exp(-alpha * (-log y)^gamma * y^-lambda),   y in (0, 1),

with scale alpha > 0 and shapes gamma > 0, lambda >= 0.  lambda = 0 is the
unit-Weibull submodel and (1, 1, 0) is the standard uniform.  All functions
accept scalars or arrays of y/tau and are pure; sampling state lives in the
caller-supplied seed or generator.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import DomainError

__all__ = [
    "UmwParams",
    "ReparamParams",
    "ShapeCoefficients",
    "cdf",
    "pdf",
    "log_pdf",
    "quantile",
    "sample",
    "hazard",
    "order_stat_pdf",
    "shape_coefficients",
    "alpha_from_quantile",
    "reparam_cdf",
    "reparam_log_pdf",
]

# smallest positive normal double; survival below this raises in hazard()
_DBL_MIN = np.finfo(float).tiny


@dataclass(frozen=True)
class UmwParams:
    """Natural parameter triple (alpha, gamma, lambda)."""

    alpha: float
    gamma: float
    lam: float

    def __post_init__(self):
        for name, value in (("alpha", self.alpha), ("gamma", self.gamma), ("lam", self.lam)):
            if not math.isfinite(value):
                raise DomainError(f"{name} must be finite, got {value!r}")
        if self.alpha <= 0:
            raise DomainError(f"alpha must be > 0, got {self.alpha}")
        if self.gamma <= 0:
            raise DomainError(f"gamma must be > 0, got {self.gamma}")
        if self.lam < 0:
            raise DomainError(f"lam must be >= 0, got {self.lam}")


@dataclass(frozen=True)
class ReparamParams:
    """Quantile parameterization (mu_tau, gamma, lambda) at level tau.

    mu_tau is the tau-quantile of the distribution; alpha is recovered
    through :func:`alpha_from_quantile`.
    """

    mu_tau: float
    gamma: float
    lam: float
    tau: float

    def __post_init__(self):
        for name, value in (
            ("mu_tau", self.mu_tau),
            ("gamma", self.gamma),
            ("lam", self.lam),
            ("tau", self.tau),
        ):
            if not math.isfinite(value):
                raise DomainError(f"{name} must be finite, got {value!r}")
        if not 0.0 < self.mu_tau < 1.0:
            raise DomainError(f"mu_tau must be in (0, 1), got {self.mu_tau}")
        if not 0.0 < self.tau < 1.0:
            raise DomainError(f"tau must be in (0, 1), got {self.tau}")
        if self.gamma <= 0:
            raise DomainError(f"gamma must be > 0, got {self.gamma}")
        if self.lam < 0:
            raise DomainError(f"lam must be >= 0, got {self.lam}")


@dataclass(frozen=True)
class ShapeCoefficients:
    """Quantile-based shape summary: Bowley skewness and Moors kurtosis."""

    bowley_skewness: float
    moors_kurtosis: float


def _validate_unit_open(y, name="y"):
    """Return y as float array, rejecting anything outside the open (0, 1)."""
    arr = np.asarray(y, dtype=float)
    if arr.size and (not np.all(np.isfinite(arr)) or np.any(arr <= 0.0) or np.any(arr >= 1.0)):
        raise DomainError(f"{name} must lie strictly inside (0, 1)")
    return arr


def _scalar_like(ref, value):
    """Collapse 0-d results back to Python float."""
    return float(value) if np.isscalar(ref) or np.ndim(ref) == 0 else value


def cum_hazard(alpha, gamma, lam, y):
    """alpha * y^-lambda * (-log y)^gamma, evaluated in log space.

    This is the exponent of the CDF (the cumulative hazard of the parent
    modified-Weibull variable at -log y); computing it as
    exp(log alpha + lam*u + gamma*log u) with u = -log y avoids overflow of
    the separate powers near y -> 0.
    """
    u = -np.log(y)
    with np.errstate(divide="ignore", over="ignore"):
        return np.exp(np.log(alpha) + lam * u + gamma * np.log(u))


def cdf(p: UmwParams, y):
    """Distribution function exp(-alpha * (-log y)^gamma * y^-lambda)."""
    arr = _validate_unit_open(y)
    out = np.exp(-cum_hazard(p.alpha, p.gamma, p.lam, arr))
    return _scalar_like(y, out)


def log_pdf(p: UmwParams, y):
    """Log density; finite for every y in (0, 1).

    log f = log alpha + log(gamma - lambda*log y) - (lambda+1)*log y
            + (gamma-1)*log(-log y) - alpha * y^-lambda * (-log y)^gamma.
    """
    arr = _validate_unit_open(y)
    out = _log_pdf_raw(p.alpha, p.gamma, p.lam, arr)
    return _scalar_like(y, out)


def _log_pdf_raw(alpha, gamma, lam, arr):
    ly = np.log(arr)
    u = -ly
    with np.errstate(divide="ignore", over="ignore"):
        lu = np.log(u)
        h = np.exp(np.log(alpha) + lam * u + gamma * lu)
    return np.log(alpha) + np.log(gamma - lam * ly) - (lam + 1.0) * ly + (gamma - 1.0) * lu - h


def pdf(p: UmwParams, y):
    """Density of the distribution, exp(log_pdf)."""
    arr = _validate_unit_open(y)
    out = np.exp(_log_pdf_raw(p.alpha, p.gamma, p.lam, arr))
    return _scalar_like(y, out)


def quantile_solve(alpha, gamma, lam, tau):
    """Vectorized quantile: solve mu^-lambda * (-log mu)^gamma = -log(tau)/alpha.

    Substituting u = -log mu turns the target into g(u) = lam*u + gamma*log u - c
    with c = log(-log tau / alpha), strictly increasing in u, so a safeguarded
    Newton iteration started from the lam = 0 closed form u0 = (-log tau/alpha)^(1/gamma)
    (where g(u0) = lam*u0 >= 0) converges monotonically once bracketed.
    alpha and tau broadcast against each other.
    """
    alpha = np.asarray(alpha, dtype=float)
    tau_arr = np.asarray(tau, dtype=float)
    if tau_arr.size and (
        not np.all(np.isfinite(tau_arr)) or np.any(tau_arr <= 0.0) or np.any(tau_arr >= 1.0)
    ):
        raise DomainError("tau must lie strictly inside (0, 1)")
    k = -np.log(tau_arr) / alpha
    c = np.log(k)
    if lam == 0.0:
        u = k ** (1.0 / gamma)
    else:
        u = k ** (1.0 / gamma)
        for _ in range(200):
            g = lam * u + gamma * np.log(u) - c
            step = g / (lam + gamma / u)
            u_new = u - step
            # Newton from the right can overshoot past 0; halve instead.
            u_new = np.where(u_new <= 0.0, 0.5 * u, u_new)
            done = np.abs(u_new - u) <= 1e-13 * np.maximum(1.0, np.abs(u_new))
            u = u_new
            if np.all(done):
                break
    y = np.exp(-u)
    if y.size and (np.any(y <= 0.0) or np.any(y >= 1.0)):
        raise DomainError(
            "quantile not representable as a double strictly inside (0, 1) "
            "for these parameters"
        )
    return y


def quantile(p: UmwParams, tau):
    """tau-quantile; inverts the CDF so that cdf(p, quantile(p, tau)) == tau."""
    out = quantile_solve(p.alpha, p.gamma, p.lam, tau)
    return _scalar_like(tau, out)


def _open_uniform(rng: np.random.Generator, n: int) -> np.ndarray:
    # 53-bit integers in [1, 2^53 - 1] keep draws strictly inside (0, 1)
    return rng.integers(1, 1 << 53, size=n).astype(float) / float(1 << 53)


def as_generator(seed) -> np.random.Generator:
    """Accept an int seed or an existing Generator (splittable streams)."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample(p: UmwParams, n: int, seed) -> np.ndarray:
    """n inverse-transform draws; deterministic given the seed."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    rng = as_generator(seed)
    return quantile_solve(p.alpha, p.gamma, p.lam, _open_uniform(rng, int(n)))


def hazard(p: UmwParams, y):
    """Hazard rate pdf / (1 - cdf), with the survival computed as -expm1(-H).

    Raises OverflowError when the survival underflows below the smallest
    positive normal double (y so close to 1 that 1 - F is not representable).
    """
    arr = _validate_unit_open(y)
    h = cum_hazard(p.alpha, p.gamma, p.lam, arr)
    survival = -np.expm1(-h)
    if np.any(survival < _DBL_MIN):
        raise OverflowError("survival 1 - cdf(y) underflowed; hazard not representable")
    out = np.exp(_log_pdf_raw(p.alpha, p.gamma, p.lam, arr) - np.log(survival))
    return _scalar_like(y, out)


def order_stat_pdf(p: UmwParams, n: int, r: int, y):
    """Density of the r-th smallest of an i.i.d. sample of size n.

    Closed form: C(n,r) * f(y) * (1 - F(y))^(n-r) * F(y)^(r-1) with the
    binomial-style factor n! / ((r-1)! (n-r)!); r = 1 and r = n give the
    minimum and maximum.
    """
    if not 1 <= r <= n:
        raise DomainError(f"r must satisfy 1 <= r <= n, got r={r}, n={n}")
    arr = _validate_unit_open(y)
    h = cum_hazard(p.alpha, p.gamma, p.lam, arr)
    log_comb = gammaln(n + 1) - gammaln(r) - gammaln(n - r + 1)
    log_f = _log_pdf_raw(p.alpha, p.gamma, p.lam, arr)
    with np.errstate(divide="ignore"):
        log_tail = (n - r) * np.log(-np.expm1(-h))
    out = np.exp(log_comb + log_f + log_tail - (r - 1) * h)
    return _scalar_like(y, out)


def shape_coefficients(p: UmwParams) -> ShapeCoefficients:
    """Bowley skewness and Moors kurtosis from octiles of the distribution."""
    q = quantile_solve(p.alpha, p.gamma, p.lam, np.arange(1, 8) / 8.0)
    q1, q2, q3 = q[1], q[3], q[5]
    s = (q3 + q1 - 2.0 * q2) / (q3 - q1)
    k = (q[6] + q[2] - q[4] - q[0]) / (q3 - q1)
    return ShapeCoefficients(bowley_skewness=float(s), moors_kurtosis=float(k))


def alpha_of_mu(mu, gamma, lam, tau):
    """Scale implied by requiring mu to be the tau-quantile (vectorized):
    alpha = -log(tau) * mu^lambda / (-log mu)^gamma."""
    mu = np.asarray(mu, dtype=float)
    return -np.log(tau) * mu**lam / (-np.log(mu)) ** gamma


def alpha_from_quantile(r: ReparamParams) -> float:
    """Invert the quantile equation for alpha at (mu_tau, gamma, lambda, tau)."""
    return float(alpha_of_mu(r.mu_tau, r.gamma, r.lam, r.tau))


def reparam_cdf(r: ReparamParams, y):
    """CDF under the quantile parameterization; reparam_cdf(r, mu_tau) = tau."""
    return cdf(UmwParams(alpha_from_quantile(r), r.gamma, r.lam), y)


def reparam_log_pdf(r: ReparamParams, y):
    """Log density under the quantile parameterization."""
    return log_pdf(UmwParams(alpha_from_quantile(r), r.gamma, r.lam), y)
