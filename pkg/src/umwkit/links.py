"""Link functions g: (0,1) -> R for the quantile regression model.

Each link carries the forward map g, its inverse, and the first two
derivatives g' and g'' needed by the score and observed information.
Inverse links are clamped into the open unit interval so saturated linear
predictors never produce mu = 0 or mu = 1 exactly.
"""

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import DomainError

__all__ = ["LinkFunction", "LINK_NAMES", "get_link", "link_eval"]

# clamp window for inverse links: open interval, representable in binary64
_MU_LO = 1e-300
_MU_HI = float(np.nextafter(1.0, 0.0))

_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _clip_unit(mu):
    return np.clip(mu, _MU_LO, _MU_HI)


# ---- logit ----------------------------------------------------------------

def _logit_g(mu):
    return np.log(mu) - np.log1p(-mu)


def _logit_inv(eta):
    # expit via the numerically symmetric form
    out = np.where(eta >= 0, 1.0 / (1.0 + np.exp(-eta)), np.exp(eta) / (1.0 + np.exp(eta)))
    return _clip_unit(out)


def _logit_d1(mu):
    return 1.0 / (mu * (1.0 - mu))


def _logit_d2(mu):
    return (2.0 * mu - 1.0) / (mu * (1.0 - mu)) ** 2


# ---- probit ---------------------------------------------------------------

def _probit_g(mu):
    return ndtri(mu)


def _probit_inv(eta):
    return _clip_unit(ndtr(eta))


def _probit_d1(mu):
    q = ndtri(mu)
    return _SQRT_2PI * np.exp(0.5 * q * q)


def _probit_d2(mu):
    q = ndtri(mu)
    return 2.0 * math.pi * q * np.exp(q * q)


# ---- cloglog: g = log(-log(1 - mu)) ---------------------------------------

def _cloglog_g(mu):
    return np.log(-np.log1p(-mu))


def _cloglog_inv(eta):
    return _clip_unit(-np.expm1(-np.exp(eta)))


def _cloglog_d1(mu):
    return -1.0 / ((1.0 - mu) * np.log1p(-mu))


def _cloglog_d2(mu):
    big_l = -np.log1p(-mu)
    return (big_l - 1.0) / ((1.0 - mu) * big_l) ** 2


# ---- loglog: g = -log(-log(mu)) -------------------------------------------

def _loglog_g(mu):
    return -np.log(-np.log(mu))


def _loglog_inv(eta):
    return _clip_unit(np.exp(-np.exp(-eta)))


def _loglog_d1(mu):
    return -1.0 / (mu * np.log(mu))


def _loglog_d2(mu):
    big_m = -np.log(mu)
    return (1.0 - big_m) / (mu * big_m) ** 2


# ---- cauchit --------------------------------------------------------------

def _cauchit_g(mu):
    return np.tan(math.pi * (mu - 0.5))


def _cauchit_inv(eta):
    return _clip_unit(0.5 + np.arctan(eta) / math.pi)


def _cauchit_d1(mu):
    t = np.tan(math.pi * (mu - 0.5))
    return math.pi * (1.0 + t * t)


def _cauchit_d2(mu):
    t = np.tan(math.pi * (mu - 0.5))
    return 2.0 * math.pi**2 * t * (1.0 + t * t)


@dataclass(frozen=True)
class LinkFunction:
    """A named link with g, its inverse, and first/second derivatives."""

    name: str
    g: Callable = field(repr=False)
    inverse: Callable = field(repr=False)
    deriv: Callable = field(repr=False)
    deriv2: Callable = field(repr=False)


_LINKS = {
    "logit": LinkFunction("logit", _logit_g, _logit_inv, _logit_d1, _logit_d2),
    "probit": LinkFunction("probit", _probit_g, _probit_inv, _probit_d1, _probit_d2),
    "cloglog": LinkFunction("cloglog", _cloglog_g, _cloglog_inv, _cloglog_d1, _cloglog_d2),
    "loglog": LinkFunction("loglog", _loglog_g, _loglog_inv, _loglog_d1, _loglog_d2),
    "cauchit": LinkFunction("cauchit", _cauchit_g, _cauchit_inv, _cauchit_d1, _cauchit_d2),
}

LINK_NAMES = tuple(_LINKS)


def get_link(name: str) -> LinkFunction:
    try:
        return _LINKS[name]
    except KeyError:
        raise DomainError(f"unknown link {name!r}; supported: {', '.join(LINK_NAMES)}") from None


def link_eval(link: LinkFunction, mu):
    """(g(mu), g'(mu), g''(mu)) for mu strictly inside (0, 1)."""
    arr = np.asarray(mu, dtype=float)
    if arr.size and (not np.all(np.isfinite(arr)) or np.any(arr <= 0.0) or np.any(arr >= 1.0)):
        raise DomainError("mu must lie strictly inside (0, 1)")
    if np.ndim(mu) == 0:
        return float(link.g(arr)), float(link.deriv(arr)), float(link.deriv2(arr))
    return link.g(arr), link.deriv(arr), link.deriv2(arr)
