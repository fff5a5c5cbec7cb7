import numpy as np
import pytest


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260808)


def random_params(rng, n, alpha=(0.1, 3.0), gamma=(0.4, 3.0), lam=(0.0, 2.5)):
    """Well-conditioned random parameter triples for property tests."""
    return np.column_stack([
        rng.uniform(*alpha, size=n),
        rng.uniform(*gamma, size=n),
        rng.uniform(*lam, size=n),
    ])


def fd_gradient(f, x, step=1e-6):
    """Central finite differences with coordinate-scaled steps."""
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(x.size):
        h = step * (1.0 + abs(x[i]))
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = (f(xp) - f(xm)) / (xp[i] - xm[i])
    return g


def fd_jacobian(f, x, step=1e-6):
    """Central-difference Jacobian of a vector-valued function."""
    x = np.asarray(x, dtype=float)
    cols = []
    for i in range(x.size):
        h = step * (1.0 + abs(x[i]))
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        cols.append((f(xp) - f(xm)) / (xp[i] - xm[i]))
    return np.column_stack(cols)


def rel_err(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return np.max(np.abs(a - b)) / max(1.0, np.max(np.abs(a)))


def uw_mle_closed_form(y):
    """Independent two-parameter (lambda = 0) MLE oracle.

    With z = -log y the model is a standard Weibull sample in z, so the shape
    solves n/g + sum(log z) - n * sum(z^g log z)/sum(z^g) = 0 and the scale
    is alpha = n / sum(z^g); solved by bracketing Brent, no quasi-Newton
    machinery shared with the fitted path.
    """
    from scipy.optimize import brentq

    z = -np.log(np.asarray(y, dtype=float))
    lz = np.log(z)
    n = z.size

    def h(g):
        zg = z**g
        return n / g + lz.sum() - n * np.sum(zg * lz) / np.sum(zg)

    g_hat = brentq(h, 1e-3, 100.0, xtol=1e-13)
    return n / np.sum(z**g_hat), g_hat
