"""Random variate generators used by the path simulators.

Both samplers are vectorised over an array of parameters and consume draws
from the supplied generator in a fixed order, so a seeded generator gives
reproducible output.
"""
from __future__ import annotations

import numpy as np


def inverse_gaussian(rng: np.random.Generator, mean, shape, size=None) -> np.ndarray:
    """Inverse Gaussian IG(mean, shape) by the Michael–Schucany–Haas transformation.

    Density sqrt(shape/(2 pi x^3)) exp(-shape (x - mean)^2 / (2 mean^2 x)).

    Parameters
    ----------
    rng : numpy.random.Generator
    mean, shape : float or array_like
        Positive parameters, broadcast against ``size``.
    size : int or tuple, optional
    """
    mean = np.asarray(mean, dtype=float)
    shape = np.asarray(shape, dtype=float)
    if size is None:
        size = np.broadcast(mean, shape).shape
    mu = np.broadcast_to(mean, size)
    lam = np.broadcast_to(shape, size)
    y = rng.standard_normal(size) ** 2
    muy = mu * y
    # Root of the quadratic written without the cancellation of the textbook form.
    x = mu - 2.0 * mu * muy / (muy + np.sqrt(muy * muy + 4.0 * mu * lam * y))
    z = rng.random(size)
    return np.where(z <= mu / (mu + x), x, mu * mu / x)


def standard_gamma(rng: np.random.Generator, shape, size=None) -> np.ndarray:
    """Gamma(shape, 1) by the Marsaglia–Tsang squeeze method.

    Shapes below 1 are boosted: Gamma(a) = Gamma(a + 1) * U^{1/a}.
    """
    shape = np.asarray(shape, dtype=float)
    if size is None:
        size = shape.shape
    a = np.broadcast_to(shape, size).astype(float).ravel()
    if np.any(a <= 0):
        raise ValueError("gamma shape must be > 0")
    boost = a < 1
    d = np.where(boost, a + 1.0, a) - 1.0 / 3.0
    c = 1.0 / np.sqrt(9.0 * d)
    out = np.empty(a.size)
    pending = np.arange(a.size)
    while pending.size:
        dp, cp = d[pending], c[pending]
        x = rng.standard_normal(pending.size)
        u = rng.random(pending.size)
        v = (1.0 + cp * x) ** 3
        ok = v > 0
        safe_v = np.where(ok, v, 1.0)
        accept = ok & ((u < 1.0 - 0.0331 * x**4) |
                       (np.log(u) < 0.5 * x * x + dp * (1.0 - safe_v + np.log(safe_v))))
        out[pending[accept]] = dp[accept] * safe_v[accept]
        pending = pending[~accept]
    if np.any(boost):
        u = rng.random(int(boost.sum()))
        out[boost] *= u ** (1.0 / a[boost])
    return out.reshape(size)
