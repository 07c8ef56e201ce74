"""Product-trapezoid convolution quadrature on uniform grids.

For a kernel ``k`` with moments ``G0(u) = int_0^u k`` and
``G1(u) = int_0^u s k(s) ds`` the scheme integrates ``k`` exactly against
the piecewise-linear interpolant of the samples:

    int_0^{t_j} k(t_j - x) f(x) dx ~ sum_l w_l f_{j-l} - C_j f_0
"""

from __future__ import annotations

import threading

import numpy as np

from .specialfn import gamma, ml_series

_CACHE: dict = {}
_LOCK = threading.Lock()


def _cached(key, build):
    hit = _CACHE.get(key)
    if hit is not None:
        return hit
    with _LOCK:
        hit = _CACHE.get(key)
        if hit is None:
            hit = build()
            for arr in hit:
                arr.setflags(write=False)
            _CACHE[key] = hit
    return hit


def clear_cache():
    with _LOCK:
        _CACHE.clear()


def _weights_from_moments(g0, g1, h):
    """Combined weights from moments sampled at ``u_i = i h``, ``i = 0..n``."""
    m0 = np.diff(g0)
    m1 = np.diff(g1)
    i = np.arange(m0.size, dtype=g0.dtype)
    upper = (m1 - i * h * m0) / h          # weight on the far end of cell i
    lower = ((i + 1) * h * m0 - m1) / h    # weight on the near end of cell i
    w = lower.copy()
    w[1:] += upper[:-1]
    return np.asarray(w, dtype=float), np.asarray(lower, dtype=float)


def rl_weights(n, mu, h):
    """Weights for the kernel ``u**(mu-1)/Gamma(mu)``.

    Moments are formed in extended precision since the differences of
    neighbouring powers cancel for large ``i``.
    """
    key = ("rl", n, float(mu), float(h))

    def build():
        u = np.arange(n + 1, dtype=np.longdouble)
        lmu = np.longdouble(mu)
        g0 = u**lmu
        g1 = lmu / (lmu + 1) * u ** (lmu + 1)
        w, lower = _weights_from_moments(g0, g1, np.longdouble(1.0))
        scale = h**mu / gamma(mu + 1.0)
        return w * scale, lower * scale

    return _cached(key, build)


def ml_weights(n, alpha, c, h, kind):
    """Weights for Mittag-Leffler kernels with ``z = c u**alpha``.

    ``kind="dt"`` uses ``k(u) = d/du E_alpha(z)`` (moments ``E_alpha(z) - 1`` and
    ``u (E_{alpha,1}(z) - E_{alpha,2}(z))``); ``kind="plain"`` uses
    ``k(u) = E_alpha(z)`` (moments ``u E_{alpha,2}(z)`` and
    ``u**2 (E_{alpha,2}(z) - E_{alpha,3}(z))``); ``kind="alpha"`` uses
    ``k(u) = u**(alpha-1) E_{alpha,alpha}(z)``, which is the ``dt`` kernel
    divided by ``c`` and stays regular as ``c -> 0``.
    """
    key = ("ml", kind, n, float(alpha), float(c), float(h))

    def build():
        u = h * np.arange(n + 1, dtype=float)
        z = c * np.power(u, alpha)
        if kind == "dt":
            e2 = ml_series(alpha, 2.0, z)
            e1 = ml_series(alpha, 1.0, z)
            g0 = e1 - 1.0
            g1 = u * (e1 - e2)
        elif kind == "alpha":
            e1 = ml_series(alpha, alpha + 1.0, z)
            ua = np.power(u, alpha)
            g0 = ua * e1
            g1 = u * ua * (e1 - ml_series(alpha, alpha + 2.0, z))
        elif kind == "plain":
            e2 = ml_series(alpha, 2.0, z)
            e3 = ml_series(alpha, 3.0, z)
            g0 = u * e2
            g1 = u * u * (e2 - e3)
        else:
            raise ValueError(kind)
        return _weights_from_moments(g0, g1, h)

    return _cached(key, build)


def convolve(values, weights):
    """Apply ``(w, lower)`` weights to samples; entry 0 of the result is 0."""
    w, lower = weights
    f = np.asarray(values, dtype=float)
    n = f.size
    out = np.convolve(f, w[:n])[:n] - lower[:n] * f[0]
    out[0] = 0.0
    return out
