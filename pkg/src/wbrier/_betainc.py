"""Regularized incomplete beta function, vectorized over x.

Modified Lentz evaluation of the standard continued fraction for
I_x(a, b), switching to 1 - I_{1-x}(b, a) when x > (a + 1) / (a + b + 2)
so the fraction converges quickly.
"""

import math

import numpy as np

_TINY = 1e-300
_EPS = 1e-16
_MAX_ITER = 10_000


def _cont_frac(a, b, x):
    """Continued fraction part of I_x(a, b) for arrays x in (0, 1)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    out = np.empty_like(x)
    idx = np.arange(x.size)

    c = np.ones_like(x)
    d = 1.0 - qab * x / qap
    d = np.where(np.abs(d) < _TINY, _TINY, d)
    d = 1.0 / d
    h = d.copy()
    for m in range(1, _MAX_ITER + 1):
        m2 = 2 * m
        # even step
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < _TINY, _TINY, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < _TINY, _TINY, c)
        d = 1.0 / d
        h *= d * c
        # odd step
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < _TINY, _TINY, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < _TINY, _TINY, c)
        d = 1.0 / d
        delta = d * c
        h *= delta

        done = np.abs(delta - 1.0) < _EPS
        if done.any():
            out[idx[done]] = h[done]
            keep = ~done
            if not keep.any():
                return out
            idx, x, c, d, h = idx[keep], x[keep], c[keep], d[keep], h[keep]
    raise ArithmeticError(
        f"incomplete beta continued fraction did not converge (a={a}, b={b})")


def betainc(a: float, b: float, x):
    """Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1].

    Returns a float for scalar input and an ndarray otherwise.
    """
    if not (a > 0 and b > 0):
        raise ValueError("shape parameters must be positive")
    scalar = np.ndim(x) == 0
    x = np.asarray(x, dtype=np.float64)
    flat = x.ravel()
    if np.any((flat < 0) | (flat > 1)) or np.any(np.isnan(flat)):
        raise ValueError("x must lie in [0, 1]")
    res = np.zeros_like(flat)
    res[flat == 1.0] = 1.0

    inner = (flat > 0) & (flat < 1)
    if inner.any():
        xi = flat[inner]
        lbeta = math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        log_front = lbeta + a * np.log(xi) + b * np.log1p(-xi)
        front = np.exp(log_front)
        val = np.empty_like(xi)

        lower = xi < (a + 1.0) / (a + b + 2.0)
        if lower.any():
            xl = xi[lower]
            val[lower] = front[lower] * _cont_frac(a, b, xl) / a
        upper = ~lower
        if upper.any():
            xu = 1.0 - xi[upper]
            val[upper] = 1.0 - front[upper] * _cont_frac(b, a, xu) / b
        res[inner] = np.clip(val, 0.0, 1.0)

    res = res.reshape(x.shape)
    return float(res) if scalar else res
