"""Special-function kernels used by the spectral and screened lattice sums.

The order-one Bessel function is implemented in-package (power series up to
t = 14 accumulated in extended precision, Hankel asymptotic expansion beyond)
so the ball form factors do not depend on an external special-function
routine; the test suite cross-checks it against scipy to 1e-12.
"""

from __future__ import annotations

import numpy as np
from scipy.special import exp1

_SERIES_SPLIT = 14.0
_SERIES_TERMS = 72
_HANKEL_TERMS = 26


def j1(t):
    """Bessel function J1 for real non-negative arguments (vectorized)."""
    t = np.asarray(t, dtype=float)
    out = np.empty_like(t)

    small = t <= _SERIES_SPLIT
    if np.any(small):
        # sum in longdouble: the alternating series loses ~4-5 digits at t=14
        ts = t[small].astype(np.longdouble)
        q = -(ts * ts) / 4.0
        term = ts / 2.0
        acc = term.copy()
        for k in range(1, _SERIES_TERMS):
            term *= q / (k * (k + 1))
            acc += term
        out[small] = acc.astype(float)

    big = ~small
    if np.any(big):
        tb = t[big]
        inv = 1.0 / tb
        # a_j = prod_{i<=j} (4 - (2i-1)^2) / (8i); P collects even j, Q odd j
        p = np.ones_like(tb)
        qs = np.zeros_like(tb)
        a = 1.0
        pw = np.ones_like(tb)
        for j in range(1, _HANKEL_TERMS):
            a *= (4.0 - (2 * j - 1) ** 2) / (8.0 * j)
            pw = pw * inv
            if j % 2 == 1:
                qs = qs + ((-1.0) ** (j // 2)) * a * pw
            else:
                p = p + ((-1.0) ** (j // 2)) * a * pw
        chi = tb - 0.75 * np.pi
        out[big] = np.sqrt(2.0 / (np.pi * tb)) * (np.cos(chi) * p - np.sin(chi) * qs)
    return out if out.ndim else float(out)


def ball_form_factor(dim, t):
    """Fourier profile of the unit-mass ball: 3(sin t - t cos t)/t^3 or 2 J1(t)/t."""
    t = np.asarray(t, dtype=float)
    if dim == 3:
        out = np.empty_like(t)
        small = t < 0.1
        ts = t[small]
        t2 = ts * ts
        out[small] = 1.0 - t2 / 10.0 + t2 * t2 / 280.0 - t2 * t2 * t2 / 15120.0
        tb = t[~small]
        out[~small] = 3.0 * (np.sin(tb) - tb * np.cos(tb)) / tb**3
    elif dim == 2:
        out = np.empty_like(t)
        small = t < 1e-4
        out[small] = 1.0 - t[small] ** 2 / 8.0
        tb = t[~small]
        out[~small] = 2.0 * j1(tb) / tb
    else:
        raise ValueError(f"dim must be 2 or 3, got {dim}")
    return out if out.ndim else float(out)


def e1_plus_log(z):
    """E1(z) + log(z), the entire completion of the exponential integral.

    Stable through z = 0 (value -euler_gamma); used wherever the screened
    2D kernel must be split from its logarithmic singularity.
    """
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    small = z <= 1.0
    zs = z[small]
    acc = np.full_like(zs, -np.euler_gamma)
    term = np.ones_like(zs)
    for j in range(1, 26):
        term *= -zs / j
        acc -= term / j
    out[small] = acc
    zb = z[~small]
    out[~small] = exp1(zb) + np.log(zb)
    return out if out.ndim else float(out)
