"""Per-particle local energies and optimal mass partitions.

2D: the per-particle energy has the closed form m^2/(2 pi) + 2 sqrt(pi m)
(perimeter of the area-m disc plus the mass-squared long-range coefficient),
and its subadditive envelope is attained by finitely many equal parts; no
optimal part of a multi-particle split lies below 2^(-2/3) pi.

3D: there is no closed form for the per-particle infimum; this module
evaluates the ball ansatz (an upper bound: sphere perimeter 4 pi r^2 plus
whole-space H^-1 self-energy 8 pi r^5 / 15), the curvature coefficient
whose sign changes at mass 2 pi, and the mass beyond which two half-mass
balls beat a single ball.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .breakdown import EnergyBreakdown
from .errors import NoRoot

#: Below this mass a 2D particle does not split (single-particle threshold).
SINGLE_PARTICLE_THRESHOLD = 2.0 ** (-2.0 / 3.0) * math.pi

#: Per-particle mass of the continuous-relaxation optimum of the 2D envelope.
OPTIMAL_PER_MASS = 2.0 ** (2.0 / 3.0) * math.pi

#: The 3D ball-family energy is strictly concave in the mass below this value.
CONCAVITY_BOUND = 2.0 * math.pi


@dataclass(frozen=True)
class PartitionResult:
    """Optimal equal-mass partition of a total 2D mass M into n particles."""

    n: int
    per_mass: float
    envelope_value: float


def _check_mass(m) -> float:
    m = float(m)
    if not m > 0.0:
        raise ValueError(f"mass must be positive, got {m}")
    return m


def e2d(m) -> float:
    """2D per-particle energy m^2/(2 pi) + 2 sqrt(pi m)."""
    m = _check_mass(m)
    return m * m / (2 * math.pi) + 2.0 * math.sqrt(math.pi * m)


def _e2d_arr(m):
    return m * m / (2 * math.pi) + 2.0 * np.sqrt(math.pi * m)


def envelope_2d(M) -> PartitionResult:
    """Minimize n * e2d(M/n) over integer particle counts n >= 1.

    The optimum over arbitrary partitions has equal parts, and for n >= 2 no
    optimal part lies below 2^(-2/3) pi, so n <= ceil(M / threshold) + 1
    brackets the search.  Exact ties break toward smaller n.
    """
    M = _check_mass(M)
    n_max = int(math.ceil(M / SINGLE_PARTICLE_THRESHOLD)) + 1
    ns = np.arange(1, n_max + 1, dtype=float)
    vals = ns * _e2d_arr(M / ns)
    i = int(np.argmin(vals))  # first minimum = smallest n on ties
    n = i + 1
    return PartitionResult(n=n, per_mass=M / n, envelope_value=float(vals[i]))


def envelope_2d_many(Ms) -> np.ndarray:
    """Envelope values for an array of total masses (vectorized)."""
    Ms = np.asarray(Ms, dtype=float)
    n_max = int(math.ceil(float(np.max(Ms)) / SINGLE_PARTICLE_THRESHOLD)) + 1
    ns = np.arange(1, n_max + 1, dtype=float)
    vals = ns[None, :] * _e2d_arr(Ms[:, None] / ns[None, :])
    return np.min(vals, axis=1)


def f0(m) -> float:
    """Logarithmic self-interaction -(1/2 pi) II_{BxB} log|x-y| of the area-m disc.

    Closed form m^2/(8 pi) * (1 - 2 log(m/pi)), from the disc's geometric
    mean distance a * exp(-1/4) with a = sqrt(m/pi).
    """
    m = _check_mass(m)
    return m * m / (8 * math.pi) * (1.0 - 2.0 * math.log(m / math.pi))


def ball_radius_3d(m) -> float:
    """Radius of the ball of volume m."""
    return (3.0 * _check_mass(m) / (4 * math.pi)) ** (1.0 / 3.0)


def e3d_ball(m) -> EnergyBreakdown:
    """Ball-ansatz energy at mass m: perimeter plus whole-space H^-1 self-energy.

    An upper bound for the 3D per-particle infimum (conjecturally sharp);
    never reported as the infimum itself.
    """
    m = _check_mass(m)
    r = ball_radius_3d(m)
    perim = 4 * math.pi * r * r
    self_h1 = 8 * math.pi * r**5 / 15.0
    return EnergyBreakdown(
        perimeter_term=perim,
        self_h1_term=self_h1,
        regular_self_term=0.0,
        cross_term=0.0,
        total=perim + self_h1,
        dim=3,
    )


def concavity_coefficient(m) -> float:
    """-(2/9) * perimeter + (10/9) * self-energy for the ball of mass m.

    Negative exactly for m < 2 pi: the sign of the second-order dilation
    response of the ball-family energy.
    """
    b = e3d_ball(m)
    return -(2.0 / 9.0) * b.perimeter_term + (10.0 / 9.0) * b.self_h1_term


def splitting_threshold_3d(tol: float = 1e-8) -> float:
    """Mass m* where one ball and two far-separated half-mass balls tie.

    Root of e3d_ball(m) = 2 e3d_ball(m/2) by bisection on [1e-3, 1e3]; for
    m > m* the split wins under the ball ansatz.
    """
    def h(m):
        return e3d_ball(m).total - 2.0 * e3d_ball(m / 2.0).total

    lo, hi = 1e-3, 1e3
    flo, fhi = h(lo), h(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise NoRoot("no sign change of the splitting comparison on [1e-3, 1e3]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if (h(mid) > 0) == (flo > 0):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def lipschitz_probe_envelope(delta: float, n_pairs: int = 10_000) -> float:
    """Max difference quotient of the 2D envelope over a grid on [delta, 1/delta].

    Deterministic adjacent-pair quotients on a uniform grid; finite because
    the envelope is Lipschitz on compact subsets of (0, inf).
    """
    delta = float(delta)
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    grid = np.linspace(delta, 1.0 / delta, n_pairs + 1)
    vals = envelope_2d_many(grid)
    quot = np.abs(np.diff(vals)) / np.diff(grid)
    return float(np.max(quot))
