"""Limit functionals on weighted point configurations of the torus.

The first-order energy sums per-particle local energies and is blind to
positions.  The second-order energy adds the constant g(0) self terms and
the Coulomb-like pairwise interaction through the periodic Green's function;
in 2D it is defined on equal-mass configurations only.

Pair-sum conventions: "ordered" counts both (i, j) and (j, i) in the cross
sum (the convention the finite-scale expansion converges to, in both
dimensions); "halved" multiplies the cross sum by 1/2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import green, local
from .breakdown import EnergyBreakdown
from .errors import CoincidentPoints, UnequalMasses2D

MASS_EQUALITY_RTOL = 1e-12


@dataclass(frozen=True)
class PointConfiguration:
    """Weighted point masses {(m_i, x_i)} with distinct positions."""

    dim: int
    particles: tuple  # of (mass, TorusPoint)

    def __init__(self, dim, particles):
        if dim not in (2, 3):
            raise ValueError("dim must be 2 or 3")
        parts = []
        for mass, pos in particles:
            m = float(mass)
            if not m > 0.0:
                raise ValueError(f"masses must be positive, got {m}")
            if not isinstance(pos, green.TorusPoint):
                pos = green.TorusPoint(pos)
            if pos.dim != dim:
                raise ValueError("particle dimension mismatch")
            parts.append((m, pos))
        if not parts:
            raise ValueError("configuration must contain at least one particle")
        obj_set = object.__setattr__
        obj_set(self, "dim", dim)
        obj_set(self, "particles", tuple(parts))
        if np.any(self._pair_distances() <= green.SINGULAR_GUARD):
            raise CoincidentPoints("positions must be pairwise distinct (min-image > 1e-9)")

    @property
    def masses(self) -> np.ndarray:
        return np.array([m for m, _ in self.particles])

    @property
    def positions(self) -> np.ndarray:
        return np.array([p.array for _, p in self.particles])

    @property
    def n(self) -> int:
        return len(self.particles)

    def _pair_distances(self) -> np.ndarray:
        x = self.positions
        n = x.shape[0]
        if n < 2:
            return np.empty(0)
        iu, ju = np.triu_indices(n, k=1)
        d = green.min_image(x[iu] - x[ju])
        return np.linalg.norm(d, axis=1)

    def equal_masses(self) -> bool:
        m = self.masses
        return float(np.max(m) - np.min(m)) <= MASS_EQUALITY_RTOL * float(np.max(m))


@dataclass(frozen=True)
class AdmissibilityReport:
    """Whether a configuration's masses form an optimal partition and are compact."""

    is_optimal_partition: bool
    is_compact: bool
    detail: tuple = field(default_factory=tuple)


def e0(config: PointConfiguration) -> float:
    """First-order limit energy: sum of per-particle local energies.

    Position-blind by construction.  In 3D the per-particle value is the
    ball ansatz, an upper bound for the true infimum.
    """
    if config.dim == 2:
        vals = [local.envelope_2d(m).envelope_value for m in config.masses]
    else:
        vals = [local.e3d_ball(m).total for m in config.masses]
    # canonical summation order keeps the value exactly permutation invariant
    return float(np.sum(np.sort(vals)))


def _cross_sum(config: PointConfiguration, params) -> float:
    """Ordered double sum over i != j of m_i m_j G(x_i - x_j)."""
    if config.n < 2:
        return 0.0
    x = config.positions
    m = config.masses
    iu, ju = np.triu_indices(config.n, k=1)
    diffs = green.min_image(x[iu] - x[ju])
    if np.any(np.linalg.norm(diffs, axis=1) <= green.SINGULAR_GUARD):
        raise CoincidentPoints("coincident points: interaction energy is +inf")
    g = green.green_eval_many(config.dim, diffs, params)
    # canonical summation order keeps the value exactly permutation invariant
    return 2.0 * float(np.sum(np.sort(m[iu] * m[ju] * g)))


def f0_energy(config: PointConfiguration, params=None,
              pair_convention: str = "ordered") -> EnergyBreakdown:
    """Second-order limit energy over point positions.

    3D: sum_i g(0) m_i^2 + c * sum_{i != j} m_i m_j G(x_i - x_j).
    2D (equal masses): n (f0(m) + m^2 g(0)) + c m^2 sum_{i != j} G(x_i - x_j).
    c = 1 for the ordered convention (default), 1/2 for halved.
    """
    if pair_convention not in ("ordered", "halved"):
        raise ValueError("pair_convention must be 'ordered' or 'halved'")
    factor = 1.0 if pair_convention == "ordered" else 0.5
    g0 = green.regular_part_at_zero(config.dim, params)
    if config.dim == 2:
        if not config.equal_masses():
            raise UnequalMasses2D("2D second-order energy requires equal masses")
        m = float(config.masses[0])
        self_term = config.n * (local.f0(m) + m * m * g0)
    else:
        self_term = g0 * float(np.sum(np.sort(config.masses**2)))
    cross = factor * _cross_sum(config, params)
    return EnergyBreakdown(
        perimeter_term=0.0,
        self_h1_term=0.0,
        regular_self_term=self_term,
        cross_term=cross,
        total=self_term + cross,
        dim=config.dim,
    )


def _optimal_partition_2d(config: PointConfiguration) -> tuple[bool, list[str]]:
    detail = []
    if not config.equal_masses():
        return False, ["masses are not all equal"]
    m = float(config.masses[0])
    n = config.n
    best = local.envelope_2d(n * m)
    value = n * local.e2d(m)
    ok = value <= best.envelope_value * (1.0 + 1e-12)
    if not ok:
        detail.append(
            f"n={n} equal parts of {m:.6g} cost {value:.12g} > envelope {best.envelope_value:.12g}"
            f" attained at n={best.n}")
    return ok, detail


def _optimal_partition_3d(config: PointConfiguration) -> tuple[bool, list[str]]:
    # Ball-ansatz desk-scale search: equal re-partitions of the total mass
    # into k <= n + 2 parts, and all single-pair merges of the given masses.
    m = config.masses
    total = float(np.sum(m))
    value = float(sum(local.e3d_ball(mi).total for mi in m))
    best = value
    witness = None
    for k in range(1, config.n + 3):
        cand = k * local.e3d_ball(total / k).total
        if cand < best - 1e-12 * abs(best):
            best, witness = cand, f"{k} equal parts of {total / k:.6g}"
    if config.n >= 2:
        singles = np.array([local.e3d_ball(mi).total for mi in m])
        for i in range(config.n):
            for j in range(i + 1, config.n):
                cand = (value - singles[i] - singles[j]
                        + local.e3d_ball(m[i] + m[j]).total)
                if cand < best - 1e-12 * abs(best):
                    best, witness = cand, f"merge of particles {i} and {j}"
    if witness is None:
        return True, []
    return False, [f"ball-ansatz regrouping beats the configuration: {witness}"]


def check_admissible(config: PointConfiguration) -> AdmissibilityReport:
    """Report mass-partition optimality and compactness of a configuration.

    2D: optimal iff all masses are equal and the count matches the envelope
    optimum of the total mass; compact iff a single particle of mass m does
    not split (envelope count 1).  3D: both checks are ball-ansatz
    heuristics and are flagged as such in the detail.
    """
    detail: list[str] = []
    if config.dim == 2:
        opt, d = _optimal_partition_2d(config)
        detail += d
        compact = all(local.envelope_2d(mi).n == 1 for mi in config.masses)
        if not compact:
            detail.append("some mass exceeds the single-particle range (envelope splits it)")
    else:
        opt, d = _optimal_partition_3d(config)
        detail += d
        thresh = local.splitting_threshold_3d()
        compact = bool(np.all(config.masses <= thresh))
        detail.append(
            f"ball-ansatz heuristic: compact iff every mass <= splitting threshold {thresh:.8g}")
        if not opt:
            detail.append("ball-ansatz heuristic: partition optimality is approximate in 3D")
    return AdmissibilityReport(is_optimal_partition=opt, is_compact=compact,
                               detail=tuple(detail))
