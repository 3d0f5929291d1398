"""Itemized energy record shared by the local, limit, and finite-scale evaluators."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class EnergyBreakdown:
    """Energy split into perimeter, scale-free self, regular self, and cross parts.

    ``total`` always equals the sum of the four parts.  For finite-scale
    (sharp-interface) energies ``eta`` and ``gamma`` carry the rescaling
    metadata (gamma = eta^-3 in 3D, (|log eta| eta^3)^-1 in 2D) and ``dim``
    the dimension; for scale-free quantities (whole-space ball energy, limit
    functionals) ``eta`` and ``gamma`` are None.  ``tail_bound`` is a
    certified bound on the truncation error of the evaluation, 0.0 for
    closed forms.
    """

    perimeter_term: float
    self_h1_term: float
    regular_self_term: float
    cross_term: float
    total: float
    eta: float | None = None
    gamma: float | None = None
    dim: int | None = None
    tail_bound: float = 0.0

    def parts_sum(self) -> float:
        return (self.perimeter_term + self.self_h1_term
                + self.regular_self_term + self.cross_term)
