"""Scalar potential profiles and barrier criticality.

Profiles store the interaction energy e*A0 per cell directly.  Positive
values raise the electron's potential energy ("repulsive"); the vector
potential is identically zero and has no storage at all.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lattice import Grid

__all__ = [
    "StepPotentialSpec",
    "RampPotentialSpec",
    "PotentialProfile",
    "CriticalityReport",
    "PotentialError",
    "zero_profile",
    "sample_step",
    "sample_ramp",
    "classify",
    "CRITICAL_MARGIN",
]

CRITICAL_MARGIN = 1e-9


class PotentialError(ValueError):
    pass


@dataclass(frozen=True)
class StepPotentialSpec:
    """Sharp step: ``height`` for x >= edge_x, zero below."""

    height: float
    edge_x: float = 0.0


@dataclass(frozen=True)
class RampPotentialSpec:
    """Zero below ``ramp_start_x``, a linear ramp ``-field_strength * (x - start)``
    over ``ramp_width``, then the plateau ``height``.

    ``field_strength`` follows the sign convention where a negative field
    gives a rising ramp.
    """

    height: float
    ramp_width: float
    field_strength: float
    ramp_start_x: float = 0.0

    def __post_init__(self):
        if not self.ramp_width > 0:
            raise PotentialError("ramp_width must be positive")
        end_value = -self.field_strength * self.ramp_width
        scale = max(abs(self.height), abs(end_value), 1e-300)
        if abs(end_value - self.height) > 1e-9 * scale:
            raise PotentialError(
                f"ramp is discontinuous: -field*width = {end_value} but plateau = {self.height}"
            )

    @classmethod
    def from_plateau(cls, height: float, ramp_width: float, ramp_start_x: float = 0.0):
        return cls(height, ramp_width, -height / ramp_width, ramp_start_x)


@dataclass(frozen=True)
class PotentialProfile:
    grid: Grid
    eA0: np.ndarray

    def __post_init__(self):
        if self.eA0.shape != self.grid.shape:
            raise PotentialError(f"profile shape {self.eA0.shape} != grid shape {self.grid.shape}")
        if not np.isfinite(self.eA0).all():
            raise PotentialError("potential samples must be finite")

    @property
    def peak(self) -> float:
        """Sample with the largest magnitude, sign kept."""
        flat = self.eA0.ravel()
        if flat.size == 0:
            return 0.0
        return float(flat[np.argmax(np.abs(flat))])

    def negated(self) -> "PotentialProfile":
        return PotentialProfile(self.grid, -self.eA0)


def zero_profile(grid: Grid) -> PotentialProfile:
    return PotentialProfile(grid, np.zeros(grid.shape))


def _x_cells(grid: Grid) -> np.ndarray:
    # x coordinate broadcast over the full grid shape
    x = grid.axis_coords(0)
    return np.broadcast_to(x.reshape((-1,) + (1,) * (grid.dims - 1)), grid.shape)


def _check_inside(grid: Grid, x: float, what: str):
    lo, hi = grid.extent(0)
    if not lo < x < hi:
        raise PotentialError(f"{what} = {x} lies outside the grid x-range ({lo}, {hi})")


def sample_step(grid: Grid, spec: StepPotentialSpec) -> PotentialProfile:
    _check_inside(grid, spec.edge_x, "step edge")
    x = _x_cells(grid)
    eA0 = np.where(x >= spec.edge_x, float(spec.height), 0.0)
    return PotentialProfile(grid, np.ascontiguousarray(eA0))


def sample_ramp(grid: Grid, spec: RampPotentialSpec) -> PotentialProfile:
    start = spec.ramp_start_x
    end = start + spec.ramp_width
    _check_inside(grid, start, "ramp start")
    _check_inside(grid, end, "ramp end")
    x = _x_cells(grid)
    ramp = -spec.field_strength * (x - start)
    eA0 = np.where(x < start, 0.0, np.where(x > end, float(spec.height), ramp))
    return PotentialProfile(grid, np.ascontiguousarray(eA0))


@dataclass(frozen=True)
class CriticalityReport:
    regime: str
    eV: float
    threshold: float

    def __str__(self):
        rel = {"supercritical": ">", "subcritical": "<", "critical-margin": "~"}[self.regime]
        return f"{self.regime}: eV={self.eV:.6g} {rel} E+mc^2={self.threshold:.6g}"


def classify(profile_peak_eV: float, packet_energy_E: float, mass: float = 1.0) -> CriticalityReport:
    """Compare a barrier height against the pair threshold E + mc^2.

    Only the magnitude of the barrier is compared, so attractive and
    repulsive steps of equal height share a regime.
    """
    threshold = packet_energy_E + mass
    eV = float(profile_peak_eV)
    mag = abs(eV)
    if mag > threshold + CRITICAL_MARGIN:
        regime = "supercritical"
    elif mag < threshold - CRITICAL_MARGIN:
        regime = "subcritical"
    else:
        regime = "critical-margin"
    if not math.isfinite(mag):
        raise PotentialError("barrier height must be finite")
    return CriticalityReport(regime, eV, threshold)
