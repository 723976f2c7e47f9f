"""Time-staggered leapfrog for the Dirac equation with a scalar potential.

In the Dirac representation the equation splits into the upper pair
phi = (psi1, psi2) and the lower pair chi = (psi3, psi4)::

    d(phi)/dt = -(sigma . grad) chi - i (eA0 + m) phi
    d(chi)/dt = -(sigma . grad) phi - i (eA0 - m) chi

The off-diagonal coupling uses centred differences at co-located points and
is advanced by leapfrog; the diagonal mass + potential term is time-centred
per cell (Cayley form) or applied as an exact phase.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from . import _kernels
from .lattice import Grid, SpinorField
from .potentials import PotentialProfile

__all__ = [
    "DiracConstants",
    "DIRAC",
    "StepperConfig",
    "DivergenceError",
    "StabilityError",
    "stability_limit",
    "step",
    "run",
    "apply_boundary",
    "Leapfrog",
]

SIGMA = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


class DiracConstants:
    """Dirac-representation matrices built from Pauli blocks."""

    def __init__(self):
        z = np.zeros((2, 2), complex)
        eye = np.eye(2, dtype=complex)
        self.sigma = SIGMA
        self.alpha = tuple(np.block([[z, s], [s, z]]) for s in SIGMA)
        self.beta = np.block([[eye, z], [z, -eye]])
        self.check()

    def check(self, tol: float = 1e-15):
        eye = np.eye(4)
        for i, a in enumerate(self.alpha):
            for j, b in enumerate(self.alpha):
                if np.abs(a @ b + b @ a - 2 * (i == j) * eye).max() > tol:
                    raise AssertionError(f"alpha_{i} alpha_{j} anticommutator broken")
            if np.abs(a @ self.beta + self.beta @ a).max() > tol:
                raise AssertionError(f"alpha_{i} and beta do not anticommute")
        if np.abs(self.beta @ self.beta - eye).max() > tol:
            raise AssertionError("beta^2 != 1")


DIRAC = DiracConstants()


class StabilityError(ValueError):
    pass


class DivergenceError(FloatingPointError):
    def __init__(self, step_index: int):
        super().__init__(f"non-finite spinor values after step {step_index}")
        self.step_index = step_index


BOUNDARIES = ("reflecting", "damping", "periodic")


@dataclass(frozen=True)
class StepperConfig:
    """Time step and boundary handling.

    ``boundary`` is ``"reflecting"`` (outer cell shell pinned to zero),
    ``"damping"`` (cos^2 mask of ``damping_width`` cells falling to
    ``1 - damping_strength`` at the faces, applied every step) or
    ``"periodic"`` (stencil wraps around).
    """

    dt: float
    courant_factor: float = 0.4
    boundary: str = "reflecting"
    damping_width: int = 16
    damping_strength: float = 0.05
    diagonal: str = "cayley"
    mass: float = 1.0

    def __post_init__(self):
        if not 0 < self.courant_factor < 1:
            raise ValueError("courant_factor must lie in (0, 1)")
        if self.boundary not in BOUNDARIES:
            raise ValueError(f"boundary must be one of {BOUNDARIES}")
        if self.diagonal not in ("cayley", "exp"):
            raise ValueError("diagonal must be 'cayley' or 'exp'")
        if self.damping_width < 0 or not 0 <= self.damping_strength < 1:
            raise ValueError("bad damping layer parameters")
        if not self.dt > 0:
            raise ValueError("dt must be positive")

    @classmethod
    def for_grid(cls, grid: Grid, courant_factor: float = 0.4, **kw) -> "StepperConfig":
        return cls(dt=courant_factor * stability_limit(grid), courant_factor=courant_factor, **kw)

    def validate(self, grid: Grid):
        limit = stability_limit(grid)
        if self.dt > limit * (1 + 1e-12):
            raise StabilityError(f"dt={self.dt} exceeds the stability limit {limit}")


def stability_limit(grid: Grid) -> float:
    """Largest stable dt for unit light speed: dx / sqrt(dims)."""
    return grid.dx / math.sqrt(grid.dims)


def _diag_factors(a: np.ndarray, dt: float, mode: str):
    if mode == "cayley":
        den = 1.0 + 0.5j * a * dt
        return (1.0 - 0.5j * a * dt) / den, dt / den
    return np.exp(-1j * a * dt), dt * np.exp(-0.5j * a * dt)


def _damping_mask(grid: Grid, width: int, strength: float) -> np.ndarray:
    mask = np.ones(grid.shape)
    if width == 0 or strength == 0:
        return mask
    for ax, n in enumerate(grid.n):
        d = np.arange(n, dtype=float)
        d = np.minimum(d, n - 1 - d)
        m = np.where(d < width, 1.0 - strength * np.cos(0.5 * np.pi * d / width) ** 2, 1.0)
        shape = [1] * grid.dims
        shape[ax] = n
        mask = mask * m.reshape(shape)
    return mask


def _stencil_flags(grid: Grid, boundary: str):
    active = (True, grid.dims == 3, grid.dims >= 2)
    periodic = (boundary == "periodic",) * 3
    return active, periodic


def _zero_shell(arr: np.ndarray, dims: int):
    for ax in range(dims):
        idx = [slice(None)] * (dims + 1)
        idx[ax + 1] = [0, -1]
        arr[tuple(idx)] = 0


def apply_boundary(field: SpinorField, config: StepperConfig, _mask=None) -> SpinorField:
    if config.boundary == "reflecting":
        for arr in (field.upper, field.lower):
            _zero_shell(arr, field.grid.dims)
    elif config.boundary == "damping":
        mask = _mask if _mask is not None else _damping_mask(
            field.grid, config.damping_width, config.damping_strength)
        field.upper *= mask
        field.lower *= mask
    return field


class Leapfrog:
    """Precomputed per-cell coefficients for repeated stepping on one grid."""

    def __init__(self, grid: Grid, profile: PotentialProfile | None, config: StepperConfig):
        config.validate(grid)
        if profile is not None and profile.grid.shape != grid.shape:
            raise ValueError("profile and field live on different grids")
        self.grid = grid
        self.config = config
        v = np.zeros(grid.as3d()) if profile is None else profile.eA0.reshape(grid.as3d()).astype(float)
        m = config.mass
        self.keep_up, self.drive_up = _diag_factors(v + m, config.dt, config.diagonal)
        self.keep_lo, self.drive_lo = _diag_factors(v - m, config.dt, config.diagonal)
        self.inv2dx = 0.5 / grid.dx
        self.active, self.periodic = _stencil_flags(grid, config.boundary)
        self.mask = (_damping_mask(grid, config.damping_width, config.damping_strength)
                     if config.boundary == "damping" else None)

    def __call__(self, field: SpinorField, check_full: bool = False) -> SpinorField:
        if abs(field.dt - self.config.dt) > 1e-12 * self.config.dt:
            raise ValueError(f"field dt {field.dt} != stepper dt {self.config.dt}")
        s3 = self.grid.as3d()
        up = _kernels.as4d(field.upper, s3)
        lo = _kernels.as4d(field.lower, s3)
        # upper n-1/2 -> n+1/2 from lower at n, then lower n -> n+1 from the new upper
        reflecting = self.config.boundary == "reflecting"
        _kernels.half_update(up, lo, self.keep_up, self.drive_up, self.inv2dx, self.active, self.periodic)
        if reflecting:
            # pin each half right after its own update so the interior stays a closed system
            _zero_shell(field.upper, self.grid.dims)
        _kernels.half_update(lo, up, self.keep_lo, self.drive_lo, self.inv2dx, self.active, self.periodic)
        if reflecting:
            _zero_shell(field.lower, self.grid.dims)
        field.step_index += 1
        if self.mask is not None:
            apply_boundary(field, self.config, self.mask)
        if check_full or field.step_index % 100 == 0:
            ok = field.is_finite()
        else:
            ok = bool(np.isfinite(field.upper.ravel()[::64]).all() and np.isfinite(field.lower.ravel()[::64]).all())
        if not ok:
            raise DivergenceError(field.step_index)
        return field


def step(field: SpinorField, profile: PotentialProfile | None, config: StepperConfig) -> SpinorField:
    """Advance ``field`` in place by one full leapfrog cycle and return it."""
    return Leapfrog(field.grid, profile, config)(field, check_full=True)


Hook = Callable[[SpinorField], dict]


def run(field: SpinorField, profile: PotentialProfile | None, config: StepperConfig,
        n_steps: int, observer_hooks: Sequence[Hook] = (), every: int = 1,
        stepper: Leapfrog | None = None) -> tuple[SpinorField, list[dict]]:
    """Step ``n_steps`` times, calling every hook each ``every`` steps.

    Hooks receive the field and return a dict merged into one log record per
    sample.  Samples are taken after steps that are multiples of ``every``;
    with ``n_steps == 0`` the log is empty.
    """
    if n_steps < 0:
        raise ValueError("n_steps must be non-negative")
    if every < 1:
        raise ValueError("every must be >= 1")
    stepper = stepper or Leapfrog(field.grid, profile, config)
    log: list[dict] = []
    for _ in range(n_steps):
        stepper(field)
        if observer_hooks and field.step_index % every == 0:
            rec = {"step": field.step_index, "time": field.time}
            for hook in observer_hooks:
                rec.update(hook(field))
            log.append(rec)
    if not field.is_finite():
        raise DivergenceError(field.step_index)
    return field, log
