"""Grid geometry, unit conversions and the staggered four-spinor field.

Internal units set hbar = c = m_e = 1.  One internal length is the reduced
Compton wavelength of the electron and one internal energy is its rest
energy, so the MeV/c, volt and metre values quoted for the scattering
scenarios map onto numbers of order 0.1 to 100.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

__all__ = [
    "UnitsSystem",
    "DEFAULT_UNITS",
    "Grid",
    "SpinorField",
    "GridError",
    "MemoryBudgetError",
    "make_grid",
    "to_internal",
    "from_internal",
    "cell_coordinate",
    "AXIS_NAMES",
]

AXIS_NAMES = {1: ("x",), 2: ("x", "z"), 3: ("x", "y", "z")}

# cells * 8 complex doubles must fit; overridable per grid
DEFAULT_MEMORY_BUDGET = 2 * 1024**3


class GridError(ValueError):
    """Invalid grid geometry or index."""


class MemoryBudgetError(GridError):
    """Grid storage would exceed the configured memory budget."""


QUANTITY_KINDS = (
    "energy_MeV",
    "momentum_MeV_per_c",
    "potential_volts",
    "length_m",
    "time_s",
    "field_volts_per_m",
)


@dataclass(frozen=True)
class UnitsSystem:
    """Conversion constants between laboratory and natural units.

    The defaults are CODATA 2018 values.  ``hbar``, ``c`` and ``m_e`` are
    kept as fields only so that code can refer to them by name; they are
    always exactly 1.
    """

    mev_per_energy_unit: float = 0.51099895000
    meters_per_length_unit: float = 3.8615926796e-13
    hbar: float = 1.0
    c: float = 1.0
    m_e: float = 1.0

    def __post_init__(self):
        if (self.hbar, self.c, self.m_e) != (1.0, 1.0, 1.0):
            raise ValueError("internal base constants must all equal 1")
        if self.mev_per_energy_unit <= 0 or self.meters_per_length_unit <= 0:
            raise ValueError("conversion scalars must be positive")

    @property
    def seconds_per_time_unit(self) -> float:
        # t = hbar / (m c^2) = lambda_C / c
        return self.meters_per_length_unit / 299792458.0

    def _scale(self, kind: str) -> float:
        # multiply a laboratory value by this to get internal units
        if kind in ("energy_MeV", "momentum_MeV_per_c"):
            return 1.0 / self.mev_per_energy_unit
        if kind == "potential_volts":
            # e*V in MeV for unit charge is V * 1e-6
            return 1e-6 / self.mev_per_energy_unit
        if kind == "length_m":
            return 1.0 / self.meters_per_length_unit
        if kind == "time_s":
            return 1.0 / self.seconds_per_time_unit
        if kind == "field_volts_per_m":
            return 1e-6 / self.mev_per_energy_unit * self.meters_per_length_unit
        raise ValueError(f"unknown quantity kind {kind!r}; expected one of {QUANTITY_KINDS}")

    def to_internal(self, value, kind: str):
        return value * self._scale(kind)

    def from_internal(self, value, kind: str):
        return value / self._scale(kind)


DEFAULT_UNITS = UnitsSystem()


def to_internal(value, quantity_kind: str, units: UnitsSystem = DEFAULT_UNITS):
    """Convert a laboratory value (MeV, MeV/c, V, m, s, V/m) to internal units."""
    return units.to_internal(value, quantity_kind)


def from_internal(value, quantity_kind: str, units: UnitsSystem = DEFAULT_UNITS):
    return units.from_internal(value, quantity_kind)


@dataclass(frozen=True)
class Grid:
    """Uniform cell-centred Cartesian lattice.

    Active axes are ``x`` (1D), ``x, z`` (2D) or ``x, y, z`` (3D).  The 2D
    layout keeps ``z`` because the scattering pictures of interest live in
    the x-z plane.
    """

    dims: int
    n: tuple[int, ...]
    dx: float
    origin: tuple[float, ...]
    memory_budget: int = DEFAULT_MEMORY_BUDGET

    def __post_init__(self):
        if self.dims not in (1, 2, 3):
            raise GridError(f"dims must be 1, 2 or 3, got {self.dims}")
        if len(self.n) != self.dims or len(self.origin) != self.dims:
            raise GridError("n and origin need one entry per active axis")
        if not (self.dx > 0) or not math.isfinite(self.dx):
            raise GridError(f"dx must be positive, got {self.dx}")
        if any(int(k) != k or k < 4 for k in self.n):
            raise GridError(f"need at least 4 cells on every axis, got {self.n}")
        if self.cell_count * 8 * 16 > self.memory_budget:
            raise MemoryBudgetError(
                f"{self.cell_count} cells need {self.cell_count * 128} bytes, "
                f"budget is {self.memory_budget}"
            )

    @property
    def axes(self) -> tuple[str, ...]:
        return AXIS_NAMES[self.dims]

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.n)

    @property
    def cell_count(self) -> int:
        return int(np.prod(self.n))

    @property
    def cell_volume(self) -> float:
        return self.dx**self.dims

    def axis_coords(self, axis) -> np.ndarray:
        """Cell-centre coordinates along one axis (name or position)."""
        i = self.axes.index(axis) if isinstance(axis, str) else axis
        return self.origin[i] + self.dx * np.arange(self.n[i])

    def extent(self, axis) -> tuple[float, float]:
        c = self.axis_coords(axis)
        return float(c[0]), float(c[-1])

    def mesh(self) -> list[np.ndarray]:
        return np.meshgrid(*(self.axis_coords(i) for i in range(self.dims)), indexing="ij", sparse=True)

    def as3d(self) -> tuple[int, int, int]:
        """Shape padded to (nx, ny, nz) with unit inactive axes."""
        if self.dims == 1:
            return (self.n[0], 1, 1)
        if self.dims == 2:
            return (self.n[0], 1, self.n[1])
        return tuple(self.n)


def make_grid(dims: int, n_per_axis: Sequence[int], dx: float, origin=0.0,
              memory_budget: int = DEFAULT_MEMORY_BUDGET) -> Grid:
    """Build and validate a :class:`Grid`.

    ``origin`` is the centre of cell (0, ..., 0); a scalar is broadcast to
    every axis.
    """
    n = tuple(int(k) for k in np.atleast_1d(n_per_axis))
    if np.ndim(origin) == 0:
        origin = (float(origin),) * dims
    origin = tuple(float(o) for o in origin)
    return Grid(dims=dims, n=n, dx=float(dx), origin=origin, memory_budget=memory_budget)


def cell_coordinate(grid: Grid, index) -> np.ndarray:
    index = tuple(np.atleast_1d(index))
    if len(index) != grid.dims:
        raise GridError(f"index {index} does not match a {grid.dims}D grid")
    for i, n in zip(index, grid.n):
        if not 0 <= i < n:
            raise GridError(f"index {index} out of bounds for shape {grid.n}")
    return np.array([o + i * grid.dx for o, i in zip(grid.origin, index)])


@dataclass
class SpinorField:
    """Four-spinor on a grid with the two halves staggered in time.

    ``upper`` holds (psi1, psi2) at time ``(step_index - 1/2) * dt`` and
    ``lower`` holds (psi3, psi4) at ``step_index * dt``.  Both arrays have
    shape ``(2, *grid.shape)``.
    """

    grid: Grid
    upper: np.ndarray
    lower: np.ndarray
    dt: float
    step_index: int = 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        shape = (2,) + self.grid.shape
        self.upper = np.ascontiguousarray(self.upper, dtype=np.complex128)
        self.lower = np.ascontiguousarray(self.lower, dtype=np.complex128)
        if self.upper.shape != shape or self.lower.shape != shape:
            raise GridError(f"spinor halves must have shape {shape}")
        if not self.dt > 0:
            raise ValueError("dt must be positive")

    @classmethod
    def zeros(cls, grid: Grid, dt: float) -> "SpinorField":
        shape = (2,) + grid.shape
        return cls(grid, np.zeros(shape, complex), np.zeros(shape, complex), dt)

    @property
    def time(self) -> float:
        """Time level of the lower components."""
        return self.step_index * self.dt

    @property
    def components(self) -> tuple[np.ndarray, ...]:
        return (self.upper[0], self.upper[1], self.lower[0], self.lower[1])

    def copy(self) -> "SpinorField":
        return replace(self, upper=self.upper.copy(), lower=self.lower.copy(), meta=dict(self.meta))

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.upper).all() and np.isfinite(self.lower).all())

    def scaled(self, factor: complex) -> "SpinorField":
        return replace(self, upper=self.upper * factor, lower=self.lower * factor, meta=dict(self.meta))
