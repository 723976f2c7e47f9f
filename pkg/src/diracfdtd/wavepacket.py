"""Gaussian four-spinor wave packets with spin along +z or -z."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .lattice import Grid, SpinorField
from .observables import density, total_norm
from .potentials import PotentialProfile

__all__ = [
    "PacketSpec",
    "OnShellEnergy",
    "PacketError",
    "energy_of",
    "spinor_amplitudes",
    "packet_spinor",
    "init_packet",
    "forward_fraction",
]


class PacketError(ValueError):
    pass


@dataclass(frozen=True)
class OnShellEnergy:
    value: float

    def __float__(self):
        return self.value


def energy_of(p, mass: float = 1.0) -> OnShellEnergy:
    """Free-particle energy sqrt(|p|^2 + m^2) in internal units."""
    if not mass > 0:
        raise PacketError("mass must be positive")
    p = np.asarray(p, dtype=float)
    return OnShellEnergy(float(np.sqrt(np.dot(p.ravel(), p.ravel()) + mass**2)))


@dataclass(frozen=True)
class PacketSpec:
    """Momentum ``p`` (3-vector), Gaussian width ``x0``, ``center`` (one entry
    per active grid axis, or a full 3-vector) and ``spin`` ('up' or 'down')."""

    p: tuple[float, float, float]
    x0: float
    center: tuple[float, ...] = (0.0,)
    spin: str = "up"
    mass: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "p", tuple(float(v) for v in np.broadcast_to(self.p, 3)))
        object.__setattr__(self, "center", tuple(float(v) for v in np.atleast_1d(self.center)))
        if self.spin not in ("up", "down"):
            raise PacketError(f"spin must be 'up' or 'down', got {self.spin!r}")
        if not self.x0 > 0:
            raise PacketError("x0 must be positive")
        if not self.mass > 0:
            raise PacketError("mass must be positive")

    @property
    def energy(self) -> float:
        return energy_of(self.p, self.mass).value


def spinor_amplitudes(p, mass: float = 1.0, spin: str = "up") -> np.ndarray:
    """Constant four-spinor multiplying the Gaussian, prefactor included."""
    p1, p2, p3 = (float(v) for v in p)
    E = energy_of((p1, p2, p3), mass).value
    pre = math.sqrt((E + mass) / (2 * E))
    d = E + mass
    if spin == "up":
        s = [1.0, 0.0, p3 / d, (p1 + 1j * p2) / d]
    elif spin == "down":
        s = [0.0, 1.0, (p1 - 1j * p2) / d, -p3 / d]
    else:
        raise PacketError(f"spin must be 'up' or 'down', got {spin!r}")
    return pre * np.array(s, dtype=complex)


def _full_position(grid: Grid, center):
    # grid-axis coordinates relative to the packet centre, keyed by x/y/z
    center = tuple(center)
    if len(center) == 3 and grid.dims != 3:
        center = tuple(center[{"x": 0, "y": 1, "z": 2}[a]] for a in grid.axes)
    if len(center) == 1 and grid.dims > 1:
        center = center + (0.0,) * (grid.dims - 1)
    if len(center) != grid.dims:
        raise PacketError(f"center {center} does not match a {grid.dims}D grid")
    mesh = grid.mesh()
    return {a: m - c for a, m, c in zip(grid.axes, mesh, center)}


def packet_spinor(grid: Grid, spec: PacketSpec) -> np.ndarray:
    """Sample the t = 0 packet on the grid; shape (4, *grid.shape).

    The analytic prefactor is kept, so the lattice sum is only
    approximately one.  Momentum components along axes the grid lacks
    still shape the spinor but contribute no phase.
    """
    rel = _full_position(grid, spec.center)
    r2 = sum(v**2 for v in rel.values())
    phase = sum(spec.p["xyz".index(a)] * v for a, v in rel.items())
    N = ((2 * math.pi) ** 1.5 * spec.x0**3) ** -0.5
    env = N * np.exp(-r2 / (4 * spec.x0**2) + 1j * phase)
    env = np.broadcast_to(env, grid.shape)
    amps = spinor_amplitudes(spec.p, spec.mass, spec.spin)
    return amps.reshape((4,) + (1,) * grid.dims) * env[None]


def init_packet(grid: Grid, spec: PacketSpec, dt: float,
                profile: PotentialProfile | None = None, periodic: bool = False) -> SpinorField:
    """Build the staggered initial field for a packet.

    The lower pair is the t = 0 sample.  The upper pair is carried back to
    t = -dt/2 with the mass + potential phase applied exactly and the
    spatial coupling through one explicit half step, and the field is then
    scaled so that its lattice norm is 1.
    """
    if spec.x0 < 2 * grid.dx:
        raise PacketError(f"x0={spec.x0} unresolvable: needs at least 2*dx = {2 * grid.dx}")
    rel = _full_position(grid, spec.center)
    for a, v in rel.items():
        c_to_lo = -float(v.min())
        c_to_hi = float(v.max())
        if min(c_to_lo, c_to_hi) < 4 * spec.x0:
            warnings.warn(f"packet centre is closer than 4*x0 to a {a}-face", stacklevel=2)

    psi = packet_spinor(grid, spec)
    lower = np.ascontiguousarray(psi[2:])
    upper = np.ascontiguousarray(psi[:2])

    s3 = grid.as3d()
    grad = np.empty((2,) + s3, complex)
    active = (True, grid.dims == 3, grid.dims >= 2)
    _kernels.apply_sigma_grad(_kernels.as4d(lower, s3), 0.5 / grid.dx, active, (periodic,) * 3, grad)
    grad = grad.reshape((2,) + grid.shape)
    v = 0.0 if profile is None else profile.eA0
    # d(phi)/dt = -(sigma.grad) chi - i(V+m) phi, run backwards by dt/2
    upper = np.exp(0.5j * (v + spec.mass) * dt) * (upper + 0.5 * dt * grad)

    field = SpinorField(grid, upper, lower, dt)
    if periodic:
        field.meta["periodic"] = True
    norm = total_norm(field)
    field.upper /= math.sqrt(norm)
    field.lower /= math.sqrt(norm)
    field.meta["packet"] = spec
    return field


def forward_fraction(field: SpinorField, plane_x: float) -> float:
    """Probability at x >= plane_x."""
    return total_norm((density(field), field.grid), {"x": (plane_x, None)})
