"""Reference solutions used to validate the stepper.

* dense propagators for small periodic 1D lattices,
* stationary plane-wave reflection/transmission at a sharp step,
* free-particle and lattice group velocity, and the drift of a finite packet.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .lattice import Grid, SpinorField
from .potentials import PotentialProfile
from .stepper import Leapfrog, StepperConfig
from .wavepacket import spinor_amplitudes

__all__ = [
    "expm",
    "sigma_grad_matrix",
    "hamiltonian_1d",
    "ExactEvolver1D",
    "exact_evolve_1d",
    "staggered_field",
    "leapfrog_error",
    "refinement_error",
    "convergence_order",
    "planewave_step_rt",
    "planewave_step_rt_numeric",
    "group_velocity",
    "lattice_group_velocity",
    "packet_mean_velocity",
    "OracleError",
    "MAX_DENSE_CELLS",
]

MAX_DENSE_CELLS = 64


class OracleError(ValueError):
    pass


def expm(a: np.ndarray, order: int = 24) -> np.ndarray:
    """Matrix exponential by scaling and squaring around a Taylor core.

    The matrix is halved until its 1-norm is at most 1/2, the truncated
    series (``order`` terms, error below 1e-30 relative) is summed with
    Horner's rule, and the result is squared back up.
    """
    a = np.asarray(a, dtype=complex)
    norm = np.abs(a).sum(axis=0).max()
    s = max(0, int(math.ceil(math.log2(norm / 0.5)))) if norm > 0.5 else 0
    b = a / 2.0**s
    eye = np.eye(a.shape[0], dtype=complex)
    out = eye.copy()
    for k in range(order, 0, -1):
        out = eye + (b @ out) / k
    for _ in range(s):
        out = out @ out
    return out


def sigma_grad_matrix(n: int, dx: float, periodic: bool = True) -> np.ndarray:
    """(sigma . grad) on a 1D two-spinor lattice, as a dense (2n, 2n) matrix.

    Columns are obtained by running the stepper's own stencil kernel on unit
    vectors, so the matrix is the operator the leapfrog applies.
    Row/column index is ``component * n + cell``.
    """
    out = np.zeros((2 * n, 2 * n), complex)
    unit = np.zeros((2, n, 1, 1), complex)
    res = np.empty_like(unit)
    active = (True, False, False)
    for col in range(2 * n):
        unit[...] = 0
        unit[col // n, col % n, 0, 0] = 1
        _kernels.apply_sigma_grad(unit, 0.5 / dx, active, (periodic,) * 3, res)
        out[:, col] = res.reshape(-1)
    return out


def _spectral_grad_matrix(n: int, dx: float) -> np.ndarray:
    # sigma_x (x) d/dx with the Fourier derivative; exact for band-limited data
    k = 2 * np.pi * np.fft.fftfreq(n, d=dx)
    if n % 2 == 0:
        k[n // 2] = 0.0
    f = np.fft.fft(np.eye(n), axis=0)
    d = np.fft.ifft(1j * k[:, None] * f, axis=0)
    d = d.real if np.abs(d.imag).max() < 1e-12 else d
    z = np.zeros((n, n))
    return np.block([[z, d], [d, z]]).astype(complex)


def hamiltonian_1d(n: int, dx: float, eA0=None, mass: float = 1.0,
                   stencil: str = "centered", periodic: bool = True) -> np.ndarray:
    """Dense 4n x 4n Dirac Hamiltonian on a 1D lattice.

    State ordering is (psi1, psi2, psi3, psi4) blocks of n cells each.
    """
    v = np.zeros(n) if eA0 is None else np.asarray(eA0, dtype=float).reshape(n)
    if stencil == "centered":
        g = sigma_grad_matrix(n, dx, periodic)
    elif stencil == "spectral":
        if not periodic:
            raise OracleError("the spectral stencil is periodic only")
        g = _spectral_grad_matrix(n, dx)
    else:
        raise OracleError(f"unknown stencil {stencil!r}")
    off = -1j * g
    upper = np.diag(np.concatenate([v + mass, v + mass]))
    lower = np.diag(np.concatenate([v - mass, v - mass]))
    return np.block([[upper, off], [off, lower]])


@dataclass
class ExactEvolver1D:
    """Dense propagator exp(-i H t) for a small periodic 1D lattice."""

    n_cells: int
    dx: float
    hamiltonian: np.ndarray
    t: float = 0.0
    propagator: np.ndarray | None = None

    def __post_init__(self):
        if self.n_cells > MAX_DENSE_CELLS:
            raise OracleError(f"{self.n_cells} cells exceed the dense limit of {MAX_DENSE_CELLS}")
        herm = np.abs(self.hamiltonian - self.hamiltonian.conj().T).max()
        if herm > 1e-12:
            raise OracleError(f"Hamiltonian is not Hermitian (max deviation {herm:.3g})")
        if self.propagator is None:
            self.set_time(self.t)

    @classmethod
    def build(cls, n_cells: int, dx: float, eA0=None, mass: float = 1.0,
              stencil: str = "centered", t: float = 0.0) -> "ExactEvolver1D":
        if n_cells > MAX_DENSE_CELLS:
            raise OracleError(f"{n_cells} cells exceed the dense limit of {MAX_DENSE_CELLS}")
        return cls(n_cells, dx, hamiltonian_1d(n_cells, dx, eA0, mass, stencil), t)

    def set_time(self, t: float):
        self.t = t
        self.propagator = expm(-1j * t * self.hamiltonian)
        eye = np.eye(self.propagator.shape[0])
        dev = np.abs(self.propagator.conj().T @ self.propagator - eye).max()
        if dev > 1e-10:
            raise OracleError(f"propagator is not unitary (max deviation {dev:.3g})")

    def evolve(self, psi: np.ndarray, t: float | None = None) -> np.ndarray:
        """Apply exp(-i H t) to a (4, n) state."""
        if t is not None and t != self.t:
            self.set_time(t)
        psi = np.asarray(psi, dtype=complex).reshape(4, self.n_cells)
        return (self.propagator @ psi.reshape(-1)).reshape(4, self.n_cells)


def exact_evolve_1d(initial_field_1d, profile_1d: PotentialProfile | None, t: float,
                    mass: float = 1.0, stencil: str = "centered") -> np.ndarray:
    """Evolve a (4, n) state, or the lower-time level of a 1D field, by ``t``.

    The stencil wraps periodically.  Returns a (4, n) array.
    """
    if isinstance(initial_field_1d, SpinorField):
        f = initial_field_1d
        if f.grid.dims != 1:
            raise OracleError("exact evolution is 1D only")
        psi = np.concatenate([f.upper, f.lower])
        n, dx = f.grid.n[0], f.grid.dx
    else:
        psi = np.asarray(initial_field_1d, dtype=complex)
        if profile_1d is None:
            raise OracleError("pass a profile to fix the lattice spacing for a bare array")
        n, dx = psi.shape[-1], profile_1d.grid.dx
    v = None if profile_1d is None else profile_1d.eA0
    ev = ExactEvolver1D.build(n, dx, v, mass, stencil)
    if t == 0:
        return psi.reshape(4, n).copy()
    return ev.evolve(psi, t)


def staggered_field(grid: Grid, psi0: np.ndarray, evolver: ExactEvolver1D, dt: float) -> SpinorField:
    """Field with the lower pair at t=0 and the upper pair evolved exactly to -dt/2."""
    back = evolver.evolve(psi0, -0.5 * dt)
    f = SpinorField(grid, back[:2].copy(), np.asarray(psi0[2:], complex).copy(), dt)
    f.meta["periodic"] = True
    return f


def leapfrog_error(grid: Grid, psi0: np.ndarray, eA0, dt: float, n_steps: int,
                   mass: float = 1.0, reference: str = "centered", diagonal: str = "cayley") -> float:
    """Max pointwise deviation of the leapfrog from a dense reference.

    Both runs start from the exact staggered data, and each stored level is
    compared with the reference at its own time.
    """
    n = grid.n[0]
    ref = ExactEvolver1D.build(n, grid.dx, eA0, mass, reference)
    start = ExactEvolver1D.build(n, grid.dx, eA0, mass, reference)
    field = staggered_field(grid, psi0, start, dt)
    cfg = StepperConfig(dt=dt, courant_factor=min(0.99, dt * math.sqrt(grid.dims) / grid.dx + 1e-12),
                        boundary="periodic", mass=mass, diagonal=diagonal)
    prof = None if eA0 is None else PotentialProfile(grid, np.asarray(eA0, float).reshape(grid.shape))
    stepper = Leapfrog(grid, prof, cfg)
    for _ in range(n_steps):
        stepper(field)
    t_lo = n_steps * dt
    exact_lo = ref.evolve(psi0, t_lo)
    exact_up = ref.evolve(psi0, t_lo - 0.5 * dt)
    return float(max(np.abs(field.lower - exact_lo[2:]).max(), np.abs(field.upper - exact_up[:2]).max()))


def refinement_error(n: int, length: float, psi_fn, v_fn, t: float, courant: float = 0.2,
                     n_ref: int = 64, mass: float = 1.0) -> float:
    """Leapfrog error on an ``n``-cell periodic lattice against a fine spectral reference.

    ``psi_fn(x)`` gives a (4, len(x)) band-limited state and ``v_fn(x)`` the
    potential.  The reference lives on ``n_ref`` cells (a multiple of
    ``n``) and is sampled at the coarse points, so the returned max error
    contains both the time and the spatial discretisation error of the
    coarse run.
    """
    if n_ref % n:
        raise OracleError("n_ref must be a multiple of n")
    from .lattice import make_grid

    xr = np.arange(n_ref) * length / n_ref
    ref = ExactEvolver1D.build(n_ref, length / n_ref, v_fn(xr), mass, "spectral")
    psi_r = np.asarray(psi_fn(xr), complex)
    stride = n_ref // n
    dx = length / n
    x = np.arange(n) * dx
    grid = make_grid(1, [n], dx, 0.0)
    dt = courant * dx
    n_steps = int(round(t / dt))
    up0 = ref.evolve(psi_r, -0.5 * dt)[:2, ::stride]
    field = SpinorField(grid, up0.copy(), psi_r[2:, ::stride].copy(), dt)
    field.meta["periodic"] = True
    cfg = StepperConfig(dt=dt, courant_factor=min(0.99, courant + 1e-12), boundary="periodic", mass=mass)
    stepper = Leapfrog(grid, PotentialProfile(grid, np.asarray(v_fn(x), float)), cfg)
    for _ in range(n_steps):
        stepper(field)
    lo = ref.evolve(psi_r, n_steps * dt)[2:, ::stride]
    up = ref.evolve(psi_r, n_steps * dt - 0.5 * dt)[:2, ::stride]
    return float(max(np.abs(field.lower - lo).max(), np.abs(field.upper - up).max()))


def convergence_order(h, errors) -> float:
    """Least-squares slope of log(error) against log(h)."""
    return float(np.polyfit(np.log(np.asarray(h, float)), np.log(np.asarray(errors, float)), 1)[0])


# --------------------------------------------------------------------------
# stationary step scattering


def _momentum(E: float, eV: float, mass: float) -> complex:
    # k with (E - eV)^2 = k^2 + m^2; imaginary in the gap
    k2 = (E - eV) ** 2 - mass**2
    return complex(math.sqrt(k2)) if k2 >= 0 else 1j * math.sqrt(-k2)


def planewave_step_rt(E: float, p: float | None = None, eV: float = 0.0, mass: float = 1.0,
                      branch: str = "group_velocity") -> tuple[float, float]:
    """Reflection and transmission of a plane wave at a sharp step, normal incidence.

    With kappa = q (E + m) / (p (E - eV + m)), r = (1 - kappa)/(1 + kappa)
    and T = kappa |t|^2 for real kappa.  In the Klein zone
    (E - eV < -m) the transmitted momentum sign is set by ``branch``:
    ``"group_velocity"`` picks the wave carrying probability away from the
    step (R <= 1), ``"momentum_sign"`` picks q > 0 (R > 1, T < 0).
    Inside the mass gap the transmitted wave is evanescent and R = 1, T = 0.
    """
    if not E > mass:
        raise OracleError("need E > m for a propagating incident wave")
    if p is None:
        p = math.sqrt(E**2 - mass**2)
    elif abs(p * p + mass * mass - E * E) > 1e-9 * E * E:
        raise OracleError("p and E are not on shell")
    if branch not in ("group_velocity", "momentum_sign"):
        raise OracleError(f"unknown branch {branch!r}")
    q = _momentum(E, eV, mass)
    if q.imag != 0:
        return 1.0, 0.0
    q = q.real
    if E - eV < 0 and branch == "group_velocity":
        q = -q
    denom = E - eV + mass
    if denom == 0:
        return 1.0, 0.0
    kappa = q * (E + mass) / (p * denom)
    R = ((1 - kappa) / (1 + kappa)) ** 2
    T = 4 * kappa / (1 + kappa) ** 2
    return float(R), float(T)


def _modes(E: float, v: float, mass: float):
    # plane-wave solutions of the reduced (psi1, psi4) system:
    # d(psi)/dx = i sigma_x (E - v - sigma_z m) psi
    sx = np.array([[0, 1], [1, 0]], complex)
    sz = np.diag([1.0, -1.0])
    M = 1j * sx @ ((E - v) * np.eye(2) - mass * sz)
    lam, vec = np.linalg.eig(M)
    return lam, vec


def _current(u: np.ndarray) -> float:
    # probability current along x for a reduced spinor: psi^dag sigma_x psi
    return float(2 * (u[0].conjugate() * u[1]).real)


def planewave_step_rt_numeric(E: float, eV: float, mass: float = 1.0,
                              branch: str = "group_velocity", dE: float = 1e-6) -> tuple[float, float]:
    """Independent route to the step coefficients.

    Modes on each side come from a numerical eigen-decomposition of the
    stationary first-order system; the transmitted mode is picked from a
    finite-difference group velocity (or momentum sign), the continuity
    conditions are solved as a linear system and R, T are flux ratios.
    """
    lam_l, vec_l = _modes(E, 0.0, mass)
    k_l = lam_l / 1j
    inc = int(np.argmax(k_l.real))
    ref = 1 - inc
    lam_r, vec_r = _modes(E, eV, mass)
    k_r = lam_r / 1j
    if np.abs(k_r.imag).max() > 1e-12:
        # gap: keep the mode decaying into x > 0
        tr = int(np.argmax(-lam_r.real))
        evanescent = True
    else:
        evanescent = False
        if branch == "momentum_sign":
            tr = int(np.argmax(k_r.real))
        else:
            lam_r2, _ = _modes(E + dE, eV, mass)
            k2 = np.sort((lam_r2 / 1j).real)
            k1 = np.sort(k_r.real)
            vg = dE / (k2 - k1)
            want = k1[int(np.argmax(vg))]
            tr = int(np.argmin(np.abs(k_r.real - want)))
    a = np.column_stack([vec_l[:, ref], -vec_r[:, tr]])
    r, t = np.linalg.solve(a, -vec_l[:, inc])
    j_in = _current(vec_l[:, inc])
    R = -_current(r * vec_l[:, ref]) / j_in
    T = 0.0 if evanescent else _current(t * vec_r[:, tr]) / j_in
    return float(R), float(T)


def group_velocity(p, mass: float = 1.0) -> np.ndarray:
    """p c^2 / E for a free particle."""
    p = np.atleast_1d(np.asarray(p, dtype=float))
    E = math.sqrt(float(np.dot(p, p)) + mass**2)
    return p / E


def lattice_group_velocity(p, dx: float, dt: float = 0.0, mass: float = 1.0) -> np.ndarray:
    """Group velocity of the central-difference leapfrog for a free packet.

    The lattice replaces each momentum component by sin(p dx)/dx, so a packet
    with p dx of order 0.3 already moves several percent slower than p/E.
    The time-stagger correction is leading order only.
    """
    p = np.atleast_1d(np.asarray(p, dtype=float))
    q = np.sin(p * dx) / dx
    E = math.sqrt(float(np.dot(q, q)) + mass**2)
    v = q * np.cos(p * dx) / E
    return v / math.sqrt(max(1e-300, 1.0 - (0.5 * dt * E) ** 2))


def packet_mean_velocity(p: float, x0: float, mass: float = 1.0, spin: str = "up",
                         n_quad: int = 4001) -> float:
    """Drift velocity of a 1D Gaussian packet built from one fixed spinor.

    The momentum-space Gaussian (|psi|^2 width ``x0``, so sigma_p = 1/(2 x0))
    is split at every k into positive and negative energy parts, which move
    at +k/E and -k/E.  For sigma_p comparable to p this falls visibly below
    p/E.
    """
    u = spinor_amplitudes((p, 0.0, 0.0), mass, spin)
    u = u / np.linalg.norm(u)
    k = p + np.linspace(-10.0, 10.0, n_quad) / (2 * x0)
    w = np.exp(-2 * (k - p) ** 2 * x0**2)
    E = np.sqrt(k**2 + mass**2)
    # <u|H(k)|u> / E with H = alpha_x k + beta mass, so P+ - P- = H/E
    h = 2 * k * (u[0].conjugate() * u[3] + u[1].conjugate() * u[2]).real + mass * (
        abs(u[0]) ** 2 + abs(u[1]) ** 2 - abs(u[2]) ** 2 - abs(u[3]) ** 2)
    return float(np.sum(w * h * k / E**2) / np.sum(w))
