"""Second-order accuracy against a dense propagator.

Random states and potentials on a 32-cell periodic lattice are advanced by
the leapfrog and by exp(-iHt) built from the same stencil; halving dt cuts
the error by four.  For the spatial order a band-limited state is compared
with a fine spectral reference at three resolutions.
"""

import numpy as np

from diracfdtd import make_grid
from diracfdtd.oracle import convergence_order, leapfrog_error, refinement_error

rng = np.random.default_rng(0)
grid = make_grid(1, [32], 0.5)
psi = rng.normal(size=(4, 32)) + 1j * rng.normal(size=(4, 32))
psi /= np.linalg.norm(psi)
v = rng.uniform(-2, 2, 32)
dts = [0.02, 0.01, 0.005]
errs = [leapfrog_error(grid, psi, v, dt, int(round(1.0 / dt))) for dt in dts]
for dt, e in zip(dts, errs):
    print(f"dt = {dt:<6g} max error {e:.3e}")
print(f"time order {convergence_order(dts, errs):.3f}")

L = 16.0
k = 2 * np.pi / L


def state(x):
    return np.array([np.exp(1j * k * x) * (1 + 0.3 * np.cos(2 * k * x)), 0.2 * np.sin(k * x) + 0j * x,
                     0.1 * np.exp(-3j * k * x), 0j * x])


def potential(x):
    return 0.5 * np.cos(k * x)


ns = [16, 32, 64]
errs = [refinement_error(n, L, state, potential, 2.0) for n in ns]
for n, e in zip(ns, errs):
    print(f"dx = {L / n:<6g} max error {e:.3e}")
print(f"space order {convergence_order([L / n for n in ns], errs):.3f}")
