"""Compiled stencil kernels.

All kernels work on arrays padded to ``(2, nx, ny, nz)``; inactive axes have
length 1 and are skipped through the ``active`` flags.  Every kernel writes
each output cell independently, so results do not depend on thread count.
"""

import numpy as np
from numba import njit, prange


@njit(inline="always")
def _dcentral(a, c, i, j, k, ax, n, inv2dx, periodic):
    # centred difference of a[c] along axis ax at (i, j, k); zero ghosts unless periodic
    if ax == 0:
        ip, im, idx = i + 1, i - 1, i
    elif ax == 1:
        ip, im, idx = j + 1, j - 1, j
    else:
        ip, im, idx = k + 1, k - 1, k
    hi = 0j
    lo = 0j
    if ip < n:
        p = ip
        valid_hi = True
    elif periodic:
        p = 0
        valid_hi = True
    else:
        p = 0
        valid_hi = False
    if im >= 0:
        m = im
        valid_lo = True
    elif periodic:
        m = n - 1
        valid_lo = True
    else:
        m = 0
        valid_lo = False
    if ax == 0:
        if valid_hi:
            hi = a[c, p, j, k]
        if valid_lo:
            lo = a[c, m, j, k]
    elif ax == 1:
        if valid_hi:
            hi = a[c, i, p, k]
        if valid_lo:
            lo = a[c, i, m, k]
    else:
        if valid_hi:
            hi = a[c, i, j, p]
        if valid_lo:
            lo = a[c, i, j, m]
    return (hi - lo) * inv2dx


@njit(inline="always")
def _sigma_grad(src, i, j, k, shape, inv2dx, active, periodic):
    # (sigma . grad) applied to the two-spinor src at one cell
    g0 = 0j
    g1 = 0j
    if active[0]:
        dx0 = _dcentral(src, 0, i, j, k, 0, shape[0], inv2dx, periodic[0])
        dx1 = _dcentral(src, 1, i, j, k, 0, shape[0], inv2dx, periodic[0])
        g0 += dx1
        g1 += dx0
    if active[1]:
        dy0 = _dcentral(src, 0, i, j, k, 1, shape[1], inv2dx, periodic[1])
        dy1 = _dcentral(src, 1, i, j, k, 1, shape[1], inv2dx, periodic[1])
        g0 += -1j * dy1
        g1 += 1j * dy0
    if active[2]:
        dz0 = _dcentral(src, 0, i, j, k, 2, shape[2], inv2dx, periodic[2])
        dz1 = _dcentral(src, 1, i, j, k, 2, shape[2], inv2dx, periodic[2])
        g0 += dz0
        g1 -= dz1
    return g0, g1


@njit(parallel=True, cache=True)
def half_update(dst, src, keep, drive, inv2dx, active, periodic):
    """dst <- keep * dst - drive * (sigma . grad) src, in place."""
    nx, ny, nz = dst.shape[1], dst.shape[2], dst.shape[3]
    shape = (nx, ny, nz)
    for i in prange(nx):
        for j in range(ny):
            for k in range(nz):
                g0, g1 = _sigma_grad(src, i, j, k, shape, inv2dx, active, periodic)
                kc = keep[i, j, k]
                dc = drive[i, j, k]
                dst[0, i, j, k] = kc * dst[0, i, j, k] - dc * g0
                dst[1, i, j, k] = kc * dst[1, i, j, k] - dc * g1


@njit(parallel=True, cache=True)
def charge_density(upper, lower, dt, inv2dx, active, periodic, out):
    """Density whose lattice sum the leapfrog conserves exactly.

    |u|^2 + |l|^2 + dt * Re(l^* . (sigma . grad) u), pairing lower at n with
    upper at n - 1/2.
    """
    nx, ny, nz = upper.shape[1], upper.shape[2], upper.shape[3]
    shape = (nx, ny, nz)
    for i in prange(nx):
        for j in range(ny):
            for k in range(nz):
                g0, g1 = _sigma_grad(upper, i, j, k, shape, inv2dx, active, periodic)
                u0 = upper[0, i, j, k]
                u1 = upper[1, i, j, k]
                l0 = lower[0, i, j, k]
                l1 = lower[1, i, j, k]
                mix = (l0.conjugate() * g0 + l1.conjugate() * g1).real
                out[i, j, k] = (u0.real**2 + u0.imag**2 + u1.real**2 + u1.imag**2
                                + l0.real**2 + l0.imag**2 + l1.real**2 + l1.imag**2
                                + dt * mix)


@njit(parallel=True, cache=True)
def apply_sigma_grad(src, inv2dx, active, periodic, out):
    nx, ny, nz = src.shape[1], src.shape[2], src.shape[3]
    shape = (nx, ny, nz)
    for i in prange(nx):
        for j in range(ny):
            for k in range(nz):
                g0, g1 = _sigma_grad(src, i, j, k, shape, inv2dx, active, periodic)
                out[0, i, j, k] = g0
                out[1, i, j, k] = g1


def as4d(a: np.ndarray, shape3) -> np.ndarray:
    """View a (2, *grid.shape) array as (2, nx, ny, nz) without copying."""
    return a.reshape((2,) + tuple(shape3))
