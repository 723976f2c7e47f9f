"""Density, norms, centroids, reflection/transmission and plane slices."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Sequence

import numpy as np

from . import _kernels
from .lattice import Grid, GridError, SpinorField

__all__ = [
    "density",
    "raw_density",
    "total_norm",
    "half_space_norms",
    "x_marginal",
    "centroid",
    "width",
    "RTReport",
    "rt_coefficients",
    "SeparationError",
    "find_cut",
    "lobes_separated",
    "forward_filter",
    "Slice2D",
    "slice2d",
]


def density(field: SpinorField, periodic: bool | None = None) -> np.ndarray:
    """Probability density with the time staggering folded in.

    The lower pair at step n is paired with the upper pair straddling it
    (n - 1/2 and, through the update rule, n + 1/2)::

        rho = |phi|^2 + |chi|^2 + dt * Re(chi^* . (sigma . grad) phi)

    The lattice sum of this density is exactly what the leapfrog conserves,
    so norm drift only comes from boundary handling and rounding.
    """
    if periodic is None:
        periodic = bool(field.meta.get("periodic", False))
    grid = field.grid
    s3 = grid.as3d()
    out = np.empty(s3)
    active = (True, grid.dims == 3, grid.dims >= 2)
    _kernels.charge_density(_kernels.as4d(field.upper, s3), _kernels.as4d(field.lower, s3),
                            field.dt, 0.5 / grid.dx, active, (periodic,) * 3, out)
    return out.reshape(grid.shape)


def raw_density(field: SpinorField) -> np.ndarray:
    """Sum of |psi_i|^2 over the stored (half-step skewed) levels."""
    return (np.abs(field.upper) ** 2).sum(axis=0) + (np.abs(field.lower) ** 2).sum(axis=0)


def _as_density(obj) -> tuple[np.ndarray, Grid]:
    if isinstance(obj, SpinorField):
        return density(obj), obj.grid
    rho, grid = obj
    return rho, grid


def _region_mask(grid: Grid, region) -> np.ndarray | None:
    """``region`` maps axis name -> (lo, hi) with None for open ends.

    A cell belongs to the region when lo <= centre < hi on every listed
    axis; an empty mapping (or None) selects the whole domain.
    """
    if not region:
        return None
    mask = np.ones(grid.shape, dtype=bool)
    for axis, (lo, hi) in region.items():
        if axis not in grid.axes:
            raise GridError(f"axis {axis!r} not on a {grid.dims}D grid")
        c = grid.axis_coords(axis)
        sel = np.ones_like(c, dtype=bool)
        if lo is not None:
            sel &= c >= lo
        if hi is not None:
            sel &= c < hi
        shape = [1] * grid.dims
        shape[grid.axes.index(axis)] = -1
        mask &= sel.reshape(shape)
    return mask


def total_norm(field_or_density, region=None) -> float:
    """Integral of the density over ``region`` (whole domain by default).

    Accepts a field or a ``(density, grid)`` pair.  Reductions go through
    numpy's pairwise summation over a fixed memory layout, so the result is
    reproducible bit for bit.
    """
    rho, grid = _as_density(field_or_density)
    mask = _region_mask(grid, region)
    if mask is not None:
        rho = np.where(mask, rho, 0.0)
    return float(rho.sum() * grid.cell_volume)


def half_space_norms(field_or_density, plane_x: float) -> tuple[float, float]:
    """Norms of x < plane_x and x >= plane_x."""
    rho, grid = _as_density(field_or_density)
    xm = x_marginal((rho, grid))
    x = grid.axis_coords(0)
    left = float(np.where(x < plane_x, xm, 0.0).sum() * grid.dx)
    right = float(np.where(x >= plane_x, xm, 0.0).sum() * grid.dx)
    return left, right


def x_marginal(field_or_density) -> np.ndarray:
    """Density integrated over every axis but x."""
    rho, grid = _as_density(field_or_density)
    if grid.dims == 1:
        return rho.copy()
    return rho.reshape(grid.n[0], -1).sum(axis=1) * grid.dx ** (grid.dims - 1)


def centroid(field_or_density) -> np.ndarray:
    rho, grid = _as_density(field_or_density)
    total = rho.sum()
    if not total > 0:
        raise ValueError("centroid of a zero-norm field is undefined")
    out = []
    for ax in range(grid.dims):
        other = tuple(i for i in range(grid.dims) if i != ax)
        marg = rho.sum(axis=other) if other else rho
        out.append(float((marg * grid.axis_coords(ax)).sum() / total))
    return np.array(out)


def width(field_or_density, axis: str = "x", region=None) -> float:
    """Standard deviation of the density along one axis, optionally restricted."""
    rho, grid = _as_density(field_or_density)
    mask = _region_mask(grid, region)
    if mask is not None:
        rho = np.where(mask, rho, 0.0)
    ax = grid.axes.index(axis)
    other = tuple(i for i in range(grid.dims) if i != ax)
    marg = rho.sum(axis=other) if other else rho
    c = grid.axis_coords(ax)
    w = marg.sum()
    if not w > 0:
        raise ValueError("width of a zero-norm region is undefined")
    mu = (marg * c).sum() / w
    return float(np.sqrt((marg * (c - mu) ** 2).sum() / w))


# --------------------------------------------------------------------------
# forward filtering


class SeparationError(ValueError):
    """The backward and forward lobes are not separated at the cut."""


def lobes_separated(marginal: np.ndarray, cut_index: int, dx: float,
                    ratio: float = 0.1, negligible: float = 1e-6) -> bool:
    """Two-lobe test on an x-marginal density.

    The density at the cut must be below ``ratio`` times the smaller of the
    two side maxima.  A side holding less than ``negligible`` probability
    counts as empty, and any cut next to an empty side is accepted.
    """
    left, right = marginal[:cut_index], marginal[cut_index:]
    if left.sum() * dx <= negligible or right.sum() * dx <= negligible:
        return True
    return bool(marginal[cut_index] <= ratio * min(left.max(), right.max()))


def find_cut(field_or_density, lo: float | None = None, hi: float | None = None) -> float:
    """x position of the density minimum between ``lo`` and ``hi``.

    Defaults search from the left face to the position of the density
    maximum (the forward lobe for the scenarios of interest).
    """
    rho, grid = _as_density(field_or_density)
    m = x_marginal((rho, grid))
    x = grid.axis_coords(0)
    if hi is None:
        hi = x[int(np.argmax(m))]
    if lo is None:
        lo = x[0]
    sel = np.flatnonzero((x >= lo) & (x <= hi))
    if sel.size == 0:
        raise ValueError("empty search window for the cut")
    return float(x[sel[np.argmin(m[sel])]])


def forward_filter(field: SpinorField, cut_x: float, ratio: float = 0.1,
                   negligible: float = 1e-6) -> tuple[SpinorField, float]:
    """Drop everything at x < cut_x and renormalise to unit norm.

    Returns the filtered copy and the norm the kept region had before
    renormalisation.
    """
    rho = density(field)
    grid = field.grid
    m = x_marginal((rho, grid))
    x = grid.axis_coords(0)
    cut_index = int(np.searchsorted(x, cut_x))
    if not lobes_separated(m, cut_index, grid.dx, ratio, negligible):
        raise SeparationError(f"lobes not separated at x={cut_x}")
    out = field.copy()
    out.upper[:, :cut_index] = 0
    out.lower[:, :cut_index] = 0
    forward_norm = total_norm((rho, grid), {"x": (cut_x, None)})
    kept = total_norm(out)
    if not kept > 0:
        raise SeparationError("nothing left after filtering")
    out = out.scaled(1.0 / np.sqrt(kept))
    out.meta["forward_norm"] = forward_norm
    out.meta["cut_x"] = cut_x
    return out, forward_norm


# --------------------------------------------------------------------------
# reflection / transmission


@dataclass
class RTReport:
    R: float
    T: float
    plane_x: float
    t_measure: int
    forward_norm: float
    converged: bool
    extra: dict = dc_field(default_factory=dict)

    def as_dict(self) -> dict:
        d = {"R": self.R, "T": self.T, "plane_x": self.plane_x, "t_measure": self.t_measure,
             "forward_norm": self.forward_norm, "converged": self.converged}
        d.update(self.extra)
        return d


def _interaction_start(left: np.ndarray, right: np.ndarray, threshold: float = 1e-3) -> int | None:
    moved = np.flatnonzero((np.abs(right - right[0]) > threshold) | (np.abs(left - left[0]) > threshold))
    return int(moved[0]) if moved.size else None


def rt_coefficients(observation_log: Sequence[dict], plane_x: float, forward_norm: float = 1.0,
                    window: int = 100, tol: float = 1e-4) -> RTReport:
    """Reflection and transmission from logged half-space norms.

    ``observation_log`` records need ``step``, ``norm_left`` and
    ``norm_right`` measured about ``plane_x``.  The measurement sample is
    the first one, after the packet has started to interact, from which both
    norms move by less than ``tol`` over the next ``window`` steps; failing
    that the last sample is used and ``converged`` is False.
    ``forward_norm`` is the normalisation the logged norms are divided by.
    """
    if not forward_norm > 0:
        raise ValueError("forward_norm must be positive")
    recs = [r for r in observation_log if "norm_left" in r]
    if not recs:
        raise ValueError("log holds no half-space norms")
    for r in recs:
        if "plane_x" in r and abs(r["plane_x"] - plane_x) > 1e-12:
            raise ValueError("log was recorded about a different plane")
    steps = np.array([r["step"] for r in recs])
    left = np.array([r["norm_left"] for r in recs])
    right = np.array([r["norm_right"] for r in recs])

    chosen, converged = len(recs) - 1, False
    start = _interaction_start(left, right)
    if start is not None:
        for i in range(start, len(recs)):
            j = np.searchsorted(steps, steps[i] + window)
            if j >= len(recs):
                break
            seg = slice(i, j + 1)
            if (np.abs(left[seg] - left[i]).max() < tol and np.abs(right[seg] - right[i]).max() < tol):
                chosen, converged = i, True
                break
    return RTReport(R=float(left[chosen] / forward_norm), T=float(right[chosen] / forward_norm),
                    plane_x=plane_x, t_measure=int(steps[chosen]), forward_norm=forward_norm,
                    converged=converged)


# --------------------------------------------------------------------------
# slices


@dataclass
class Slice2D:
    """Image-ordered plane: row 0 is the largest value of the vertical axis.

    ``horizontal``/``vertical`` name the axes and ``*_coords`` give the
    cell centres along them (vertical coordinates top to bottom).
    """

    data: np.ndarray
    horizontal: str
    vertical: str
    horizontal_coords: np.ndarray
    vertical_coords: np.ndarray


def slice2d(field_or_density, plane: str = "xz", index: int | None = None) -> Slice2D:
    if plane not in ("xy", "xz", "yz"):
        raise ValueError("plane must be one of xy, xz, yz")
    rho, grid = _as_density(field_or_density)
    a, b = plane[0], plane[1]
    if grid.dims == 2:
        if plane != "xz":
            raise GridError("a 2D grid only has the xz plane")
        data = rho
    elif grid.dims == 3:
        cut_axis = ({"x", "y", "z"} - {a, b}).pop()
        ci = grid.axes.index(cut_axis)
        n = grid.n[ci]
        if index is None:
            index = n // 2
        if not 0 <= index < n:
            raise GridError(f"slice index {index} out of bounds for axis {cut_axis} ({n})")
        data = np.take(rho, index, axis=ci)
    else:
        raise GridError("slices need a 2D or 3D grid")
    # data is (n_a, n_b); image rows run along b from top (max) to bottom
    img = np.ascontiguousarray(data.T[::-1])
    return Slice2D(img, a, b, grid.axis_coords(a), grid.axis_coords(b)[::-1].copy())
