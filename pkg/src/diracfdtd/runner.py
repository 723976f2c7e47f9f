"""Scenario orchestration and result files.

A run goes: build grid, potential and packet; free flight until the packet
is a few widths in front of the measurement plane; optional forward filter;
barrier interaction; reflection/transmission from the logged half-space
norms.  ``run_scenario`` streams the observables to CSV and writes
snapshots, frames and a key=value report.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .config import ScenarioConfig
from .lattice import Grid, SpinorField
from .observables import (RTReport, SeparationError, Slice2D, centroid, density, find_cut,
                          forward_filter, half_space_norms, rt_coefficients, slice2d, total_norm,
                          width)
from .oracle import group_velocity, lattice_group_velocity, planewave_step_rt
from .potentials import (CriticalityReport, PotentialProfile, RampPotentialSpec, StepPotentialSpec,
                         classify, sample_ramp, sample_step, zero_profile)
from .stepper import DivergenceError, Leapfrog, apply_boundary
from .wavepacket import PacketSpec, init_packet

__all__ = [
    "ScenarioResult",
    "build_profile",
    "build_packet",
    "simulate",
    "run_scenario",
    "write_frame",
    "write_snapshot",
    "CSV_COLUMNS",
]

log = logging.getLogger(__name__)

CSV_COLUMNS = ("step", "time", "norm", "norm_left", "norm_right", "centroid_x", "centroid_y",
               "centroid_z", "R_running", "T_running")


@dataclass
class ScenarioResult:
    config: ScenarioConfig
    grid: Grid
    profile: PotentialProfile
    packet: PacketSpec
    field: SpinorField
    log: list[dict]
    rt: RTReport | None
    criticality: CriticalityReport | None
    plane_x: float
    filter_info: dict = field(default_factory=dict)

    @property
    def forward_norm(self) -> float:
        return self.filter_info.get("forward_norm", 1.0)

    @property
    def unfiltered(self) -> tuple[float, float]:
        """R, T referred to the whole initial packet.

        The removed backward lobe sits entirely at x < plane, so it adds
        to the reflected side.
        """
        if self.rt is None:
            return math.nan, math.nan
        fn = self.forward_norm
        return fn * self.rt.R + (1 - fn), fn * self.rt.T

    @property
    def max_norm_deviation(self) -> float:
        return max((abs(r["norm"] - 1.0) for r in self.log), default=0.0)

    def series(self, key: str) -> np.ndarray:
        return np.array([r.get(key, math.nan) for r in self.log], dtype=float)


def build_profile(config: ScenarioConfig, grid: Grid) -> PotentialProfile:
    units = config.units_system()
    pot = config.potential
    if pot.kind == "none":
        return zero_profile(grid)
    height = units.to_internal(pot.height_volts, "potential_volts")
    if pot.kind == "step":
        return sample_step(grid, StepPotentialSpec(height, pot.edge))
    width_ = units.to_internal(pot.ramp_width_m, "length_m")
    eps = units.to_internal(pot.field_volts_per_m, "field_volts_per_m")
    return sample_ramp(grid, RampPotentialSpec(height, width_, eps, pot.edge))


def build_packet(config: ScenarioConfig, grid: Grid) -> PacketSpec:
    units = config.units_system()
    p = tuple(units.to_internal(v, "momentum_MeV_per_c") for v in config.packet.p_mev_c)
    x0 = units.to_internal(config.packet.x0_m, "length_m")
    center = config.packet.center
    if center is None:
        lo, hi = grid.extent(0)
        center = (lo + (hi - lo) / 3,) + tuple(
            0.5 * sum(grid.extent(a)) for a in range(1, grid.dims))
    return PacketSpec(p, x0, center, config.packet.spin)


def default_plane(config: ScenarioConfig, grid: Grid) -> float:
    if config.observe.plane_x is not None:
        return config.observe.plane_x
    if config.potential.kind != "none":
        return config.potential.edge
    lo, hi = grid.extent(0)
    return 0.0 if lo < 0.0 < hi else 0.5 * (lo + hi)


def _filter_step(config: ScenarioConfig, packet: PacketSpec, plane_x: float, dt: float,
                 dx: float) -> int | None:
    """Step at which to filter, or None when there is no free flight to use."""
    o = config.observe
    if not o.forward_filter:
        return None
    if o.filter_time is not None:
        return int(round(o.filter_time / dt))
    # the lattice packet is slower than p/E; time the cut on its actual speed
    vx = lattice_group_velocity(packet.p, dx, dt, packet.mass)[0]
    if not vx > 0:
        return None
    t = (plane_x - 5 * packet.x0 - packet.center[0]) / vx
    return int(round(t / dt)) if t > 0 else None


def _sample(f: SpinorField, plane_x: float) -> dict:
    rho = density(f)
    g = f.grid
    norm = total_norm((rho, g))
    left, right = half_space_norms((rho, g), plane_x)
    c = centroid((rho, g)) if norm > 0 else np.full(g.dims, math.nan)
    cen = dict(zip(g.axes, c))
    rec = {"norm": norm, "norm_left": left, "norm_right": right, "plane_x": plane_x,
           "centroid_x": cen.get("x", math.nan), "centroid_y": cen.get("y", math.nan),
           "centroid_z": cen.get("z", math.nan),
           "R_running": left / norm if norm > 0 else math.nan,
           "T_running": right / norm if norm > 0 else math.nan}
    # per-side diagnostics for lobe widths and trajectories
    x = g.axis_coords(0).reshape((-1,) + (1,) * (g.dims - 1))
    for side, w in (("left", left), ("right", right)):
        if w > 1e-3 * norm:
            sel = x < plane_x if side == "left" else x >= plane_x
            part = np.where(sel, rho, 0.0)
            rec[f"width_{side}"] = width((part, g), "x")
            for a, v in zip(g.axes, centroid((part, g))):
                rec[f"centroid_{side}_{a}"] = float(v)
    return rec


def simulate(config: ScenarioConfig,
             on_sample: Callable[[dict], None] | None = None,
             on_snapshot: Callable[[SpinorField], None] | None = None) -> ScenarioResult:
    """Run one scenario in memory.

    ``on_sample`` sees every observation record as it is produced and
    ``on_snapshot`` the field every ``observe.snapshot_every`` steps, so a
    caller can persist partial output before a divergence propagates.
    """
    grid = config.make_grid()
    profile = build_profile(config, grid)
    packet = build_packet(config, grid)
    stepper_cfg = config.stepper_config(grid)
    plane_x = default_plane(config, grid)
    crit = classify(profile.peak, packet.energy) if config.potential.kind != "none" else None
    if crit is not None:
        log.info("barrier regime %s", crit)

    periodic = config.stepper.boundary == "periodic"
    f = init_packet(grid, packet, stepper_cfg.dt, profile, periodic=periodic)
    if stepper_cfg.boundary == "reflecting":
        # the stepper pins the outer shell; start from a state that already obeys it
        apply_boundary(f, stepper_cfg)
        f = f.scaled(1.0 / math.sqrt(total_norm(f)))
    leap = Leapfrog(grid, profile, stepper_cfg)
    n_filter = _filter_step(config, packet, plane_x, stepper_cfg.dt, grid.dx)
    info: dict = {"status": "off" if not config.observe.forward_filter else "skipped"}
    records: list[dict] = []
    every = config.observe.sample_every
    snap = config.observe.snapshot_every

    def emit(rec):
        records.append(rec)
        if on_sample:
            on_sample(rec)

    def observe():
        rec = {"step": f.step_index, "time": f.time}
        rec.update(_sample(f, plane_x))
        emit(rec)

    observe()
    if snap and on_snapshot:
        on_snapshot(f)
    post_filter_start = 0
    for _ in range(config.stepper.n_steps):
        leap(f)
        filtered = False
        if n_filter is not None and f.step_index == n_filter:
            f, info = _apply_filter(f, packet, plane_x)
            filtered = info["status"] == "applied"
            post_filter_start = len(records)
        if filtered or f.step_index % every == 0:
            observe()
        if snap and on_snapshot and f.step_index % snap == 0:
            on_snapshot(f)
    if not f.is_finite():
        raise DivergenceError(f.step_index)

    rt = None
    meas = records[post_filter_start:]
    if len(meas) >= 2:
        rt = rt_coefficients(meas, plane_x, forward_norm=1.0)
        rt.forward_norm = info.get("forward_norm", 1.0)
        last = meas[-1]
        rt.extra.update(R_last=last["norm_left"] / last["norm"], T_last=last["norm_right"] / last["norm"])
    return ScenarioResult(config, grid, profile, packet, f, records, rt, crit, plane_x, info)


def _apply_filter(f: SpinorField, packet: PacketSpec, plane_x: float):
    vx = group_velocity(packet.p)[0]
    t = f.time
    lo = packet.center[0] - vx * t
    hi = min(packet.center[0] + vx * t, plane_x)
    try:
        cut = find_cut(f, lo, hi)
        out, fn = forward_filter(f, cut)
    except (SeparationError, ValueError) as e:
        log.warning("forward filter skipped: %s", e)
        return f, {"status": f"failed ({e})", "step": f.step_index}
    log.info("forward filter at step %d, cut x=%.6g, forward norm %.6g", f.step_index, cut, fn)
    return out, {"status": "applied", "step": f.step_index, "cut_x": cut, "forward_norm": fn}


# --------------------------------------------------------------------------
# files


def write_frame(sl: Slice2D | np.ndarray, path) -> float:
    """Write an 8-bit binary PGM of ``sl`` scaled by its own maximum.

    Row 0 of the image is the first row of the slice (largest vertical
    coordinate for :func:`slice2d` output).  The maximum is written to a
    ``.max`` sidecar, with 0 meaning an all-zero frame, and returned.
    """
    data = np.asarray(sl.data if isinstance(sl, Slice2D) else sl, dtype=float)
    if data.ndim != 2 or not np.isfinite(data).all():
        raise ValueError("frame data must be a finite 2D array")
    vmax = float(data.max()) if data.size else 0.0
    if vmax > 0:
        pix = np.floor(255.0 * np.clip(data, 0, None) / vmax + 0.5).astype(np.uint8)
    else:
        vmax = 0.0
        pix = np.zeros(data.shape, np.uint8)
    path = Path(path)
    h, w = data.shape
    path.write_bytes(b"P5\n%d %d\n255\n" % (w, h) + pix.tobytes())
    path.with_suffix(".max").write_text(f"max={vmax!r}\n")
    return vmax


def write_snapshot(f: SpinorField, path) -> None:
    """Density as raw little-endian float64 plus a JSON sidecar."""
    path = Path(path)
    rho = density(f)
    rho.astype("<f8").tofile(path)
    g = f.grid
    meta = {"dims": g.dims, "axes": list(g.axes), "n": list(g.n), "dx": g.dx, "origin": list(g.origin),
            "step": f.step_index, "time": f.time, "dtype": "<f8", "order": "C"}
    path.with_suffix(".json").write_text(json.dumps(meta, indent=1) + "\n")


def _fmt(v) -> str:
    return "%.16e" % v


def write_report(result: ScenarioResult, path) -> None:
    lines = {}
    rt = result.rt
    if rt is not None:
        lines.update(R=rt.R, T=rt.T, plane_x=rt.plane_x, t_measure=rt.t_measure,
                     forward_norm=result.forward_norm, converged=str(rt.converged).lower())
        ru, tu = result.unfiltered
        lines.update(R_unfiltered=ru, T_unfiltered=tu, R_last=rt.extra["R_last"], T_last=rt.extra["T_last"])
    fi = result.filter_info
    lines["filter_status"] = fi.get("status", "off")
    if "cut_x" in fi:
        lines.update(filter_step=fi["step"], filter_cut_x=fi["cut_x"])
    if result.criticality is not None:
        c = result.criticality
        lines.update(regime=c.regime, eV=c.eV, threshold=c.threshold)
        p = result.packet.p
        if p[1] == 0 and p[2] == 0 and result.config.potential.kind == "step":
            for branch in ("group_velocity", "momentum_sign"):
                R, T = planewave_step_rt(result.packet.energy, p[0], c.eV, branch=branch)
                lines[f"planewave_R_{branch}"] = R
                lines[f"planewave_T_{branch}"] = T
    lines.update(energy=result.packet.energy, steps=result.field.step_index, dt=result.field.dt,
                 dx=result.grid.dx, max_norm_deviation=result.max_norm_deviation)
    out = []
    for k, v in lines.items():
        out.append(f"{k}={_fmt(v) if isinstance(v, float) else v}")
    Path(path).write_text("\n".join(out) + "\n")


def run_scenario(config: ScenarioConfig, out_dir) -> ScenarioResult:
    """Run ``config`` writing observables.csv, snapshots, frames and report.txt.

    Files are flushed as the run goes, so a divergence leaves everything up
    to the failing step on disk before the error propagates.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    o = config.observe
    with open(out / "observables.csv", "w", newline="\n") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")

        def on_sample(rec):
            fh.write(",".join(str(rec["step"]) if c == "step" else _fmt(rec[c]) for c in CSV_COLUMNS) + "\n")

        def on_snapshot(f):
            tag = f"{f.step_index:08d}"
            write_snapshot(f, out / f"density_{tag}.f64")
            if f.grid.dims >= 2:
                write_frame(slice2d(f, o.slice_plane, o.slice_index), out / f"frame_{tag}.pgm")

        result = simulate(config, on_sample, on_snapshot)
    write_report(result, out / "report.txt")
    return result
