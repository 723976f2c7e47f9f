"""Line-oriented scenario files.

Grammar: UTF-8 lines of ``section.key = value``; ``#`` starts a comment;
lists are comma separated; booleans are ``true``/``false``; enum values are
lower case.  Unknown keys are rejected.

Grid geometry and packet centre are in internal units; the packet momentum,
width and the potential parameters use laboratory units (MeV/c, metres,
volts, volts per metre) exactly as they are usually quoted.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field, fields
from typing import Any

from .lattice import Grid, GridError, UnitsSystem, make_grid
from .stepper import StepperConfig, stability_limit

__all__ = [
    "ConfigError",
    "ScenarioConfig",
    "GridBlock",
    "UnitsBlock",
    "PacketBlock",
    "PotentialBlock",
    "StepperBlock",
    "ObserveBlock",
    "parse_config",
    "load_config",
    "serialize_config",
]


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


@dataclass
class GridBlock:
    dims: int = 1
    n: tuple[int, ...] = (4096,)
    dx: float = 0.01
    origin: tuple[float, ...] | None = None  # default centres the grid on 0


@dataclass
class UnitsBlock:
    rest_energy_mev: float = 0.51099895000
    length_unit_m: float = 3.8615926796e-13


@dataclass
class PacketBlock:
    p_mev_c: tuple[float, float, float] = (0.0, 0.0, 0.0)
    x0_m: float = 1e-13
    spin: str = "up"
    center: tuple[float, ...] | None = None  # default: one third into the x-range


@dataclass
class PotentialBlock:
    kind: str = "none"
    height_volts: float = 0.0
    edge: float = 0.0
    ramp_width_m: float = 0.0
    field_volts_per_m: float = 0.0


@dataclass
class StepperBlock:
    courant: float = 0.4
    boundary: str = "reflecting"
    damping_width: int = 16
    damping_strength: float = 0.05
    n_steps: int = 2000
    diagonal: str = "cayley"


@dataclass
class ObserveBlock:
    sample_every: int = 10
    plane_x: float | None = None  # default: the potential edge
    forward_filter: bool = True
    filter_time: float | None = None  # None = automatic
    snapshot_every: int = 0
    slice_plane: str = "xz"
    slice_index: int | None = None


SECTIONS = {
    "grid": GridBlock,
    "units": UnitsBlock,
    "packet": PacketBlock,
    "potential": PotentialBlock,
    "stepper": StepperBlock,
    "observe": ObserveBlock,
}

ENUMS = {
    ("packet", "spin"): ("up", "down"),
    ("potential", "kind"): ("none", "step", "ramp"),
    ("stepper", "boundary"): ("reflecting", "damping", "periodic"),
    ("stepper", "diagonal"): ("cayley", "exp"),
    ("observe", "slice_plane"): ("xy", "xz", "yz"),
}

# keys that accept the literal "auto" for their None default
AUTO_KEYS = {("grid", "origin"), ("packet", "center"), ("observe", "plane_x"),
             ("observe", "filter_time"), ("observe", "slice_index")}


@dataclass
class ScenarioConfig:
    name: str = "scenario"
    grid: GridBlock = field(default_factory=GridBlock)
    units: UnitsBlock = field(default_factory=UnitsBlock)
    packet: PacketBlock = field(default_factory=PacketBlock)
    potential: PotentialBlock = field(default_factory=PotentialBlock)
    stepper: StepperBlock = field(default_factory=StepperBlock)
    observe: ObserveBlock = field(default_factory=ObserveBlock)

    # derived objects --------------------------------------------------

    def units_system(self) -> UnitsSystem:
        return UnitsSystem(self.units.rest_energy_mev, self.units.length_unit_m)

    def make_grid(self) -> Grid:
        g = self.grid
        origin = g.origin
        if origin is None:
            origin = tuple(-0.5 * g.dx * (k - 1) for k in g.n)
        return make_grid(g.dims, g.n, g.dx, origin)

    def stepper_config(self, grid: Grid | None = None) -> StepperConfig:
        grid = grid or self.make_grid()
        s = self.stepper
        return StepperConfig.for_grid(grid, s.courant, boundary=s.boundary, damping_width=s.damping_width,
                                      damping_strength=s.damping_strength, diagonal=s.diagonal)

    def with_updates(self, **sections) -> "ScenarioConfig":
        """Copy with some keys replaced: ``with_updates(potential={"height_volts": 5e7})``."""
        new = dataclasses.replace(self)
        for sec, kv in sections.items():
            if sec == "name":
                new.name = kv
                continue
            setattr(new, sec, dataclasses.replace(getattr(self, sec), **kv))
        return new


def _parse_scalar(text: str, typ, line: int, key: str):
    text = text.strip()
    try:
        if typ is bool:
            if text not in ("true", "false"):
                raise ValueError("expected true or false")
            return text == "true"
        if typ is int:
            v = float(text)
            if v != int(v):
                raise ValueError("expected an integer")
            return int(v)
        if typ is float:
            v = float(text)
            if not math.isfinite(v):
                raise ValueError("value must be finite")
            return v
        return text
    except ValueError as e:
        raise ConfigError(f"{key}: cannot parse {text!r} ({e})", line) from None


def _field_kind(section: str, key: str):
    """(base type, is_tuple) for a config key."""
    block = SECTIONS[section]
    f = {f.name: f for f in fields(block)}[key]
    t = str(f.type)
    is_tuple = "tuple" in t
    base = int if "int" in t and "float" not in t else float if "float" in t else bool if "bool" in t else str
    return base, is_tuple


def parse_config(text: str, name: str = "scenario") -> ScenarioConfig:
    """Parse and validate a scenario; raises :class:`ConfigError` with the line number."""
    cfg = ScenarioConfig(name=name)
    seen: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'section.key = value', got {raw.strip()!r}", lineno)
        lhs, rhs = (s.strip() for s in line.split("=", 1))
        if lhs == "name":
            cfg.name = rhs
            continue
        if "." not in lhs:
            raise ConfigError(f"key {lhs!r} needs a section prefix", lineno)
        section, key = lhs.split(".", 1)
        if section not in SECTIONS:
            raise ConfigError(f"unknown section {section!r}", lineno)
        block = getattr(cfg, section)
        if key not in {f.name for f in fields(block)}:
            raise ConfigError(f"unknown key {lhs!r}", lineno)
        if lhs in seen:
            raise ConfigError(f"duplicate key {lhs!r} (first on line {seen[lhs]})", lineno)
        seen[lhs] = lineno
        if (section, key) in AUTO_KEYS and rhs == "auto":
            setattr(block, key, None)
            continue
        base, is_tuple = _field_kind(section, key)
        if is_tuple:
            value = tuple(_parse_scalar(v, base, lineno, lhs) for v in rhs.split(","))
        else:
            value = _parse_scalar(rhs, base, lineno, lhs)
        allowed = ENUMS.get((section, key))
        if allowed and value not in allowed:
            raise ConfigError(f"{lhs} must be one of {'|'.join(allowed)}, got {value!r}", lineno)
        setattr(block, key, value)
    validate(cfg, seen)
    return cfg


def load_config(path) -> ScenarioConfig:
    from pathlib import Path

    path = Path(path)
    return parse_config(path.read_text(encoding="utf-8"), name=path.stem)


def validate(cfg: ScenarioConfig, lines: dict[str, int] | None = None) -> None:
    """Re-check every cross-field constraint; errors carry the offending line."""
    lines = lines or {}

    def fail(msg, key):
        raise ConfigError(msg, lines.get(key))

    g = cfg.grid
    if g.dims not in (1, 2, 3):
        fail("grid.dims must be 1, 2 or 3", "grid.dims")
    if len(g.n) != g.dims:
        fail(f"grid.n needs {g.dims} entries", "grid.n")
    if g.origin is not None and len(g.origin) != g.dims:
        fail(f"grid.origin needs {g.dims} entries", "grid.origin")
    try:
        grid = cfg.make_grid()
        units = cfg.units_system()
    except (GridError, ValueError) as e:
        fail(str(e), "grid.n")
    if len(cfg.packet.p_mev_c) != 3:
        fail("packet.p_mev_c needs three components", "packet.p_mev_c")
    x0 = units.to_internal(cfg.packet.x0_m, "length_m")
    if not x0 > 0:
        fail("packet.x0_m must be positive", "packet.x0_m")
    if x0 < 2 * grid.dx:
        fail(f"x0 unresolvable: {x0:.4g} internal < 2*dx = {2 * grid.dx:.4g}", "packet.x0_m")
    if cfg.packet.center is not None and len(cfg.packet.center) != g.dims:
        fail(f"packet.center needs {g.dims} entries", "packet.center")
    s = cfg.stepper
    if not 0 < s.courant < 1:
        fail("stepper.courant must lie in (0, 1)", "stepper.courant")
    if s.n_steps < 0:
        fail("stepper.n_steps must be >= 0", "stepper.n_steps")
    if s.damping_width < 0 or not 0 <= s.damping_strength < 1:
        fail("bad damping layer", "stepper.damping_width")
    dt = s.courant * stability_limit(grid)
    if dt > stability_limit(grid):
        fail("dt above stability limit", "stepper.courant")
    lo, hi = grid.extent(0)
    pot = cfg.potential
    if pot.kind in ("step", "ramp") and not lo < pot.edge < hi:
        fail(f"potential.edge={pot.edge} outside the grid x-range ({lo:.4g}, {hi:.4g})", "potential.edge")
    if pot.kind == "ramp":
        width = units.to_internal(pot.ramp_width_m, "length_m")
        if not width > 0:
            fail("potential.ramp_width_m must be positive", "potential.ramp_width_m")
        if not pot.edge + width < hi:
            fail("ramp end lies outside the grid", "potential.ramp_width_m")
        end = -pot.field_volts_per_m * pot.ramp_width_m
        if abs(end - pot.height_volts) > 1e-9 * max(abs(end), abs(pot.height_volts), 1e-300):
            fail(f"ramp is discontinuous: -field*width = {end:.6g} V but height = {pot.height_volts:.6g} V",
                 "potential.field_volts_per_m")
    o = cfg.observe
    if o.sample_every < 1:
        fail("observe.sample_every must be >= 1", "observe.sample_every")
    if o.snapshot_every < 0:
        fail("observe.snapshot_every must be >= 0", "observe.snapshot_every")
    if o.plane_x is not None and not lo <= o.plane_x <= hi:
        fail("observe.plane_x outside the grid", "observe.plane_x")


def _format(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ", ".join(_format(x) for x in v)
    return str(v)


def serialize_config(cfg: ScenarioConfig) -> str:
    out = [f"name = {cfg.name}"]
    for section in SECTIONS:
        block = getattr(cfg, section)
        for f in fields(block):
            v = getattr(block, f.name)
            out.append(f"{section}.{f.name} = {'auto' if v is None else _format(v)}")
    return "\n".join(out) + "\n"
