from importlib import resources

import pytest

from diracfdtd.config import ConfigError, load_config, parse_config, serialize_config

MINIMAL = """
# free 1D packet
grid.dims = 1
grid.n = 512
grid.dx = 0.05
packet.p_mev_c = 0.5, 0, 0
packet.x0_m = 1e-12
potential.kind = none
"""


def test_minimal_config_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.stepper.courant == 0.4
    assert cfg.stepper.boundary == "reflecting"
    assert cfg.observe.forward_filter is True
    g = cfg.make_grid()
    assert g.n == (512,)
    assert abs(sum(g.extent(0))) < 1e-12


def test_x0_unresolvable():
    with pytest.raises(ConfigError, match="x0 unresolvable") as e:
        parse_config(MINIMAL.replace("x0_m = 1e-12", "x0_m = 1.93e-14"))
    assert e.value.line == 7


@pytest.mark.parametrize("bad, line, msg", [
    ("grid.colour = red", 1, "unknown key"),
    ("mesh.dims = 1", 1, "unknown section"),
    ("grid.dims 1", 1, "expected"),
    ("stepper.boundary = open", 1, "must be one of"),
    ("grid.dx = abc", 1, "cannot parse"),
    ("observe.forward_filter = yes", 1, "true or false"),
    ("grid.n = 8.5", 1, "integer"),
])
def test_syntax_errors_carry_line(bad, line, msg):
    with pytest.raises(ConfigError, match=msg) as e:
        parse_config(bad + "\n" + MINIMAL)
    assert e.value.line == line


def test_duplicate_key():
    with pytest.raises(ConfigError, match="duplicate"):
        parse_config(MINIMAL + "grid.dx = 0.01\n")


def test_edge_outside_grid():
    text = MINIMAL.replace("potential.kind = none", "potential.kind = step\npotential.height_volts = 1e6\npotential.edge = 50")
    with pytest.raises(ConfigError, match="outside") as e:
        parse_config(text)
    assert e.value.line == 10


def test_ramp_continuity_checked():
    text = MINIMAL.replace("potential.kind = none", """potential.kind = ramp
potential.height_volts = 25e6
potential.ramp_width_m = 5e-13
potential.field_volts_per_m = -4e19""")
    with pytest.raises(ConfigError, match="discontinuous"):
        parse_config(text)


def test_courant_bound():
    with pytest.raises(ConfigError, match="courant"):
        parse_config(MINIMAL + "stepper.courant = 1.5\n")


def _scenarios():
    return sorted(p for p in resources.files("diracfdtd").joinpath("scenarios").iterdir() if p.name.endswith(".cfg"))


@pytest.mark.parametrize("path", _scenarios(), ids=lambda p: p.name)
def test_shipped_scenarios_round_trip(path):
    cfg = load_config(path)
    again = parse_config(serialize_config(cfg), name=cfg.name)
    assert again == cfg
    assert cfg.stepper.n_steps >= 2000


def test_repulsive_scenario_is_supercritical(caplog):
    from diracfdtd.runner import build_packet, build_profile
    from diracfdtd.potentials import classify

    cfg = load_config(resources.files("diracfdtd") / "scenarios" / "klein_step_repulsive.cfg")
    g = cfg.make_grid()
    rep = classify(build_profile(cfg, g).peak, build_packet(cfg, g).energy)
    assert rep.regime == "supercritical"
    assert abs(rep.eV - 48.92) < 0.01
