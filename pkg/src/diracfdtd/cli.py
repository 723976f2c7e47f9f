"""Command line entry point.

    diracfdtd run <config> [--out DIR]
    diracfdtd validate <config>
    diracfdtd oracle rt --E <v> --eV <v> [--mass M] [--branch B]
    diracfdtd version

Exit codes: 0 success, 1 config error, 2 divergence, 3 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .config import ConfigError, load_config
from .oracle import OracleError, planewave_step_rt
from .potentials import PotentialError, classify
from .runner import build_packet, build_profile, run_scenario
from .stepper import DivergenceError, StabilityError
from .wavepacket import PacketError

EXIT_OK, EXIT_CONFIG, EXIT_DIVERGENCE, EXIT_IO = 0, 1, 2, 3

CONFIG_ERRORS = (ConfigError, PotentialError, PacketError, StabilityError)


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="diracfdtd", description=__doc__.split("\n\n")[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario file")
    run.add_argument("config")
    run.add_argument("--out", help="output directory (default: <config stem>_out)")

    val = sub.add_parser("validate", help="parse and check a scenario file")
    val.add_argument("config")

    orc = sub.add_parser("oracle", help="analytic reference values")
    osub = orc.add_subparsers(dest="oracle_command", required=True)
    rt = osub.add_parser("rt", help="plane-wave step reflection/transmission (internal units)")
    rt.add_argument("--E", type=float, required=True, help="total energy")
    rt.add_argument("--eV", type=float, required=True, help="step height eA0")
    rt.add_argument("--mass", type=float, default=1.0)
    rt.add_argument("--branch", choices=("group_velocity", "momentum_sign"), default="group_velocity")

    sub.add_parser("version")
    return ap


def _load(path):
    try:
        return load_config(path)
    except OSError as e:
        raise _IOFailure(str(e)) from e


class _IOFailure(Exception):
    pass


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "version":
            print(f"diracfdtd {__version__}")
            return EXIT_OK
        if args.command == "oracle":
            R, T = planewave_step_rt(args.E, eV=args.eV, mass=args.mass, branch=args.branch)
            print(f"R={R!r}\nT={T!r}")
            return EXIT_OK
        cfg = _load(args.config)
        if args.command == "validate":
            grid = cfg.make_grid()
            profile = build_profile(cfg, grid)
            packet = build_packet(cfg, grid)
            print(f"ok: {cfg.name} ({grid.dims}D, {grid.cell_count} cells, E={packet.energy:.6g})")
            if cfg.potential.kind != "none":
                print(classify(profile.peak, packet.energy))
            return EXIT_OK
        out = Path(args.out) if args.out else Path(args.config).with_name(Path(args.config).stem + "_out")
        result = run_scenario(cfg, out)
        if result.rt is not None:
            print(f"R={result.rt.R:.6g} T={result.rt.T:.6g} converged={result.rt.converged}")
        print(f"wrote {out}")
        return EXIT_OK
    except CONFIG_ERRORS as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OracleError as e:
        print(f"oracle error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except DivergenceError as e:
        print(f"divergence: {e}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except (_IOFailure, OSError) as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
