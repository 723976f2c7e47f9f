"""Run a shipped scenario and write its files.

The subcritical repulsive step is run with snapshots every 400 steps.
The output directory receives observables.csv, density snapshots with
JSON sidecars, PGM frames of the x-z plane and report.txt.
"""

import sys
from importlib import resources
from pathlib import Path

from diracfdtd.config import load_config
from diracfdtd.runner import run_scenario

name = sys.argv[1] if len(sys.argv) > 1 else "subcritical_repulsive_5mv"
out = Path(sys.argv[2] if len(sys.argv) > 2 else f"{name}_out")
cfg = load_config(resources.files("diracfdtd") / "scenarios" / f"{name}.cfg")
result = run_scenario(cfg, out)
print(f"{name}: R = {result.rt.R:.4f}, T = {result.rt.T:.4f}, converged = {result.rt.converged}")
print(f"criticality: {result.criticality}")
print("files:", ", ".join(sorted(p.name for p in out.iterdir())[:8]), "...")
