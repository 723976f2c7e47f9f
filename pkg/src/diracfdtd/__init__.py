"""FDTD leapfrog solver for the time-dependent Dirac equation in scalar potentials."""

__version__ = "0.1.0"

from .lattice import (DEFAULT_UNITS, Grid, GridError, MemoryBudgetError, SpinorField,
                      UnitsSystem, cell_coordinate, from_internal, make_grid, to_internal)
from .potentials import (CriticalityReport, PotentialProfile, RampPotentialSpec,
                         StepPotentialSpec, classify, sample_ramp, sample_step, zero_profile)
from .stepper import (DIRAC, DivergenceError, Leapfrog, StepperConfig, apply_boundary, run,
                      stability_limit, step)
from .observables import (RTReport, centroid, density, find_cut, forward_filter,
                          half_space_norms, rt_coefficients, slice2d, total_norm, width,
                          x_marginal)
from .wavepacket import PacketSpec, energy_of, forward_fraction, init_packet, packet_spinor
