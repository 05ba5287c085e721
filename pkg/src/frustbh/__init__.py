"""Exact diagonalization of the 1D Bose-Hubbard chain with frustrated NNN hopping."""

from .config import ConfigError, SweepConfig, load_config, parse_config
from .correlators import (
    CorrelatorReport,
    chiral_average,
    chiral_correlator,
    chiral_local,
    dimer_average,
    dimer_correlator,
    dimer_local_xy,
    dimer_local_zz,
)
from .dimer_oracle import dimer_average_closed, perfect_dimer_state
from .eigensolver import (
    ConvergenceError,
    GroundState,
    dense_ground_state,
    ground_state,
    resolve_momentum_sector,
)
from .entanglement import Bipartition, ggm, half_chain_entropy, lambda_max_sq, schmidt_spectrum
from .fock import FockBasis, FockError, enumerate_basis
from .hamiltonian import CouplingParams, SparseOperator, build_hamiltonian
from .momentum import MomentumProfile, momentum_profile, qmax_free
from .state import State
from .sweep import SweepResultRecord, emit_plot_data, run_point, run_sweep

__version__ = "0.1.0"

__all__ = [
    "Bipartition", "ConfigError", "ConvergenceError", "CorrelatorReport", "CouplingParams",
    "FockBasis", "FockError", "GroundState", "MomentumProfile", "SparseOperator", "State",
    "SweepConfig", "SweepResultRecord", "build_hamiltonian", "chiral_average",
    "chiral_correlator", "chiral_local", "dense_ground_state", "dimer_average",
    "dimer_average_closed", "dimer_correlator", "dimer_local_xy", "dimer_local_zz",
    "emit_plot_data", "enumerate_basis", "ggm", "ground_state", "half_chain_entropy",
    "lambda_max_sq", "load_config", "momentum_profile", "parse_config", "perfect_dimer_state",
    "qmax_free", "resolve_momentum_sector", "run_point", "run_sweep", "schmidt_spectrum",
]
