"""Exact Bose-Hubbard dynamics against the Gutzwiller mean-field equation."""

from .diagnostics import compare_run, d_sweep, moment_bound_report
from .errors import ConfigError, NumericalError, ResourceError
from .fock import FockCutoff, build_ladder, fock_state
from .lattice import Lattice
from .manybody import ModelParams, build_hamiltonian, evolve_dense, evolve_exact, expectation, product_state
from .meanfield import evolve_mf, mf_energy, order_parameter, truncation_refine
from .reduced import reduce_one_site, reduce_two_site, trace_norm_distance

__all__ = [
    "ConfigError", "FockCutoff", "Lattice", "ModelParams", "NumericalError", "ResourceError",
    "build_hamiltonian", "build_ladder", "compare_run", "d_sweep", "evolve_dense", "evolve_exact",
    "evolve_mf", "expectation", "fock_state", "mf_energy", "moment_bound_report", "order_parameter",
    "product_state", "reduce_one_site", "reduce_two_site", "trace_norm_distance", "truncation_refine",
]
