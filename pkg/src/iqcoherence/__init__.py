"""Coherence, IQ coherence and entanglement measures on finite-dimensional
states, with seeded verification suites for their distribution laws."""

from .coherence import (
    Bipartition,
    MeasureReport,
    c_a,
    c_a_reg,
    c_f,
    c_l1,
    c_max,
    c_r,
    c_w,
    ca_iq,
    cf_iq,
    cl1_iq,
    cmax_iq,
    cmin_iq,
    compute,
    cr_iq,
    q_l1,
    roc,
)
from .convexroof import RoofConfig, grid_oracle_rank2, maximize_roof, minimize_roof
from .entanglement import conditional_entropy, e_a, e_f, purity_gap
from .states import QuantumState, bell_phi_plus, psi_plus, rho_lambda, schmidt_pure

__all__ = [
    "Bipartition", "MeasureReport", "QuantumState", "RoofConfig",
    "c_a", "c_a_reg", "c_f", "c_l1", "c_max", "c_r", "c_w", "roc",
    "ca_iq", "cf_iq", "cl1_iq", "cmax_iq", "cmin_iq", "cr_iq", "q_l1", "compute",
    "conditional_entropy", "e_a", "e_f", "purity_gap",
    "grid_oracle_rank2", "maximize_roof", "minimize_roof",
    "bell_phi_plus", "psi_plus", "rho_lambda", "schmidt_pure",
]
