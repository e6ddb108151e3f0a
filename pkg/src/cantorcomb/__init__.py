"""Transmission spectra of super-periodic and Cantor-structured Dirac combs."""

__version__ = "0.1.0"

from .geometry import (CdcSpec, SuperPeriodicLayout, critical_rho, delta_positions,
                       layout, segment_length)
from .numerics import (TransferMatrix2, WaveContext, chebyshev_u, delta_transfer_matrix,
                       laue, propagation_phase_shift)
from .oracle import CombRealization, oracle_sub_trace, oracle_transmission
from .spp import (GammaSequence, SppSpec, dirac_comb_transmission, gamma_sequence,
                  reflection, scaling_function, transmission)

__all__ = [
    "CdcSpec", "SuperPeriodicLayout", "critical_rho", "delta_positions", "layout",
    "segment_length", "TransferMatrix2", "WaveContext", "chebyshev_u",
    "delta_transfer_matrix", "laue", "propagation_phase_shift", "CombRealization",
    "oracle_sub_trace", "oracle_transmission", "GammaSequence", "SppSpec",
    "dirac_comb_transmission", "gamma_sequence", "reflection", "scaling_function",
    "transmission",
]
