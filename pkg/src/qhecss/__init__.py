"""Quantum homomorphic encryption over self-dual, doubly even CSS codes.

Messages are encoded with a CSS code and each code qubit is hidden at a
secret slot among maximally mixed qubits.  Clifford gates act transversally;
T gates and error correction need one classical round trip each.
"""

from __future__ import annotations

from .css_code import (CssCode, Syndrome, ValidationReport, decode_logical_z_readout, decode_syndrome, get_code,
                       identity_code, steane_code, syndrome_of, validate_css_properties)
from .noise import (NoiseConfig, NoiseReport, end_to_end_noise_experiment, logical_error_probability,
                    mc_uncorrectable_rate)
from .pauli import PauliString
from .protocol import (LogicalCircuit, PermutationKey, QheClient, QheServer, SessionConfig, apply_transversal,
                       decrypt, encrypt, keygen, run_session)
from .reports import emit_report
from .security import (DeltaReport, RegionReport, brute_force_eve_distance, delta_bound, delta_previous,
                       delta_proposed, eve_state, region_fraction, threshold_n)
from .state_sim import GateOp, QuantumRegister, densify, fidelity, init_register

__version__ = "0.1.0"

__all__ = [
    "CssCode", "Syndrome", "ValidationReport", "decode_logical_z_readout", "decode_syndrome", "get_code",
    "identity_code", "steane_code", "syndrome_of", "validate_css_properties",
    "NoiseConfig", "NoiseReport", "end_to_end_noise_experiment", "logical_error_probability",
    "mc_uncorrectable_rate", "PauliString",
    "LogicalCircuit", "PermutationKey", "QheClient", "QheServer", "SessionConfig", "apply_transversal",
    "decrypt", "encrypt", "keygen", "run_session", "emit_report",
    "DeltaReport", "RegionReport", "brute_force_eve_distance", "delta_bound", "delta_previous",
    "delta_proposed", "eve_state", "region_fraction", "threshold_n",
    "GateOp", "QuantumRegister", "densify", "fidelity", "init_register",
]
