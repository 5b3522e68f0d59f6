"""The encryption scheme and its interactive client/server protocol."""

from .circuit import LogicalCircuit, ideal_output
from .messages import (Ack, ClassicalMessage, CorrectionInstruction, MeasurementReport, ProtocolError,
                       SyndromeReport, TGateCount)
from .parties import InProcessLink, QheClient, QheServer, client_interpret_and_correct
from .scheme import (SWAP_CONSTANT, CipherBlock, KeyMismatch, PermutationKey, apply_transversal, decrypt,
                     decrypt_many, depolarize_block, encrypt, keygen, magic_state, random_pure_state)
from .session import SessionConfig, SessionResult, run_session

__all__ = [
    "Ack", "ClassicalMessage", "CorrectionInstruction", "MeasurementReport", "ProtocolError", "SyndromeReport",
    "TGateCount", "LogicalCircuit", "ideal_output", "InProcessLink", "QheClient", "QheServer",
    "client_interpret_and_correct", "SWAP_CONSTANT", "CipherBlock", "KeyMismatch", "PermutationKey",
    "apply_transversal", "decrypt", "decrypt_many", "depolarize_block", "encrypt", "keygen", "magic_state",
    "random_pure_state", "SessionConfig", "SessionResult", "run_session",
]
