"""Sparse Fourier recovery of off-grid tones in d dimensions from black-box samples."""
from .errors import GridTooLarge, InfeasibleInstance, InfeasibleParameters, InvalidArgument
from .hashing import HashDraw, draw_hash
from .model import AlgorithmParams, SignalOracle, SignalSpec, Tone, derive_params, random_spec
from .oracle_eval import MatchReport, match_score, sweep
from .pipeline import RecoveryResult, desk_params, recover_all

__all__ = [
    "AlgorithmParams", "GridTooLarge", "HashDraw", "InfeasibleInstance", "InfeasibleParameters",
    "InvalidArgument", "MatchReport", "RecoveryResult", "SignalOracle", "SignalSpec", "Tone",
    "derive_params", "desk_params", "draw_hash", "match_score", "random_spec", "recover_all", "sweep",
]
__version__ = "0.1.0"
