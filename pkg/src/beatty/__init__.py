"""Beatty sequences, generalized polynomials and recovery of their parameters."""

from .errors import BeattyError, RecoveryError
from .genpoly import ClassicalPoly, eval_many, evaluate, parse, to_string
from .reals import (
    CertifiedInterval,
    LinearFloor,
    RealExpr,
    floor_certified,
    floor_exact,
    parse_real,
    rational,
    snap_to_rational,
    sqrt,
)
from .result import Estimate, RecoveryResult
from .seqgen import (
    FloorWord,
    IntegerSequence,
    ParameterVector,
    eval_T_word,
    gen_linear_sum,
    gen_nested,
    gen_poly_of_floors,
)

__all__ = [
    "BeattyError",
    "CertifiedInterval",
    "ClassicalPoly",
    "Estimate",
    "FloorWord",
    "IntegerSequence",
    "LinearFloor",
    "ParameterVector",
    "RealExpr",
    "RecoveryError",
    "RecoveryResult",
    "eval_T_word",
    "eval_many",
    "evaluate",
    "floor_certified",
    "floor_exact",
    "gen_linear_sum",
    "gen_nested",
    "gen_poly_of_floors",
    "parse",
    "parse_real",
    "rational",
    "snap_to_rational",
    "sqrt",
    "to_string",
]
