"""Decision procedure for straight-line string constraints built from replaceall."""

from .model import parse_formula
from .oracle import brute_force_sat
from .regex import parse_regex
from .semantics import replace_all
from .solver import SearchLimits, Verdict, solve, verify_model

__all__ = [
    "SearchLimits",
    "Verdict",
    "brute_force_sat",
    "parse_formula",
    "parse_regex",
    "replace_all",
    "solve",
    "verify_model",
]
