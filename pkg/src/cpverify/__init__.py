"""Bounded program verification by symbolic execution over constraint stores."""
from .executor import ExploreOptions, ResourceError, VerificationReport, explore
from .interp import brute_force_verify, concrete_interpret
from .parser import parse_file, parse_program, substitute_params
from .programs import corpus

__version__ = "0.1.0"

__all__ = [
    "ExploreOptions", "ResourceError", "VerificationReport", "brute_force_verify",
    "concrete_interpret", "corpus", "explore", "parse_file", "parse_program",
    "substitute_params",
]
