"""Syntax-guided synthesis over linear integer arithmetic and Booleans.

Two strategies are provided: refutation-based synthesis with quantifier
instantiation for single-invocation problems, and enumerative
counterexample-guided synthesis for everything else, together with
reconstruction of grammar-free solutions into the grammar.
"""
from .core import Lambda, Limits, ResourceOut, SynthError
from .engine import NoSolution, Solution, solve
from .frontend import SygusSyntaxError, UnsupportedFeature, parse, print_solution
from .theory import check_sat, find_counterexample

__all__ = [
    "Lambda",
    "Limits",
    "NoSolution",
    "ResourceOut",
    "Solution",
    "SygusSyntaxError",
    "SynthError",
    "UnsupportedFeature",
    "check_sat",
    "find_counterexample",
    "parse",
    "print_solution",
    "solve",
]
