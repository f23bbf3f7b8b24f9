"""Satisfiability of ground linear Int/Bool formulas, with checked models."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from ..core import (
    BOOL,
    INT,
    Lambda,
    Limits,
    NonlinearTerm,
    ResourceOut,
    Sort,
    SynthError,
    Term,
    eval_ground,
    free_vars,
    inline_calls,
    negate,
)
from .dpll import solve_clauses
from .encode import encode

__all__ = ["GroundQuery", "check_sat", "find_counterexample", "NonlinearTerm", "ResourceOut"]


@dataclass(frozen=True)
class GroundQuery:
    assertions: tuple[Term, ...]
    env: Mapping[str, Sort] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "assertions", tuple(self.assertions))
        object.__setattr__(self, "env", dict(self.env))
        stray = set().union(*(free_vars(a) for a in self.assertions)) - set(self.env)
        if stray:
            raise SynthError(f"query mentions undeclared constants {sorted(stray)}")


def _holds(assertions: Sequence[Term], model: Mapping[str, object]) -> bool:
    return all(eval_ground(a, model) is True for a in assertions)


def _minimize(assertions: Sequence[Term], model: dict, names: list[str]) -> dict:
    """Move each Int value toward 0 while every assertion still holds."""
    for n in names:
        v = model[n]
        if v == 0:
            continue
        trial = dict(model)
        trial[n] = 0
        if _holds(assertions, trial):
            model = trial
            continue
        # smallest magnitude that still works, by bisection over |v|
        sign = 1 if v > 0 else -1
        lo, hi = 0, abs(v)  # lo fails, hi works
        while hi - lo > 1:
            mid = (lo + hi) // 2
            trial[n] = sign * mid
            if _holds(assertions, trial):
                hi = mid
            else:
                lo = mid
        model = dict(model)
        model[n] = sign * hi
    return model


def check_sat(
    assertions: Sequence[Term] | GroundQuery,
    env: Mapping[str, Sort] | None = None,
    limits: Limits | None = None,
) -> dict | None:
    """A total model of the assertions over `env`, or None if unsatisfiable.

    Raises NonlinearTerm on nonlinear input and ResourceOut when the
    branch-and-bound budget or a deadline in `limits` runs out.
    """
    if isinstance(assertions, GroundQuery):
        q = assertions
    else:
        q = GroundQuery(tuple(assertions), env or {})
    for a in q.assertions:
        if a.sort != BOOL:
            raise SynthError(f"assertion is not Bool: {a}")
    cs = encode(q.assertions)
    int_names = sorted(n for n, s in q.env.items() if s == INT)
    found = solve_clauses(cs, int_names, limits)
    if found is None:
        return None
    ints, bools = found
    model: dict = {}
    for n, s in sorted(q.env.items()):
        model[n] = ints.get(n, 0) if s == INT else bools.get(n, False)
    if not _holds(q.assertions, model):
        raise SynthError("internal error: model fails to satisfy the query")
    return _minimize(q.assertions, model, int_names)


def find_counterexample(candidate: Lambda, problem, limits: Limits | None = None) -> dict | None:
    """Inputs on which `candidate` violates the specification, or None if it is correct."""
    body = inline_calls(problem.spec, problem.target.name, candidate)
    env = dict(problem.universals)
    model = check_sat([negate(body)], env, limits)
    if model is None:
        return None
    return {n: model[n] for n, _ in problem.universals}

