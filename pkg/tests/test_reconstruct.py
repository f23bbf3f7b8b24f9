"""Rewriting grammar-free solutions into a target grammar."""
import time

import pytest
from hypothesis import assume, given, settings

from sygus_forge.core import INT, App, IntLit, Lambda, Limits, ResourceOut, Var, normalize
from sygus_forge.engine import embedding_for
from sygus_forge.frontend import parse, parse_term
from sygus_forge.grammar import conforms
from sygus_forge.reconstruct import ReconState, rcon, reconstruct_solution

from oracles import grid, np_eval, points_cols
from strategies import int_terms
from test_frontend import MAX2

ENV = {"x1": INT, "x2": INT}
SUMS = parse("(set-logic LIA)\n(synth-fun f ((x1 Int) (x2 Int)) Int ((S Int (x1 x2 (+ S S)))))\n"
             "(check-synth)\n")
E_SUMS = embedding_for(SUMS)
MAX2_P = parse(MAX2)
E_MAX2 = embedding_for(MAX2_P)
PTS = grid(2, -16, 16)
COLS = points_cols(["x1", "x2"], PTS)


def nf(text: str):
    return normalize(parse_term(text, ENV))


def equivalent(a, b) -> bool:
    return bool((np_eval(a, COLS) == np_eval(b, COLS)).all())


def test_parameter_needs_no_obligations():
    assert rcon(Var("x1"), E_SUMS.start, ReconState(E_SUMS)) == (Var("x1"), frozenset())


def test_doubling_is_reported_as_obligation():
    t = nf("(+ x1 (* 2 x2))")
    s, u = rcon(t, E_SUMS.start, ReconState(E_SUMS))
    assert u == frozenset({(nf("(* 2 x2)"), E_SUMS.start)})
    assert normalize(s) == t


def test_known_program_discharges_obligation():
    state = ReconState(E_SUMS)
    state.add(nf("(* 2 x2)"), parse_term("(+ x2 x2)", ENV), E_SUMS.start)
    assert rcon(nf("(* 2 x2)"), E_SUMS.start, state) == (parse_term("(+ x2 x2)", ENV), frozenset())
    s, u = rcon(nf("(+ x1 (* 2 x2))"), E_SUMS.start, state)
    assert u == frozenset() and s == parse_term("(+ x1 (+ x2 x2))", ENV)


def test_sum_with_doubling_is_rebuilt_quickly():
    fn = Lambda(SUMS.target.params, nf("(+ x1 (* 2 x2))"))
    start = time.perf_counter()
    out, program = reconstruct_solution(fn, E_SUMS, Limits(timeout=5), with_program=True)
    assert time.perf_counter() - start < 5
    assert out.body == parse_term("(+ x1 (+ x2 x2))", ENV)
    assert conforms(out.body, E_SUMS, E_SUMS.start) == program


def test_max_is_rebuilt_as_ite():
    fn = Lambda(MAX2_P.target.params, parse_term("(ite (>= x2 x1) x2 x1)", ENV))
    out = reconstruct_solution(fn, E_MAX2)
    assert out.body.op == "ite"
    assert conforms(out.body, E_MAX2, E_MAX2.start) is not None
    assert equivalent(out.body, fn.body)


def test_negative_constant_is_rebuilt_by_subtraction():
    p = parse("(set-logic LIA)\n(synth-fun f ((y Int)) Int ((S Int (y 1 (- S S)))))\n(check-synth)\n")
    out = reconstruct_solution(Lambda(p.target.params, parse_term("(- y 1)", {"y": INT})), embedding_for(p))
    assert out.body == App("-", (Var("y"), IntLit(1)))


def test_inexpressible_term_runs_out():
    p = parse("(set-logic LIA)\n(synth-fun f ((x Int)) Int ((S Int (0 1))))\n(check-synth)\n")
    with pytest.raises(ResourceOut):
        reconstruct_solution(Lambda(p.target.params, Var("x")), embedding_for(p))


def test_enumeration_budget_is_resource_out():
    fn = Lambda(SUMS.target.params, nf("(+ (* 7 x1) (* 5 x2))"))
    with pytest.raises(ResourceOut):
        reconstruct_solution(fn, E_SUMS, Limits(enum_values=0))


@given(int_terms(names=("x1", "x2"), depth=2))
@settings(max_examples=120, deadline=None)
def test_reconstruction_is_equivalent_and_conforms(t):
    fn = Lambda(MAX2_P.target.params, t)
    try:
        out, program = reconstruct_solution(fn, E_MAX2, Limits(timeout=10), with_program=True)
    except ResourceOut:
        assume(False)
    assert conforms(out.body, E_MAX2, E_MAX2.start) == program
    assert equivalent(out.body, t)
