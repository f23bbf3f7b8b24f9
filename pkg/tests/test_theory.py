"""Ground satisfiability: simplex, integer search, clause search, models."""
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sygus_forge.core import BOOL, INT, App, BoolLit, IntLit, Lambda, Limits, ResourceOut, SynthError, Var, eval_ground
from sygus_forge.frontend import parse, parse_term
from sygus_forge.theory import GroundQuery, NonlinearTerm, check_sat, find_counterexample
from sygus_forge.theory.encode import encode, lift_ite
from sygus_forge.theory.simplex import Simplex, integer_solution, solve_equalities

from oracles import box_sat, random_query
from strategies import linear_atom
from test_frontend import MAX2

ENV3 = {"k0": INT, "k1": INT, "k2": INT}
MAX2_P = parse(MAX2)


def q(text, env=None):
    env = env or {"x1": INT, "x2": INT, "y": INT, "a1": INT, "a2": INT, "b": BOOL}
    return parse_term(text, env)


def sat(assertions, env):
    model = check_sat(assertions, env)
    if model is not None:
        assert all(eval_ground(a, model) is True for a in assertions)
        assert set(model) == set(env)
    return model


# -- examples -----------------------------------------------------------------


def test_empty_interval_is_unsat():
    assert sat([q("(>= y 0)"), q("(<= y (- 1))")], {"y": INT}) is None


def test_max2_negated_instances_are_unsat():
    # not Q[a, a1] and not Q[a, a2] for the max2 conjecture with a = (a1, a2)
    def qinst(t):
        return q(f"(and (>= {t} a1) (>= {t} a2) (or (= {t} a1) (= {t} a2)))")

    env = {"a1": INT, "a2": INT}
    assert sat([App("not", (qinst("a1"),)), App("not", (qinst("a2"),))], env) is None


def test_strict_order_is_sat():
    model = sat([q("(> x1 x2)")], {"x1": INT, "x2": INT})
    assert model["x1"] > model["x2"]


def test_query_object_is_accepted():
    assert check_sat(GroundQuery([q("(> x1 x2)")], {"x1": INT, "x2": INT})) is not None


def test_query_rejects_undeclared_constants():
    with pytest.raises(SynthError):
        GroundQuery([q("(> x1 x2)")], {"x1": INT})


def test_nonlinear_query_is_rejected():
    with pytest.raises(NonlinearTerm):
        check_sat([App("=", (App("*", (Var("x1"), Var("x2"))), IntLit(4)))], {"x1": INT, "x2": INT})


def test_non_bool_assertion_is_rejected():
    with pytest.raises(SynthError):
        check_sat([Var("x1")], {"x1": INT})


def test_parity_has_no_integer_solution():
    # 2x = 5 is rationally feasible but has no integer solution
    assert sat([q("(= (* 2 x1) 5)")], {"x1": INT}) is None


def test_diophantine_system_without_solution():
    env = {"x1": INT, "x2": INT}
    assert sat([q("(= (+ (* 2 x1) (* 4 x2)) 7)")], env) is None
    model = sat([q("(= (+ (* 3 x1) (* 5 x2)) 7)")], env)
    assert 3 * model["x1"] + 5 * model["x2"] == 7


def test_thin_polytope_without_lattice_points():
    # 1 <= 3x - 3y <= 2 has rational points but no integer ones
    env = {"x1": INT, "x2": INT}
    assert sat([q("(<= 1 (- (* 3 x1) (* 3 x2)))"), q("(<= (- (* 3 x1) (* 3 x2)) 2)")], env) is None


def test_unbounded_feasible_region():
    env = {"x1": INT, "x2": INT}
    model = sat([q("(>= (+ x1 x2) 1000)"), q("(<= (- x1 x2) 3)")], env)
    assert model["x1"] + model["x2"] >= 1000


def test_bool_constants_and_ite():
    env = {"x1": INT, "b": BOOL}
    model = sat([q("(= (ite b x1 (- x1)) 4)", {"x1": INT, "b": BOOL}), q("(< x1 0)", env)], env)
    assert model["b"] is False and model["x1"] == -4


def test_large_coefficients_are_exact():
    env = {"x1": INT}
    big = 10**20
    model = sat([App("=", (App("*", (IntLit(big), Var("x1"))), IntLit(3 * big)))], env)
    assert model["x1"] == 3


def test_trivial_assertions():
    assert sat([BoolLit(True)], {}) == {}
    assert sat([BoolLit(False)], {}) is None
    assert sat([], {"x1": INT}) == {"x1": 0}


def test_models_are_minimized_toward_zero():
    env = {"x1": INT}
    assert sat([q("(>= x1 5)")], env) == {"x1": 5}
    assert sat([q("(<= x1 (- 7))")], env) == {"x1": -7}
    # greedy per variable: the value cannot move one step closer to 0
    shape = q("(or (> x1 3) (< x1 (- 10)))")
    v = sat([shape], env)["x1"]
    assert v in (4, -11)
    assert eval_ground(shape, {"x1": v - (1 if v > 0 else -1)}) is False


def test_exhausted_search_is_resource_out_not_unsat():
    env = {"x1": INT, "x2": INT}
    # the relaxation's first vertex is fractional, so integrality needs branching
    needs_branching = [q("(>= (+ (* 2 x1) (* 3 x2)) 1)")]
    with pytest.raises(ResourceOut):
        check_sat(needs_branching, env, Limits(bb_nodes=0))
    assert check_sat(needs_branching, env) is not None


def test_find_counterexample_refutes_first_parameter():
    x1 = Var("x1")
    cex = find_counterexample(Lambda(MAX2_P.target.params, x1), MAX2_P)
    assert cex is not None and cex["x2"] > cex["x1"]


def test_find_counterexample_accepts_max():
    body = q("(ite (<= x1 x2) x2 x1)")
    assert find_counterexample(Lambda(MAX2_P.target.params, body), MAX2_P) is None


def test_find_counterexample_refutes_constant_one():
    cex = find_counterexample(Lambda(MAX2_P.target.params, IntLit(1)), MAX2_P)
    assert cex is not None and max(cex["x1"], cex["x2"]) != 1


def test_lift_ite_removes_int_ite():
    t = q("(<= (ite (<= x1 x2) x2 x1) (+ y 1))")
    out = lift_ite(t)
    assert all(not (isinstance(s, App) and s.op == "ite" and s.sort == INT) for s in _subterms(out))
    for a in range(-3, 4):
        for b in range(-3, 4):
            for c in range(-3, 4):
                pt = {"x1": a, "x2": b, "y": c}
                assert eval_ground(out, pt) == eval_ground(t, pt)


def _subterms(t):
    yield t
    for a in t.args:
        yield from _subterms(a)


def test_encoding_shares_atoms_across_polarity():
    cs = encode([q("(or (<= x1 3) b)"), q("(or (not (<= x1 3)) (not b))")])
    assert len(cs.arith) == 1


# -- simplex and integer search ---------------------------------------------


def test_simplex_detects_conflicting_bounds_with_explanation():
    sx = Simplex(2)
    s = sx.add_row({0: 1, 1: 1})
    assert sx.assert_lower(0, 2, "a") is None
    assert sx.assert_lower(1, 2, "b") is None
    assert sx.assert_upper(s, 3, "c") is None
    expl = sx.check()
    assert expl is not None and set(expl) == {"a", "b", "c"}


def test_simplex_finds_rational_point():
    sx = Simplex(2)
    s = sx.add_row({0: 2, 1: -1})
    sx.assert_lower(s, Fraction(1, 2), "r")
    sx.assert_upper(0, 1, "u")
    assert sx.check() is None
    assert 2 * sx.value[0] - sx.value[1] >= Fraction(1, 2)
    assert sx.value[0] <= 1


def test_direct_bound_conflict_is_immediate():
    sx = Simplex(1)
    sx.assert_lower(0, 5, "lo")
    assert set(sx.assert_upper(0, 4, "hi")) == {"lo", "hi"}


def test_integer_solution_respects_rows():
    sx = Simplex(2)
    s = sx.add_row({0: 3, 1: 5})
    sx.assert_lower(s, 7, None)
    sx.assert_upper(s, 7, None)
    vals = integer_solution(sx, [10**5])
    assert vals is not None and 3 * vals[0] + 5 * vals[1] == 7


def test_equality_elimination():
    # x + y = 4, x - y = 2  ->  x = 3, y = 1
    param = solve_equalities([({0: 1, 1: 1}, -4), ({0: 1, 1: -1}, -2)], 2)
    assert param is not None
    assert solve_equalities([({0: 2}, -5)], 1) is None


# -- properties ---------------------------------------------------------------


@given(st.lists(linear_atom(("k0", "k1", "k2")), min_size=1, max_size=6))
@settings(max_examples=150, deadline=None)
def test_model_soundness(atoms):
    model = check_sat(atoms, ENV3)
    if model is not None:
        assert all(eval_ground(a, model) is True for a in atoms)


@given(st.lists(linear_atom(("k0", "k1", "k2")), min_size=1, max_size=6))
@settings(max_examples=150, deadline=None)
def test_agrees_with_box_search(atoms):
    model = check_sat(atoms, ENV3)
    found = box_sat(atoms, ["k0", "k1", "k2"])
    if found:
        assert model is not None
    if model is None:
        assert not found


@given(st.integers(0, 2**31))
@settings(max_examples=60, deadline=None)
def test_mixed_boolean_queries_agree_with_box_search(seed):
    assertions, names = random_query(random.Random(seed))
    env = {n: INT for n in names}
    model = check_sat(assertions, env)
    if model is not None:
        assert all(eval_ground(a, model) is True for a in assertions)
    if box_sat(assertions, names):
        assert model is not None


def test_verdicts_are_deterministic():
    rng = random.Random(3)
    for _ in range(40):
        assertions, names = random_query(rng)
        env = {n: INT for n in names}
        first = check_sat(assertions, env)
        assert check_sat(assertions, env) == first
