"""Single-invocation detection, the two synthesis loops and orchestration."""
from pathlib import Path

import numpy as np
import pytest

from sygus_forge.core import INT, App, Call, IntLit, Lambda, Limits, ResourceOut, Var, normalize, substitute
from sygus_forge.engine import (
    NoSolution,
    NotSingleInvocation,
    SiState,
    Solution,
    build_ite_solution,
    detect_single_invocation,
    embedding_for,
    solve,
    solve_cegis,
    solve_si,
    select_instantiation_term,
)
from sygus_forge.frontend import parse, parse_term
from sygus_forge.grammar import term_size
from sygus_forge.theory import find_counterexample

from oracles import finite_grammar_terms, grid, satisfies_on
from problems import UNSAT01, finite_problems, si_cases
from test_frontend import MAX2

CORPUS = Path(__file__).parent / "corpus"
MAX2_P = parse(MAX2)
X1, X2 = Var("x1"), Var("x2")


def problem(body: str, params="((x Int))", grammar="", decls="(declare-var x Int)") -> object:
    return parse(f"(set-logic LIA)\n(synth-fun f {params} Int {grammar})\n{decls}\n"
                 f"(constraint {body})\n(check-synth)\n")


def exhaustive_ok(p, fn, lo=-20, hi=20) -> bool:
    return satisfies_on(p, fn, grid(len(p.universals), lo, hi))


# -- detection ----------------------------------------------------------------


def test_max2_is_single_invocation():
    spec = detect_single_invocation(MAX2_P)
    y = Var(spec.y)
    expected = App("and", (App(">=", (y, X1)), App(">=", (y, X2)),
                           App("or", (App("=", (y, X1)), App("=", (y, X2))))))
    assert normalize(spec.q) == normalize(expected)


def test_swapped_arguments_are_not_single_invocation():
    p = parse((CORPUS / "commute.sl").read_text())
    assert detect_single_invocation(p) is None


def test_bounds_become_a_formula_in_y():
    p = parse("(set-logic LIA)\n(synth-fun f ((x1 Int)) Int)\n(declare-var x1 Int)\n"
              "(constraint (>= (f x1) 0))\n(constraint (<= (f x1) 0))\n(check-synth)\n")
    spec = detect_single_invocation(p)
    y = Var(spec.y)
    assert normalize(spec.q) == normalize(App("and", (App(">=", (y, IntLit(0))), App("<=", (y, IntLit(0))))))


def test_putting_the_call_back_gives_the_conjecture():
    spec = detect_single_invocation(MAX2_P)
    call = Call("max2", (X1, X2), INT)
    assert substitute(spec.q, {spec.y: call}) == MAX2_P.spec


def test_fresh_y_avoids_universal_names():
    p = problem("(= (f y) y)", decls="(declare-var y Int)", params="((x Int))")
    spec = detect_single_invocation(p)
    assert spec.y != "y"


# -- single-invocation loop -----------------------------------------------------


def test_max2_in_at_most_two_instantiations():
    trace = []
    res = solve_si(detect_single_invocation(MAX2_P), Limits(timeout=10), trace.append)
    assert isinstance(res, Solution)
    assert res.iterations <= 2
    assert exhaustive_ok(MAX2_P, res.fn)
    assert all(line.startswith("model e=") and " | instance " in line for line in trace)


def test_contradictory_conjecture_has_no_solution():
    p = problem("(and (= (f x) x) (= (f x) (+ x 1)))")
    res = solve_si(detect_single_invocation(p))
    assert isinstance(res, NoSolution) and res.iterations == 0


def test_constant_after_one_instantiation():
    p = problem("(= (f x) 3)")
    res = solve_si(detect_single_invocation(p))
    assert isinstance(res, Solution)
    assert res.fn.body == IntLit(3) and res.iterations == 1


def test_instances_are_distinct():
    p = parse((CORPUS / "max4.sl").read_text())
    trace = []
    res = solve_si(detect_single_invocation(p), Limits(timeout=30), trace.append)
    inst = [line.split(" | instance ")[1] for line in trace]
    assert len(set(inst)) == len(inst) == res.iterations


def _state(spec, used=()):
    return SiState([], [], "e", "G", {}, {normalize(t) for t in used})


def test_selection_prefers_pool_term():
    spec = detect_single_invocation(MAX2_P)
    k1, k2 = spec.skolems
    assert select_instantiation_term(_state(spec), {"e": 4, k1: 4, k2: 1}, spec) == X1


def test_selection_falls_back_to_literal():
    spec = detect_single_invocation(MAX2_P)
    k1, k2 = spec.skolems
    assert select_instantiation_term(_state(spec), {"e": 5, k1: 4, k2: 1}, spec) == IntLit(5)


def test_selection_skips_used_terms():
    spec = detect_single_invocation(MAX2_P)
    k1, k2 = spec.skolems
    assert select_instantiation_term(_state(spec, [X1]), {"e": 3, k1: 3, k2: 3}, spec) == X2


def test_selection_gives_up_on_repeated_literal():
    from sygus_forge.engine import Exhausted

    spec = detect_single_invocation(MAX2_P)
    k1, k2 = spec.skolems
    with pytest.raises(Exhausted):
        select_instantiation_term(_state(spec, [IntLit(5)]), {"e": 5, k1: 4, k2: 1}, spec)


def test_build_ite_two_instances_simplifies_to_max():
    spec = detect_single_invocation(MAX2_P)
    fn = build_ite_solution([X1, X2], spec)
    assert fn.body.op == "ite" and fn.body.args[1:] == (X2, X1)
    assert normalize(fn.body.args[0]) == normalize(parse_term("(>= x2 x1)", {"x1": INT, "x2": INT}))


def test_build_ite_single_instance_has_no_ite():
    spec = detect_single_invocation(MAX2_P)
    assert build_ite_solution([X1], spec).body == X1


def test_build_ite_three_instances_nests_twice():
    p = parse((CORPUS / "max3.sl").read_text())
    spec = detect_single_invocation(p)
    xs = [Var("x1"), Var("x2"), Var("x3")]
    body = build_ite_solution(xs, spec).body
    assert body.op == "ite" and body.args[1] == xs[2]
    inner = body.args[2]
    assert inner.op == "ite" and inner.args[1:] == (xs[1], xs[0])


SI_CASES = si_cases()


@pytest.mark.parametrize("case", range(len(SI_CASES)))
def test_build_ite_meets_the_conjecture(case):
    text, inst = SI_CASES[case]
    p = parse(text)
    spec = detect_single_invocation(p)
    fn = build_ite_solution([parse_term(t, {"x1": INT, "x2": INT}) for t in inst], spec)
    assert satisfies_on(p, fn, grid(2, -8, 8))


# -- enumerative loop ---------------------------------------------------------


def test_cegis_max2_run():
    seen = []
    trace = []
    res = solve_cegis(MAX2_P, embedding_for(MAX2_P), Limits(timeout=30), trace.append, seen.append)
    assert isinstance(res, Solution) and res.size == 2
    assert exhaustive_ok(MAX2_P, res.fn)
    assert seen[0].name in {"x1", "x2", "zero", "one"} and term_size(seen[0]) == 0
    sizes = [term_size(d) for d in seen]
    assert sizes == sorted(sizes)
    assert len(set(seen)) == len(seen)
    assert trace[-1].endswith("| cex none")
    assert all(line.startswith("candidate ") for line in trace)


def test_cegis_picks_one():
    p = parse((CORPUS / "const_one.sl").read_text())
    seen = []
    res = solve_cegis(p, embedding_for(p), None, None, seen.append)
    assert isinstance(res, Solution) and res.fn.body == IntLit(1)
    assert len(seen) <= 2


def test_cegis_refutes_two_over_zero_one():
    p = parse(UNSAT01)
    seen = []
    res = solve_cegis(p, embedding_for(p), None, None, seen.append)
    # once 0 is refuted, the recorded point already rules out 1
    assert isinstance(res, NoSolution) and res.iterations == len(seen) == 1


def test_cegis_infinite_grammar_hits_size_bound():
    p = parse((CORPUS / "bounded_unsat.sl").read_text().replace("(S Int (x 1 (+ T T))) (T Int (x 1))",
                                                                "(S Int (x 1 (+ S S)))"))
    with pytest.raises(ResourceOut):
        solve_cegis(p.__class__(p.logic, p.target, p.universals,
                                (parse_term("(= (f x) (+ x 100))", {"x": INT}, p.target),), p.grammar),
                    embedding_for(p), Limits(max_size=3))


def _int(text: str) -> int:
    return -int(text[3:-1]) if text.startswith("(- ") else int(text)


def test_cegis_candidates_satisfy_recorded_points():
    """Every proposed candidate agrees with all counterexamples seen before it."""
    seen, cexes = [], []
    e = embedding_for(MAX2_P)

    def on_trace(line):
        if "cex {" in line:
            body = line.split("cex {")[1].rstrip("}")
            cexes.append({k: _int(v) for k, v in (kv.split(" -> ") for kv in body.split(", "))})

    def on_candidate(d):
        from sygus_forge.grammar import eval_program

        for pt in cexes:
            y = eval_program(d, [pt["x1"], pt["x2"]], e)
            assert y >= pt["x1"] and y >= pt["x2"] and y in (pt["x1"], pt["x2"])
        seen.append(d)

    solve_cegis(MAX2_P, e, Limits(timeout=30), on_trace, on_candidate)
    assert len(seen) == len(cexes) + 1


# -- oracle-checked families --------------------------------------------------

SOLVABLE, UNSOLVABLE = finite_problems()


@pytest.mark.parametrize("idx", range(len(SOLVABLE)))
def test_cegis_returns_minimal_size(idx):
    text, best = SOLVABLE[idx]
    p = parse(text)
    res = solve(p, "cegis", Limits(timeout=60))
    assert isinstance(res, Solution)
    assert res.size == best
    assert find_counterexample(res.fn, p) is None


@pytest.mark.parametrize("idx", range(len(UNSOLVABLE)))
def test_refutation_is_confirmed_by_oracle(idx):
    text, _ = UNSOLVABLE[idx]
    p = parse(text)
    res = solve(p, "cegis", Limits(timeout=60))
    assert isinstance(res, NoSolution)
    pts = grid(2, -12, 12)
    assert not any(satisfies_on(p, Lambda(p.target.params, t), pts) for t in finite_grammar_terms(p))


def test_zero_one_grammar_oracle():
    p = parse(UNSAT01)
    assert isinstance(solve(p, "cegis"), NoSolution)
    pts = np.zeros((1, 0), dtype=np.int64)
    assert not any(satisfies_on(p, Lambda((), t), pts) for t in finite_grammar_terms(p))


# -- orchestration ------------------------------------------------------------


def test_auto_routes_max2_to_si():
    res = solve(MAX2_P, "auto", Limits(timeout=10))
    assert res.strategy == "si" and res.grammar_checked


def test_auto_routes_non_single_invocation_to_cegis():
    p = parse((CORPUS / "commute.sl").read_text())
    res = solve(p, "auto", Limits(timeout=10))
    assert res.strategy == "cegis"


def test_unrestricted_answer_is_flagged():
    res = solve(MAX2_P, "si-r", Limits(timeout=10))
    assert res.strategy == "si-r" and not res.grammar_checked
    assert exhaustive_ok(MAX2_P, res.fn)


def test_si_requires_single_invocation():
    p = parse((CORPUS / "commute.sl").read_text())
    with pytest.raises(NotSingleInvocation):
        solve(p, "si")


def test_si_result_conforms_to_grammar():
    from sygus_forge.grammar import conforms

    res = solve(MAX2_P, "si", Limits(timeout=10))
    e = embedding_for(MAX2_P)
    assert conforms(res.fn.body, e) is not None
    assert res.size == term_size(res.program)


def test_portfolio_prefers_si_and_answers():
    res = solve(MAX2_P, "portfolio", Limits(timeout=30))
    assert isinstance(res, Solution)
    assert exhaustive_ok(MAX2_P, res.fn)


def test_portfolio_on_non_single_invocation():
    p = parse((CORPUS / "sum_swap.sl").read_text())
    res = solve(p, "portfolio", Limits(timeout=30))
    assert isinstance(res, Solution) and res.strategy == "cegis"


def test_portfolio_reports_resource_out():
    # two call sites, so only the enumerative entrant runs
    p = problem("(and (= (f x) (+ x 100)) (= (f 0) 100))", grammar="((S Int (x 1 (+ S S))))")
    with pytest.raises(ResourceOut):
        solve(p, "portfolio", Limits(timeout=5, max_size=2))


def test_timeout_is_resource_out():
    p = parse((CORPUS / "max5.sl").read_text())
    with pytest.raises(ResourceOut):
        solve(p, "cegis", Limits(timeout=0.5))


def test_unknown_strategy():
    from sygus_forge.core import SynthError

    with pytest.raises(SynthError):
        solve(MAX2_P, "magic")


# -- every corpus answer is sound --------------------------------------------


@pytest.mark.parametrize("path", sorted(CORPUS.glob("*.sl")), ids=lambda p: p.name)
def test_corpus_answers_are_sound(path):
    p = parse(path.read_text())
    try:
        res = solve(p, "auto", Limits(timeout=30))
    except ResourceOut:
        pytest.skip("resource limit")
    if isinstance(res, NoSolution):
        return
    assert find_counterexample(res.fn, p) is None
    if len(p.universals) <= 3 and all(s == INT for _, s in p.universals):
        assert exhaustive_ok(p, res.fn, -20 if len(p.universals) < 3 else -8,
                             20 if len(p.universals) < 3 else 8)


def test_auto_falls_back_to_enumeration_on_finite_grammar():
    # si finds f = x + 2, which the grammar cannot express; only enumeration can refute
    p = problem("(= (f x) (+ x 2))", grammar="((S Int (x 1 (ite C T T))) (T Int (x 1)) (C Bool ((<= T T))))")
    with pytest.raises(ResourceOut):
        solve(p, "si")
    res = solve(p, "auto")
    assert isinstance(res, NoSolution) and res.strategy == "cegis"
