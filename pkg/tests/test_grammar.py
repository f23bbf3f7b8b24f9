"""Grammar embedding, analogues, the program interpreter and enumeration."""
import itertools
import random
from collections import Counter

import pytest

from sygus_forge.core import App, Cons, IntLit, Var, eval_ground
from sygus_forge.frontend import parse
from sygus_forge.grammar import (
    Enumerator,
    UnsupportedProduction,
    analogue,
    conforms,
    embed,
    eval_program,
    is_finite,
    term_size,
)

from oracles import grammar_strings, grammar_terms
from test_frontend import MAX2

P = parse(MAX2)
E = embed(P.grammar, P.target.params)
S, C = E.sorts()


def cons(name, *kids):
    return Cons(name, kids, E.constructor(name).sort)


X1, X2 = cons("x1"), cons("x2")
LEQ = cons("leq", X1, X2)
IF_MAX = cons("if", LEQ, X2, X1)


def small(text):
    p = parse(text)
    return p, embed(p.grammar, p.target.params)


def test_max2_grammar_constructors():
    assert len(E.decl(S).constructors) == 7
    assert len(E.decl(C).constructors) == 4
    assert [c.name for c in E.decl(S).constructors] == ["x1", "x2", "zero", "one", "plus", "minus", "if"]
    assert [c.name for c in E.decl(C).constructors] == ["leq", "eq", "and", "not"]


def test_two_literal_grammar():
    _, e = small("(set-logic LIA)\n(synth-fun f () Int ((S Int (0 1))))\n(check-synth)\n")
    ctors = e.decl(e.start).constructors
    assert len(ctors) == 2 and all(c.arity == 0 for c in ctors)


def test_nonlinear_production_is_unsupported():
    from sygus_forge.frontend import GrammarSpec, Nonterminal, Production
    from sygus_forge.core import INT

    g = GrammarSpec((Nonterminal("S", INT, (Production("param", "x"),
                                            Production("op", "*", ("S", "S")))),))
    with pytest.raises(UnsupportedProduction):
        embed(g, (("x", INT),))


def test_analogue_of_max_program():
    assert analogue(IF_MAX, E) == App("ite", (App("<=", (Var("x1"), Var("x2"))), Var("x2"), Var("x1")))


def test_analogue_of_zero():
    assert analogue(cons("zero"), E) == IntLit(0)


def test_analogue_of_doubling():
    assert analogue(cons("plus", X2, X2), E) == App("+", (Var("x2"), Var("x2")))


def test_interpreter_parameter():
    assert eval_program(X1, [5, 7], E) == 5


def test_interpreter_plus():
    assert eval_program(cons("plus", X1, X2), [1, 2], E) == 3


def test_interpreter_max_program():
    assert eval_program(IF_MAX, [1, 2], E) == 2


def test_term_size_examples():
    assert term_size(X1) == 0
    assert term_size(cons("plus", X1, X2)) == 1
    assert term_size(IF_MAX) == 2


def test_size_zero_values():
    assert {str(d) for d in Enumerator(E).values(S, 0)} == {"x1", "x2", "zero", "one"}


def test_size_one_values():
    vals = list(Enumerator(E).values(S, 1))
    assert len(vals) == 32
    assert Counter(d.name for d in vals) == {"plus": 16, "minus": 16}


def test_bool_sort_has_no_size_zero_values():
    assert list(Enumerator(E).values(C, 0)) == []


def test_counts_match_generation():
    en = Enumerator(E)
    for size in range(4):
        assert en.count(S, size) == len(list(en.values(S, size)))
        assert en.count(C, size) == len(list(en.values(C, size)))


def render(d, memo):
    """Analogue text of a program; children are shared, so memoize by identity."""
    key = id(d)
    out = memo.get(key)
    if out is None:
        c = E.constructor(d.name)
        if c.kind != "op":
            out = str(analogue(d, E))
        else:
            out = f"({c.value} " + " ".join(render(a, memo) for a in d.args) + ")"
        memo[key] = (out, d)  # keep d alive so its id stays unique
        return out
    return out[0]


@pytest.mark.parametrize("sort_name", ["S", "C"])
def test_enumeration_matches_brute_force(sort_name):
    """Sizes 0..4: same multiset per size, no duplicates, nondecreasing sizes."""
    sort = S if sort_name == "S" else C
    brute = grammar_strings(P.grammar, 4)[sort_name]
    memo: dict = {}
    mine: list[list[str]] = [[] for _ in range(5)]
    last = 0
    for d in Enumerator(E).stream(sort, 4):
        size = term_size(d)
        assert size >= last
        last = size
        mine[size].append(render(d, memo))
    for size in range(5):
        assert len(set(mine[size])) == len(mine[size])
        assert Counter(mine[size]) == Counter(brute[size])


def test_small_strata_match_term_oracle():
    brute = grammar_terms(P.grammar, P.target.params, 2)["S"]
    for size in range(3):
        assert Counter(analogue(d, E) for d in Enumerator(E).values(S, size)) == Counter(brute[size])


def test_enumeration_order_is_deterministic():
    a = list(itertools.islice(Enumerator(E).stream(S), 300))
    b = list(itertools.islice(Enumerator(E).stream(S), 300))
    assert a == b


def test_interpreter_agrees_with_analogue():
    """500 random (program, inputs) pairs."""
    rng = random.Random(11)
    pool = list(Enumerator(E).stream(S, 3))
    for _ in range(500):
        d = rng.choice(pool)
        v = [rng.randint(-50, 50), rng.randint(-50, 50)]
        assert eval_program(d, v, E) == eval_ground(analogue(d, E), {"x1": v[0], "x2": v[1]})


def test_size_zero_iff_leaf_analogue():
    for d in Enumerator(E).stream(S, 2):
        a = analogue(d, E)
        assert (term_size(d) == 0) == (not a.args)


def test_conforms_inverts_analogue():
    for d in Enumerator(E).stream(S, 2):
        assert conforms(analogue(d, E), E, S) == d


def test_conforms_rejects_foreign_operator():
    assert conforms(App(">=", (Var("x1"), Var("x2"))), E, C) is None
    assert conforms(IntLit(2), E, S) is None


def test_finiteness():
    assert not is_finite(E)
    _, e = small("(set-logic LIA)\n(synth-fun f ((x Int)) Int ((S Int (x 1 (+ T T))) (T Int (x 1))))\n"
                 "(check-synth)\n")
    assert is_finite(e)
    assert Enumerator(e).max_size(e.start) == 1
    assert len(list(Enumerator(e).stream(e.start))) == 6


def test_unproductive_sort_is_empty():
    _, e = small("(set-logic LIA)\n(synth-fun f ((x Int)) Int ((S Int (x (+ S T))) (T Int ((+ T T)))))\n"
                 "(check-synth)\n")
    en = Enumerator(e)
    assert [str(d) for d in en.stream(e.start, 5)] == ["x"]
