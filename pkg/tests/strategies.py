"""Hypothesis strategies for random linear Int/Bool terms."""
from __future__ import annotations

from hypothesis import strategies as st

from sygus_forge.core import INT, App, BoolLit, IntLit, Var

NAMES = ("x1", "x2", "x3")


def int_leaves(names=NAMES, lo=-4, hi=4):
    return st.one_of(
        st.sampled_from([Var(n, INT) for n in names]),
        st.integers(lo, hi).map(IntLit),
    )


def int_terms(names=NAMES, depth: int = 3):
    leaves = int_leaves(names)
    if depth == 0:
        return leaves
    sub = int_terms(names, depth - 1)
    cond = bool_terms(names, depth - 1)
    return st.one_of(
        leaves,
        st.tuples(sub, sub).map(lambda ab: App("+", ab)),
        st.tuples(sub, sub).map(lambda ab: App("-", ab)),
        sub.map(lambda a: App("-", (a,))),
        st.tuples(st.integers(-3, 3), sub).map(lambda ka: App("*", (IntLit(ka[0]), ka[1]))),
        st.tuples(cond, sub, sub).map(lambda cab: App("ite", cab)),
    )


def atoms(names=NAMES, depth: int = 1):
    side = int_terms(names, depth)
    return st.tuples(st.sampled_from(["<=", "<", ">=", ">", "="]), side, side).map(
        lambda oab: App(oab[0], (oab[1], oab[2])))


def bool_terms(names=NAMES, depth: int = 3):
    leaves = st.one_of(atoms(names, 0), st.booleans().map(BoolLit))
    if depth == 0:
        return leaves
    sub = bool_terms(names, depth - 1)
    return st.one_of(
        leaves,
        atoms(names, min(depth, 2)),
        sub.map(lambda a: App("not", (a,))),
        st.tuples(sub, sub).map(lambda ab: App("and", ab)),
        st.tuples(sub, sub).map(lambda ab: App("or", ab)),
        st.tuples(sub, sub).map(lambda ab: App("=>", ab)),
    )


def any_terms(names=NAMES, depth: int = 3):
    return st.one_of(int_terms(names, depth), bool_terms(names, depth))


def linear_atom(names, coef=4, const=8):
    """sum c_i * x_i  op  k, with coefficients in [-coef, coef]."""
    def build(args):
        cs, k, op = args
        terms = [App("*", (IntLit(c), Var(n, INT))) for c, n in zip(cs, names) if c]
        lhs = terms[0] if len(terms) == 1 else App("+", tuple(terms)) if terms else IntLit(0)
        return App(op, (lhs, IntLit(k)))

    return st.tuples(
        st.lists(st.integers(-coef, coef), min_size=len(names), max_size=len(names)),
        st.integers(-const, const),
        st.sampled_from(["<=", "<", ">=", ">", "="]),
    ).map(build)

