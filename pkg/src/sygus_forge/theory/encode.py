"""Clause encoding of ground Int/Bool assertions.

Int-sorted ite is case-split out of the atoms that contain it, the result is
put in negation normal form, and every arithmetic atom is made canonical as
`sum >= bound` with gcd-reduced coefficients whose first entry (by variable
name) is positive.  The formula then becomes clauses by the positive-polarity
(Plaisted-Greenbaum) definitional encoding.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from ..core import (
    CMP_OPS,
    INT,
    App,
    BoolLit,
    Call,
    Cons,
    Eval,
    SynthError,
    Term,
    Var,
    conj,
    linear_form,
    normalize,
    replace_subterm,
)

# An arithmetic atom: (((name, coef), ...) sorted by name, bound), read as
# sum(coef * name) >= bound.
ArithAtom = tuple


def _first_int_ite(t: Term) -> App | None:
    for a in t.args:
        if isinstance(a, App) and a.op == "ite" and a.sort == INT:
            return a
        if a.sort == INT:
            found = _first_int_ite(a)
            if found is not None:
                return found
    return None


def lift_ite(t: Term, memo: dict | None = None) -> Term:
    """Equivalent Bool term in which no Int-sorted ite remains.

    `ite(c, a, b) op u` becomes `(c and a op u) or (not c and b op u)`.
    """
    if memo is None:
        memo = {}
    hit = memo.get(t)
    if hit is not None:
        return hit
    if isinstance(t, (Eval, Cons, Call)):
        raise SynthError(f"ground query must not contain {t}")
    if not isinstance(t, App):
        out = t
    elif t.op in CMP_OPS or (t.op == "=" and t.args[0].sort == INT):
        ite = _first_int_ite(t)
        if ite is None:
            out = t
        else:
            c = lift_ite(ite.args[0], memo)
            yes = lift_ite(replace_subterm(t, ite, ite.args[1]), memo)
            no = lift_ite(replace_subterm(t, ite, ite.args[2]), memo)
            out = App("or", (App("and", (c, yes)), App("and", (App("not", (c,)), no))))
    else:
        args = tuple(lift_ite(a, memo) for a in t.args)
        out = t if args == t.args else App(t.op, args)
    memo[t] = out
    return out


@dataclass
class ClauseSet:
    """Clauses over integer literals (`v` or `-v`, variables from 1)."""

    clauses: list[list[int]] = field(default_factory=list)
    n_vars: int = 0
    arith: dict[int, ArithAtom] = field(default_factory=dict)  # var -> atom
    bools: dict[int, str] = field(default_factory=dict)  # var -> Bool constant
    _arith_ids: dict = field(default_factory=dict, repr=False)
    _bool_ids: dict = field(default_factory=dict, repr=False)
    trivially_false: bool = False

    def fresh(self) -> int:
        self.n_vars += 1
        return self.n_vars

    def bool_var(self, name: str) -> int:
        v = self._bool_ids.get(name)
        if v is None:
            v = self._bool_ids[name] = self.fresh()
            self.bools[v] = name
        return v

    def arith_lit(self, coeffs: dict[str, int], bound: int) -> int:
        """Literal for `sum(coeffs) >= bound` (coefficients already gcd-reduced)."""
        items = tuple(sorted(coeffs.items()))
        if items[0][1] < 0:
            # -s >= b  <=>  not (s >= 1 - b)
            items = tuple((n, -c) for n, c in items)
            return -self._atom(items, 1 - bound)
        return self._atom(items, bound)

    def _atom(self, items: tuple, bound: int) -> int:
        key = (items, bound)
        v = self._arith_ids.get(key)
        if v is None:
            v = self._arith_ids[key] = self.fresh()
            self.arith[v] = key
        return v


def _sum_of(t: Term) -> dict[str, int]:
    m, k = linear_form(t)
    if k:
        raise SynthError(f"atom sum carries a constant: {t}")
    out = {}
    for x, c in m.items():
        if not isinstance(x, Var):
            raise SynthError(f"unexpected atom operand {x}")
        out[x.name] = c
    return out


def _literal(cs: ClauseSet, t: Term) -> int:
    neg = False
    if isinstance(t, App) and t.op == "not":
        neg, t = True, t.args[0]
    if isinstance(t, Var):
        v = cs.bool_var(t.name)
        return -v if neg else v
    if isinstance(t, App) and t.op == "<=":
        v = cs.arith_lit(_sum_of(t.args[1]), t.args[0].value)
        return -v if neg else v
    raise SynthError(f"not a literal: {t}")


def _encode(cs: ClauseSet, t: Term, memo: dict) -> int:
    """Literal that implies `t` (positive polarity definitions only)."""
    hit = memo.get(t)
    if hit is not None:
        return hit
    if isinstance(t, App) and t.op in ("and", "or"):
        kids = [_encode(cs, k, memo) for k in t.args]
        p = cs.fresh()
        if t.op == "and":
            for k in kids:
                cs.clauses.append([-p, k])
        else:
            cs.clauses.append([-p] + kids)
        out = p
    elif isinstance(t, App) and t.op == "=":
        # c = s  <=>  s >= c and not (s >= c + 1)
        s, c = _sum_of(t.args[1]), t.args[0].value
        p = cs.fresh()
        cs.clauses.append([-p, cs.arith_lit(s, c)])
        cs.clauses.append([-p, -cs.arith_lit(s, c + 1)])
        out = p
    elif isinstance(t, App) and t.op == "not" and isinstance(t.args[0], App) and t.args[0].op == "=":
        inner = t.args[0]
        s, c = _sum_of(inner.args[1]), inner.args[0].value
        p = cs.fresh()
        cs.clauses.append([-p, -cs.arith_lit(s, c), cs.arith_lit(s, c + 1)])
        out = p
    else:
        out = _literal(cs, t)
    memo[t] = out
    return out


def encode(assertions) -> ClauseSet:
    """Clauses equisatisfiable with the conjunction of `assertions`.

    Any model of the clauses, restricted to the atoms it assigns, makes every
    assertion true no matter how unassigned atoms are read.
    """
    cs = ClauseSet()
    memo: dict = {}
    lifted: dict = {}
    nnf = normalize(conj([lift_ite(a, lifted) for a in assertions]))
    if nnf == BoolLit(False):
        cs.trivially_false = True
        return cs
    if nnf == BoolLit(True):
        return cs
    tops = list(nnf.args) if isinstance(nnf, App) and nnf.op == "and" else [nnf]
    for top in tops:
        if isinstance(top, App) and top.op == "or":
            cs.clauses.append([_encode(cs, k, memo) for k in top.args])
        else:
            cs.clauses.append([_encode(cs, top, memo)])
    return cs

