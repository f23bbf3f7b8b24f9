"""Sorts, terms and the pure term operations shared by every other module.

Terms are immutable and hash-consed by value: two structurally equal terms
compare equal and hash the same, so they can be used freely as dict keys.
"""
from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from functools import lru_cache
from math import gcd
from typing import Callable, Iterable, Mapping


class SynthError(Exception):
    """Base class for every error raised by this package."""


class SortMismatch(SynthError):
    def __init__(self, path: tuple[int, ...], expected: object, found: object):
        self.path = path
        self.expected = expected
        self.found = found
        super().__init__(f"sort mismatch at {list(path)}: expected {expected}, found {found}")


class UnassignedVariable(SynthError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"variable {name!r} has no value")


class NonlinearTerm(SynthError):
    pass


class ResourceOut(SynthError):
    """A budget (time, iterations, search nodes) ran out before an answer."""


# ---------------------------------------------------------------------------
# sorts


@dataclass(frozen=True)
class Sort:
    kind: str  # "Int", "Bool" or "Datatype"
    name: str | None = None

    def __str__(self) -> str:
        return self.name if self.kind == "Datatype" else self.kind

    @property
    def is_datatype(self) -> bool:
        return self.kind == "Datatype"


INT = Sort("Int")
BOOL = Sort("Bool")


def datatype_sort(name: str) -> Sort:
    return Sort("Datatype", name)


# ---------------------------------------------------------------------------
# terms

ARITH_OPS = frozenset({"+", "-", "*"})
CMP_OPS = frozenset({"<=", "<", ">=", ">"})
BOOL_OPS = frozenset({"not", "and", "or", "=>"})
BUILTIN_OPS = ARITH_OPS | CMP_OPS | BOOL_OPS | {"=", "ite"}


class Term:
    __slots__ = ("_h", "_sx")

    def __setattr__(self, name, value):
        raise AttributeError("terms are immutable")

    def _init(self, **fields) -> None:
        for k, v in fields.items():
            object.__setattr__(self, k, v)
        object.__setattr__(self, "_h", hash((type(self).__name__,) + self._fields()))
        object.__setattr__(self, "_sx", None)

    def _fields(self) -> tuple:
        raise NotImplementedError

    def __eq__(self, other):
        if self is other:
            return True
        if type(other) is not type(self) or self._h != other._h:
            return False
        return self._fields() == other._fields()

    def __ne__(self, other):
        return not self.__eq__(other)

    def __hash__(self):
        return self._h

    def __str__(self):
        if self._sx is None:
            object.__setattr__(self, "_sx", to_sexpr(self))
        return self._sx

    __repr__ = __str__

    @property
    def args(self) -> tuple[Term, ...]:
        return ()


class Var(Term):
    __slots__ = ("name", "sort")

    def __init__(self, name: str, sort: Sort = INT):
        self._init(name=name, sort=sort)

    def _fields(self):
        return (self.name, self.sort)


class IntLit(Term):
    __slots__ = ("value",)
    sort = INT

    def __init__(self, value: int):
        self._init(value=int(value))

    def _fields(self):
        return (self.value,)


class BoolLit(Term):
    __slots__ = ("value",)
    sort = BOOL

    def __init__(self, value: bool):
        self._init(value=bool(value))

    def _fields(self):
        return (self.value,)


class App(Term):
    """A builtin operator applied to arguments."""

    __slots__ = ("op", "_args", "sort")

    def __init__(self, op: str, args: Iterable[Term]):
        args = tuple(args)
        if op in ARITH_OPS:
            sort = INT
        elif op == "ite":
            sort = args[1].sort if len(args) == 3 else INT
        else:
            sort = BOOL
        self._init(op=op, _args=args, sort=sort)

    def _fields(self):
        return (self.op, self._args)

    @property
    def args(self):
        return self._args


class Call(Term):
    """An application of the function being synthesized."""

    __slots__ = ("name", "_args", "sort")

    def __init__(self, name: str, args: Iterable[Term], sort: Sort):
        self._init(name=name, _args=tuple(args), sort=sort)

    def _fields(self):
        return (self.name, self._args, self.sort)

    @property
    def args(self):
        return self._args


class Cons(Term):
    """A datatype constructor application (a program of the grammar)."""

    __slots__ = ("name", "_args", "sort")

    def __init__(self, name: str, args: Iterable[Term], sort: Sort):
        self._init(name=name, _args=tuple(args), sort=sort)

    def _fields(self):
        return (self.name, self._args, self.sort)

    @property
    def args(self):
        return self._args


class Eval(Term):
    """The evaluation operator: runs a datatype program on theory inputs."""

    __slots__ = ("datatype", "program", "inputs", "sort")

    def __init__(self, datatype: Sort, program: Term, inputs: Iterable[Term], sort: Sort):
        self._init(datatype=datatype, program=program, inputs=tuple(inputs), sort=sort)

    def _fields(self):
        return (self.datatype, self.program, self.inputs, self.sort)

    @property
    def args(self):
        return (self.program,) + self.inputs


TRUE = BoolLit(True)
FALSE = BoolLit(False)


def lit(value: int | bool) -> Term:
    if isinstance(value, bool):
        return BoolLit(value)
    return IntLit(value)


def app(op: str, *args: Term) -> App:
    return App(op, args)


def conj(terms: Iterable[Term]) -> Term:
    terms = list(terms)
    if not terms:
        return TRUE
    return terms[0] if len(terms) == 1 else App("and", terms)


def disj(terms: Iterable[Term]) -> Term:
    terms = list(terms)
    if not terms:
        return FALSE
    return terms[0] if len(terms) == 1 else App("or", terms)


def negate(t: Term) -> Term:
    return App("not", (t,))


def with_args(t: Term, args: tuple[Term, ...]) -> Term:
    """Rebuild `t` with new children, reusing `t` when nothing changed."""
    if args == t.args:
        return t
    if isinstance(t, App):
        return App(t.op, args)
    if isinstance(t, Call):
        return Call(t.name, args, t.sort)
    if isinstance(t, Cons):
        return Cons(t.name, args, t.sort)
    if isinstance(t, Eval):
        return Eval(t.datatype, args[0], args[1:], t.sort)
    return t


# ---------------------------------------------------------------------------
# printing


def to_sexpr(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, IntLit):
        return str(t.value) if t.value >= 0 else f"(- {-t.value})"
    if isinstance(t, BoolLit):
        return "true" if t.value else "false"
    if isinstance(t, App):
        return f"({t.op} {' '.join(str(a) for a in t.args)})"
    if isinstance(t, Call):
        if not t.args:
            return f"({t.name})"
        return f"({t.name} {' '.join(str(a) for a in t.args)})"
    if isinstance(t, Cons):
        if not t.args:
            return t.name
        return f"{t.name}({', '.join(str(a) for a in t.args)})"
    if isinstance(t, Eval):
        return f"ev({t.datatype}, {', '.join(str(a) for a in t.args)})"
    raise TypeError(f"not a term: {t!r}")


# ---------------------------------------------------------------------------
# lambdas


@dataclass(frozen=True)
class Lambda:
    params: tuple[tuple[str, Sort], ...]
    body: Term

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(tuple(p) for p in self.params))
        stray = free_vars(self.body) - {n for n, _ in self.params}
        if stray:
            raise SynthError(f"lambda body mentions unbound variables {sorted(stray)}")

    def __call__(self, *values):
        return eval_ground(self.body, dict(zip((n for n, _ in self.params), values)))

    def __str__(self):
        names = " ".join(n for n, _ in self.params)
        return f"(lambda ({names}) {self.body})"


# ---------------------------------------------------------------------------
# traversal helpers


def free_vars(t: Term) -> set[str]:
    out: set[str] = set()
    stack = [t]
    while stack:
        u = stack.pop()
        if isinstance(u, Var):
            out.add(u.name)
        else:
            stack.extend(u.args)
    return out


def node_count(t: Term) -> int:
    n = 0
    stack = [t]
    while stack:
        u = stack.pop()
        n += 1
        stack.extend(u.args)
    return n


def subterms(t: Term) -> Iterable[Term]:
    """Pre-order, left to right."""
    stack = [t]
    while stack:
        u = stack.pop()
        yield u
        stack.extend(reversed(u.args))


def contains_var(t: Term, name: str) -> bool:
    return name in free_vars(t)


# ---------------------------------------------------------------------------
# well-sortedness


def _expect(path, expected: Sort, found: Sort) -> None:
    if expected != found:
        raise SortMismatch(path, expected, found)


def well_sorted(t: Term, env: Mapping[str, Sort] | None = None) -> Sort:
    """Return the sort of `t`, raising SortMismatch on the first ill-sorted node."""
    return _check(t, env or {}, ())


def _check(t: Term, env: Mapping[str, Sort], path: tuple[int, ...]) -> Sort:
    if isinstance(t, Var):
        if t.name in env and env[t.name] != t.sort:
            raise SortMismatch(path, env[t.name], t.sort)
        return t.sort
    if isinstance(t, (IntLit, BoolLit)):
        return t.sort
    kids = [_check(a, env, path + (i,)) for i, a in enumerate(t.args)]
    if isinstance(t, (Call, Cons)):
        return t.sort
    if isinstance(t, Eval):
        if not kids[0].is_datatype:
            raise SortMismatch(path + (0,), "a datatype", kids[0])
        return t.sort
    op, n = t.op, len(kids)
    if op == "ite":
        if n != 3:
            raise SortMismatch(path, "3 arguments", n)
        _expect(path + (0,), BOOL, kids[0])
        _expect(path + (2,), kids[1], kids[2])
        return kids[1]
    if op == "=":
        if n != 2:
            raise SortMismatch(path, "2 arguments", n)
        if kids[0].is_datatype:
            raise SortMismatch(path + (0,), "Int or Bool", kids[0])
        _expect(path + (1,), kids[0], kids[1])
        return BOOL
    if op in ARITH_OPS or op in CMP_OPS:
        arity_ok = {"+": n >= 1, "-": n >= 1, "*": n >= 2}.get(op, n == 2)
        if not arity_ok:
            raise SortMismatch(path, f"valid arity for {op}", n)
        for i, s in enumerate(kids):
            _expect(path + (i,), INT, s)
        if op == "*" and sum(not isinstance(a, IntLit) for a in t.args) > 1:
            raise NonlinearTerm(f"multiplication without a literal factor at {list(path)}")
        return INT if op in ARITH_OPS else BOOL
    if op in BOOL_OPS:
        arity_ok = {"not": n == 1, "=>": n == 2}.get(op, n >= 1)
        if not arity_ok:
            raise SortMismatch(path, f"valid arity for {op}", n)
        for i, s in enumerate(kids):
            _expect(path + (i,), BOOL, s)
        return BOOL
    raise SortMismatch(path, "a builtin operator", op)


# ---------------------------------------------------------------------------
# substitution


def substitute(t: Term, bindings: Mapping[str, Term]) -> Term:
    """Simultaneously replace variables by terms (no re-substitution)."""
    if not bindings:
        return t
    cache: dict[Term, Term] = {}

    def go(u: Term) -> Term:
        if isinstance(u, Var):
            b = bindings.get(u.name)
            if b is None:
                return u
            if b.sort != u.sort:
                raise SortMismatch((), u.sort, b.sort)
            return b
        if not u.args:
            return u
        r = cache.get(u)
        if r is None:
            r = with_args(u, tuple(go(a) for a in u.args))
            cache[u] = r
        return r

    return go(t)


def replace_subterm(t: Term, old: Term, new: Term) -> Term:
    if t == old:
        return new
    if not t.args:
        return t
    return with_args(t, tuple(replace_subterm(a, old, new) for a in t.args))


def inline_calls(t: Term, name: str, fn: Lambda) -> Term:
    """Beta-reduce every application of `name` using `fn`."""

    def go(u: Term) -> Term:
        if not u.args and not (isinstance(u, Call) and u.name == name):
            return u
        args = tuple(go(a) for a in u.args)
        if isinstance(u, Call) and u.name == name:
            return substitute(fn.body, {p: a for (p, _), a in zip(fn.params, args)})
        return with_args(u, args)

    return go(t)


# ---------------------------------------------------------------------------
# evaluation


def apply_op(op: str, vals: list):
    if op == "+":
        return sum(vals)
    if op == "-":
        if len(vals) == 1:
            return -vals[0]
        r = vals[0]
        for v in vals[1:]:
            r -= v
        return r
    if op == "*":
        r = 1
        for v in vals:
            r *= v
        return r
    if op == "<=":
        return vals[0] <= vals[1]
    if op == "<":
        return vals[0] < vals[1]
    if op == ">=":
        return vals[0] >= vals[1]
    if op == ">":
        return vals[0] > vals[1]
    if op == "=":
        return vals[0] == vals[1]
    if op == "not":
        return not vals[0]
    if op == "and":
        return all(vals)
    if op == "or":
        return any(vals)
    if op == "=>":
        return (not vals[0]) or vals[1]
    if op == "ite":
        return vals[1] if vals[0] else vals[2]
    raise SynthError(f"unknown operator {op}")


def eval_ground(
    t: Term,
    a: Mapping[str, object],
    *,
    call: Callable[[str, list], object] | None = None,
    ev: Callable[[Eval, list], object] | None = None,
):
    """Value of `t` under assignment `a`.

    `call` interprets applications of the target function and `ev` the
    evaluation operator; without them those nodes are an error.
    """
    if isinstance(t, Var):
        try:
            return a[t.name]
        except KeyError:
            raise UnassignedVariable(t.name) from None
    if isinstance(t, (IntLit, BoolLit)):
        return t.value
    if isinstance(t, App):
        if t.op == "ite":
            c = eval_ground(t.args[0], a, call=call, ev=ev)
            return eval_ground(t.args[1] if c else t.args[2], a, call=call, ev=ev)
        return apply_op(t.op, [eval_ground(x, a, call=call, ev=ev) for x in t.args])
    if isinstance(t, Call):
        if call is None:
            raise SynthError(f"no interpretation for {t.name}")
        return call(t.name, [eval_ground(x, a, call=call, ev=ev) for x in t.args])
    if isinstance(t, Eval):
        if ev is None:
            raise SynthError("evaluation operator needs a grammar embedding")
        return ev(t, [eval_ground(x, a, call=call, ev=ev) for x in t.inputs])
    raise SynthError(f"cannot evaluate {t}")


# ---------------------------------------------------------------------------
# linear forms and normalization

LinForm = tuple[dict, int]


def linear_form(t: Term, atom: Callable[[Term], LinForm] | None = None) -> LinForm:
    """Write an Int term as ({atom: coefficient}, constant).

    Variables are atoms; any other non-arithmetic node is handed to `atom`.
    """
    if isinstance(t, IntLit):
        return {}, t.value
    if isinstance(t, Var):
        return {t: 1}, 0
    if isinstance(t, App) and t.op in ARITH_OPS:
        parts = [linear_form(a, atom) for a in t.args]
        if t.op == "+":
            return _lin_sum(parts, [1] * len(parts))
        if t.op == "-":
            if len(parts) == 1:
                return _lin_sum(parts, [-1])
            return _lin_sum(parts, [1] + [-1] * (len(parts) - 1))
        coef, rest = 1, None
        for m, k in parts:
            if m:
                if rest is not None:
                    raise NonlinearTerm(f"nonlinear product {t}")
                rest = (m, k)
            else:
                coef *= k
        if rest is None:
            return {}, coef
        return _lin_sum([rest], [coef])
    if atom is None:
        raise SynthError(f"not a linear arithmetic term: {t}")
    return atom(t)


def _lin_sum(parts, scales) -> LinForm:
    out: dict = {}
    const = 0
    for (m, k), s in zip(parts, scales):
        const += s * k
        for x, c in m.items():
            v = out.get(x, 0) + s * c
            if v:
                out[x] = v
            else:
                out.pop(x, None)
    return out, const


def term_key(t: Term) -> str:
    return str(t)


def _sorted_items(m: dict) -> list:
    return sorted(m.items(), key=lambda kv: term_key(kv[0]))


def render_linear(m: dict, k: int) -> Term:
    pieces: list[Term] = []
    for x, c in _sorted_items(m):
        pieces.append(x if c == 1 else App("*", (IntLit(c), x)))
    if k or not pieces:
        pieces.append(IntLit(k))
    return pieces[0] if len(pieces) == 1 else App("+", pieces)


def _norm_atom_int(t: Term) -> LinForm:
    if isinstance(t, App) and t.op == "ite":
        n = _norm_ite(t)
        if isinstance(n, App) and n.op == "ite":
            return {n: 1}, 0
        return linear_form(n, _norm_atom_int)
    if isinstance(t, Call):
        return {Call(t.name, tuple(normalize(a) for a in t.args), t.sort): 1}, 0
    return {t: 1}, 0


def _norm_lin(t: Term) -> LinForm:
    return linear_form(t, _norm_atom_int)


def _norm_ite(t: App) -> Term:
    c = _nb(t.args[0], True)
    a = normalize(t.args[1])
    b = normalize(t.args[2])
    if isinstance(c, BoolLit):
        return a if c.value else b
    if a == b:
        return a
    if isinstance(c, App) and c.op == "not":
        c, a, b = c.args[0], b, a
    return App("ite", (c, a, b))


@lru_cache(maxsize=1 << 16)
def normalize(t: Term) -> Term:
    """Canonical form; equal normal forms imply equivalent terms.

    Int terms become a sorted sum of monomials plus a constant.  Bool terms
    become negation normal form over atoms `(<= c sum)` and `(= c sum)` with
    gcd-reduced coefficients and sorted, duplicate-free and/or arguments.
    """
    if t.sort == BOOL:
        return _nb(t, True)
    if t.sort == INT:
        m, k = _norm_lin(t)
        return render_linear(m, k)
    return t


def _nb(t: Term, pos: bool) -> Term:
    if isinstance(t, BoolLit):
        return BoolLit(t.value == pos)
    if isinstance(t, (Var, Eval, Cons)):
        return t if pos else App("not", (t,))
    if isinstance(t, Call):
        t = Call(t.name, tuple(normalize(a) for a in t.args), t.sort)
        return t if pos else App("not", (t,))
    op, args = t.op, t.args
    if op == "not":
        return _nb(args[0], not pos)
    if op in ("and", "or"):
        eff = op if pos else ("or" if op == "and" else "and")
        return junction(eff, [_nb(a, pos) for a in args])
    if op == "=>":
        if pos:
            return junction("or", [_nb(args[0], False), _nb(args[1], True)])
        return junction("and", [_nb(args[0], True), _nb(args[1], False)])
    if op == "ite":
        c, a, b = args
        return junction(
            "or",
            [
                junction("and", [_nb(c, True), _nb(a, pos)]),
                junction("and", [_nb(c, False), _nb(b, pos)]),
            ],
        )
    if op == "=":
        a, b = args
        if a.sort == BOOL:
            if pos:
                return junction(
                    "and",
                    [junction("or", [_nb(a, False), _nb(b, True)]),
                     junction("or", [_nb(a, True), _nb(b, False)])],
                )
            return junction(
                "and",
                [junction("or", [_nb(a, True), _nb(b, True)]),
                 junction("or", [_nb(a, False), _nb(b, False)])],
            )
        return _eq_atom(a, b, pos)
    if op in CMP_OPS:
        a, b = args
        if op == "<=":
            return _le_atom(a, b, 0, pos)
        if op == "<":
            return _le_atom(a, b, 1, pos)
        if op == ">=":
            return _le_atom(b, a, 0, pos)
        return _le_atom(b, a, 1, pos)
    raise SynthError(f"cannot normalize {t}")


def _le_atom(lhs: Term, rhs: Term, strict: int, pos: bool) -> Term:
    # lhs + strict <= rhs  <=>  sum(m) >= -k
    m, k = _lin_sum([_norm_lin(rhs), _norm_lin(lhs)], [1, -1])
    k -= strict
    if not m:
        return BoolLit((k >= 0) == pos)
    g = 0
    for c in m.values():
        g = gcd(g, c)
    m = {x: c // g for x, c in m.items()}
    bound = -(k // g)  # ceil(-k / g)
    if pos:
        return App("<=", (IntLit(bound), render_linear(m, 0)))
    return App("<=", (IntLit(1 - bound), render_linear({x: -c for x, c in m.items()}, 0)))


def _eq_atom(lhs: Term, rhs: Term, pos: bool) -> Term:
    m, k = _lin_sum([_norm_lin(lhs), _norm_lin(rhs)], [1, -1])
    if not m:
        return BoolLit((k == 0) == pos)
    g = 0
    for c in m.values():
        g = gcd(g, c)
    if k % g:
        return BoolLit(not pos)
    m = {x: c // g for x, c in m.items()}
    c = -k // g
    if _sorted_items(m)[0][1] < 0:
        m = {x: -v for x, v in m.items()}
        c = -c
    atom = App("=", (IntLit(c), render_linear(m, 0)))
    return atom if pos else App("not", (atom,))


def complement(t: Term) -> Term | None:
    """Normal form of the negation of a normalized literal, if cheap to compute."""
    if isinstance(t, BoolLit):
        return BoolLit(not t.value)
    if isinstance(t, App):
        if t.op == "not":
            return t.args[0]
        if t.op == "<=" and isinstance(t.args[0], IntLit):
            c = t.args[0].value
            m, _ = _norm_lin(t.args[1])
            return App("<=", (IntLit(1 - c), render_linear({x: -v for x, v in m.items()}, 0)))
        if t.op == "=" and isinstance(t.args[0], IntLit):
            return App("not", (t,))
        return None
    if t.sort == BOOL:
        return App("not", (t,))
    return None


def junction(op: str, kids: Iterable[Term]) -> Term:
    """Flattened, sorted, duplicate-free and/or with constant absorption."""
    unit, zero = (TRUE, FALSE) if op == "and" else (FALSE, TRUE)
    seen: dict[Term, None] = {}
    todo = list(kids)
    while todo:
        k = todo.pop(0)
        if isinstance(k, App) and k.op == op:
            todo[:0] = list(k.args)
            continue
        if k == zero:
            return zero
        if k == unit:
            continue
        seen[k] = None
    for k in seen:
        c = complement(k)
        if c is not None and c in seen:
            return zero
    if not seen:
        return unit
    items = sorted(seen, key=term_key)
    return items[0] if len(items) == 1 else App(op, items)


# ---------------------------------------------------------------------------
# solution simplification


def simplify_solution(fn: Lambda, budget: int = 10**5) -> Lambda:
    """Rewrite to a fixpoint with constant folding, ite pruning and equality
    resolution along ite paths.  Never returns a larger term."""
    steps = [budget]
    body = fn.body
    while steps[0] > 0:
        new = _simp(body, frozenset(), {}, steps)
        if new == body:
            break
        body = new
    if node_count(body) > node_count(fn.body):
        body = fn.body
    return Lambda(fn.params, body)


def _conjuncts(nt: Term) -> list[Term]:
    if isinstance(nt, App) and nt.op == "and":
        return list(nt.args)
    return [nt]


def _path_equalities(lits: Iterable[Term], eqs: dict) -> dict:
    out = dict(eqs)
    for lt in lits:
        if not (isinstance(lt, App) and lt.op == "="):
            continue
        c = lt.args[0].value
        m, k = _norm_lin(lt.args[1])
        items = _sorted_items(m)
        if not all(isinstance(x, Var) for x, _ in items):
            continue
        if len(items) == 1 and items[0][1] == 1:
            out.setdefault(items[0][0].name, IntLit(c))
        elif len(items) == 2 and c == 0 and sorted(v for _, v in items) == [-1, 1]:
            # x - y = 0: replace the later variable by the earlier one
            keep, drop = items[0][0], items[1][0]
            if drop.name not in out and keep.name not in out:
                out[drop.name] = keep
    return out


def _simp(t: Term, facts: frozenset, eqs: dict, steps: list) -> Term:
    steps[0] -= 1
    if steps[0] <= 0:
        return t
    if isinstance(t, Var):
        if t.name in eqs and eqs[t.name].sort == t.sort:
            return eqs[t.name]
        if t.sort == BOOL:
            if t in facts:
                return TRUE
            if App("not", (t,)) in facts:
                return FALSE
        return t
    if isinstance(t, (IntLit, BoolLit)) or not isinstance(t, App):
        return t
    op = t.op
    if op == "ite":
        c = _simp(t.args[0], facts, eqs, steps)
        if isinstance(c, App) and c.op == "not":
            c, a0, b0 = c.args[0], t.args[2], t.args[1]
        else:
            a0, b0 = t.args[1], t.args[2]
        nc = normalize(c)
        if isinstance(nc, BoolLit):
            return _simp(a0 if nc.value else b0, facts, eqs, steps)
        if nc in facts:
            return _simp(a0, facts, eqs, steps)
        cc = complement(nc)
        if cc is not None and cc in facts:
            return _simp(b0, facts, eqs, steps)
        then_lits = _conjuncts(nc)
        a = _simp(a0, facts | set(then_lits), _path_equalities(then_lits, eqs), steps)
        if cc is not None:
            else_lits = [cc]
        elif isinstance(nc, App) and nc.op == "or":
            else_lits = [x for x in (complement(d) for d in nc.args) if x is not None]
        else:
            else_lits = []
        b = _simp(b0, facts | set(else_lits), _path_equalities(else_lits, eqs), steps)
        if normalize(a) == normalize(b):
            return a if node_count(a) <= node_count(b) else b
        return App("ite", (c, a, b))
    if op in ("and", "or"):
        unit, zero = (TRUE, FALSE) if op == "and" else (FALSE, TRUE)
        kids: list[Term] = []
        norms: dict[Term, None] = {}
        todo = [_simp(a, facts, eqs, steps) for a in t.args]
        while todo:
            k = todo.pop(0)
            if isinstance(k, App) and k.op == op:
                todo[:0] = list(k.args)
                continue
            nk = normalize(k)
            if nk == zero:
                return zero
            if nk == unit or nk in norms:
                continue
            norms[nk] = None
            kids.append(k)
        for nk in norms:
            c = complement(nk)
            if c is not None and c in norms:
                return zero
        if not kids:
            return unit
        return kids[0] if len(kids) == 1 else App(op, kids)
    if op == "not":
        k = _simp(t.args[0], facts, eqs, steps)
        if isinstance(k, BoolLit):
            return BoolLit(not k.value)
        if isinstance(k, App) and k.op == "not":
            return k.args[0]
        return with_args(t, (k,))
    new = with_args(t, tuple(_simp(a, facts, eqs, steps) for a in t.args))
    n = normalize(new)
    if isinstance(n, (IntLit, BoolLit)):
        return n
    if new.sort == BOOL:
        if n in facts:
            return TRUE
        c = complement(n)
        if c is not None and c in facts:
            return FALSE
    return new


# ---------------------------------------------------------------------------
# budgets


@dataclass
class Limits:
    """Resource limits shared by the strategies.  All counts are per call."""

    timeout: float | None = None
    max_size: int = 8
    candidates: int = 10**6
    si_iterations: int = 10**4
    enum_values: int = 10**5
    bb_nodes: int = 10**6
    cancel: threading.Event | None = None
    deadline: float | None = field(default=None, repr=False)

    def started(self) -> Limits:
        """Copy with the wall-clock deadline fixed from now."""
        out = Limits(**{k: getattr(self, k) for k in self.__dataclass_fields__})
        if self.timeout is not None and self.deadline is None:
            out.deadline = time.monotonic() + self.timeout
        return out

    def check(self) -> None:
        if self.cancel is not None and self.cancel.is_set():
            raise ResourceOut("cancelled")
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise ResourceOut("timeout")
