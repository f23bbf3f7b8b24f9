"""Rewriting grammar-free solutions into the grammar.

`rcon` rebuilds a normalized term top-down from constructors whose
analogues can produce it, and reports the subterms it could not cover.
The driver then enumerates grammar programs for the datatypes of those
subterms and files each program under its normal form; whenever one lands
on an outstanding subterm, `rcon` runs again.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .core import (
    BOOL,
    App,
    BoolLit,
    IntLit,
    Lambda,
    Limits,
    ResourceOut,
    Sort,
    SynthError,
    Term,
    Var,
    linear_form,
    node_count,
    normalize,
    render_linear,
)
from .grammar import Constructor, Enumerator, GrammarEmbedding, analogue, conforms

MAX_CANDIDATES = 8

Node = tuple  # (normal form, datatype sort)


@dataclass
class ReconState:
    e: GrammarEmbedding
    a_set: dict = field(default_factory=dict)  # (normal form, sort) -> conforming term
    pending: dict = field(default_factory=dict)  # unresolved node -> child nodes
    solved: dict = field(default_factory=dict)  # node -> conforming term (rcon results)
    failed: dict = field(default_factory=dict)  # node -> (term, obligations)
    cursors: dict = field(default_factory=dict)  # sort -> program iterator
    _active: set = field(default_factory=set)

    def add(self, t: Term, s: Term, d: Sort) -> bool:
        """File `s` (conforming to `d`) under normal form `t`.  True if new."""
        key = (t, d)
        if key in self.a_set:
            return False
        self.a_set[key] = s
        return True


def _ctors(e: GrammarEmbedding, d: Sort, op: str, arity: int) -> list[Constructor]:
    return [c for c in e.decl(d).constructors
            if c.kind == "op" and c.value == op and c.arity == arity]


def _literals(e: GrammarEmbedding, d: Sort) -> list[int]:
    return [c.value for c in e.decl(d).constructors
            if c.kind == "literal" and not isinstance(c.value, bool)]


def _split_sum(t: Term):
    """Monomials as (atom, coefficient) in rendering order, and the constant."""
    m, k = linear_form(t, lambda a: ({a: 1}, 0))
    items = sorted(m.items(), key=lambda kv: str(kv[0]))
    return items, k


def _sum(items, k: int = 0) -> Term:
    return normalize(render_linear(dict(items), k))


def _int_candidates(t: Term, d: Sort, e: GrammarEmbedding) -> list[tuple]:
    """Ways to write Int normal form `t` as one constructor over normal forms."""
    out: list[tuple] = []
    if isinstance(t, App) and t.op == "ite":
        c, a, b = t.args
        for ctor in _ctors(e, d, "ite", 3):
            out.append((ctor, (c, a, b)))
            out.append((ctor, (normalize(App("not", (c,))), b, a)))
        return out
    if isinstance(t, Var):
        return out
    items, k = _split_sum(t)
    pieces = [_sum([it]) for it in items] + ([IntLit(k)] if k else [])
    plus = _ctors(e, d, "+", 2)
    minus = _ctors(e, d, "-", 2)
    neg = _ctors(e, d, "-", 1)
    if len(pieces) >= 2:
        for ctor in plus:
            out.append((ctor, (pieces[0], _sum(items[1:], k))))
            if len(pieces) > 2:
                out.append((ctor, (normalize(App("+", tuple(pieces[:-1]))), pieces[-1])))
        pos = [(x, c) for x, c in items if c > 0]
        negs = [(x, -c) for x, c in items if c < 0]
        if (negs or k < 0) and (pos or k > 0):
            p_part = _sum(pos, max(k, 0))
            n_part = _sum(negs, max(-k, 0))
            for ctor in minus:
                out.append((ctor, (p_part, n_part)))
    elif items and not k:
        (x, c), = items
        if c < 0:
            for ctor in neg:
                out.append((ctor, (_sum([(x, -c)]),)))
            for ctor in minus:
                if 0 in _literals(e, ctor.arg_sorts[0]):
                    out.append((ctor, (IntLit(0), _sum([(x, -c)]))))
    elif isinstance(t, IntLit):
        v = t.value
        for ctor in plus:
            lits = [x for x in _literals(e, ctor.arg_sorts[0]) if x > 0] if v > 0 else \
                [x for x in _literals(e, ctor.arg_sorts[0]) if x < 0]
            lits = [x for x in lits if abs(x) <= abs(v) and x != v]
            if lits:
                step = max(lits, key=abs)
                out.append((ctor, (IntLit(step), IntLit(v - step))))
        for ctor in minus:
            lits = [x for x in _literals(e, ctor.arg_sorts[1]) if x > 0]
            if v < 0 and lits:
                step = min(max(lits), -v)
                out.append((ctor, (IntLit(v + step), IntLit(step))))
        if v < 0:
            for ctor in neg:
                out.append((ctor, (IntLit(-v),)))
    return out


def _atom_sides(t: App):
    """(N, P) with the atom reading `N + c <= P` (or `N + c = P`) and c separate."""
    items, _ = _split_sum(t.args[1])
    pos = [(x, c) for x, c in items if c > 0]
    negs = [(x, -c) for x, c in items if c < 0]
    return negs, pos, t.args[0].value


def _bool_candidates(t: Term, d: Sort, e: GrammarEmbedding) -> list[tuple]:
    out: list[tuple] = []
    if isinstance(t, App) and t.op == "<=" and isinstance(t.args[0], IntLit):
        negs, pos, c = _atom_sides(t)
        for ctor in _ctors(e, d, "<=", 2):
            out.append((ctor, (_sum(negs, c), _sum(pos))))
            if c:
                out.append((ctor, (_sum(negs), _sum(pos, -c))))
        for ctor in _ctors(e, d, ">=", 2):
            out.append((ctor, (_sum(pos), _sum(negs, c))))
        for ctor in _ctors(e, d, "<", 2):
            out.append((ctor, (_sum(negs, c - 1), _sum(pos))))
        for ctor in _ctors(e, d, ">", 2):
            out.append((ctor, (_sum(pos), _sum(negs, c - 1))))
    elif isinstance(t, App) and t.op == "=" and isinstance(t.args[0], IntLit):
        negs, pos, c = _atom_sides(t)
        for ctor in _ctors(e, d, "=", 2):
            out.append((ctor, (_sum(negs, c), _sum(pos))))
            out.append((ctor, (_sum(pos), _sum(negs, c))))
    elif isinstance(t, App) and t.op in ("and", "or"):
        kids = t.args
        for ctor in _ctors(e, d, t.op, 2):
            rest = normalize(App(t.op, kids[1:])) if len(kids) > 2 else kids[1]
            out.append((ctor, (kids[0], rest)))
        for ctor in _ctors(e, d, t.op, len(kids)) if len(kids) != 2 else ():
            out.append((ctor, tuple(kids)))
        if t.op == "or":
            for ctor in _ctors(e, d, "=>", 2):
                rest = normalize(App("or", kids[1:])) if len(kids) > 2 else kids[1]
                out.append((ctor, (normalize(App("not", (kids[0],))), rest)))
    for ctor in _ctors(e, d, "not", 1):
        out.append((ctor, (normalize(App("not", (t,))),)))
    return out


def _candidates(t: Term, d: Sort, e: GrammarEmbedding) -> list[tuple]:
    if e.theory_sort(d) == BOOL:
        found = _bool_candidates(t, d, e)
    else:
        found = _int_candidates(t, d, e)
    return found[:MAX_CANDIDATES]


def _nullary(t: Term, d: Sort, e: GrammarEmbedding) -> Term | None:
    for c in e.decl(d).constructors:
        if c.kind == "param" and isinstance(t, Var) and t.name == c.value:
            return t
        if c.kind == "literal" and isinstance(t, (IntLit, BoolLit)) and \
                isinstance(c.value, bool) == isinstance(t, BoolLit) and c.value == t.value:
            return t
    return None


def rcon(t: Term, d: Sort, state: ReconState) -> tuple[Term, frozenset]:
    """(s, u): `s` is equivalent to normal form `t`; `u` lists the
    (subterm, datatype) pairs of `s` that do not conform yet."""
    node = (t, d)
    if node in state.a_set:
        return state.a_set[node], frozenset()
    if node in state.solved:
        return state.solved[node], frozenset()
    if node in state.failed:
        return state.failed[node]
    hit = _nullary(t, d, state.e)
    if hit is not None:
        state.solved[node] = hit
        return hit, frozenset()
    fail = (t, frozenset({node}))
    if node in state._active:
        return fail
    state._active.add(node)
    try:
        best_ok = None
        best_partial = None
        for ctor, kids in _candidates(t, d, state.e):
            built = App(ctor.value, kids)
            if normalize(built) != t:
                continue
            parts = [rcon(k, s2, state) for k, s2 in zip(kids, ctor.arg_sorts)]
            s = App(ctor.value, tuple(p[0] for p in parts))
            u = frozenset().union(*(p[1] for p in parts))
            if not u:
                if best_ok is None or node_count(s) < node_count(best_ok):
                    best_ok = s
            elif best_partial is None or len(u) < len(best_partial[1]):
                best_partial = (s, u)
    finally:
        state._active.discard(node)
    if best_ok is not None:
        state.solved[node] = best_ok
        state.pending.pop(node, None)
        return best_ok, frozenset()
    result = best_partial if best_partial is not None else fail
    state.failed[node] = result
    state.pending[node] = tuple(sorted(result[1] - {node}, key=str))
    return result


def reconstruct_solution(fn: Lambda, e: GrammarEmbedding, limits: Limits | None = None,
                         with_program: bool = False):
    """An equivalent Lambda whose body is in the grammar's start datatype.

    Raises ResourceOut when the enumeration budget runs out first.
    """
    limits = (limits or Limits()).started()
    target = normalize(fn.body)
    state = ReconState(e)
    s, u = rcon(target, e.start, state)
    enum = Enumerator(e)
    spent = 0
    while u:
        # every pending node may be closed by a whole program, not just the leaves
        blocked = sorted({d for _, d in u} | {d for _, d in state.pending}, key=str)
        progressed = False
        for d in blocked:
            it = state.cursors.get(d)
            if it is None:
                it = state.cursors[d] = enum.stream(d)
            prog = next(it, None)
            if prog is None:
                continue
            progressed = True
            spent += 1
            if spent % 256 == 0:
                limits.check()
            if spent > limits.enum_values:
                raise ResourceOut("reconstruction budget")
            a = analogue(prog, e)
            key = normalize(a)
            if state.add(key, a, d) and (key, d) in state.pending:
                state.failed.clear()
                state.pending.clear()
                s, u = rcon(target, e.start, state)
                if not u:
                    break
        if not progressed:
            raise ResourceOut("grammar exhausted before reconstruction finished")
    program = conforms(s, e, e.start)
    if program is None or normalize(s) != target:
        raise SynthError(f"reconstruction produced a nonconforming term {s}")
    out = Lambda(fn.params, s)
    return (out, program) if with_program else out

