"""Grammars embedded as datatype families.

Each nonterminal becomes a datatype and each production a constructor whose
*analogue* is the theory symbol it stands for.  Programs of the grammar are
`Cons` terms; `analogue` maps them back into the theory and `eval_program`
interprets them directly.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Sequence

from .core import (
    BOOL,
    INT,
    BUILTIN_OPS,
    App,
    BoolLit,
    Cons,
    Eval,
    IntLit,
    Sort,
    SynthError,
    Term,
    Var,
    apply_op,
    datatype_sort,
    eval_ground,
)
from .frontend import GrammarSpec, Nonterminal, Production


class UnsupportedProduction(SynthError):
    pass


_OP_NAMES = {
    "+": "plus", "*": "times", "<=": "leq", "<": "lt", ">=": "geq", ">": "gt",
    "=": "eq", "and": "and", "or": "or", "not": "not", "=>": "implies", "ite": "if",
}


@dataclass(frozen=True)
class Constructor:
    name: str
    arg_sorts: tuple[Sort, ...]
    kind: str  # analogue kind: "param", "literal" or "op"
    value: object  # parameter name, literal value or operator
    sort: Sort

    @property
    def arity(self) -> int:
        return len(self.arg_sorts)


@dataclass(frozen=True)
class DatatypeDecl:
    sort: Sort
    theory_sort: Sort
    constructors: tuple[Constructor, ...]


@dataclass(frozen=True)
class GrammarEmbedding:
    datatypes: tuple[DatatypeDecl, ...]
    start: Sort
    param_names: tuple[str, ...]
    param_sorts: tuple[Sort, ...] = ()
    _by_sort: dict = field(default=None, compare=False, repr=False)
    _by_name: dict = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_by_sort", {d.sort: d for d in self.datatypes})
        names = {}
        for d in self.datatypes:
            for c in d.constructors:
                if c.name in names:
                    raise SynthError(f"duplicate constructor {c.name}")
                names[c.name] = c
        object.__setattr__(self, "_by_name", names)
        if self.start not in self._by_sort:
            raise SynthError(f"start sort {self.start} is not in the family")

    def decl(self, sort: Sort) -> DatatypeDecl:
        return self._by_sort[sort]

    def constructor(self, name: str) -> Constructor:
        return self._by_name[name]

    def theory_sort(self, sort: Sort) -> Sort:
        return self._by_sort[sort].theory_sort

    def sorts(self) -> list[Sort]:
        return [d.sort for d in self.datatypes]

    def has_op(self, sort: Sort, op: str) -> bool:
        return any(c.kind == "op" and c.value == op for c in self.decl(sort).constructors)

    def __hash__(self):
        return hash((self.datatypes, self.start, self.param_names))


def _ctor_name(p: Production, arity: int) -> str:
    if p.kind == "param":
        return str(p.value)
    if p.kind == "literal":
        v = p.value
        if isinstance(v, bool):
            return "true" if v else "false"
        if v in (0, 1):
            return "zero" if v == 0 else "one"
        return f"lit{v}" if v >= 0 else f"litm{-v}"
    if p.value == "-":
        return "minus" if arity >= 2 else "neg"
    return _OP_NAMES[p.value]


def embed(g: GrammarSpec, params: Sequence[tuple[str, Sort]]) -> GrammarEmbedding:
    """One datatype per nonterminal, one constructor per production."""
    sorts = {nt.name: datatype_sort(nt.name) for nt in g.nonterminals}
    param_sorts = dict(params)
    used: set[str] = set()
    decls = []
    for nt in g.nonterminals:
        ctors = []
        for p in nt.productions:
            if p.kind == "param":
                if p.value not in param_sorts:
                    raise UnsupportedProduction(f"unknown parameter {p.value}")
                arg_sorts: tuple[Sort, ...] = ()
            elif p.kind == "literal":
                arg_sorts = ()
            elif p.kind == "op":
                if p.value not in BUILTIN_OPS or p.value == "*":
                    raise UnsupportedProduction(f"operator {p.value}")
                try:
                    arg_sorts = tuple(sorts[a] for a in p.args)
                except KeyError as e:
                    raise UnsupportedProduction(f"unknown nonterminal {e}") from None
            else:
                raise UnsupportedProduction(f"production kind {p.kind}")
            base = _ctor_name(p, len(arg_sorts))
            name = base
            clash = used if p.kind == "param" else used | param_sorts.keys()
            if name in clash:
                name = f"{base}_{nt.name}"
            i = 1
            while name in used:
                i += 1
                name = f"{base}_{nt.name}{i}"
            used.add(name)
            ctors.append(Constructor(name, arg_sorts, p.kind, p.value, sorts[nt.name]))
        decls.append(DatatypeDecl(sorts[nt.name], nt.sort, tuple(ctors)))
    return GrammarEmbedding(
        tuple(decls),
        sorts[g.start],
        tuple(n for n, _ in params),
        tuple(s for _, s in params),
    )


# ---------------------------------------------------------------------------
# analogue and evaluation


def _param_index(e: GrammarEmbedding, name: str) -> int:
    return e.param_names.index(name)


def analogue(d: Term, e: GrammarEmbedding) -> Term:
    """The theory term a program stands for."""
    c = e.constructor(d.name)
    if c.kind == "param":
        return Var(c.value, e.param_sorts[_param_index(e, c.value)] if e.param_sorts else
                   e.theory_sort(c.sort))
    if c.kind == "literal":
        return BoolLit(c.value) if isinstance(c.value, bool) else IntLit(c.value)
    return App(c.value, tuple(analogue(a, e) for a in d.args))


def eval_program(d: Term, inputs: Sequence, e: GrammarEmbedding):
    """Interpret program `d` on concrete inputs, one step per constructor."""
    c = e.constructor(d.name)
    if c.kind == "param":
        return inputs[_param_index(e, c.value)]
    if c.kind == "literal":
        return c.value
    if c.value == "ite":
        if eval_program(d.args[0], inputs, e):
            return eval_program(d.args[1], inputs, e)
        return eval_program(d.args[2], inputs, e)
    return apply_op(c.value, [eval_program(a, inputs, e) for a in d.args])


def eval_with_programs(t: Term, a: dict, e: GrammarEmbedding):
    """`eval_ground` extended to evaluation-operator nodes."""

    def ev(node: Eval, vals: list):
        return eval_program(node.program, vals, e)

    return eval_ground(t, a, ev=ev)


def term_size(d: Term) -> int:
    """Number of non-nullary constructor applications."""
    if not d.args:
        return 0
    return 1 + sum(term_size(a) for a in d.args)


def conforms(t: Term, e: GrammarEmbedding, sort: Sort | None = None) -> Term | None:
    """Parse a theory term back into a program of `sort`, or None."""
    sort = sort or e.start
    memo: dict = {}

    def go(u: Term, s: Sort) -> Term | None:
        key = (u, s)
        if key in memo:
            return memo[key]
        memo[key] = None
        found = None
        for c in e.decl(s).constructors:
            if c.kind == "param":
                ok = isinstance(u, Var) and u.name == c.value
            elif c.kind == "literal":
                ok = isinstance(u, (IntLit, BoolLit)) and u.sort == e.theory_sort(s) and u.value == c.value
            else:
                ok = isinstance(u, App) and u.op == c.value and len(u.args) == c.arity
            if not ok:
                continue
            kids = [go(a, s2) for a, s2 in zip(u.args, c.arg_sorts)]
            if all(k is not None for k in kids):
                found = Cons(c.name, kids, s)
                break
        memo[key] = found
        return found

    return go(t, sort)


# ---------------------------------------------------------------------------
# enumeration


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """All ways to write `total` as an ordered sum of `parts` naturals, lexicographically."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


class Enumerator:
    """Size-ordered generation of the programs of an embedding.

    Within one size: constructors in declaration order, then argument size
    compositions in lexicographic order, then argument values recursively in
    the same order (first argument varying slowest).
    """

    CACHE_LIMIT = 50_000

    def __init__(self, e: GrammarEmbedding):
        self.e = e
        self._cache: dict[tuple[Sort, int], list[Term]] = {}
        self._count = lru_cache(maxsize=None)(self._count_uncached)

    def count(self, sort: Sort, size: int) -> int:
        return self._count(sort, size)

    def _count_uncached(self, sort: Sort, size: int) -> int:
        n = 0
        for c in self.e.decl(sort).constructors:
            if c.arity == 0:
                n += size == 0
                continue
            if size == 0:
                continue
            for comp in _compositions(size - 1, c.arity):
                prod = 1
                for s2, k in zip(c.arg_sorts, comp):
                    prod *= self._count(s2, k)
                    if not prod:
                        break
                n += prod
        return n

    def values(self, sort: Sort, size: int) -> Iterator[Term]:
        """All programs of `sort` with exactly `size` non-nullary nodes."""
        key = (sort, size)
        cached = self._cache.get(key)
        if cached is not None:
            return iter(cached)
        if self.count(sort, size) <= self.CACHE_LIMIT:
            vals = list(self._generate(sort, size))
            self._cache[key] = vals
            return iter(vals)
        return self._generate(sort, size)

    def _generate(self, sort: Sort, size: int) -> Iterator[Term]:
        if not self.count(sort, size):
            return
        for c in self.e.decl(sort).constructors:
            if c.arity == 0:
                if size == 0:
                    yield Cons(c.name, (), sort)
                continue
            if size == 0:
                continue
            for comp in _compositions(size - 1, c.arity):
                if any(not self.count(s2, k) for s2, k in zip(c.arg_sorts, comp)):
                    continue
                for args in self._products(c.arg_sorts, comp):
                    yield Cons(c.name, args, sort)

    def _products(self, sorts, comp) -> Iterator[tuple[Term, ...]]:
        if not sorts:
            yield ()
            return
        for first in self.values(sorts[0], comp[0]):
            for rest in self._products(sorts[1:], comp[1:]):
                yield (first,) + rest

    def max_size(self, sort: Sort) -> int | None:
        """Largest program size of `sort`, or None when unbounded."""
        return _max_sizes(self.e).get(sort)

    def stream(self, sort: Sort, max_size: int | None = None) -> Iterator[Term]:
        """Every program of `sort` exactly once, in nondecreasing size."""
        bound = self.max_size(sort)
        size = 0
        while (bound is None or size <= bound) and (max_size is None or size <= max_size):
            yield from self.values(sort, size)
            size += 1


def enumerate_programs(e: GrammarEmbedding, sort: Sort | None = None,
                       max_size: int | None = None) -> Iterator[Term]:
    return Enumerator(e).stream(sort or e.start, max_size)


@lru_cache(maxsize=64)
def _max_sizes(e: GrammarEmbedding) -> dict[Sort, int | None]:
    """Per-sort maximum program size; missing or None means unbounded."""
    # productive sorts have at least one finite value
    productive: set[Sort] = set()
    changed = True
    while changed:
        changed = False
        for d in e.datatypes:
            if d.sort in productive:
                continue
            if any(all(s in productive for s in c.arg_sorts) for c in d.constructors):
                productive.add(d.sort)
                changed = True
    memo: dict[Sort, int | None] = {}
    visiting: set[Sort] = set()
    unbounded = object()

    def go(s: Sort):
        if s in memo:
            return memo[s]
        if s in visiting:
            return unbounded
        visiting.add(s)
        best = -1
        for c in e.decl(s).constructors:
            if not all(a in productive for a in c.arg_sorts):
                continue
            if c.arity == 0:
                best = max(best, 0)
                continue
            total = 1
            for a in c.arg_sorts:
                r = go(a)
                if r is unbounded:
                    visiting.discard(s)
                    memo[s] = unbounded
                    return unbounded
                total += r
            best = max(best, total)
        visiting.discard(s)
        memo[s] = best
        return best

    out = {}
    for d in e.datatypes:
        r = go(d.sort)
        out[d.sort] = None if r is unbounded else r
    return out


def is_finite(e: GrammarEmbedding, sort: Sort | None = None) -> bool:
    return _max_sizes(e).get(sort or e.start) is not None


def default_grammar(params: Sequence[tuple[str, Sort]], ret: Sort) -> GrammarSpec:
    """Unrestricted linear grammar used when a problem carries none."""
    int_prods = [Production("param", n) for n, s in params if s != BOOL]
    int_prods += [Production("literal", 0), Production("literal", 1),
                  Production("op", "+", ("I", "I")), Production("op", "-", ("I", "I")),
                  Production("op", "ite", ("B", "I", "I"))]
    bool_prods = [Production("param", n) for n, s in params if s == BOOL]
    bool_prods += [Production("literal", True), Production("literal", False),
                   Production("op", "<=", ("I", "I")), Production("op", "=", ("I", "I")),
                   Production("op", "and", ("B", "B")), Production("op", "not", ("B",))]
    i = Nonterminal("I", INT, tuple(int_prods))
    b = Nonterminal("B", BOOL, tuple(bool_prods))
    return GrammarSpec((b, i) if ret == BOOL else (i, b))
