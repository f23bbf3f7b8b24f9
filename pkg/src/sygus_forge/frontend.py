"""Reader and printer for the supported SyGuS subset.

Accepted input::

    (set-logic LIA)
    (synth-fun f ((x Int) ...) Int ((S Int (...)) (C Bool (...))))
    (declare-var x Int) ...
    (constraint <term>) ...
    (check-synth)
"""
from __future__ import annotations

from dataclasses import dataclass

from .core import (
    BOOL,
    BUILTIN_OPS,
    INT,
    App,
    BoolLit,
    Call,
    IntLit,
    Lambda,
    NonlinearTerm,
    Sort,
    SortMismatch,
    SynthError,
    Term,
    Var,
    free_vars,
    subterms,
    well_sorted,
)


class SygusSyntaxError(SynthError):
    def __init__(self, line: int, col: int, message: str):
        self.line, self.col, self.message = line, col, message
        super().__init__(f"{line}:{col}: {message}")


class UnsupportedFeature(SygusSyntaxError):
    def __init__(self, name: str, line: int = 0, col: int = 0):
        self.name = name
        super().__init__(line, col, f"unsupported feature: {name}")


@dataclass(frozen=True)
class Production:
    kind: str  # "param", "literal" or "op"
    value: object  # parameter name, literal value or operator symbol
    args: tuple[str, ...] = ()  # nonterminal names, for "op"

    def __str__(self):
        if self.kind == "param":
            return str(self.value)
        if self.kind == "literal":
            return str(_literal_term(self.value))
        return f"({self.value} {' '.join(self.args)})"


@dataclass(frozen=True)
class Nonterminal:
    name: str
    sort: Sort
    productions: tuple[Production, ...]


@dataclass(frozen=True)
class GrammarSpec:
    nonterminals: tuple[Nonterminal, ...]

    @property
    def start(self) -> str:
        return self.nonterminals[0].name

    def get(self, name: str) -> Nonterminal:
        for nt in self.nonterminals:
            if nt.name == name:
                return nt
        raise KeyError(name)


@dataclass(frozen=True)
class Target:
    name: str
    params: tuple[tuple[str, Sort], ...]
    ret: Sort

    @property
    def arity(self) -> int:
        return len(self.params)


@dataclass(frozen=True)
class SynthProblem:
    logic: str
    target: Target
    universals: tuple[tuple[str, Sort], ...]
    constraints: tuple[Term, ...]
    grammar: GrammarSpec | None = None

    @property
    def spec(self) -> Term:
        cs = self.constraints
        if not cs:
            return BoolLit(True)
        return cs[0] if len(cs) == 1 else App("and", cs)


# ---------------------------------------------------------------------------
# s-expressions


class Atom(str):
    line: int
    col: int


class SList(list):
    line: int
    col: int


def _atom(text: str, line: int, col: int) -> Atom:
    a = Atom(text)
    a.line, a.col = line, col
    return a


def read_sexprs(text: str) -> list:
    out: list = []
    stack: list[SList] = []
    i, n = 0, len(text)
    line, col = 1, 1
    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line, col = line + 1, 1
            continue
        if ch.isspace():
            i += 1
            col += 1
            continue
        if ch == ";":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch == "(":
            lst = SList()
            lst.line, lst.col = line, col
            stack.append(lst)
            i += 1
            col += 1
            continue
        if ch == ")":
            if not stack:
                raise SygusSyntaxError(line, col, "unbalanced ')'")
            done = stack.pop()
            (stack[-1] if stack else out).append(done)
            i += 1
            col += 1
            continue
        if ch == '"':
            raise UnsupportedFeature("string literals", line, col)
        if ch == "|":
            raise UnsupportedFeature("quoted symbols", line, col)
        j = i
        while j < n and not text[j].isspace() and text[j] not in '();"':
            j += 1
        tok = _atom(text[i:j], line, col)
        (stack[-1] if stack else out).append(tok)
        col += j - i
        i = j
    if stack:
        s = stack[-1]
        raise SygusSyntaxError(s.line, s.col, "unbalanced '('")
    return out


def _loc(x) -> tuple[int, int]:
    return getattr(x, "line", 0), getattr(x, "col", 0)


def _err(x, message: str) -> SygusSyntaxError:
    return SygusSyntaxError(*_loc(x), message)


def _is_numeral(tok) -> bool:
    return isinstance(tok, Atom) and tok.isdigit()


def _literal_term(value) -> Term:
    return BoolLit(value) if isinstance(value, bool) else IntLit(value)


# ---------------------------------------------------------------------------
# parsing

_UNSUPPORTED_OPS = {"let", "div", "mod", "abs", "exists", "forall", "distinct", "xor"}
_UNSUPPORTED_COMMANDS = {
    "define-fun", "declare-fun", "synth-inv", "inv-constraint", "declare-primed-var",
    "set-option", "define-sort", "declare-datatypes", "check-synth-assuming",
}


def _sort(x) -> Sort:
    if isinstance(x, Atom):
        if x == "Int":
            return INT
        if x == "Bool":
            return BOOL
        raise UnsupportedFeature(f"sort {x}", *_loc(x))
    if len(x) and x[0] == "BitVec":
        raise UnsupportedFeature("bitvectors", *_loc(x))
    raise UnsupportedFeature(f"sort {_show(x)}", *_loc(x))


def _show(x) -> str:
    if isinstance(x, Atom):
        return str(x)
    return "(" + " ".join(_show(y) for y in x) + ")"


def _symbol(x, what: str) -> str:
    if not isinstance(x, Atom) or _is_numeral(x):
        raise _err(x, f"expected {what}")
    return str(x)


def _build_app(op: str, args: list[Term], x) -> Term:
    if op == "*" and sum(not isinstance(a, IntLit) for a in args) > 1:
        raise _err(x, "'*' needs a literal operand (nonlinear multiplication)")
    t = App(op, args)
    try:
        well_sorted(t)
    except SortMismatch as e:
        raise _err(x, f"ill-sorted '{op}' application: expected {e.expected}, found {e.found}") from None
    except NonlinearTerm as e:
        raise _err(x, str(e)) from None
    return t


def _term(x, scope: dict[str, Sort], target: Target | None) -> Term:
    if isinstance(x, Atom):
        if _is_numeral(x):
            return IntLit(int(x))
        if x == "true":
            return BoolLit(True)
        if x == "false":
            return BoolLit(False)
        if x in scope:
            return Var(str(x), scope[x])
        if target is not None and x == target.name and target.arity == 0:
            return Call(target.name, (), target.ret)
        if x.startswith("#b") or x.startswith("#x"):
            raise UnsupportedFeature("bitvectors", *_loc(x))
        raise _err(x, f"unknown symbol '{x}'")
    if not x:
        raise _err(x, "empty application")
    head = x[0]
    if not isinstance(head, Atom):
        raise _err(head, "expected an operator")
    if head in _UNSUPPORTED_OPS:
        raise UnsupportedFeature(str(head), *_loc(head))
    if head.startswith("bv"):
        raise UnsupportedFeature("bitvectors", *_loc(head))
    if head == "-" and len(x) == 2 and _is_numeral(x[1]):
        return IntLit(-int(x[1]))
    if target is not None and head == target.name:
        args = [_term(a, scope, target) for a in x[1:]]
        if len(args) != target.arity:
            raise _err(x, f"'{head}' expects {target.arity} arguments, got {len(args)}")
        for (_, s), a in zip(target.params, args):
            if a.sort != s:
                raise _err(x, f"argument of '{head}' has sort {a.sort}, expected {s}")
        return Call(target.name, args, target.ret)
    if head in BUILTIN_OPS:
        args = [_term(a, scope, target) for a in x[1:]]
        return _build_app(str(head), args, x)
    raise _err(head, f"unknown function '{head}'")


def _production(x, params: dict[str, Sort], nts: dict[str, Sort], nt_sort: Sort) -> Production:
    if isinstance(x, Atom):
        if _is_numeral(x):
            if nt_sort != INT:
                raise _err(x, f"Int literal in {nt_sort} nonterminal")
            return Production("literal", int(x))
        if x in ("true", "false"):
            if nt_sort != BOOL:
                raise _err(x, f"Bool literal in {nt_sort} nonterminal")
            return Production("literal", x == "true")
        if x in params:
            if params[x] != nt_sort:
                raise _err(x, f"parameter '{x}' has sort {params[x]}, expected {nt_sort}")
            return Production("param", str(x))
        if x in nts:
            raise UnsupportedFeature("nonterminal-only productions", *_loc(x))
        raise _err(x, f"unknown symbol '{x}' in grammar")
    if not x or not isinstance(x[0], Atom):
        raise _err(x, "malformed production")
    head = x[0]
    if head == "-" and len(x) == 2 and _is_numeral(x[1]):
        if nt_sort != INT:
            raise _err(x, f"Int literal in {nt_sort} nonterminal")
        return Production("literal", -int(x[1]))
    if head in ("Constant", "Variable", "InputVariable", "LocalVariable"):
        raise UnsupportedFeature(f"grammar term ({head} ...)", *_loc(head))
    if head in _UNSUPPORTED_OPS:
        raise UnsupportedFeature(str(head), *_loc(head))
    if head == "*":
        raise UnsupportedFeature("multiplication in grammars", *_loc(head))
    if head not in BUILTIN_OPS:
        raise _err(head, f"unknown operator '{head}' in grammar")
    args = []
    for a in x[1:]:
        if not isinstance(a, Atom) or a not in nts:
            raise UnsupportedFeature("operator arguments other than nonterminals", *_loc(a))
        args.append(str(a))
    probe = _build_app(str(head), [Var(f"%{a}", nts[a]) for a in args], x)
    if probe.sort != nt_sort:
        raise _err(x, f"production of sort {probe.sort} in {nt_sort} nonterminal")
    return Production("op", str(head), tuple(args))


def _grammar(x, target: Target) -> GrammarSpec:
    if isinstance(x, Atom) or not x:
        raise _err(x, "expected a grammar")
    params = dict(target.params)
    nts: dict[str, Sort] = {}
    for decl in x:
        if isinstance(decl, Atom) or len(decl) != 3:
            raise _err(decl, "expected (name sort (productions))")
        name = _symbol(decl[0], "nonterminal name")
        if name in nts or name in params or name == target.name:
            raise _err(decl[0], f"duplicate name '{name}'")
        nts[name] = _sort(decl[1])
    out = []
    for decl in x:
        name, sort, prods = str(decl[0]), nts[str(decl[0])], decl[2]
        if isinstance(prods, Atom) or not prods:
            raise _err(prods, f"nonterminal '{name}' needs productions")
        out.append(Nonterminal(name, sort, tuple(_production(p, params, nts, sort) for p in prods)))
    g = GrammarSpec(tuple(out))
    if g.nonterminals[0].sort != target.ret:
        raise _err(x, f"start nonterminal has sort {g.nonterminals[0].sort}, expected {target.ret}")
    return g


def parse(text: str) -> SynthProblem:
    """Parse and validate one synthesis problem."""
    logic = None
    target: Target | None = None
    grammar = None
    universals: dict[str, Sort] = {}
    constraints: list[Term] = []
    checked = False
    for cmd in read_sexprs(text):
        if isinstance(cmd, Atom) or not cmd or not isinstance(cmd[0], Atom):
            raise _err(cmd, "expected a command")
        head = cmd[0]
        if checked:
            raise _err(cmd, "commands after check-synth")
        if head == "set-logic":
            if len(cmd) != 2:
                raise _err(cmd, "set-logic takes one argument")
            if cmd[1] != "LIA":
                raise UnsupportedFeature(f"logic {cmd[1]}", *_loc(cmd[1]))
            logic = "LIA"
        elif head == "synth-fun":
            if target is not None:
                raise UnsupportedFeature("multiple synth-fun commands", *_loc(cmd))
            if len(cmd) not in (4, 5):
                raise _err(cmd, "synth-fun takes a name, parameters, a sort and an optional grammar")
            name = _symbol(cmd[1], "function name")
            if isinstance(cmd[2], Atom):
                raise _err(cmd[2], "expected a parameter list")
            params = []
            for p in cmd[2]:
                if isinstance(p, Atom) or len(p) != 2:
                    raise _err(p, "expected (name sort)")
                params.append((_symbol(p[0], "parameter name"), _sort(p[1])))
            if len({n for n, _ in params}) != len(params):
                raise _err(cmd[2], "duplicate parameter names")
            target = Target(name, tuple(params), _sort(cmd[3]))
            if len(cmd) == 5:
                grammar = _grammar(cmd[4], target)
        elif head == "declare-var":
            if len(cmd) != 3:
                raise _err(cmd, "declare-var takes a name and a sort")
            name = _symbol(cmd[1], "variable name")
            if name in universals or (target is not None and name == target.name):
                raise _err(cmd[1], f"'{name}' is already declared")
            universals[name] = _sort(cmd[2])
        elif head == "constraint":
            if len(cmd) != 2:
                raise _err(cmd, "constraint takes one term")
            if target is None:
                raise _err(cmd, "constraint before synth-fun")
            t = _term(cmd[1], universals, target)
            if t.sort != BOOL:
                raise _err(cmd[1], "constraints must be Bool")
            constraints.append(t)
        elif head == "check-synth":
            checked = True
        elif head in _UNSUPPORTED_COMMANDS:
            raise UnsupportedFeature(str(head), *_loc(head))
        else:
            raise _err(head, f"unknown command '{head}'")
    if logic is None:
        raise SygusSyntaxError(1, 1, "missing (set-logic LIA)")
    if target is None:
        raise SygusSyntaxError(1, 1, "missing synth-fun")
    if not checked:
        raise SygusSyntaxError(1, 1, "missing (check-synth)")
    return SynthProblem(logic, target, tuple(universals.items()), tuple(constraints), grammar)


def parse_term(text: str, scope: dict[str, Sort], target: Target | None = None) -> Term:
    sx = read_sexprs(text)
    if len(sx) != 1:
        raise SygusSyntaxError(1, 1, "expected exactly one term")
    return _term(sx[0], scope, target)


def parse_define_fun(text: str) -> tuple[str, Lambda]:
    sx = read_sexprs(text)
    if len(sx) != 1 or isinstance(sx[0], Atom) or len(sx[0]) != 5 or sx[0][0] != "define-fun":
        raise SygusSyntaxError(1, 1, "expected (define-fun name params sort body)")
    _, name, params, ret, body = sx[0]
    ps = []
    for p in params:
        if isinstance(p, Atom) or len(p) != 2:
            raise _err(p, "expected (name sort)")
        ps.append((str(p[0]), _sort(p[1])))
    t = _term(body, dict(ps), None)
    if t.sort != _sort(ret):
        raise _err(body, f"body has sort {t.sort}, expected {ret}")
    return str(name), Lambda(tuple(ps), t)


# ---------------------------------------------------------------------------
# printing


def print_grammar(g: GrammarSpec) -> str:
    rows = []
    for nt in g.nonterminals:
        rows.append(f"({nt.name} {nt.sort} ({' '.join(str(p) for p in nt.productions)}))")
    return "(" + "\n   ".join(rows) + ")"


def print_problem(p: SynthProblem) -> str:
    t = p.target
    params = " ".join(f"({n} {s})" for n, s in t.params)
    head = f"(synth-fun {t.name} ({params}) {t.ret}"
    if p.grammar is not None:
        head += "\n  " + print_grammar(p.grammar)
    lines = [f"(set-logic {p.logic})", head + ")"]
    lines += [f"(declare-var {n} {s})" for n, s in p.universals]
    lines += [f"(constraint {c})" for c in p.constraints]
    lines.append("(check-synth)")
    return "\n".join(lines) + "\n"


def print_solution(p: SynthProblem, s: Lambda) -> str:
    t = p.target
    params = " ".join(f"({n} {srt})" for n, srt in s.params)
    return f"(define-fun {t.name} ({params}) {t.ret} {s.body})"


def target_occurrences(t: Term, name: str) -> list[Call]:
    return [u for u in subterms(t) if isinstance(u, Call) and u.name == name]


def check_problem(p: SynthProblem) -> None:
    """Re-validate invariants of a problem built outside the parser."""
    names = {n for n, _ in p.universals}
    for c in p.constraints:
        stray = free_vars(c) - names
        if stray:
            raise SynthError(f"constraint mentions undeclared variables {sorted(stray)}")
        for call in target_occurrences(c, p.target.name):
            if len(call.args) != p.target.arity:
                raise SynthError(f"{p.target.name} applied to {len(call.args)} arguments")
