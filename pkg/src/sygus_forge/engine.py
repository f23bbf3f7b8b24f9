"""Synthesis strategies.

`solve_si` handles single-invocation problems: it grows a set of ground
instances of the negated conjecture until they are jointly unsatisfiable
and reads a solution off the instantiation terms as a chain of ite.
`solve_cegis` handles everything else: it enumerates grammar programs by
size, filters them against stored counterexample points, and verifies the
survivors.  `solve` routes between them.
"""
from __future__ import annotations

import queue
import threading
from dataclasses import dataclass, field
from typing import Callable

from .core import (
    BOOL,
    INT,
    App,
    BoolLit,
    Call,
    IntLit,
    Lambda,
    Limits,
    ResourceOut,
    Sort,
    SynthError,
    Term,
    Var,
    contains_var,
    eval_ground,
    linear_form,
    negate,
    node_count,
    normalize,
    render_linear,
    simplify_solution,
    substitute,
    with_args,
)
from .frontend import SynthProblem
from .grammar import (
    Enumerator,
    GrammarEmbedding,
    analogue,
    default_grammar,
    embed,
    is_finite,
    term_size,
)
from .kernel import PointSet, check_points, compile_lambda, compile_term
from .theory import check_sat, find_counterexample

Trace = Callable[[str], None]

STRATEGIES = ("auto", "si", "si-r", "cegis", "portfolio")


class NotSingleInvocation(SynthError):
    pass


class Exhausted(SynthError):
    """The instantiation heuristic has nothing new to offer."""


@dataclass(frozen=True)
class Solution:
    fn: Lambda
    strategy: str
    iterations: int
    size: int
    grammar_checked: bool = True
    program: Term | None = None


@dataclass(frozen=True)
class NoSolution:
    strategy: str
    iterations: int


def fresh_name(base: str, taken) -> str:
    if base not in taken:
        return base
    i = 1
    while f"{base}_{i}" in taken:
        i += 1
    return f"{base}_{i}"


# ---------------------------------------------------------------------------
# single invocation


@dataclass(frozen=True)
class SingleInvocationSpec:
    q: Term  # the conjecture with the target application replaced by y
    y: str
    skolems: tuple[str, ...]
    xs: tuple[tuple[str, Sort], ...]
    ret: Sort
    params: tuple[tuple[str, Sort], ...]  # the target's own parameter names
    pool: tuple[Term, ...] = ()


def _target_calls(t: Term, name: str):
    if isinstance(t, Call) and t.name == name:
        yield t
    for a in t.args:
        yield from _target_calls(a, name)


def _replace_calls(t: Term, name: str, by: Term) -> Term:
    if isinstance(t, Call) and t.name == name:
        return by
    if not t.args:
        return t
    return with_args(t, tuple(_replace_calls(a, name, by) for a in t.args))


def _maximal_free_subterms(t: Term, y: str, sort: Sort, out: list) -> None:
    if not contains_var(t, y):
        if t.sort == sort:
            out.append(t)
        return
    for a in t.args:
        _maximal_free_subterms(a, y, sort, out)


def _boundary_terms(q: Term, y: str) -> list[Term]:
    """Values of y that make an atom of q tight, for atoms where y has coefficient +-1."""
    out: list[Term] = []
    nq = normalize(q)
    yv = Var(y, INT)
    stack = [nq]
    while stack:
        u = stack.pop(0)
        if isinstance(u, App) and u.op in ("and", "or", "not"):
            stack.extend(u.args)
            continue
        if not (isinstance(u, App) and u.op in ("<=", "=") and isinstance(u.args[0], IntLit)):
            continue
        try:
            m, _ = linear_form(u.args[1])
        except SynthError:
            continue
        a = m.get(yv)
        if a not in (1, -1) or any(not isinstance(x, Var) for x in m):
            continue
        # c = a*y + rest  =>  y = a*(c - rest)
        rest = {x: -a * c for x, c in m.items() if x != yv}
        out.append(render_linear(rest, a * u.args[0].value))
    return out


def detect_single_invocation(p: SynthProblem) -> SingleInvocationSpec | None:
    """Some iff every application of the target is to exactly the universals,
    in declaration order."""
    xs = tuple(p.universals)
    expected = tuple(Var(n, s) for n, s in xs)
    name = p.target.name
    for c in p.constraints:
        for call in _target_calls(c, name):
            if call.args != expected:
                return None
    if p.target.arity != len(xs) or any(s != ps for (_, s), (_, ps) in zip(xs, p.target.params)):
        return None
    taken = {n for n, _ in xs} | {n for n, _ in p.target.params}
    y = fresh_name("y", taken)
    taken.add(y)
    skolems = []
    for n, _ in xs:
        k = fresh_name(f"k_{n}", taken)
        taken.add(k)
        skolems.append(k)
    ret = p.target.ret
    q = _replace_calls(p.spec, name, Var(y, ret))
    found: list[Term] = []
    _maximal_free_subterms(q, y, ret, found)
    if ret == INT:
        found += _boundary_terms(q, y)
    pool: list[Term] = []
    seen = set()
    for t in found:
        key = normalize(t)
        if key not in seen:
            seen.add(key)
            pool.append(t)
    return SingleInvocationSpec(q, y, tuple(skolems), xs, ret, tuple(p.target.params), tuple(pool))


@dataclass
class SiState:
    gamma: list[Term]
    instances: list[Term]
    e: str
    g: str
    env: dict[str, Sort]
    used: set = field(default_factory=set)


def _at_skolems(t: Term, spec: SingleInvocationSpec) -> Term:
    return substitute(t, {x: Var(k, s) for (x, s), k in zip(spec.xs, spec.skolems)})


def _instance(spec: SingleInvocationSpec, t: Term) -> Term:
    """Q[k, t[k]]."""
    b = {x: Var(k, s) for (x, s), k in zip(spec.xs, spec.skolems)}
    b[spec.y] = _at_skolems(t, spec)
    return substitute(spec.q, b)


def select_instantiation_term(state: SiState, model: dict, spec: SingleInvocationSpec) -> Term:
    """A term over the universals whose value under `model` equals e's, not used before."""
    target = model[state.e]
    point = {x: model[k] for (x, _), k in zip(spec.xs, spec.skolems)}
    for t in spec.pool:
        if normalize(t) in state.used:
            continue
        if eval_ground(t, point) == target:
            return t
    literal = BoolLit(target) if isinstance(target, bool) else IntLit(target)
    if normalize(literal) in state.used:
        raise Exhausted(f"value {target} already instantiated")
    return literal


def build_ite_solution(instances, spec: SingleInvocationSpec) -> Lambda:
    """ite(Q[x,t_p], t_p, ... ite(Q[x,t_2], t_2, t_1)) over the target's parameters."""
    body = instances[0]
    for t in instances[1:]:
        b = {spec.y: t}
        body = App("ite", (substitute(spec.q, b), t, body))
    rename = {x: Var(pn, ps) for (x, _), (pn, ps) in zip(spec.xs, spec.params)}
    body = substitute(body, rename)
    return simplify_solution(Lambda(spec.params, body))


def solve_si(spec: SingleInvocationSpec, limits: Limits | None = None,
             trace: Trace | None = None) -> Solution | NoSolution:
    limits = (limits or Limits()).started()
    taken = {n for n, _ in spec.xs} | set(spec.skolems) | {spec.y}
    e = fresh_name("e", taken)
    g = fresh_name("G", taken | {e})
    env: dict[str, Sort] = {k: s for (_, s), k in zip(spec.xs, spec.skolems)}
    inst_env = dict(env)
    env[e] = spec.ret
    env[g] = BOOL
    first = App("=>", (Var(g, BOOL), _instance(spec, Var(e, spec.ret))))
    state = SiState([first], [], e, g, env)
    negated: list[Term] = []
    while True:
        limits.check()
        if len(state.instances) >= limits.si_iterations:
            raise ResourceOut("instantiation budget")
        model = check_sat(state.gamma + [Var(g, BOOL)], env, limits)
        if model is None:
            return NoSolution("si", len(state.instances))
        try:
            t = select_instantiation_term(state, model, spec)
        except Exhausted as exc:
            raise ResourceOut(str(exc)) from None
        if trace is not None:
            trace(f"model e={_show_value(model[e])} | instance {t}")
        state.instances.append(t)
        state.used.add(normalize(t))
        neg = negate(_instance(spec, t))
        state.gamma.append(neg)
        negated.append(neg)
        if check_sat(negated, inst_env, limits) is None:
            fn = build_ite_solution(state.instances, spec)
            return Solution(fn, "si", len(state.instances), node_count(fn.body), False)


def _show_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(IntLit(v))


# ---------------------------------------------------------------------------
# enumerative CEGIS


def _show_assignment(a: dict) -> str:
    return "{" + ", ".join(f"{n} -> {_show_value(v)}" for n, v in a.items()) + "}"


def solve_cegis(p: SynthProblem, e: GrammarEmbedding, limits: Limits | None = None,
                trace: Trace | None = None,
                on_candidate: Callable[[Term], None] | None = None) -> Solution | NoSolution:
    """Smallest program (by term size) of the grammar that meets the constraints."""
    limits = (limits or Limits()).started()
    names = [n for n, _ in p.universals]
    spec_code = compile_term(p.spec, {n: i for i, n in enumerate(names)}, p.target.name)
    points = PointSet(len(names))
    enum = Enumerator(e)
    proposed = 0
    seen = 0
    for d in enum.stream(e.start, limits.max_size):
        seen += 1
        if seen % 512 == 0:
            limits.check()
        if seen > limits.candidates:
            raise ResourceOut("candidate budget")
        fn = Lambda(p.target.params, analogue(d, e))
        if check_points(spec_code, compile_lambda(fn), points) != -1:
            continue
        proposed += 1
        if on_candidate is not None:
            on_candidate(d)
        limits.check()
        cex = find_counterexample(fn, p, limits)
        if trace is not None:
            trace(f"candidate {d} | cex {_show_assignment(cex) if cex is not None else 'none'}")
        if cex is None:
            return Solution(fn, "cegis", proposed, term_size(d), True, d)
        points.add([int(cex[n]) for n in names])
    bound = enum.max_size(e.start)
    if bound is not None and bound <= limits.max_size:
        return NoSolution("cegis", proposed)
    raise ResourceOut(f"no solution up to size {limits.max_size}")


# ---------------------------------------------------------------------------
# orchestration


def embedding_for(p: SynthProblem) -> GrammarEmbedding:
    g = p.grammar if p.grammar is not None else default_grammar(p.target.params, p.target.ret)
    return embed(g, p.target.params)


def _routes_to_si(p: SynthProblem) -> bool:
    if detect_single_invocation(p) is None:
        return False
    if p.grammar is None:
        return True
    e = embedding_for(p)
    return e.has_op(e.start, "ite")


def _run_si(p: SynthProblem, limits: Limits, trace: Trace | None, reconstruct: bool):
    spec = detect_single_invocation(p)
    if spec is None:
        raise NotSingleInvocation(f"{p.target.name} is not single-invocation")
    name = "si" if reconstruct else "si-r"
    res = solve_si(spec, limits, trace)
    if isinstance(res, NoSolution):
        # no unrestricted solution means no grammar solution either
        return NoSolution(name, res.iterations)
    if not reconstruct or p.grammar is None:
        return Solution(res.fn, name, res.iterations, res.size, p.grammar is None)
    from .reconstruct import reconstruct_solution

    fn, program = reconstruct_solution(res.fn, embedding_for(p), limits, with_program=True)
    return Solution(fn, name, res.iterations, term_size(program), True, program)


def solve(p: SynthProblem, strategy: str = "auto", limits: Limits | None = None,
          trace: Trace | None = None) -> Solution | NoSolution:
    """Run one strategy.  Raises ResourceOut when limits run out first."""
    if strategy not in STRATEGIES:
        raise SynthError(f"unknown strategy {strategy}")
    limits = (limits or Limits()).started()
    if strategy == "auto":
        if not _routes_to_si(p):
            return solve_cegis(p, embedding_for(p), limits, trace)
        try:
            return _run_si(p, limits, trace, True)
        except ResourceOut:
            # reconstruction cannot refute; on a finite grammar enumeration can
            e = embedding_for(p)
            if p.grammar is None or not is_finite(e):
                raise
            limits.check()
            return solve_cegis(p, e, limits, trace)
    if strategy == "si":
        return _run_si(p, limits, trace, True)
    if strategy == "si-r":
        return _run_si(p, limits, trace, False)
    if strategy == "cegis":
        return solve_cegis(p, embedding_for(p), limits, trace)
    return _portfolio(p, limits, trace)


def _portfolio(p: SynthProblem, limits: Limits, trace: Trace | None):
    entrants = ["si", "cegis"] if detect_single_invocation(p) is not None else ["cegis"]
    cancel = threading.Event()
    results: queue.Queue = queue.Queue()

    def worker(name: str) -> None:
        mine = Limits(**{k: getattr(limits, k) for k in limits.__dataclass_fields__})
        mine.cancel = cancel
        try:
            results.put((name, solve(p, name, mine, trace if name == entrants[0] else None)))
        except BaseException as exc:  # delivered to the consumer below
            results.put((name, exc))

    threads = [threading.Thread(target=worker, args=(n,), daemon=True) for n in entrants]
    for t in threads:
        t.start()
    got: dict[str, object] = {}
    winner = None
    while winner is None and len(got) < len(entrants):
        name, res = results.get()
        got[name] = res
        while True:  # anything finishing in the same quantum
            try:
                name, res = results.get_nowait()
            except queue.Empty:
                break
            got[name] = res
        for n in entrants:  # entrants are listed in preference order
            if isinstance(got.get(n), (Solution, NoSolution)):
                winner = got[n]
                break
    cancel.set()
    for t in threads:
        t.join()
    if winner is not None:
        return winner
    for n in entrants:
        exc = got[n]
        if not isinstance(exc, ResourceOut):
            raise exc
    raise ResourceOut("no strategy finished")
