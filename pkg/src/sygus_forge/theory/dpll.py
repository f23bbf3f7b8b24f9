"""DPLL search with conflict-driven learning over a clause set, with an
exact simplex for the Int atoms.

Decisions pick the first unassigned literal of the first clause that is not
yet satisfied, so the search stops as soon as every clause holds and atoms
that were never needed stay unassigned.  At each propagation fixpoint the
asserted arithmetic atoms are checked for rational feasibility, and
infeasibility explanations are analyzed like any falsified clause: the
first-UIP clause is learned and the search jumps back to the level where it
becomes unit.  At a leaf, branch and bound looks for integer values.
"""
from __future__ import annotations

from ..core import Limits
from .encode import ClauseSet
from .simplex import Simplex, integer_solution


class _Theory:
    """Simplex over the arithmetic atoms with backtrackable bounds."""

    def __init__(self, cs: ClauseSet, int_names: list[str]):
        self.names = int_names
        self.index = {n: i for i, n in enumerate(int_names)}
        self.sx = Simplex(len(int_names))
        self.target: dict[int, int] = {}  # atom var -> simplex variable
        self.scale: dict[int, int] = {}  # atom var -> +-1 for single-variable atoms
        rows: dict[tuple, int] = {}
        for v, (items, _) in sorted(cs.arith.items()):
            if len(items) == 1:
                self.target[v] = self.index[items[0][0]]
                self.scale[v] = items[0][1]
                continue
            if items not in rows:
                rows[items] = self.sx.add_row({self.index[n]: c for n, c in items})
            self.target[v] = rows[items]
            self.scale[v] = 1
        self.atoms = cs.arith
        self.undo: list[tuple] = []

    def assert_lit(self, lit: int) -> list | None:
        v = abs(lit)
        x, s = self.target[v], self.scale[v]
        bound = self.atoms[v][1]
        sx = self.sx
        self.undo.append((x, sx.lower[x], sx.upper[x]))
        # s * x >= b, or its negation s * x <= b - 1
        if (lit > 0) == (s > 0):
            b = bound if s > 0 else 1 - bound
            return sx.assert_lower(x, b, lit)
        b = bound - 1 if lit < 0 else -bound
        return sx.assert_upper(x, b, lit)

    def mark(self) -> int:
        return len(self.undo)

    def restore(self, mark: int) -> None:
        sx = self.sx
        while len(self.undo) > mark:
            x, lo, up = self.undo.pop()
            sx.lower[x] = lo
            sx.upper[x] = up


class Solver:
    def __init__(self, cs: ClauseSet, int_names: list[str], limits: Limits | None = None):
        self.cs = cs
        self.limits = limits
        self.clauses: list[list[int]] = [list(c) for c in cs.clauses]
        self.n_original = len(self.clauses)
        self.occurs: dict[int, list[int]] = {}
        for i, c in enumerate(self.clauses):
            for lit in c:
                self.occurs.setdefault(lit, []).append(i)
        self.value: dict[int, bool] = {}
        self.level: dict[int, int] = {}
        self.reason: dict[int, list[int] | None] = {}
        self.trail: list[tuple[int, int]] = []  # (literal, theory mark)
        self.level_starts: list[int] = []  # trail index of each level's decision
        self.theory = _Theory(cs, int_names)
        self.budget = [limits.bb_nodes if limits is not None else 10**6]
        self.int_values: list[int] | None = None
        self.steps = 0

    @property
    def current_level(self) -> int:
        return len(self.level_starts)

    # -- literal bookkeeping -------------------------------------------------

    def _lit_value(self, lit: int) -> bool | None:
        v = self.value.get(abs(lit))
        if v is None:
            return None
        return v == (lit > 0)

    def _assign(self, lit: int, reason: list[int] | None) -> list[int] | None:
        """Set `lit` true.  Returns a falsified clause if the theory objects."""
        v = abs(lit)
        self.trail.append((lit, self.theory.mark()))
        self.value[v] = lit > 0
        self.level[v] = self.current_level
        self.reason[v] = reason
        if v in self.cs.arith:
            conflict = self.theory.assert_lit(lit)
            if conflict is not None:
                return [-r for r in conflict]
        return None

    def _clause_state(self, c: list[int]):
        """("sat"|"conflict"|"unit"|"open", unit literal or None)."""
        free = None
        n_free = 0
        for lit in c:
            val = self._lit_value(lit)
            if val is True:
                return "sat", None
            if val is None:
                n_free += 1
                free = lit
                if n_free > 1:
                    return "open", None
        if n_free == 0:
            return "conflict", None
        return "unit", free

    def _propagate(self, queue: list[int]) -> list[int] | None:
        """Unit propagation from newly true literals.  Returns a falsified clause."""
        while queue:
            lit = queue.pop()
            for ci in self.occurs.get(-lit, ()):
                c = self.clauses[ci]
                state, unit = self._clause_state(c)
                if state == "conflict":
                    return c
                if state == "unit":
                    conflict = self._assign(unit, c)
                    if conflict is not None:
                        return conflict
                    queue.append(unit)
        return None

    def _scan(self, indices) -> tuple[list[int] | None, list[int]]:
        """Check the given clauses outright; returns (conflict, new true literals)."""
        new: list[int] = []
        for ci in indices:
            c = self.clauses[ci]
            state, unit = self._clause_state(c)
            if state == "conflict":
                return c, new
            if state == "unit":
                conflict = self._assign(unit, c)
                if conflict is not None:
                    return conflict, new
                new.append(unit)
        return None, new

    def _learn(self, clause: list[int]) -> list[int]:
        idx = len(self.clauses)
        self.clauses.append(clause)
        for lit in clause:
            self.occurs.setdefault(lit, []).append(idx)
        return clause

    def _backtrack_to(self, level: int) -> None:
        if level >= self.current_level:
            return
        start = self.level_starts[level]
        mark = self.trail[start][1]
        for lit, _ in self.trail[start:]:
            v = abs(lit)
            del self.value[v]
            del self.level[v]
            del self.reason[v]
        del self.trail[start:]
        del self.level_starts[level:]
        self.theory.restore(mark)

    def _analyze(self, conflict: list[int]) -> tuple[list[int], int] | None:
        """First-UIP clause for a falsified clause and the level to jump to;
        None when the conflict holds at level 0."""
        top = max((self.level[abs(q)] for q in conflict), default=0)
        if top == 0:
            return None
        self._backtrack_to(top)  # a theory conflict may sit below the current level
        seen: set[int] = set()
        learned: list[int] = []
        pending = 0
        idx = len(self.trail) - 1
        clause = conflict
        uip = None
        while True:
            for q in clause:
                v = abs(q)
                if v in seen or (uip is not None and v == abs(uip)):
                    continue
                seen.add(v)
                lvl = self.level[v]
                if lvl == top:
                    pending += 1
                elif lvl > 0:
                    learned.append(q)
            while abs(self.trail[idx][0]) not in seen:
                idx -= 1
            uip = self.trail[idx][0]
            idx -= 1
            pending -= 1
            if pending == 0:
                break
            clause = self.reason[abs(uip)]
        learned.append(-uip)
        back = max((self.level[abs(q)] for q in learned[:-1]), default=0)
        return learned, back

    # -- search ---------------------------------------------------------------

    def _fixpoint(self, queue: list[int]) -> list[int] | None:
        """Propagate to a fixpoint, including learned clauses, then check the
        rational relaxation.  Returns a falsified clause or None."""
        while True:
            conflict = self._propagate(queue)
            if conflict is not None:
                return conflict
            conflict, new = self._scan(range(self.n_original, len(self.clauses)))
            if conflict is not None:
                return conflict
            if not new:
                break
            queue = new
        expl = self.theory.sx.check()
        if expl is not None:
            return [-r for r in expl]
        return None

    def _pick(self) -> int | None:
        for c in self.clauses[: self.n_original]:
            first_free = None
            for lit in c:
                val = self._lit_value(lit)
                if val is True:
                    break
                if val is None and first_free is None:
                    first_free = lit
            else:
                return first_free
        return None

    def _integer_leaf(self) -> list[int] | None:
        """Integer values at a leaf, or a falsified clause blocking this leaf."""
        values = integer_solution(self.theory.sx, self.budget, self.limits)
        if values is not None:
            self.int_values = values
            return None
        return [-lit for lit, _ in self.trail if abs(lit) in self.cs.arith]

    def solve(self) -> bool:
        if self.cs.trivially_false:
            return False
        conflict, queue = self._scan(range(len(self.clauses)))
        if conflict is None:
            conflict = self._fixpoint(queue)
        while True:
            self.steps += 1
            if self.limits is not None and self.steps % 64 == 0:
                self.limits.check()
            if conflict is None:
                lit = self._pick()
                if lit is None:
                    conflict = self._integer_leaf()
                    if conflict is None:
                        return True
                    continue
                self.level_starts.append(len(self.trail))
                conflict = self._assign(lit, None) or self._fixpoint([lit])
                continue
            found = self._analyze(conflict)
            if found is None:
                return False
            learned, back = found
            self._backtrack_to(back)
            self._learn(learned)
            unit = learned[-1]
            conflict = self._assign(unit, learned) or self._fixpoint([unit])

    def model_bools(self) -> dict[str, bool]:
        return {name: self.value.get(v, False) for v, name in self.cs.bools.items()}


def solve_clauses(cs: ClauseSet, int_names: list[str], limits: Limits | None = None):
    """(int values by name, bool values by name) or None when unsatisfiable."""
    s = Solver(cs, int_names, limits)
    if not s.solve():
        return None
    ints = dict(zip(int_names, s.int_values or [0] * len(int_names)))
    return ints, s.model_bools()
