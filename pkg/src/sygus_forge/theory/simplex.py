"""Exact rational simplex over bounded variables, plus branch and bound.

Follows the general-simplex formulation used in SMT solvers: every
constraint `sum(a_i x_i)` gets a slack variable whose bounds carry the
constraint, the tableau expresses basic variables over nonbasic ones, and
Bland's rule picks pivots so the check always terminates.  Bounds remember
the literal that asserted them so infeasibility comes with an explanation.
"""
from __future__ import annotations

from collections import deque
from fractions import Fraction
from math import floor, gcd

from ..core import ResourceOut

Bound = tuple  # (value, reason)


class Simplex:
    def __init__(self, n_vars: int):
        self.n_orig = n_vars
        self.n = n_vars
        self.value: list[Fraction] = [Fraction(0)] * n_vars
        self.lower: list[Bound | None] = [None] * n_vars
        self.upper: list[Bound | None] = [None] * n_vars
        self.rows: dict[int, dict[int, Fraction]] = {}  # basic -> {nonbasic: coef}
        self.cols: dict[int, set[int]] = {}  # nonbasic -> rows mentioning it
        self.defs: dict[int, dict[int, int]] = {}  # slack -> original definition

    def copy(self) -> Simplex:
        s = Simplex.__new__(Simplex)
        s.n_orig, s.n = self.n_orig, self.n
        s.value = list(self.value)
        s.lower = list(self.lower)
        s.upper = list(self.upper)
        s.rows = {b: dict(r) for b, r in self.rows.items()}
        s.cols = {j: set(r) for j, r in self.cols.items()}
        s.defs = self.defs
        return s

    def add_row(self, coeffs: dict[int, int]) -> int:
        """New slack variable equal to `sum(coeffs[j] * x_j)` over original vars."""
        s = self.n
        self.n += 1
        self.defs[s] = dict(coeffs)
        row: dict[int, Fraction] = {}
        for j, c in coeffs.items():
            if j in self.rows:  # j became basic: expand its row
                for k, a in self.rows[j].items():
                    v = row.get(k, 0) + c * a
                    if v:
                        row[k] = v
                    else:
                        row.pop(k, None)
            else:
                v = row.get(j, 0) + c
                if v:
                    row[j] = Fraction(v)
                else:
                    row.pop(j, None)
        self.rows[s] = row
        for j in row:
            self.cols.setdefault(j, set()).add(s)
        self.value.append(sum((a * self.value[j] for j, a in row.items()), Fraction(0)))
        self.lower.append(None)
        self.upper.append(None)
        return s

    # -- bounds ------------------------------------------------------------

    def assert_lower(self, x: int, c, reason=None) -> list | None:
        c = Fraction(c)
        lo = self.lower[x]
        if lo is not None and lo[0] >= c:
            return None
        up = self.upper[x]
        if up is not None and up[0] < c:
            return [r for r in (reason, up[1]) if r is not None]
        self.lower[x] = (c, reason)
        if x not in self.rows and self.value[x] < c:
            self._update(x, c)
        return None

    def assert_upper(self, x: int, c, reason=None) -> list | None:
        c = Fraction(c)
        up = self.upper[x]
        if up is not None and up[0] <= c:
            return None
        lo = self.lower[x]
        if lo is not None and lo[0] > c:
            return [r for r in (reason, lo[1]) if r is not None]
        self.upper[x] = (c, reason)
        if x not in self.rows and self.value[x] > c:
            self._update(x, c)
        return None

    def _update(self, x: int, v: Fraction) -> None:
        delta = v - self.value[x]
        for b in self.cols.get(x, ()):
            self.value[b] += self.rows[b][x] * delta
        self.value[x] = v

    # -- pivoting ------------------------------------------------------------

    def _pivot(self, b: int, j: int) -> None:
        """Make basic `b` nonbasic and nonbasic `j` basic."""
        row = self.rows.pop(b)
        a = row.pop(j)
        for k in row:
            self.cols[k].discard(b)
        self.cols[j].discard(b)
        new = {k: -c / a for k, c in row.items()}
        new[b] = 1 / a
        users = self.cols.pop(j, set())
        for r in users:
            rr = self.rows[r]
            c = rr.pop(j)
            for k, v in new.items():
                w = rr.get(k, 0) + c * v
                if w:
                    if k not in rr:
                        self.cols.setdefault(k, set()).add(r)
                    rr[k] = w
                elif k in rr:
                    del rr[k]
                    self.cols[k].discard(r)
        self.rows[j] = new
        for k in new:
            self.cols.setdefault(k, set()).add(j)

    def _pivot_and_update(self, b: int, j: int, v: Fraction) -> None:
        theta = (v - self.value[b]) / self.rows[b][j]
        self.value[b] = v
        self.value[j] += theta
        for r in self.cols.get(j, ()):
            if r != b:
                self.value[r] += self.rows[r][j] * theta
        self._pivot(b, j)

    def check(self) -> list | None:
        """Restore feasibility.  Returns None when feasible, else the reasons
        of the bounds that are jointly infeasible."""
        while True:
            viol = None
            for b in sorted(self.rows):
                v = self.value[b]
                lo, up = self.lower[b], self.upper[b]
                if lo is not None and v < lo[0]:
                    viol = (b, True)
                    break
                if up is not None and v > up[0]:
                    viol = (b, False)
                    break
            if viol is None:
                return None
            b, raise_it = viol
            row = self.rows[b]
            pick = None
            for j in sorted(row):
                a = row[j]
                if (a > 0) == raise_it:
                    up = self.upper[j]
                    if up is None or self.value[j] < up[0]:
                        pick = j
                        break
                else:
                    lo = self.lower[j]
                    if lo is None or self.value[j] > lo[0]:
                        pick = j
                        break
            if pick is None:
                bound = self.lower[b] if raise_it else self.upper[b]
                reasons = [bound[1]]
                for j, a in row.items():
                    src = self.upper[j] if (a > 0) == raise_it else self.lower[j]
                    reasons.append(src[1])
                return [r for r in reasons if r is not None]
            target = self.lower[b][0] if raise_it else self.upper[b][0]
            self._pivot_and_update(b, pick, target)


def branch_and_bound(sx: Simplex, budget: list[int], limits=None) -> list[int] | None:
    """Integer values for the original variables, or None if none exist.

    Nodes are explored breadth first: depth-first search can follow an
    unbounded direction forever even when an integer point exists.
    `budget` is a one-element list of remaining nodes, shared across calls.
    """
    queue = deque([sx])
    while queue:
        budget[0] -= 1
        if budget[0] < 0:
            raise ResourceOut("branch-and-bound node budget")
        if limits is not None and budget[0] % 256 == 0:
            limits.check()
        node = queue.popleft()
        if node.check() is not None:
            continue
        frac = None
        for i in range(node.n_orig):
            if node.value[i].denominator != 1:
                frac = i
                break
        if frac is None:
            return [int(node.value[i]) for i in range(node.n_orig)]
        lo = floor(node.value[frac])
        right = node.copy()
        if node.assert_upper(frac, lo) is None:
            queue.append(node)
        if right.assert_lower(frac, lo + 1) is None:
            queue.append(right)
    return None


# -- integer equalities ----------------------------------------------------

Expr = tuple  # (dict id -> int coefficient, int constant)


def _add_scaled(dst: dict, src: dict, c: int) -> None:
    for k, v in src.items():
        w = dst.get(k, 0) + c * v
        if w:
            dst[k] = w
        else:
            dst.pop(k, None)


def _substitute(e: Expr, var: int, by: Expr) -> Expr:
    m, k = e
    c = m.get(var)
    if not c:
        return e
    m = dict(m)
    del m[var]
    _add_scaled(m, by[0], c)
    return m, k + c * by[1]


def solve_equalities(eqs: list[Expr], n: int):
    """Integer parametrization of `{x : sum(c_i x_i) + k = 0 for each eq}`.

    Returns a map from each original variable 0..n-1 to an expression over
    free integer parameters, or None when the equalities have no integer
    solution.  Each step either solves a unit-coefficient variable or
    introduces a parameter that strictly shrinks the least coefficient.
    """
    subst: dict[int, Expr] = {i: ({i: 1}, 0) for i in range(n)}
    fresh = n
    todo = [(dict(m), k) for m, k in eqs]
    while todo:
        m, k = todo.pop()
        if not m:
            if k:
                return None
            continue
        g = 0
        for c in m.values():
            g = gcd(g, c)
        if k % g:
            return None
        m = {x: c // g for x, c in m.items()}
        k //= g
        x = min(m, key=lambda v: (abs(m[v]), v))
        a = m[x]
        if abs(a) == 1:
            # x = -a * (rest + k)
            rest = {v: -a * c for v, c in m.items() if v != x}
            by = (rest, -a * k)
        else:
            # x = t - sum(q_i x_i) - q, with a_i = q_i a + r_i
            t = fresh
            fresh += 1
            rest = {t: 1}
            for v, c in m.items():
                if v != x and c // a:
                    rest[v] = -(c // a)
            by = (rest, -(k // a))
            todo.append((m, k))  # reduced below by the substitution
        todo = [_substitute(e, x, by) for e in todo]
        subst = {i: _substitute(e, x, by) for i, e in subst.items()}
    return subst


def integer_solution(sx: Simplex, budget: list[int], limits=None) -> list[int] | None:
    """Integer values for `sx`'s original variables meeting all its bounds.

    Bounds that pin a row or variable to one value are equalities; these are
    solved exactly over the integers first, so systems like `2x - 2y = 1`
    are refuted without branching, and branch and bound then runs over the
    remaining free parameters.
    """
    n = sx.n_orig
    eqs: list[Expr] = []
    ineqs: list[tuple[dict, Fraction | None, Fraction | None]] = []
    for x in range(sx.n):
        lo, up = sx.lower[x], sx.upper[x]
        if lo is None and up is None:
            continue
        form = {x: 1} if x < n else sx.defs[x]
        if lo is not None and up is not None and lo[0] == up[0]:
            if lo[0].denominator != 1:
                return None
            eqs.append((dict(form), -int(lo[0])))
        else:
            ineqs.append((form, lo and lo[0], up and up[0]))
    if not eqs:
        return branch_and_bound(sx.copy(), budget, limits)
    subst = solve_equalities(eqs, n)
    if subst is None:
        return None
    params = sorted({p for m, _ in subst.values() for p in m})
    index = {p: i for i, p in enumerate(params)}
    inner = Simplex(len(params))
    for form, lo, up in ineqs:
        m: dict = {}
        k = 0
        for x, c in form.items():
            em, ek = subst[x]
            _add_scaled(m, em, c)
            k += c * ek
        if not m:
            if (lo is not None and k < lo) or (up is not None and k > up):
                return None
            continue
        coeffs = {index[p]: c for p, c in m.items()}
        if len(coeffs) == 1 and next(iter(coeffs.values())) == 1:
            row = next(iter(coeffs))
        else:
            row = inner.add_row(coeffs)
        if lo is not None and inner.assert_lower(row, lo - k) is not None:
            return None
        if up is not None and inner.assert_upper(row, up - k) is not None:
            return None
    values = branch_and_bound(inner, budget, limits)
    if values is None:
        return None
    out = []
    for i in range(n):
        em, ek = subst[i]
        out.append(ek + sum(c * values[index[p]] for p, c in em.items()))
    return out
