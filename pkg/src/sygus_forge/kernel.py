"""Point evaluation of specifications against candidate functions.

Terms compile to a small postfix bytecode.  The compiled extension runs it
over int64 rows; when the extension is missing, or the environment variable
SYGUS_FORGE_PURE is set, the pure-Python interpreter is used instead.  A
compiled run that overflows int64 is redone exactly in Python.
"""
from __future__ import annotations

import os

import numpy as np

from . import _pykernel as py
from .core import App, BoolLit, Call, IntLit, Lambda, SynthError, Term, Var

try:
    if os.environ.get("SYGUS_FORGE_PURE"):
        raise ImportError("pure backend requested")
    from . import _ckernel as _c
except ImportError:
    _c = None

BACKEND = "compiled" if _c is not None else "python"

_CMP = {"<=": py.LE, "<": py.LT, ">=": py.GE, ">": py.GT, "=": py.EQ}
_NARY = {"+": py.ADD, "and": py.AND, "or": py.OR}


def compile_term(t: Term, columns: dict[str, int], target: str | None = None) -> list[tuple[int, int]]:
    """Postfix code for `t`; variables load from `columns`, target calls become CALL."""
    out: list[tuple[int, int]] = []

    def go(u: Term) -> None:
        if isinstance(u, IntLit):
            out.append((py.CONST, u.value))
        elif isinstance(u, BoolLit):
            out.append((py.CONST, int(u.value)))
        elif isinstance(u, Var):
            out.append((py.LOAD, columns[u.name]))
        elif isinstance(u, Call):
            if u.name != target:
                raise SynthError(f"cannot compile call to {u.name}")
            for a in u.args:
                go(a)
            out.append((py.CALL, len(u.args)))
        elif isinstance(u, App):
            op, args = u.op, u.args
            if op == "*":
                lits = [a for a in args if isinstance(a, IntLit)]
                rest = [a for a in args if not isinstance(a, IntLit)]
                k = 1
                for a in lits:
                    k *= a.value
                if len(rest) > 1:
                    raise SynthError(f"nonlinear product {u}")
                if not rest:
                    out.append((py.CONST, k))
                else:
                    go(rest[0])
                    out.append((py.MULC, k))
                return
            if op == "-" and len(args) == 1:
                go(args[0])
                out.append((py.NEG, 0))
                return
            if op == "-":
                go(args[0])
                for a in args[1:]:
                    go(a)
                    out.append((py.SUB, 0))
                return
            for a in args:
                go(a)
            if op in _NARY:
                out.append((_NARY[op], len(args)))
            elif op in _CMP:
                out.append((_CMP[op], 0))
            elif op == "not":
                out.append((py.NOT, 0))
            elif op == "=>":
                out.append((py.IMP, 0))
            elif op == "ite":
                out.append((py.ITE, 0))
            else:
                raise SynthError(f"cannot compile operator {op}")
        else:
            raise SynthError(f"cannot compile {u}")

    go(t)
    return out


def compile_lambda(fn: Lambda) -> list[tuple[int, int]]:
    return compile_term(fn.body, {n: i for i, (n, _) in enumerate(fn.params)})


def _as_array(code) -> np.ndarray:
    if not code:
        return np.zeros((0, 2), dtype=np.int64)
    return np.ascontiguousarray(np.array(code, dtype=np.int64).reshape(-1, 2))


_I64_MAX = 2**63 - 1


def _fits(code) -> bool:
    return all(-_I64_MAX <= arg <= _I64_MAX for _, arg in code)


class PointSet:
    """Stored input points as rows; grows by appending."""

    def __init__(self, n_cols: int):
        self.n_cols = n_cols
        self.rows: list[list[int]] = []
        self._array: np.ndarray | None = None
        self._exact = True  # every value fits in int64

    def add(self, row) -> None:
        row = [int(v) for v in row]
        self.rows.append(row)
        self._array = None
        if any(not (-_I64_MAX <= v <= _I64_MAX) for v in row):
            self._exact = False

    def array(self) -> np.ndarray:
        if self._array is None:
            width = max(self.n_cols, 1)  # keep a column so row pointers stay valid
            a = np.zeros((len(self.rows), width), dtype=np.int64)
            for i, r in enumerate(self.rows):
                a[i, : self.n_cols] = r
            self._array = a
        return self._array

    def __len__(self):
        return len(self.rows)


def check_points(spec_code, fun_code, points: PointSet, backend: str | None = None) -> int:
    """Index of the first point violating the constraints under the candidate, or -1."""
    if not len(points):
        return -1
    use_c = (backend or BACKEND) == "compiled" and _c is not None
    if use_c and points._exact and _fits(spec_code) and _fits(fun_code):
        r = _c.check_points(_as_array(spec_code), _as_array(fun_code), points.array())
        if r != -2:
            return int(r)
    return py.check_points(spec_code, fun_code, points.rows)
