# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled stack-machine interpreter over int64 values.

Same bytecode as the pure-Python interpreter.  Any int64 overflow aborts
the run with -2 so the caller can redo the work with exact integers.
"""
from libc.stdlib cimport malloc, free
from libc.stdint cimport int64_t

cdef extern from *:
    bint add_overflow "__builtin_saddll_overflow"(long long a, long long b, long long *res) nogil
    bint sub_overflow "__builtin_ssubll_overflow"(long long a, long long b, long long *res) nogil
    bint mul_overflow "__builtin_smulll_overflow"(long long a, long long b, long long *res) nogil

cdef enum:
    CONST = 0
    LOAD = 1
    ADD = 2
    SUB = 3
    NEG = 4
    MULC = 5
    LE = 6
    LT = 7
    GE = 8
    GT = 9
    EQ = 10
    NOT = 11
    AND = 12
    OR = 13
    IMP = 14
    ITE = 15
    CALL = 16


cdef enum:
    OK = 0
    OVERFLOW = 1
    BAD_OP = 2


cdef int run(const int64_t[:, ::1] prog, const int64_t[:, ::1] fun,
             const int64_t *frame, long long *stack, Py_ssize_t *sp) noexcept nogil:
    cdef Py_ssize_t pc, k, top
    cdef long long a, b, r
    cdef int status
    cdef int64_t op, arg
    top = sp[0]
    for pc in range(prog.shape[0]):
        op = prog[pc, 0]
        arg = prog[pc, 1]
        if op == CONST:
            stack[top] = arg
            top += 1
        elif op == LOAD:
            stack[top] = frame[arg]
            top += 1
        elif op == ADD:
            r = 0
            for k in range(arg):
                top -= 1
                if add_overflow(r, stack[top], &r):
                    return OVERFLOW
            stack[top] = r
            top += 1
        elif op == SUB:
            top -= 1
            if sub_overflow(stack[top - 1], stack[top], &r):
                return OVERFLOW
            stack[top - 1] = r
        elif op == NEG:
            if sub_overflow(0, stack[top - 1], &r):
                return OVERFLOW
            stack[top - 1] = r
        elif op == MULC:
            if mul_overflow(arg, stack[top - 1], &r):
                return OVERFLOW
            stack[top - 1] = r
        elif op >= LE and op <= EQ:
            top -= 1
            b = stack[top]
            a = stack[top - 1]
            if op == LE:
                r = a <= b
            elif op == LT:
                r = a < b
            elif op == GE:
                r = a >= b
            elif op == GT:
                r = a > b
            else:
                r = a == b
            stack[top - 1] = r
        elif op == NOT:
            stack[top - 1] = 1 - stack[top - 1]
        elif op == AND:
            r = 1
            for k in range(arg):
                top -= 1
                r &= stack[top]
            stack[top] = r
            top += 1
        elif op == OR:
            r = 0
            for k in range(arg):
                top -= 1
                r |= stack[top]
            stack[top] = r
            top += 1
        elif op == IMP:
            top -= 1
            stack[top - 1] = (not stack[top - 1]) or stack[top]
        elif op == ITE:
            top -= 2
            if stack[top - 1]:
                stack[top - 1] = stack[top]
            else:
                stack[top - 1] = stack[top + 1]
        elif op == CALL:
            # arguments sit on the stack; the callee reads them as its frame
            k = top
            status = run(fun, fun, <const int64_t *> &stack[top - arg], stack, &k)
            if status != OK:
                return status
            stack[top - arg] = stack[k - 1]
            top = top - arg + 1
        else:
            return BAD_OP
    sp[0] = top
    return OK


def check_points(const int64_t[:, ::1] prog, const int64_t[:, ::1] fun,
                 const int64_t[:, ::1] points):
    """First row where `prog` is false, -1 if none, -2 on int64 overflow."""
    cdef Py_ssize_t depth = prog.shape[0] + fun.shape[0] + 1
    cdef long long *stack = <long long *> malloc(depth * sizeof(long long))
    cdef Py_ssize_t i, sp
    cdef int status
    cdef Py_ssize_t result = -1
    if stack == NULL:
        raise MemoryError()
    try:
        with nogil:
            for i in range(points.shape[0]):
                sp = 0
                status = run(prog, fun, &points[i, 0], stack, &sp)
                if status == OVERFLOW:
                    result = -2
                    break
                if status == BAD_OP:
                    result = -3
                    break
                if stack[sp - 1] == 0:
                    result = i
                    break
    finally:
        free(stack)
    if result == -3:
        raise ValueError("bad opcode")
    return result
