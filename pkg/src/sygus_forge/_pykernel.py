"""Pure-Python stack-machine interpreter; the fallback for the compiled kernel.

A program is a sequence of (opcode, argument) pairs in postfix order.  Int
values are exact here, so this interpreter never reports overflow.
"""
from __future__ import annotations

CONST, LOAD, ADD, SUB, NEG, MULC = 0, 1, 2, 3, 4, 5
LE, LT, GE, GT, EQ = 6, 7, 8, 9, 10
NOT, AND, OR, IMP, ITE, CALL = 11, 12, 13, 14, 15, 16


def run(prog, frame, fun=None):
    stack: list[int] = []
    push, pop = stack.append, stack.pop
    for op, arg in prog:
        if op == CONST:
            push(arg)
        elif op == LOAD:
            push(frame[arg])
        elif op == ADD:
            s = 0
            for _ in range(arg):
                s += pop()
            push(s)
        elif op == SUB:
            b = pop()
            push(pop() - b)
        elif op == NEG:
            push(-pop())
        elif op == MULC:
            push(arg * pop())
        elif op <= EQ:
            b = pop()
            a = pop()
            if op == LE:
                push(int(a <= b))
            elif op == LT:
                push(int(a < b))
            elif op == GE:
                push(int(a >= b))
            elif op == GT:
                push(int(a > b))
            else:
                push(int(a == b))
        elif op == NOT:
            push(1 - pop())
        elif op == AND:
            r = 1
            for _ in range(arg):
                r &= pop()
            push(r)
        elif op == OR:
            r = 0
            for _ in range(arg):
                r |= pop()
            push(r)
        elif op == IMP:
            b = pop()
            push(int((not pop()) or b))
        elif op == ITE:
            e = pop()
            t = pop()
            push(t if pop() else e)
        elif op == CALL:
            args = stack[len(stack) - arg:]
            del stack[len(stack) - arg:]
            push(run(fun, args))
        else:
            raise ValueError(f"bad opcode {op}")
    return stack[-1]


def check_points(prog, fun, points) -> int:
    """Index of the first point where `prog` is false, or -1 if it holds on all."""
    for i, row in enumerate(points):
        if not run(prog, row, fun):
            return i
    return -1


def eval_points(prog, points, fun=None) -> list[int]:
    return [run(prog, row, fun) for row in points]
