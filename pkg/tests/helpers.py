"""Shared generators and independent oracles for the test suite."""
from __future__ import annotations

import random

from stratsynth.ltl import (
    FALSE, TRUE, And, Always, Atom, Eventually, Formula, Iff, Implies, LassoTrace, Next, Not, Or,
    Release, Until, all_letters,
)

UNARY = {"not": Not, "X": Next, "F": Eventually, "G": Always}
BINARY = {"and": And, "or": Or, "U": Until, "R": Release, "imp": Implies, "iff": Iff}


def random_formula(rng: random.Random, signals, depth: int, ops=None) -> Formula:
    ops = ops or list(UNARY) + list(BINARY)
    if depth == 0:
        if rng.random() < 0.9:
            return Atom(rng.choice(list(signals)))
        return rng.choice([TRUE, FALSE])
    op = rng.choice(ops)
    if op in UNARY:
        return UNARY[op](random_formula(rng, signals, depth - 1, ops))
    return BINARY[op](random_formula(rng, signals, depth - 1, ops),
                      random_formula(rng, signals, depth - 1, ops))


def random_lasso(rng: random.Random, signals, max_prefix: int = 3, max_loop: int = 3) -> LassoTrace:
    letters = all_letters(list(signals))
    return LassoTrace(tuple(rng.choice(letters) for _ in range(rng.randint(0, max_prefix))),
                      tuple(rng.choice(letters) for _ in range(rng.randint(1, max_loop))))


def naive_eval(phi: Formula, trace: LassoTrace, i: int = 0) -> bool:
    """Textbook recursive semantics on the infinite word, positions folded onto the lasso.

    Every suffix from position ``i`` repeats after ``len(trace)`` further
    steps, so existential lookahead is cut there.
    """
    n = len(trace)
    start = len(trace.prefix)

    def norm(k):
        return k if k < n else start + (k - start) % len(trace.loop)

    def ev(f, k):
        k = norm(k)
        op = f.op
        if op == "true":
            return True
        if op == "false":
            return False
        if op == "atom":
            return f.name in trace.at(k)
        if op == "not":
            return not ev(f.arg, k)
        if op == "and":
            return ev(f.left, k) and ev(f.right, k)
        if op == "or":
            return ev(f.left, k) or ev(f.right, k)
        if op == "implies":
            return (not ev(f.left, k)) or ev(f.right, k)
        if op == "iff":
            return ev(f.left, k) == ev(f.right, k)
        if op == "next":
            return ev(f.arg, k + 1)
        if op == "eventually":
            return any(ev(f.arg, j) for j in range(k, k + n + 1))
        if op == "always":
            return all(ev(f.arg, j) for j in range(k, k + n + 1))
        if op == "until":
            for j in range(k, k + n + 1):
                if ev(f.right, j):
                    return True
                if not ev(f.left, j):
                    return False
            return False
        if op == "release":
            for j in range(k, k + n + 1):
                if not ev(f.right, j):
                    return False
                if ev(f.left, j):
                    return True
            return True
        raise ValueError(op)

    return ev(phi, i)
