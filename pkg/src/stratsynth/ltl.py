"""LTL formulas: syntax tree, parser, printer, rewriting and exact lasso semantics.

Formulas are hash-consed immutable trees, so structurally equal formulas are
the same object and can be used freely as dictionary keys.

Concrete syntax (tightest binding first)::

    atoms      p, true, false, ( ... )
    unary      !  X  F  G
    temporal   U  R          (right associative)
    and        &             (left associative)
    or         |             (left associative)
    implies    ->            (right associative)
    iff        <->           (right associative)
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

PRIME_SUFFIX = "_prime"

UNARY = ("not", "next", "eventually", "always")
BINARY = ("and", "or", "implies", "iff", "until", "release")
NULLARY = ("true", "false", "atom")
TEMPORAL = ("next", "eventually", "always", "until", "release")


class Formula:
    """An LTL formula node.

    ``op`` is one of ``true, false, atom, not, and, or, implies, iff, next,
    until, release, eventually, always``; atoms carry ``name``.
    """

    __slots__ = ("op", "children", "name", "_hash", "__weakref__")
    _table: dict = {}

    def __new__(cls, op: str, children: tuple = (), name: str | None = None):
        key = (op, children, name)
        node = cls._table.get(key)
        if node is not None:
            return node
        arity = 0 if op in NULLARY else 1 if op in UNARY else 2 if op in BINARY else None
        if arity is None:
            raise ValueError(f"unknown operator {op!r}")
        if len(children) != arity:
            raise ValueError(f"{op} takes {arity} operands, got {len(children)}")
        if (op == "atom") != (name is not None):
            raise ValueError("exactly the atom node carries a name")
        node = object.__new__(cls)
        object.__setattr__(node, "op", op)
        object.__setattr__(node, "children", children)
        object.__setattr__(node, "name", name)
        object.__setattr__(node, "_hash", hash(key))
        cls._table[key] = node
        return node

    def __setattr__(self, name, value):
        raise AttributeError("Formula is immutable")

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        return self is other

    def __reduce__(self):
        return (Formula, (self.op, self.children, self.name))

    def __repr__(self) -> str:
        return f"Formula({to_string(self)!r})"

    def __str__(self) -> str:
        return to_string(self)

    # operator sugar keeps fixtures and tests readable
    def __and__(self, other: Formula) -> Formula:
        return And(self, other)

    def __or__(self, other: Formula) -> Formula:
        return Or(self, other)

    def __invert__(self) -> Formula:
        return Not(self)

    def __rshift__(self, other: Formula) -> Formula:
        return Implies(self, other)

    @property
    def left(self) -> Formula:
        return self.children[0]

    @property
    def right(self) -> Formula:
        return self.children[1]

    @property
    def arg(self) -> Formula:
        return self.children[0]


TRUE = Formula("true")
FALSE = Formula("false")


def Atom(name: str) -> Formula:
    return Formula("atom", (), name)


def Not(f: Formula) -> Formula:
    return Formula("not", (f,))


def And(a: Formula, b: Formula) -> Formula:
    return Formula("and", (a, b))


def Or(a: Formula, b: Formula) -> Formula:
    return Formula("or", (a, b))


def Implies(a: Formula, b: Formula) -> Formula:
    return Formula("implies", (a, b))


def Iff(a: Formula, b: Formula) -> Formula:
    return Formula("iff", (a, b))


def Next(f: Formula) -> Formula:
    return Formula("next", (f,))


def Until(a: Formula, b: Formula) -> Formula:
    return Formula("until", (a, b))


def Release(a: Formula, b: Formula) -> Formula:
    return Formula("release", (a, b))


def Eventually(f: Formula) -> Formula:
    return Formula("eventually", (f,))


def Always(f: Formula) -> Formula:
    return Formula("always", (f,))


def conjunction(fs: Iterable[Formula]) -> Formula:
    out = None
    for f in fs:
        out = f if out is None else And(out, f)
    return TRUE if out is None else out


def disjunction(fs: Iterable[Formula]) -> Formula:
    out = None
    for f in fs:
        out = f if out is None else Or(out, f)
    return FALSE if out is None else out


def conjuncts(f: Formula) -> list[Formula]:
    """Top-level conjuncts of ``f`` (left-nested ``and`` chains flattened)."""
    if f.op == "and":
        return conjuncts(f.left) + conjuncts(f.right)
    return [f]


def prime(name: str) -> str:
    return name + PRIME_SUFFIX


# ---------------------------------------------------------------------------
# signals and context
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SignalId:
    name: str
    kind: str = "sut_output"  # sut_input | sut_output | hidden

    def __post_init__(self):
        if self.kind not in ("sut_input", "sut_output", "hidden"):
            raise ValueError(f"bad signal kind {self.kind!r}")


@dataclass(frozen=True)
class SpecContext:
    """Signal declarations and the specification of a reactive system.

    ``hidden`` holds outputs the system has but a tester cannot observe
    (auxiliary specification variables).
    """

    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    spec: Formula
    hidden: tuple[str, ...] = ()
    names: Mapping[str, Formula] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        object.__setattr__(self, "hidden", tuple(self.hidden))
        groups = [set(self.inputs), set(self.outputs), set(self.hidden)]
        total = sum(len(g) for g in groups)
        if len(set().union(*groups)) != total or total != (
            len(self.inputs) + len(self.outputs) + len(self.hidden)
        ):
            raise ValueError("inputs, outputs and hidden signals must be pairwise disjoint")
        universe = set().union(*groups)
        for name in universe:
            if name.endswith(PRIME_SUFFIX) and name[: -len(PRIME_SUFFIX)] in universe:
                raise ValueError(f"signal {name!r} collides with the hidden copy of "
                                 f"{name[:-len(PRIME_SUFFIX)]!r}")
        extra = free_signals(self.spec) - universe
        if extra:
            raise ValueError(f"specification uses undeclared signals {sorted(extra)}")

    @property
    def universe(self) -> frozenset[str]:
        return frozenset(self.inputs) | frozenset(self.outputs) | frozenset(self.hidden)

    @property
    def observable_outputs(self) -> tuple[str, ...]:
        return self.outputs

    def signals(self) -> list[SignalId]:
        return ([SignalId(n, "sut_input") for n in self.inputs]
                + [SignalId(n, "sut_output") for n in self.outputs]
                + [SignalId(n, "hidden") for n in self.hidden])


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

class LtlSyntaxError(ValueError):
    def __init__(self, message: str, text: str, pos: int):
        self.text = text
        self.pos = pos
        super().__init__(f"{message} at position {pos}: {text[:pos]}<HERE>{text[pos:]}")


class UndeclaredSignalError(ValueError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"undeclared signal {name!r}")


_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<op><->|->|&&|\|\||[!~&|()^])
  | (?P<ident>[A-Za-z_][A-Za-z0-9_.']*)
""", re.VERBOSE)

_KEYWORDS = {"X": "next", "F": "eventually", "G": "always", "U": "until", "R": "release"}
_CONSTANTS = {"true": TRUE, "TRUE": TRUE, "false": FALSE, "FALSE": FALSE}
_BINARY_OPS = {
    # token: (node op, precedence, right associative); larger binds tighter
    "<->": ("iff", 1, True),
    "->": ("implies", 2, True),
    "|": ("or", 3, False),
    "||": ("or", 3, False),
    "&": ("and", 4, False),
    "&&": ("and", 4, False),
    "U": ("until", 5, True),
    "R": ("release", 5, True),
}
_PREC = {"iff": 1, "implies": 2, "or": 3, "and": 4, "until": 5, "release": 5}
_RIGHT = {"iff", "implies", "until", "release"}


def _tokenize(text: str) -> list[tuple[str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise LtlSyntaxError(f"unexpected character {text[pos]!r}", text, pos)
        if m.lastgroup != "ws":
            tokens.append((m.group(), pos))
        pos = m.end()
    tokens.append(("", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, universe):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.universe = universe

    def peek(self) -> str:
        return self.tokens[self.i][0]

    def take(self) -> tuple[str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message: str):
        raise LtlSyntaxError(message, self.text, self.tokens[self.i][1])

    def parse(self) -> Formula:
        if self.peek() == "":
            self.error("empty formula")
        f = self.binary(1)
        if self.peek() != "":
            self.error(f"unexpected token {self.peek()!r}")
        return f

    def binary(self, min_prec: int) -> Formula:
        left = self.unary()
        while True:
            tok = self.peek()
            if tok not in _BINARY_OPS:
                return left
            op, prec, right_assoc = _BINARY_OPS[tok]
            if prec < min_prec:
                return left
            self.take()
            right = self.binary(prec if right_assoc else prec + 1)
            left = Formula(op, (left, right))

    def unary(self) -> Formula:
        tok, pos = self.tokens[self.i]
        if tok in ("!", "~"):
            self.take()
            return Not(self.unary())
        if tok in ("X", "F", "G"):
            self.take()
            return Formula(_KEYWORDS[tok], (self.unary(),))
        if tok == "(":
            self.take()
            f = self.binary(1)
            if self.peek() != ")":
                self.error("expected ')'")
            self.take()
            return f
        if tok in _CONSTANTS:
            self.take()
            return _CONSTANTS[tok]
        if tok and (tok[0].isalpha() or tok[0] == "_") and tok not in _KEYWORDS:
            self.take()
            if self.universe is not None and tok not in self.universe:
                raise UndeclaredSignalError(tok)
            return Atom(tok)
        if tok == "":
            self.error("unexpected end of formula")
        self.error(f"unexpected token {tok!r}")


def parse_ltl(text: str, universe: Iterable[str] | None = None) -> Formula:
    """Parse ``text``; when ``universe`` is given every identifier must be in it."""
    names = None if universe is None else {
        s.name if isinstance(s, SignalId) else s for s in universe
    }
    return _Parser(text, names).parse()


# ---------------------------------------------------------------------------
# printing
# ---------------------------------------------------------------------------

_SYMBOL = {"and": "&", "or": "|", "implies": "->", "iff": "<->", "until": "U",
           "release": "R", "not": "!", "next": "X ", "eventually": "F ", "always": "G "}


def to_string(f: Formula) -> str:
    """Render ``f`` with minimal parentheses; ``parse_ltl`` inverts this."""
    op = f.op
    if op == "atom":
        return f.name
    if op in ("true", "false"):
        return op
    if op in UNARY:
        inner = to_string(f.arg)
        if f.arg.op in BINARY:
            inner = f"({inner})"
        return _SYMBOL[op] + inner
    prec = _PREC[op]
    parts = []
    for side, child in (("l", f.left), ("r", f.right)):
        text = to_string(child)
        if child.op in BINARY:
            cp = _PREC[child.op]
            wrong_side = (side == "l") == (op in _RIGHT)
            if cp < prec or (cp == prec and (wrong_side or child.op != op)):
                text = f"({text})"
        parts.append(text)
    return f"{parts[0]} {_SYMBOL[op]} {parts[1]}"


# ---------------------------------------------------------------------------
# rewriting
# ---------------------------------------------------------------------------

def subformulas(f: Formula) -> Iterator[Formula]:
    """Distinct subformulas, children before parents."""
    seen = set()
    stack = [(f, False)]
    while stack:
        node, done = stack.pop()
        if done:
            if node not in seen:
                seen.add(node)
                yield node
            continue
        if node in seen:
            continue
        stack.append((node, True))
        for c in reversed(node.children):
            stack.append((c, False))


def free_signals(f: Formula) -> frozenset[str]:
    return frozenset(g.name for g in subformulas(f) if g.op == "atom")


def transform(f: Formula, fn) -> Formula:
    """Bottom-up rebuild; ``fn(node, new_children)`` returns the new node."""
    memo: dict[Formula, Formula] = {}
    for node in subformulas(f):
        kids = tuple(memo[c] for c in node.children)
        memo[node] = fn(node, kids)
    return memo[f]


def substitute(phi: Formula, target: str, replacement: Formula) -> Formula:
    """Replace every ``Atom(target)`` in ``phi`` by ``replacement``."""
    return substitute_many(phi, {target: replacement})


def substitute_many(phi: Formula, mapping: Mapping[str, Formula]) -> Formula:
    def fn(node, kids):
        if node.op == "atom":
            return mapping.get(node.name, node)
        return node if kids == node.children else Formula(node.op, kids)
    return transform(phi, fn)


def rename(phi: Formula, mapping: Mapping[str, str]) -> Formula:
    return substitute_many(phi, {k: Atom(v) for k, v in mapping.items()})


def desugar(f: Formula) -> Formula:
    """Rewrite into the base operators {atom, not, or, next, until, true}."""
    def fn(node, kids):
        op = node.op
        if op == "false":
            return Not(TRUE)
        if op == "and":
            return Not(Or(Not(kids[0]), Not(kids[1])))
        if op == "implies":
            return Or(Not(kids[0]), kids[1])
        if op == "iff":
            a, b = kids
            both = Not(Or(Not(a), Not(b)))
            neither = Not(Or(a, b))
            return Or(both, neither)
        if op == "eventually":
            return Until(TRUE, kids[0])
        if op == "always":
            return Not(Until(TRUE, Not(kids[0])))
        if op == "release":
            return Not(Until(Not(kids[0]), Not(kids[1])))
        if op == "not" and kids[0].op == "not":
            return kids[0].arg
        return node if kids == node.children else Formula(op, kids)
    return transform(f, fn)


def nnf(f: Formula) -> Formula:
    """Negation normal form over {true,false,atom,!atom,and,or,X,U,R}."""
    memo: dict[tuple[Formula, bool], Formula] = {}

    def go(g: Formula, neg: bool) -> Formula:
        key = (g, neg)
        hit = memo.get(key)
        if hit is not None:
            return hit
        op = g.op
        if op == "true":
            r = FALSE if neg else TRUE
        elif op == "false":
            r = TRUE if neg else FALSE
        elif op == "atom":
            r = Not(g) if neg else g
        elif op == "not":
            r = go(g.arg, not neg)
        elif op == "and":
            r = (Or if neg else And)(go(g.left, neg), go(g.right, neg))
        elif op == "or":
            r = (And if neg else Or)(go(g.left, neg), go(g.right, neg))
        elif op == "implies":
            r = (And if neg else Or)(go(g.left, not neg), go(g.right, neg))
        elif op == "iff":
            a, b = g.left, g.right
            if neg:
                r = Or(And(go(a, False), go(b, True)), And(go(a, True), go(b, False)))
            else:
                r = Or(And(go(a, False), go(b, False)), And(go(a, True), go(b, True)))
        elif op == "next":
            r = Next(go(g.arg, neg))
        elif op == "eventually":
            r = Release(FALSE, go(g.arg, True)) if neg else Until(TRUE, go(g.arg, False))
        elif op == "always":
            r = Until(TRUE, go(g.arg, True)) if neg else Release(FALSE, go(g.arg, False))
        elif op == "until":
            r = (Release(go(g.left, True), go(g.right, True)) if neg
                 else Until(go(g.left, False), go(g.right, False)))
        elif op == "release":
            r = (Until(go(g.left, True), go(g.right, True)) if neg
                 else Release(go(g.left, False), go(g.right, False)))
        else:  # pragma: no cover
            raise ValueError(op)
        memo[key] = r
        return r

    return go(f, False)


def simplify(f: Formula) -> Formula:
    """Cheap constant folding; keeps the language unchanged."""
    def fn(node, kids):
        op = node.op
        if op == "not":
            a = kids[0]
            if a is TRUE:
                return FALSE
            if a is FALSE:
                return TRUE
            if a.op == "not":
                return a.arg
        elif op == "and":
            a, b = kids
            if FALSE in kids:
                return FALSE
            if a is TRUE:
                return b
            if b is TRUE or a is b:
                return a
        elif op == "or":
            a, b = kids
            if TRUE in kids:
                return TRUE
            if a is FALSE:
                return b
            if b is FALSE or a is b:
                return a
        elif op == "implies":
            a, b = kids
            if a is FALSE or b is TRUE:
                return TRUE
            if a is TRUE:
                return b
            if b is FALSE:
                return fn(Not(a), (a,))
        elif op in ("next", "eventually", "always") and kids[0].op in ("true", "false"):
            return kids[0]
        return node if kids == node.children else Formula(op, kids)
    return transform(f, fn)


# ---------------------------------------------------------------------------
# traces and exact semantics
# ---------------------------------------------------------------------------

Letter = frozenset  # set of signal names that are true


def letter(*names: str) -> frozenset[str]:
    return frozenset(names)


@dataclass(frozen=True)
class LassoTrace:
    """The infinite word ``prefix · loop^ω``."""

    prefix: tuple[frozenset, ...]
    loop: tuple[frozenset, ...]

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(frozenset(x) for x in self.prefix))
        object.__setattr__(self, "loop", tuple(frozenset(x) for x in self.loop))
        if not self.loop:
            raise ValueError("lasso loop must be nonempty")

    def __len__(self) -> int:
        return len(self.prefix) + len(self.loop)

    def at(self, i: int) -> frozenset:
        if i < len(self.prefix):
            return self.prefix[i]
        return self.loop[(i - len(self.prefix)) % len(self.loop)]

    def expand(self, n: int) -> list[frozenset]:
        return [self.at(i) for i in range(n)]

    def project(self, signals: Iterable[str]) -> LassoTrace:
        keep = frozenset(signals)
        return LassoTrace(tuple(x & keep for x in self.prefix),
                          tuple(x & keep for x in self.loop))

    def to_json(self) -> dict:
        return {"prefix": [sorted(x) for x in self.prefix],
                "loop": [sorted(x) for x in self.loop]}

    @classmethod
    def from_json(cls, data: Mapping) -> LassoTrace:
        return cls(tuple(frozenset(x) for x in data["prefix"]),
                   tuple(frozenset(x) for x in data["loop"]))


def eval_lasso(phi: Formula, trace: LassoTrace) -> bool:
    """Decide ``prefix·loop^ω ⊨ phi`` exactly.

    Every subformula is labelled on the ``len(prefix)+len(loop)`` positions;
    Until/Release are least/greatest fixpoints, settled by two backward passes
    over the loop before sweeping the prefix.
    """
    return label_lasso(phi, trace)[phi][0]


def label_lasso(phi: Formula, trace: LassoTrace) -> dict[Formula, list[bool]]:
    letters = list(trace.prefix) + list(trace.loop)
    n = len(letters)
    start = len(trace.prefix)
    succ = list(range(1, n)) + [start]
    val: dict[Formula, list[bool]] = {}
    for g in subformulas(phi):
        op = g.op
        if op == "true":
            v = [True] * n
        elif op == "false":
            v = [False] * n
        elif op == "atom":
            name = g.name
            v = [name in x for x in letters]
        elif op == "not":
            v = [not b for b in val[g.arg]]
        elif op == "and":
            v = [a and b for a, b in zip(val[g.left], val[g.right])]
        elif op == "or":
            v = [a or b for a, b in zip(val[g.left], val[g.right])]
        elif op == "implies":
            v = [(not a) or b for a, b in zip(val[g.left], val[g.right])]
        elif op == "iff":
            v = [a == b for a, b in zip(val[g.left], val[g.right])]
        elif op == "next":
            a = val[g.arg]
            v = [a[succ[i]] for i in range(n)]
        elif op in ("until", "eventually", "release", "always"):
            if op == "until":
                a, b, least = val[g.left], val[g.right], True
            elif op == "eventually":
                a, b, least = [True] * n, val[g.arg], True
            elif op == "release":
                a, b, least = val[g.left], val[g.right], False
            else:
                a, b, least = [False] * n, val[g.arg], False
            v = [not least] * n
            order = list(range(n - 1, start - 1, -1))
            for i in order + order + list(range(start - 1, -1, -1)):
                if least:
                    v[i] = b[i] or (a[i] and v[succ[i]])
                else:
                    v[i] = b[i] and (a[i] or v[succ[i]])
        else:  # pragma: no cover
            raise ValueError(op)
        val[g] = v
    return val


def rotate_loop(trace: LassoTrace, k: int = 1) -> LassoTrace:
    """Equivalent lasso with ``k`` loop letters moved into the prefix."""
    prefix = list(trace.prefix)
    loop = list(trace.loop)
    for _ in range(k):
        prefix.append(loop[0])
        loop = loop[1:] + loop[:1]
    return LassoTrace(tuple(prefix), tuple(loop))


def all_letters(signals: Sequence[str]) -> list[frozenset[str]]:
    signals = list(signals)
    out = []
    for mask in range(1 << len(signals)):
        out.append(frozenset(s for j, s in enumerate(signals) if mask >> j & 1))
    return out
