"""LTL to nondeterministic Büchi automata.

The translation is a tableau over negation normal form.  Automaton states are
sets of obligations for the current position; a transition reads one letter,
its guard is the cube of literals the expansion committed to, and its target
is the set of ``X`` obligations.  Until formulas give a transition-based
generalized acceptance condition, which is degeneralized with a level
counter.  Afterwards useless states are dropped and bisimilar states merged.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .graphs import nontrivial, reachable, tarjan_scc
from .ltl import FALSE, TRUE, Formula, LassoTrace, free_signals, nnf, subformulas


@dataclass(frozen=True)
class Cube:
    """Conjunction of literals: signals in ``pos`` true, in ``neg`` false."""

    pos: frozenset = frozenset()
    neg: frozenset = frozenset()

    def matches(self, letter: Iterable[str]) -> bool:
        return self.pos <= letter and not (self.neg & letter)

    def restrict(self, signals) -> Cube:
        keep = frozenset(signals)
        return Cube(self.pos & keep, self.neg & keep)

    def drop(self, signals) -> Cube:
        gone = frozenset(signals)
        return Cube(self.pos - gone, self.neg - gone)

    def signals(self) -> frozenset:
        return self.pos | self.neg

    def subsumes(self, other: Cube) -> bool:
        return self.pos <= other.pos and self.neg <= other.neg

    def witness(self, base: Iterable[str] = ()) -> frozenset:
        """A letter satisfying the cube, otherwise agreeing with ``base``."""
        return (frozenset(base) - self.neg) | self.pos

    def __str__(self) -> str:
        lits = [s for s in sorted(self.pos)] + ["!" + s for s in sorted(self.neg)]
        return " & ".join(sorted(lits, key=lambda x: x.lstrip("!"))) or "true"


@dataclass
class Nba:
    """Nondeterministic Büchi automaton with cube-guarded transitions."""

    n_states: int
    initial: tuple
    transitions: list  # (src, Cube, dst)
    accepting: frozenset
    signals: frozenset = frozenset()
    labels: list = field(default_factory=list)

    def __post_init__(self):
        succ = [[] for _ in range(self.n_states)]
        for src, cube, dst in self.transitions:
            succ[src].append((cube, dst))
        self.succ = succ
        stray = set()
        for _, cube, _ in self.transitions:
            stray |= cube.signals() - self.signals
        if stray:
            raise ValueError(f"guards use undeclared signals {sorted(stray)}")

    @property
    def states(self) -> range:
        return range(self.n_states)

    def is_empty(self) -> bool:
        return self.n_states == 0

    def project(self, hidden: Iterable[str]) -> Nba:
        """Existentially quantify ``hidden`` signals away."""
        hidden = frozenset(hidden)
        trans = sorted({(s, c.drop(hidden), d) for s, c, d in self.transitions},
                       key=_trans_key)
        return Nba(self.n_states, self.initial, trans, self.accepting,
                   self.signals - hidden, self.labels)

    def sccs(self) -> list[list[int]]:
        return tarjan_scc(self.states, lambda q: [d for _, d in self.succ[q]])

    def to_dot(self, name: str = "nba") -> str:
        lines = [f"digraph {name} {{", "  rankdir=LR;", '  init [shape=point];']
        for q in self.states:
            shape = "doublecircle" if q in self.accepting else "circle"
            lines.append(f'  q{q} [shape={shape}, label="{q}"];')
        for q in self.initial:
            lines.append(f"  init -> q{q};")
        for s, c, d in self.transitions:
            lines.append(f'  q{s} -> q{d} [label="{c}"];')
        lines.append("}")
        return "\n".join(lines)


def _trans_key(t):
    s, c, d = t
    return (s, d, sorted(c.pos), sorted(c.neg))


# ---------------------------------------------------------------------------
# tableau
# ---------------------------------------------------------------------------

class _Expander:
    def __init__(self, untils: Sequence[Formula]):
        self.untils = list(untils)
        self.memo: dict[frozenset, list] = {}

    def expand(self, state: frozenset) -> list:
        hit = self.memo.get(state)
        if hit is not None:
            return hit
        results = []
        # branch: (todo, old, pos, neg, nxt)
        branches = [(list(state), frozenset(), frozenset(), frozenset(), frozenset())]
        while branches:
            todo, old, pos, neg, nxt = branches.pop()
            alive = True
            while todo and alive:
                f = todo.pop()
                if f in old:
                    continue
                op = f.op
                if op == "true":
                    continue
                if op == "false":
                    alive = False
                elif op == "atom":
                    if f.name in neg:
                        alive = False
                    else:
                        pos = pos | {f.name}
                        old = old | {f}
                elif op == "not":
                    name = f.arg.name
                    if name in pos:
                        alive = False
                    else:
                        neg = neg | {name}
                        old = old | {f}
                elif op == "and":
                    old = old | {f}
                    todo = todo + [f.right, f.left]
                elif op == "next":
                    old = old | {f}
                    if f.arg is not TRUE:
                        nxt = nxt | {f.arg}
                elif op == "or":
                    old = old | {f}
                    branches.append((todo + [f.right], old, pos, neg, nxt))
                    todo = todo + [f.left]
                elif op == "until":
                    old = old | {f}
                    branches.append((todo + [f.left], old, pos, neg, nxt | {f}))
                    todo = todo + [f.right]
                elif op == "release":
                    old = old | {f}
                    branches.append((todo + [f.right], old, pos, neg, nxt | {f}))
                    if f.left is FALSE:
                        alive = False
                    else:
                        todo = todo + [f.right, f.left]
                else:  # pragma: no cover
                    raise ValueError(f"not in negation normal form: {op}")
            if not alive:
                continue
            fulfilled = frozenset(
                i for i, u in enumerate(self.untils) if u not in old or u.right in old or u.right is TRUE
            )
            if FALSE in nxt:
                continue
            results.append((pos, neg, nxt, fulfilled))
        results = _prune_subsumed(results)
        self.memo[state] = results
        return results


def _prune_subsumed(results: list) -> list:
    uniq = list(dict.fromkeys(results))
    # more permissive guard, weaker obligations and more acceptance first
    uniq.sort(key=lambda r: (len(r[0]) + len(r[1]), len(r[2]), -len(r[3])))
    kept: list = []
    for r in uniq:
        pos, neg, nxt, ful = r
        if any(k[0] <= pos and k[1] <= neg and k[2] <= nxt and k[3] >= ful for k in kept):
            continue
        kept.append(r)
    return kept


def ltl_to_nba(phi: Formula, signals: Iterable[str] | None = None,
               reduce: bool = True) -> Nba:
    """Büchi automaton accepting exactly the models of ``phi``."""
    universe = frozenset(signals) if signals is not None else free_signals(phi)
    universe = universe | free_signals(phi)
    root = nnf(phi)
    untils = sorted((g for g in subformulas(root) if g.op == "until"), key=str)
    m = len(untils)
    exp = _Expander(untils)

    init_set = frozenset() if root is TRUE else frozenset({root})
    index: dict = {}
    labels: list = []
    trans: list = []
    accepting: set = set()

    def state_id(key):
        sid = index.get(key)
        if sid is None:
            sid = len(labels)
            index[key] = sid
            labels.append(key)
            if key[1] == m:
                accepting.add(sid)
            todo.append(key)
        return sid

    todo: list = []
    init = state_id((init_set, 0))
    while todo:
        key = todo.pop()
        obligations, level = key
        src = index[key]
        start = 0 if level == m else level
        for pos, neg, nxt, fulfilled in exp.expand(obligations):
            j = start
            while j < m and j in fulfilled:
                j += 1
            dst = state_id((nxt, j))
            trans.append((src, Cube(pos, neg), dst))

    nba = Nba(len(labels), (init,), trans, frozenset(accepting), universe,
              [_describe(k) for k in labels])
    return reduce_nba(nba) if reduce else nba


def _describe(key) -> str:
    obligations, level = key
    body = ", ".join(sorted(str(f) for f in obligations)) or "true"
    return f"{{{body}}}/{level}"


def reduce_nba(a: Nba) -> Nba:
    """Drop states without an accepting continuation, then merge bisimilar states."""
    succ = [[d for _, d in a.succ[q]] for q in a.states]
    live_cycle = set()
    for comp in tarjan_scc(a.states, lambda q: succ[q]):
        if nontrivial(comp, lambda q: succ[q]) and any(q in a.accepting for q in comp):
            live_cycle.update(comp)
    pred = [[] for _ in a.states]
    for q in a.states:
        for d in succ[q]:
            pred[d].append(q)
    useful = reachable(live_cycle, lambda q: pred[q])
    alive = reachable([q for q in a.initial if q in useful],
                      lambda q: [d for d in succ[q] if d in useful])
    if not alive:
        return Nba(0, (), [], frozenset(), a.signals, [])

    # partition refinement for forward bisimulation
    states = sorted(alive)
    block = {q: int(q in a.accepting) for q in states}
    while True:
        sigs = {}
        for q in states:
            out = frozenset((c, block[d]) for c, d in a.succ[q] if d in alive)
            sigs[q] = (block[q], _minimal_edges(out))
        ids: dict = {}
        new_block = {}
        for q in states:
            new_block[q] = ids.setdefault(sigs[q], len(ids))
        stable = len(ids) == len(set(block.values()))
        block = new_block
        if stable:
            break
    # renumber with the initial block first, in BFS order
    first = block[a.initial[0]]
    order = [first]
    seen = {first}
    rep = {}
    for q in states:
        rep.setdefault(block[q], q)
    head = 0
    while head < len(order):
        b = order[head]
        head += 1
        for _, d in sorted(a.succ[rep[b]], key=lambda e: e[1]):
            if d in alive and block[d] not in seen:
                seen.add(block[d])
                order.append(block[d])
    new_id = {b: i for i, b in enumerate(order)}
    trans = set()
    for b in order:
        q = rep[b]
        for c, d in _minimal_edges(frozenset((c, block[d]) for c, d in a.succ[q] if d in alive)):
            trans.add((new_id[b], c, new_id[d]))
    accepting = frozenset(new_id[block[q]] for q in states if q in a.accepting)
    labels = [a.labels[rep[b]] if a.labels else "" for b in order]
    return Nba(len(order), (0,), sorted(trans, key=_trans_key), accepting, a.signals, labels)


def _minimal_edges(edges: frozenset) -> frozenset:
    """Drop edges whose guard is subsumed by a more general guard to the same target."""
    by_dst: dict = {}
    for c, d in edges:
        by_dst.setdefault(d, []).append(c)
    out = set()
    for d, cubes in by_dst.items():
        cubes = sorted(set(cubes), key=lambda c: len(c.pos) + len(c.neg))
        kept = []
        for c in cubes:
            if not any(k.subsumes(c) for k in kept):
                kept.append(c)
        out.update((c, d) for c in kept)
    return frozenset(out)


# ---------------------------------------------------------------------------
# acceptance on lassos
# ---------------------------------------------------------------------------

def nba_accepts_lasso(a: Nba, t: LassoTrace) -> bool:
    """Exact acceptance of ``prefix·loop^ω`` via the product with the lasso graph."""
    if a.n_states == 0:
        return False
    letters = list(t.prefix) + list(t.loop)
    n = len(letters)
    start = len(t.prefix)

    def succ(node):
        q, i = node
        x = letters[i]
        j = i + 1 if i + 1 < n else start
        return [(d, j) for c, d in a.succ[q] if c.matches(x)]

    init = [(q, 0) for q in a.initial]
    nodes = reachable(init, succ)
    for comp in tarjan_scc(nodes, succ):
        if any(q in a.accepting for q, _ in comp) and nontrivial(comp, succ):
            return True
    return False


class NbaMonitor:
    """Tracks the automaton states compatible with a finite prefix.

    Every state of a reduced automaton has an accepting continuation, so an
    empty state set means the prefix is bad.
    """

    def __init__(self, a: Nba):
        self.nba = a
        self.current = frozenset(a.initial)

    def step(self, x: Iterable[str]) -> bool:
        """Consume one letter; return ``False`` once the prefix is bad."""
        x = frozenset(x)
        nxt = set()
        for q in self.current:
            for c, d in self.nba.succ[q]:
                if c.matches(x):
                    nxt.add(d)
        self.current = frozenset(nxt)
        return bool(self.current)

    @property
    def violated(self) -> bool:
        return not self.current
