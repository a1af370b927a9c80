"""Mealy and Moore machines, composition, execution and fault machines.

Letters over a machine's input signals are indexed by bitmask: bit ``j`` of
the index is the value of ``inputs[j]``.  Transition and output tables are
tuples indexed ``[state][letter_index]``.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .graphs import reachable
from .ltl import Formula, LassoTrace, parse_ltl, prime


class MachineError(ValueError):
    """Malformed machine: wrong shape, partiality or inconsistent signals."""


def letter_index(signals: Sequence[str], letter: Iterable[str]) -> int:
    letter = set(letter)
    return sum(1 << j for j, s in enumerate(signals) if s in letter)


def index_letter(signals: Sequence[str], idx: int) -> frozenset:
    return frozenset(s for j, s in enumerate(signals) if idx >> j & 1)


def _letters(signals: Sequence[str]) -> list[frozenset]:
    return [index_letter(signals, i) for i in range(1 << len(signals))]


@dataclass(frozen=True)
class MealyMachine:
    """Deterministic, total Mealy machine; ``out[q][x]`` is the output letter."""

    inputs: tuple
    outputs: tuple
    delta: tuple
    out: tuple
    initial: int = 0

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        object.__setattr__(self, "delta", tuple(tuple(r) for r in self.delta))
        object.__setattr__(self, "out", tuple(tuple(frozenset(y) for y in r) for r in self.out))
        if set(self.inputs) & set(self.outputs):
            raise MachineError(f"signals {sorted(set(self.inputs) & set(self.outputs))} "
                               "are both inputs and outputs")
        n = len(self.delta)
        width = 1 << len(self.inputs)
        if n == 0 or len(self.out) != n:
            raise MachineError("machine needs at least one state and one output row per state")
        if not 0 <= self.initial < n:
            raise MachineError(f"initial state {self.initial} out of range")
        outs = set(self.outputs)
        for q in range(n):
            if len(self.delta[q]) != width or len(self.out[q]) != width:
                raise MachineError(f"state {q} is not total over {width} input letters")
            for x in range(width):
                if not 0 <= self.delta[q][x] < n:
                    raise MachineError(f"state {q}, letter {sorted(index_letter(self.inputs, x))}: "
                                       f"target {self.delta[q][x]} out of range")
                if not self.out[q][x] <= outs:
                    raise MachineError(f"state {q} emits undeclared signals")

    @property
    def n_states(self) -> int:
        return len(self.delta)

    def step(self, q: int, x: Iterable[str]) -> tuple[int, frozenset]:
        i = letter_index(self.inputs, x)
        return self.delta[q][i], self.out[q][i]

    def run(self, word: Iterable[Iterable[str]]) -> list[frozenset]:
        q = self.initial
        ys = []
        for x in word:
            q, y = self.step(q, x)
            ys.append(y)
        return ys

    def prune(self) -> MealyMachine:
        """Drop unreachable states, renumbering in BFS order from the initial state."""
        order = [self.initial]
        seen = {self.initial}
        for q in order:
            for d in self.delta[q]:
                if d not in seen:
                    seen.add(d)
                    order.append(d)
        new = {q: i for i, q in enumerate(order)}
        return MealyMachine(self.inputs, self.outputs,
                            [[new[d] for d in self.delta[q]] for q in order],
                            [self.out[q] for q in order], 0)

    def rename(self, mapping: Mapping[str, str]) -> MealyMachine:
        """Rename signals; tables keep their bit layout."""
        r = lambda s: mapping.get(s, s)
        return MealyMachine([r(s) for s in self.inputs], [r(s) for s in self.outputs],
                            self.delta,
                            [[frozenset(r(s) for s in y) for y in row] for row in self.out],
                            self.initial)

    def with_inputs(self, inputs: Sequence[str]) -> MealyMachine:
        """Same behaviour over a larger input set (extra inputs are ignored)."""
        inputs = tuple(inputs)
        if not set(self.inputs) <= set(inputs):
            raise MachineError("new input set must contain the old one")
        if inputs == self.inputs:
            return self
        pos = [inputs.index(s) for s in self.inputs]
        width = 1 << len(inputs)

        def old(i):
            return sum(1 << j for j, p in enumerate(pos) if i >> p & 1)

        return MealyMachine(inputs, self.outputs,
                            [[self.delta[q][old(i)] for i in range(width)] for q in range(self.n_states)],
                            [[self.out[q][old(i)] for i in range(width)] for q in range(self.n_states)],
                            self.initial)

    def table(self) -> tuple:
        return (self.delta, self.out)


@dataclass(frozen=True)
class MooreMachine:
    """Deterministic Moore machine, possibly partial.

    ``out[q]`` maps every output signal to ``True``, ``False`` or ``None``;
    ``None`` leaves the signal unconstrained in that state.  A test strategy
    is a Moore machine whose inputs are the observed SUT outputs and whose
    outputs drive the SUT inputs.
    """

    inputs: tuple
    outputs: tuple
    delta: tuple
    out: tuple
    initial: int = 0

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        object.__setattr__(self, "delta", tuple(tuple(r) for r in self.delta))
        object.__setattr__(self, "out", tuple(
            tuple((s, row.get(s)) for s in self.outputs) if isinstance(row, Mapping)
            else tuple(row) for row in self.out))
        if set(self.inputs) & set(self.outputs):
            raise MachineError("a signal cannot be both input and output")
        n = len(self.delta)
        width = 1 << len(self.inputs)
        if n == 0 or len(self.out) != n:
            raise MachineError("machine needs at least one state and one output per state")
        if not 0 <= self.initial < n:
            raise MachineError(f"initial state {self.initial} out of range")
        for q in range(n):
            if len(self.delta[q]) != width:
                raise MachineError(f"state {q} is not total over {width} input letters")
            for d in self.delta[q]:
                if not 0 <= d < n:
                    raise MachineError(f"state {q}: target {d} out of range")
            if tuple(s for s, _ in self.out[q]) != self.outputs:
                raise MachineError(f"state {q}: output assignment does not match outputs")
            for s, v in self.out[q]:
                if v not in (True, False, None):
                    raise MachineError(f"state {q}: value of {s} must be true, false or null")

    @property
    def n_states(self) -> int:
        return len(self.delta)

    @property
    def is_partial(self) -> bool:
        return any(v is None for row in self.out for _, v in row)

    def output(self, q: int) -> dict:
        return dict(self.out[q])

    def constrained(self) -> frozenset:
        """``(state, signal)`` pairs that carry a fixed value."""
        return frozenset((q, s) for q in range(self.n_states)
                         for s, v in self.out[q] if v is not None)

    def fixed_letter(self, q: int) -> frozenset:
        return frozenset(s for s, v in self.out[q] if v)

    def next(self, q: int, observed: Iterable[str]) -> int:
        return self.delta[q][letter_index(self.inputs, observed)]

    def unconstrain(self, q: int, signal: str) -> MooreMachine:
        rows = [dict(r) for r in self.out]
        rows[q][signal] = None
        return MooreMachine(self.inputs, self.outputs, self.delta, rows, self.initial)

    def resolve(self, resolver: Resolver) -> MooreMachine:
        """A total concretization using a stationary resolver."""
        rows = []
        for q in range(self.n_states):
            rows.append({s: (resolver(q, s, None) if v is None else v) for s, v in self.out[q]})
        return MooreMachine(self.inputs, self.outputs, self.delta, rows, self.initial)

    def prune(self) -> MooreMachine:
        order = [self.initial]
        seen = {self.initial}
        for q in order:
            for d in self.delta[q]:
                if d not in seen:
                    seen.add(d)
                    order.append(d)
        new = {q: i for i, q in enumerate(order)}
        return MooreMachine(self.inputs, self.outputs,
                            [[new[d] for d in self.delta[q]] for q in order],
                            [dict(self.out[q]) for q in order], 0)

    def table(self) -> tuple:
        return (self.delta, self.out)

    def as_mealy(self) -> MealyMachine:
        """Total Moore machine viewed as a Mealy machine."""
        if self.is_partial:
            raise MachineError("resolve a partial machine before converting it")
        width = 1 << len(self.inputs)
        return MealyMachine(self.inputs, self.outputs, self.delta,
                            [[self.fixed_letter(q)] * width for q in range(self.n_states)],
                            self.initial)


PartialMooreMachine = MooreMachine


# ---------------------------------------------------------------------------
# resolvers for unconstrained strategy outputs
# ---------------------------------------------------------------------------

class Resolver:
    """Chooses values for unconstrained outputs: ``resolver(state, signal, step)``."""

    stationary = True

    def __call__(self, state: int, signal: str, step: int | None) -> bool:  # pragma: no cover
        raise NotImplementedError


@dataclass(frozen=True)
class FixedResolver(Resolver):
    value: bool = False

    def __call__(self, state, signal, step):
        return self.value


@dataclass(frozen=True)
class SeededResolver(Resolver):
    """Pseudorandom values, reproducible from ``seed``.

    With ``per_step`` the value may change on every visit; such resolvers
    cannot be used to compute lassos.
    """

    seed: int = 0
    per_step: bool = False

    @property
    def stationary(self) -> bool:
        return not self.per_step

    def __call__(self, state, signal, step):
        key = f"{self.seed}:{state}:{signal}" + (f":{step}" if self.per_step else "")
        return random.Random(key).random() < 0.5


def make_resolver(spec: str | Resolver | None, seed: int = 0) -> Resolver:
    if isinstance(spec, Resolver):
        return spec
    if spec in (None, "false", "fixed-false"):
        return FixedResolver(False)
    if spec in ("true", "fixed-true"):
        return FixedResolver(True)
    if spec in ("random", "seeded"):
        return SeededResolver(seed)
    if spec == "random-step":
        return SeededResolver(seed, per_step=True)
    raise ValueError(f"unknown resolver {spec!r}")


# ---------------------------------------------------------------------------
# composition and execution
# ---------------------------------------------------------------------------

def compose_serial(s1: MealyMachine, s2: MealyMachine, prune: bool = True) -> MealyMachine:
    """Sequential composition: ``s2`` reads the inputs and outputs of ``s1``."""
    avail = set(s1.inputs) | set(s1.outputs)
    if not set(s2.inputs) <= avail:
        raise MachineError(f"second machine reads {sorted(set(s2.inputs) - avail)} "
                           "which the first machine neither reads nor writes")
    if set(s1.outputs) & set(s2.outputs):
        raise MachineError(f"output sets overlap on {sorted(set(s1.outputs) & set(s2.outputs))}")
    if set(s2.outputs) & set(s1.inputs):
        raise MachineError("second machine writes an input of the first")
    n1, n2 = s1.n_states, s2.n_states
    width = 1 << len(s1.inputs)
    xs = _letters(s1.inputs)
    delta = []
    out = []
    for q1 in range(n1):
        for q2 in range(n2):
            drow, orow = [], []
            for i in range(width):
                x = xs[i]
                y1 = s1.out[q1][i]
                j = letter_index(s2.inputs, x | y1)
                delta_1 = s1.delta[q1][i]
                delta_2 = s2.delta[q2][j]
                drow.append(delta_1 * n2 + delta_2)
                orow.append(y1 | s2.out[q2][j])
            delta.append(drow)
            out.append(orow)
    m = MealyMachine(s1.inputs, tuple(s1.outputs) + tuple(s2.outputs), delta, out,
                     s1.initial * n2 + s2.initial)
    return m.prune() if prune else m


def _moore_letter(strategy: MooreMachine, t: int, resolver: Resolver | None, step) -> frozenset:
    x = set()
    for s, v in strategy.out[t]:
        if v is None:
            if resolver is None:
                raise MachineError("a resolver is required for partial strategies")
            v = resolver(t, s, step)
        if v:
            x.add(s)
    return frozenset(x)


def run_steps(strategy: MooreMachine, sut: MealyMachine, steps: int,
              resolver: Resolver | None = None) -> list[frozenset]:
    """Joint trace of ``steps`` letters; the strategy moves first in every step."""
    _check_pairing(strategy, sut)
    t, q = strategy.initial, sut.initial
    trace = []
    obs = strategy.inputs
    for k in range(steps):
        x = _moore_letter(strategy, t, resolver, k)
        i = letter_index(sut.inputs, x)
        y = sut.out[q][i]
        trace.append(x | y)
        t = strategy.delta[t][letter_index(obs, y)]
        q = sut.delta[q][i]
    return trace


def run_to_lasso(strategy: MooreMachine, sut: MealyMachine,
                 resolver: Resolver | None = None) -> LassoTrace:
    """Exact lasso of the closed loop, found by repetition of the joint state."""
    _check_pairing(strategy, sut)
    if resolver is not None and not resolver.stationary:
        raise MachineError("lasso computation needs a stationary resolver")
    if strategy.is_partial and resolver is None:
        raise MachineError("a resolver is required for partial strategies")
    t, q = strategy.initial, sut.initial
    seen: dict = {}
    trace = []
    obs = strategy.inputs
    while (t, q) not in seen:
        seen[(t, q)] = len(trace)
        x = _moore_letter(strategy, t, resolver, None)
        i = letter_index(sut.inputs, x)
        y = sut.out[q][i]
        trace.append(x | y)
        t = strategy.delta[t][letter_index(obs, y)]
        q = sut.delta[q][i]
    k = seen[(t, q)]
    return LassoTrace(tuple(trace[:k]), tuple(trace[k:]))


def _check_pairing(strategy: MooreMachine, sut: MealyMachine) -> None:
    if not set(sut.inputs) <= set(strategy.outputs):
        raise MachineError(f"strategy does not drive SUT inputs "
                           f"{sorted(set(sut.inputs) - set(strategy.outputs))}")
    if not set(strategy.inputs) <= set(sut.outputs):
        raise MachineError(f"strategy observes {sorted(set(strategy.inputs) - set(sut.outputs))} "
                           "which the SUT does not produce")


# ---------------------------------------------------------------------------
# fault machines
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Activation:
    """When a fault machine is active.

    ``always``; ``from_step`` (active from step ``step`` on); ``at_steps``
    (active exactly at the listed steps); ``when`` (active from the first step
    where the propositional ``predicate`` over the fault inputs holds).
    """

    mode: str = "always"
    step: int = 0
    steps: frozenset = frozenset()
    predicate: Formula | None = None

    def __post_init__(self):
        if self.mode not in ("always", "from_step", "at_steps", "when"):
            raise ValueError(f"unknown activation mode {self.mode!r}")
        if self.mode == "when" and self.predicate is None:
            raise ValueError("activation 'when' needs a predicate")
        object.__setattr__(self, "steps", frozenset(self.steps))

    @property
    def frequency(self) -> str | None:
        """The fault frequency every run of the fault machine satisfies."""
        if self.mode == "always":
            return "G"
        if self.mode == "from_step":
            return "FG"
        if self.mode == "at_steps" and self.steps:
            return "F"
        return None


FAULT_KINDS = ("stuck_at_0", "stuck_at_1", "bit_flip", "delay_one")
_KIND_ALIASES = {"stuck0": "stuck_at_0", "stuck1": "stuck_at_1", "bitflip": "bit_flip",
                 "delay": "delay_one"}


def make_fault_machine(kind: str, o: str, activation: Activation | None = None,
                       inputs: Sequence[str] = ()) -> MealyMachine:
    """Mealy machine reading the correct value ``o'`` (plus ``inputs``) and writing ``o``.

    While inactive it copies ``o'``; while active it applies the fault kind.
    A delayed output emits the previous value of ``o'`` (false at step 0).
    """
    kind = _KIND_ALIASES.get(kind, kind)
    if kind not in FAULT_KINDS:
        raise ValueError(f"unknown builtin fault kind {kind!r}; expected one of {FAULT_KINDS}")
    act = activation or Activation()
    src = prime(o)
    ins = tuple(dict.fromkeys([src] + [s for s in inputs if s not in (src, o)]))
    width = 1 << len(ins)
    xs = _letters(ins)

    # phase states: activation progress; memory bit for the delay kind
    if act.mode == "always":
        phases, active, advance = 1, lambda p: True, lambda p, x: 0
    elif act.mode == "from_step":
        k = act.step
        phases = k + 1
        active = lambda p: p >= k
        advance = lambda p, x: min(p + 1, k)
    elif act.mode == "at_steps":
        last = max(act.steps) if act.steps else -1
        phases = last + 2
        active = lambda p: p in act.steps
        advance = lambda p, x: min(p + 1, last + 1)
    else:
        from .ltl import eval_lasso
        pred = act.predicate
        holds = [eval_lasso(pred, LassoTrace((), (x,))) for x in xs]
        phases = 2
        active = None
        advance = None

    memory = 2 if kind == "delay_one" else 1
    delta, out = [], []
    for p in range(phases):
        for mem in range(memory):
            drow, orow = [], []
            for i in range(width):
                x = xs[i]
                correct = src in x
                if act.mode == "when":
                    on = p == 1 or holds[i]
                    np_ = 1 if on else 0
                else:
                    on = active(p)
                    np_ = advance(p, x)
                if not on:
                    value = correct
                elif kind == "stuck_at_0":
                    value = False
                elif kind == "stuck_at_1":
                    value = True
                elif kind == "bit_flip":
                    value = not correct
                else:
                    value = bool(mem)
                nmem = int(correct) if memory == 2 else 0
                drow.append(np_ * memory + nmem)
                orow.append(frozenset([o]) if value else frozenset())
            delta.append(drow)
            out.append(orow)
    return MealyMachine(ins, (o,), delta, out, 0).prune()


def identity_machine(src: str, dst: str, inputs: Sequence[str] = ()) -> MealyMachine:
    ins = tuple(dict.fromkeys([src] + list(inputs)))
    xs = _letters(ins)
    return MealyMachine(ins, (dst,), [[0] * len(xs)],
                        [[frozenset([dst]) if src in x else frozenset() for x in xs]])


def constant_mealy(inputs: Sequence[str], outputs: Sequence[str], letter: Iterable[str]) -> MealyMachine:
    width = 1 << len(inputs)
    y = frozenset(letter)
    return MealyMachine(inputs, outputs, [[0] * width], [[y] * width])


def constant_moore(inputs: Sequence[str], outputs: Sequence[str],
                   values: Mapping[str, bool | None]) -> MooreMachine:
    width = 1 << len(inputs)
    return MooreMachine(inputs, outputs, [[0] * width], [dict(values)])


def inject_fault(golden: MealyMachine, o: str, fault: MealyMachine) -> MealyMachine:
    """Mutant ``golden[o -> o'] ∘ fault`` producing ``o`` through ``fault``."""
    if o not in golden.outputs:
        raise MachineError(f"{o!r} is not an output of the golden machine")
    renamed = golden.rename({o: prime(o)})
    return compose_serial(renamed, fault)


# ---------------------------------------------------------------------------
# enumeration
# ---------------------------------------------------------------------------

def count_mealy(n_in: int, n_out: int, n_states: int) -> int:
    width = 1 << n_in
    return (n_states ** (n_states * width)) * ((1 << n_out) ** (n_states * width))


def enumerate_mealy(inputs: Sequence[str], outputs: Sequence[str], max_states: int):
    """All Mealy machines with at most ``max_states`` states, one per numbering.

    Only machines whose states are all reachable and numbered in BFS order
    are produced, so every behaviour with a given state count appears under
    exactly one transition table.
    """
    import itertools

    width = 1 << len(inputs)
    out_letters = _letters(outputs)
    for n in range(1, max_states + 1):
        for targets in itertools.product(range(n), repeat=n * width):
            delta = [targets[q * width:(q + 1) * width] for q in range(n)]
            if not _bfs_canonical(delta, n):
                continue
            for outs in itertools.product(out_letters, repeat=n * width):
                yield MealyMachine(inputs, outputs, delta,
                                   [outs[q * width:(q + 1) * width] for q in range(n)])


def enumerate_moore(inputs: Sequence[str], outputs: Sequence[str], max_states: int):
    """All total Moore machines with at most ``max_states`` states (BFS-canonical)."""
    import itertools

    width = 1 << len(inputs)
    out_letters = _letters(outputs)
    for n in range(1, max_states + 1):
        for targets in itertools.product(range(n), repeat=n * width):
            delta = [targets[q * width:(q + 1) * width] for q in range(n)]
            if not _bfs_canonical(delta, n):
                continue
            for outs in itertools.product(out_letters, repeat=n):
                yield MooreMachine(inputs, outputs, delta,
                                   [{s: s in y for s in outputs} for y in outs])


def _bfs_canonical(delta, n: int) -> bool:
    order = [0]
    seen = {0}
    for q in order:
        for d in delta[q]:
            if d not in seen:
                seen.add(d)
                order.append(d)
    return len(order) == n and order == list(range(n))


# ---------------------------------------------------------------------------
# JSON and DOT
# ---------------------------------------------------------------------------

def _cover(letters: list[int], nbits: int) -> list[tuple[int, int]]:
    """Cubes ``(mask, value)`` covering exactly the given letter indices."""
    if len(letters) == 1 << nbits:
        return [(0, 0)]
    full = (1 << nbits) - 1
    cubes = {(full, x) for x in letters}
    primes = set()
    while cubes:
        merged = set()
        used = set()
        cl = sorted(cubes)
        for a in cl:
            for b in cl:
                if a >= b or a[0] != b[0]:
                    continue
                diff = a[1] ^ b[1]
                if diff and diff & (diff - 1) == 0:
                    merged.add((a[0] & ~diff, a[1] & ~diff))
                    used.add(a)
                    used.add(b)
        primes |= cubes - used
        cubes = merged
    target = set(letters)
    chosen = []
    covered = set()

    def members(c):
        m, v = c
        return {x for x in target if x & m == v}

    for c in sorted(primes, key=lambda c: (-len(members(c)), c)):
        mem = members(c)
        if not mem <= covered:
            chosen.append(c)
            covered |= mem
    # drop cubes made redundant by later picks
    final = []
    for i, c in enumerate(chosen):
        rest = set()
        for j, d in enumerate(chosen):
            if j != i and (d in final or j > i):
                rest |= members(d)
        if not members(c) <= rest:
            final.append(c)
    return final


def _guard_text(signals: Sequence[str], letters: list[int]) -> str:
    cubes = _cover(letters, len(signals))
    parts = []
    for m, v in cubes:
        lits = []
        for j, s in enumerate(signals):
            if m >> j & 1:
                lits.append(s if v >> j & 1 else "!" + s)
        parts.append(" & ".join(lits) if lits else "true")
    if len(parts) == 1:
        return parts[0]
    return " | ".join(f"({p})" if " & " in p else p for p in parts)


def _guard_letters(guard, signals: Sequence[str], where: str) -> list[int]:
    from .ltl import eval_lasso, free_signals
    if isinstance(guard, Mapping):
        bad = set(guard) - set(signals)
        if bad:
            raise MachineError(f"{where}: guard uses unknown signals {sorted(bad)}")
        out = []
        for i in range(1 << len(signals)):
            x = index_letter(signals, i)
            if all((s in x) == bool(v) for s, v in guard.items()):
                out.append(i)
        return out
    if isinstance(guard, str):
        try:
            f = parse_ltl(guard, signals)
        except ValueError as exc:
            raise MachineError(f"{where}: {exc}") from None
        if any(g in f.op for g in ()) or _is_temporal(f):
            raise MachineError(f"{where}: guard must be propositional")
        del free_signals
        return [i for i in range(1 << len(signals))
                if eval_lasso(f, LassoTrace((), (index_letter(signals, i),)))]
    raise MachineError(f"{where}: guard must be an object or an expression string")


def _is_temporal(f: Formula) -> bool:
    from .ltl import TEMPORAL, subformulas
    return any(g.op in TEMPORAL for g in subformulas(f))


def machine_to_json(m: MealyMachine | MooreMachine) -> dict:
    is_moore = isinstance(m, MooreMachine)
    data = {"type": "moore" if is_moore else "mealy",
            "signals": {"inputs": list(m.inputs), "outputs": list(m.outputs)},
            "initial": m.initial, "states": [], "transitions": []}
    width = 1 << len(m.inputs)
    for q in range(m.n_states):
        entry = {"id": q}
        if is_moore:
            entry["output"] = {s: v for s, v in m.out[q]}
        data["states"].append(entry)
        groups: dict = {}
        for i in range(width):
            key = (m.delta[q][i],) if is_moore else (m.delta[q][i], m.out[q][i])
            groups.setdefault(key, []).append(i)
        for key, letters in groups.items():
            tr = {"from": q, "guard": _guard_text(m.inputs, letters), "to": key[0]}
            if not is_moore:
                tr["output"] = {s: s in key[1] for s in m.outputs}
            data["transitions"].append(tr)
    return data


def machine_from_json(data: Mapping) -> MealyMachine | MooreMachine:
    def need(obj, key, path):
        if key not in obj:
            raise MachineError(f"{path}: missing field {key!r}")
        return obj[key]

    kind = data.get("type", "moore" if any("output" in s for s in data.get("states", [])) else "mealy")
    if kind not in ("moore", "mealy"):
        raise MachineError(f"type: expected 'moore' or 'mealy', got {kind!r}")
    sig = need(data, "signals", "$")
    inputs = list(sig.get("observed", need(sig, "inputs", "$.signals"))) if kind == "moore" \
        else list(need(sig, "inputs", "$.signals"))
    outputs = list(need(sig, "outputs", "$.signals"))
    states = need(data, "states", "$")
    ids = []
    for k, st in enumerate(states):
        ids.append(need(st, "id", f"$.states[{k}]"))
    if len(set(ids)) != len(ids):
        raise MachineError("$.states: duplicate state ids")
    index = {sid: k for k, sid in enumerate(ids)}
    init = need(data, "initial", "$")
    if init not in index:
        raise MachineError(f"$.initial: unknown state {init!r}")
    width = 1 << len(inputs)
    n = len(states)
    delta = [[None] * width for _ in range(n)]
    out = [[None] * width for _ in range(n)]
    for k, tr in enumerate(need(data, "transitions", "$")):
        path = f"$.transitions[{k}]"
        src, dst = need(tr, "from", path), need(tr, "to", path)
        for name, v in (("from", src), ("to", dst)):
            if v not in index:
                raise MachineError(f"{path}.{name}: unknown state {v!r}")
        q, d = index[src], index[dst]
        y = None
        if kind == "mealy":
            o = need(tr, "output", path)
            bad = set(o) - set(outputs)
            if bad:
                raise MachineError(f"{path}.output: unknown signals {sorted(bad)}")
            y = frozenset(s for s, v in o.items() if v)
        for i in _guard_letters(tr.get("guard", "true"), inputs, f"{path}.guard"):
            if delta[q][i] is not None and (delta[q][i] != d or out[q][i] != y):
                raise MachineError(f"{path}: state {src!r} is nondeterministic on letter "
                                   f"{sorted(index_letter(inputs, i))}")
            delta[q][i] = d
            out[q][i] = y
    for q in range(n):
        for i in range(width):
            if delta[q][i] is None:
                raise MachineError(f"state {ids[q]!r} has no transition for letter "
                                   f"{sorted(index_letter(inputs, i))}")
    if kind == "moore":
        rows = []
        for k, st in enumerate(states):
            o = need(st, "output", f"$.states[{k}]")
            bad = set(o) - set(outputs)
            if bad:
                raise MachineError(f"$.states[{k}].output: unknown signals {sorted(bad)}")
            rows.append({s: o.get(s) for s in outputs})
        return MooreMachine(inputs, outputs, delta, rows, index[init])
    return MealyMachine(inputs, outputs, delta, out, index[init])


def save_machine(m, path) -> None:
    with open(path, "w") as fh:
        json.dump(machine_to_json(m), fh, indent=2)
        fh.write("\n")


def load_machine(path) -> MealyMachine | MooreMachine:
    with open(path) as fh:
        return machine_from_json(json.load(fh))


def machine_to_dot(m: MealyMachine | MooreMachine, name: str = "machine") -> str:
    is_moore = isinstance(m, MooreMachine)
    lines = [f"digraph {name} {{", "  rankdir=LR;", "  init [shape=point];"]
    for q in range(m.n_states):
        if is_moore:
            parts = [s if v else "!" + s for s, v in m.out[q] if v is not None]
            label = f"{q}\\n" + (", ".join(parts) if parts else "*")
        else:
            label = str(q)
        lines.append(f'  s{q} [shape=circle, label="{label}"];')
    lines.append(f"  init -> s{m.initial};")
    for tr in machine_to_json(m)["transitions"]:
        label = tr["guard"]
        if not is_moore:
            ys = [s for s, v in tr["output"].items() if v]
            label += " / " + (", ".join(ys) if ys else "-")
        lines.append(f'  s{tr["from"]} -> s{tr["to"]} [label="{label}"];')
    lines.append("}")
    return "\n".join(lines)
