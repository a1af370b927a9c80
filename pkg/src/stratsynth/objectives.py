"""Fault kinds, fault frequencies and the test objectives built from them."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .ltl import (
    PRIME_SUFFIX, Always, And, Atom, Eventually, Formula, Iff, Implies, Next, Not,
    SpecContext, conjunction, free_signals, prime, substitute, substitute_many,
    to_string,
)

HOLE = "_hole_"


@dataclass(frozen=True)
class FaultFrequency:
    """How often a fault kind strikes: ``F``, ``GF``, ``FG``, ``G`` or custom.

    A custom frequency is a formula containing the placeholder atom
    ``_hole_``, which is replaced by the fault kind.  ``order`` ranks
    frequencies from weakest (tried first) to strongest.
    """

    name: str
    order: int
    template: Formula | None = None

    def apply(self, kappa: Formula) -> Formula:
        if self.name == "F":
            return Eventually(kappa)
        if self.name == "GF":
            return Always(Eventually(kappa))
        if self.name == "FG":
            return Eventually(Always(kappa))
        if self.name == "G":
            return Always(kappa)
        return substitute(self.template, HOLE, kappa)

    def __str__(self) -> str:
        return self.name

    @classmethod
    def custom(cls, template: Formula, order: int, name: str | None = None) -> FaultFrequency:
        if HOLE not in free_signals(template):
            raise ValueError(f"custom frequency must contain the placeholder {HOLE!r}")
        return cls(name or to_string(template), order, template)


F = FaultFrequency("F", 0)
GF = FaultFrequency("GF", 1)
FG = FaultFrequency("FG", 2)
G = FaultFrequency("G", 3)
DEFAULT_FREQUENCIES = (F, GF, FG, G)
BUILTIN_FREQUENCIES = {f.name: f for f in DEFAULT_FREQUENCIES}


def frequency(name: str) -> FaultFrequency:
    try:
        return BUILTIN_FREQUENCIES[name]
    except KeyError:
        raise ValueError(f"unknown fault frequency {name!r}; use F, GF, FG or G") from None


def fault_kind(kind: str, o: str) -> Formula:
    """Builtin fault kinds over output ``o`` and its hidden correct copy."""
    op = Atom(prime(o))
    if kind in ("stuck0", "stuck_at_0"):
        return Not(Atom(o))
    if kind in ("stuck1", "stuck_at_1"):
        return Atom(o)
    if kind in ("bitflip", "bit_flip"):
        return Iff(Atom(o), Not(op))
    if kind in ("delay", "delay_one"):
        return Iff(op, Next(Atom(o)))
    raise ValueError(f"unknown builtin fault kind {kind!r}")


@dataclass(frozen=True)
class FaultModel:
    kind: Formula
    frequency: FaultFrequency
    target: str

    @property
    def formula(self) -> Formula:
        return self.frequency.apply(self.kind)


def replaced_by(kappa: Formula, o: str) -> Formula | None:
    """``psi`` if ``kappa`` has the shape ``o' <-> psi`` with ``psi`` free of ``o'``."""
    if kappa.op != "iff":
        return None
    hidden = prime(o)
    a, b = kappa.left, kappa.right
    for x, y in ((a, b), (b, a)):
        if hidden in free_signals(y):
            continue
        if x.op == "atom" and x.name == hidden:
            return y
        if x.op == "not" and x.arg.op == "atom" and x.arg.name == hidden:
            return Not(y)
    return None


def objective_guard(o: str, kappa: Formula, freq: FaultFrequency) -> str:
    """Which objective form applies: ``no_hidden``, ``replacement`` or ``full``."""
    if prime(o) not in free_signals(kappa):
        return "no_hidden"
    if freq.name == "G" and replaced_by(kappa, o) is not None:
        return "replacement"
    return "full"


def _check_kappa(ctx: SpecContext, targets: Sequence[str], kappa: Formula) -> None:
    allowed = set(ctx.inputs) | set(ctx.outputs) | {prime(t) for t in targets}
    bad = free_signals(kappa) - allowed
    if bad:
        raise ValueError(f"fault kind references signals {sorted(bad)} that are neither "
                         f"inputs, outputs nor the hidden copy of the target")


def make_objective(ctx: SpecContext, o: str, kappa: Formula, freq: FaultFrequency,
                   simplify: bool = True) -> Formula:
    """The objective a test strategy for faults ``freq(kappa)`` at ``o`` must enforce.

    With ``simplify`` the cheaper equivalent forms are used whenever they are
    sound: ``freq(kappa) -> !phi`` when ``kappa`` does not mention ``o'``, and
    ``phi[o<-psi] -> !phi`` for permanent faults ``kappa = (o' <-> psi)``.
    """
    if o not in ctx.outputs and o not in ctx.inputs:
        raise ValueError(f"{o!r} is neither an input nor an output")
    _check_kappa(ctx, [o], kappa)
    phi = ctx.spec
    guard = objective_guard(o, kappa, freq) if simplify else "full"
    if guard == "no_hidden":
        return Implies(freq.apply(kappa), Not(phi))
    if guard == "replacement":
        return Implies(substitute(phi, o, replaced_by(kappa, o)), Not(phi))
    return Implies(And(substitute(phi, o, Atom(prime(o))), freq.apply(kappa)), Not(phi))


def make_multi_objective(ctx: SpecContext, faults: Sequence[FaultModel]) -> Formula:
    """Objective for simultaneous faults at several signals."""
    if not faults:
        raise ValueError("at least one faulty signal is required")
    targets = [m.target for m in faults]
    if len(set(targets)) != len(targets):
        raise ValueError("faulty signals must be distinct")
    if len(faults) == 1:
        m = faults[0]
        return make_objective(ctx, m.target, m.kind, m.frequency)
    for m in faults:
        _check_kappa(ctx, targets, m.kind)
    renamed = substitute_many(ctx.spec, {t: Atom(prime(t)) for t in targets})
    return Implies(And(renamed, conjunction(m.formula for m in faults)), Not(ctx.spec))


def hidden_signals(ctx: SpecContext, formula: Formula) -> frozenset[str]:
    """Signals of ``formula`` a tester cannot observe or drive."""
    visible = set(ctx.inputs) | set(ctx.outputs)
    return frozenset(s for s in free_signals(formula) if s not in visible)


def is_primed(name: str) -> bool:
    return name.endswith(PRIME_SUFFIX)
