"""Running strategies against machine SUTs: monitors, suites, mutants, completeness."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .automata import NbaMonitor, ltl_to_nba, nba_accepts_lasso
from .ltl import (
    Atom, Formula, Implies, LassoTrace, Not, SpecContext, conjuncts, eval_lasso, free_signals,
    prime, substitute,
)
from .machines import (
    Activation, MealyMachine, MooreMachine, Resolver, compose_serial, count_mealy, enumerate_mealy,
    inject_fault, make_fault_machine, make_resolver, run_steps, run_to_lasso,
)
from .modelcheck import check_mealy, render_timing

DEFAULT_STEPS = 80


@dataclass(frozen=True)
class Verdict:
    """``violated`` at ``step`` for the named guarantees, or ``inconclusive``."""

    kind: str = "inconclusive"
    step: int | None = None
    guarantees: tuple = ()
    note: str = ""

    @property
    def violated(self) -> bool:
        return self.kind == "violated"

    def __str__(self) -> str:
        if not self.violated:
            return "inconclusive"
        names = ", ".join(self.guarantees) or "spec"
        extra = f" [{self.note}]" if self.note else ""
        return f"violated at step {self.step} ({names}){extra}"


def _parts(ctx: SpecContext) -> list[tuple[str, Formula]]:
    """Named checks for attribution: ``A -> G_j`` per guarantee, or the whole spec."""
    names = dict(ctx.names) if ctx.names else {}
    spec = ctx.spec
    if spec.op == "implies":
        assume, guar = spec.left, spec.right
    else:
        assume, guar = None, spec
    gs = conjuncts(guar)
    inv = {f: n for n, f in names.items()}
    out = []
    for j, g in enumerate(gs):
        name = inv.get(g, f"G{j + 1}")
        out.append((name, g if assume is None else Implies(assume, g)))
    return out


class SpecMonitor:
    """Bad-prefix monitor, one automaton per guarantee for attribution.

    Hidden specification signals are projected away, so a verdict only uses
    what a tester can see.
    """

    def __init__(self, ctx: SpecContext):
        self.ctx = ctx
        self.parts = _parts(ctx)
        hidden = set(ctx.hidden)
        self.monitors = []
        for name, f in self.parts:
            nba = ltl_to_nba(f, ctx.universe)
            hid = (free_signals(f) & hidden) | (nba.signals - set(ctx.inputs) - set(ctx.outputs))
            if hid:
                nba = nba.project(hid)
            self.monitors.append((name, NbaMonitor(nba)))
        self.steps = 0
        self.verdict = Verdict()

    def reset(self) -> None:
        self.__init__(self.ctx)

    def step(self, letter: Iterable[str]) -> Verdict:
        x = frozenset(letter)
        if self.verdict.violated:
            self.steps += 1
            return self.verdict
        bad = []
        for name, mon in self.monitors:
            if not mon.step(x):
                bad.append(name)
        if bad:
            self.verdict = Verdict("violated", self.steps, tuple(bad))
        self.steps += 1
        return self.verdict


def monitor_step(state: tuple, letter: Iterable[str], nba) -> tuple[tuple, Verdict]:
    """Functional form: ``state`` is the tuple of current automaton states."""
    x = frozenset(letter)
    nxt = set()
    for q in state:
        for c, d in nba.succ[q]:
            if c.matches(x):
                nxt.add(d)
    new = tuple(sorted(nxt))
    return new, (Verdict("violated") if not new else Verdict())


def exact_verdict(ctx: SpecContext, trace: LassoTrace, formula: Formula | None = None) -> bool:
    """Does the infinite trace satisfy the specification (hidden signals existential)?"""
    phi = ctx.spec if formula is None else formula
    hidden = free_signals(phi) & set(ctx.hidden)
    if not hidden:
        return eval_lasso(phi, trace)
    nba = ltl_to_nba(phi, ctx.universe).project(hidden)
    return nba_accepts_lasso(nba, trace.project(set(ctx.inputs) | set(ctx.outputs)))


@dataclass
class RunResult:
    label: str
    trace: list
    verdict: Verdict
    lasso: LassoTrace | None = None
    satisfied: bool | None = None  # exact verdict on the infinite run
    failed_parts: tuple = ()
    annotations: list = field(default_factory=list)

    def to_jsonl(self) -> str:
        lines = [json.dumps({"step": k, "letter": sorted(x)}) for k, x in enumerate(self.trace)]
        lines.append(json.dumps({"summary": str(self.verdict), "satisfied": self.satisfied,
                                 "failed": list(self.failed_parts),
                                 "annotations": self.annotations}))
        return "\n".join(lines) + "\n"


def bounded_verdict(ctx: SpecContext, trace: Sequence[frozenset], horizon: int | None) -> Verdict:
    """Monitor verdict on a finite trace, plus the horizon rule for liveness.

    If no bad prefix is seen and the last ``horizon`` letters are identical,
    the trace is read as the lasso repeating its last letter forever; a
    violation found this way is annotated ``unresolved-liveness``.
    """
    mon = SpecMonitor(ctx)
    v = Verdict()
    for x in trace:
        v = mon.step(x)
        if v.violated:
            return v
    if horizon is None or not trace or len(trace) < horizon:
        return v
    tail = trace[-horizon:]
    if any(x != tail[-1] for x in tail):
        return v
    lasso = LassoTrace(tuple(trace[:-1]), (trace[-1],))
    failed = tuple(n for n, f in _parts(ctx) if not exact_verdict(ctx, lasso, f))
    if failed:
        return Verdict("violated", len(trace) - 1, failed, "unresolved-liveness")
    return v


def run_entry(strategy: MooreMachine, sut: MealyMachine, ctx: SpecContext,
              steps: int = DEFAULT_STEPS, resolver: Resolver | None = None,
              horizon: int | None = None, label: str = "") -> RunResult:
    resolver = resolver or make_resolver(None)
    trace = run_steps(strategy, sut, steps, resolver)
    visible = set(ctx.inputs) | set(ctx.outputs)
    shown = [x & visible for x in trace]
    verdict = bounded_verdict(ctx, shown, horizon)
    res = RunResult(label, shown, verdict)
    if resolver.stationary:
        lasso = run_to_lasso(strategy, sut, resolver).project(visible)
        res.lasso = lasso
        res.satisfied = exact_verdict(ctx, lasso)
        if not res.satisfied:
            res.failed_parts = tuple(n for n, f in _parts(ctx) if not exact_verdict(ctx, lasso, f))
    if verdict.note:
        res.annotations.append(verdict.note)
    return res


def _strategy(e) -> MooreMachine:
    return e if isinstance(e, MooreMachine) else e.strategy


def _label(k: int, e) -> str:
    if isinstance(e, MooreMachine):
        return f"{k}:strategy"
    return f"{k}:{e.target}/{e.frequency.name}"


def run_suite(suite, sut: MealyMachine, ctx: SpecContext, steps: int = DEFAULT_STEPS,
              resolver: Resolver | None = None, horizon: int | None = None) -> list[RunResult]:
    """Execute every entry for ``steps`` steps; exact lasso verdicts where possible."""
    return [run_entry(_strategy(e), sut, ctx, steps, resolver, horizon, _label(k, e))
            for k, e in enumerate(suite)]
    return out


def timing_diagram(result: RunResult, signals: Sequence[str]) -> str:
    return render_timing(result.trace, signals)


# ---------------------------------------------------------------------------
# mutation analysis
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Mutant:
    name: str
    target: str
    fault: MealyMachine
    machine: MealyMachine


def builtin_mutants(golden: MealyMachine, targets: Sequence[str] | None = None,
                    kinds: Sequence[str] = ("stuck_at_0", "stuck_at_1", "bit_flip"),
                    activation: Activation | None = None) -> list[Mutant]:
    out = []
    for o in targets if targets is not None else golden.outputs:
        for kind in kinds:
            fault = make_fault_machine(kind, o, activation)
            out.append(Mutant(f"{kind}@{o}", o, fault, inject_fault(golden, o, fault)))
    return out


@dataclass
class KillMatrix:
    mutants: list
    entries: list
    cells: dict  # (mutant, entry) -> {"diff": bool, "violation": bool, "monitor": bool}
    equivalent: dict  # mutant -> bool

    def killed(self, mutant: str, criterion: str = "diff") -> bool:
        return any(self.cells[(mutant, e)][criterion] for e in self.entries)

    def score(self, criterion: str = "diff") -> float:
        live = [m for m in self.mutants if not self.equivalent[m]]
        if not live or not self.entries:
            return 0.0
        return sum(self.killed(m, criterion) for m in live) / len(live)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["mutant", "equivalent"] + [f"{e}:{c}" for e in self.entries
                                                for c in ("diff", "violation", "monitor")])
        for m in self.mutants:
            row = [m, int(self.equivalent[m])]
            for e in self.entries:
                cell = self.cells[(m, e)]
                row += [int(cell["diff"]), int(cell["violation"]), int(cell["monitor"])]
            w.writerow(row)
        return buf.getvalue()

    def summary(self) -> str:
        live = sum(not v for v in self.equivalent.values())
        lines = [f"mutants: {len(self.mutants)} ({len(self.mutants) - live} equivalent)",
                 f"strategies: {len(self.entries)}"]
        for c in ("diff", "violation", "monitor"):
            lines.append(f"score[{c}]: {self.score(c):.4f}")
        return "\n".join(lines)


def mutation_experiment(golden: MealyMachine, suite, mutants: Sequence[Mutant], ctx: SpecContext,
                        steps: int = DEFAULT_STEPS, resolver: Resolver | None = None,
                        check_golden: bool = True) -> KillMatrix:
    """Kill matrix under three criteria.

    ``diff``: the declared outputs differ from the golden run within
    ``steps`` steps; ``violation``: the exact infinite run violates the
    specification; ``monitor``: a bad prefix is seen within ``steps`` steps.
    Mutants that still realize the specification are flagged equivalent.
    """
    if check_golden and not check_mealy(golden, ctx.spec).holds:
        raise ValueError("golden machine does not realize the specification")
    resolver = resolver or make_resolver(None)
    entries = [_strategy(e) for e in suite]
    labels = [_label(k, e) for k, e in enumerate(suite)]
    outs = set(ctx.outputs)
    golden_runs = [run_steps(t, golden, steps, resolver) for t in entries]
    cells = {}
    equivalent = {}
    for m in mutants:
        equivalent[m.name] = check_mealy(m.machine, ctx.spec).holds
        for t, lab, gtrace in zip(entries, labels, golden_runs):
            mtrace = run_steps(t, m.machine, steps, resolver)
            diff = any((a & outs) != (b & outs) for a, b in zip(gtrace, mtrace))
            r = run_entry(t, m.machine, ctx, steps, resolver)
            cells[(m.name, lab)] = {"diff": diff,
                                    "violation": r.satisfied is False,
                                    "monitor": r.verdict.violated}
    return KillMatrix([m.name for m in mutants], labels, cells, equivalent)


# ---------------------------------------------------------------------------
# bounded completeness check
# ---------------------------------------------------------------------------

class EnumerationTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class CompletenessResult:
    complete: bool
    witness: tuple | None = None  # (S', F)
    systems: int = 0
    faults: int = 0
    pairs: int = 0

    def __bool__(self) -> bool:
        return self.complete


def check_universally_complete_bounded(suite, ctx: SpecContext, delta, n_max: int = 2,
                                       cap: int = 2_000_000,
                                       fault_inputs: Sequence[str] | None = None) -> CompletenessResult:
    """Brute-force check of universal completeness over small machines.

    Enumerates every correct system ``S'`` (writing ``o'`` for the target
    ``o``) and every fault machine ``F`` realizing ``delta`` with at most
    ``n_max`` states, and asks whether some suite strategy drives
    ``S' ∘ F`` into a specification violation.  ``fault_inputs`` restricts
    what ``F`` reads (default: all inputs, the other outputs and ``o'``).
    """
    o = delta.target
    op = prime(o)
    fault_formula = delta.formula
    sys_outputs = tuple(op if x == o else x for x in ctx.outputs)
    if fault_inputs is None:
        fault_inputs = tuple(ctx.inputs) + tuple(x for x in ctx.outputs if x != o) + (op,)
    fault_inputs = tuple(fault_inputs)
    if op not in fault_inputs:
        fault_inputs = fault_inputs + (op,)
    n_sys = sum(count_mealy(len(ctx.inputs), len(sys_outputs), n) for n in range(1, n_max + 1))
    n_flt = sum(count_mealy(len(fault_inputs), 1, n) for n in range(1, n_max + 1))
    if n_sys > cap or n_flt > cap:
        raise EnumerationTooLarge(f"machine space too large ({n_sys} systems, {n_flt} faults; cap {cap})")
    phi_p = substitute(ctx.spec, o, Atom(op))
    sys_nba = ltl_to_nba(Not(phi_p))
    systems = [m for m in enumerate_mealy(ctx.inputs, sys_outputs, n_max)
               if check_mealy(m, phi_p, sys_nba).holds]
    flt_nba = ltl_to_nba(Not(fault_formula))
    faults = [f for f in enumerate_mealy(fault_inputs, (o,), n_max)
              if check_mealy(f, fault_formula, flt_nba).holds]
    entries = [_strategy(e) for e in suite]
    cache: dict = {}
    pairs = 0
    for s in systems:
        for f in faults:
            pairs += 1
            mut = compose_serial(s, f)
            revealed = False
            for t in entries:
                if not set(t.inputs) <= set(mut.outputs):
                    continue
                lasso = run_to_lasso(t, mut, make_resolver(None))
                key = lasso
                hit = cache.get(key)
                if hit is None:
                    hit = not exact_verdict(ctx, lasso.project(set(ctx.inputs) | set(ctx.outputs)))
                    cache[key] = hit
                if hit:
                    revealed = True
                    break
            if not revealed:
                return CompletenessResult(False, (s, f), len(systems), len(faults), pairs)
    return CompletenessResult(True, None, len(systems), len(faults), pairs)

