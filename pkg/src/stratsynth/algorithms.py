"""Test-suite synthesis: frequency ladder, enumeration, generalization, diagnosis."""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .ltl import (
    Always, And, Formula, Implies, Not, SpecContext, conjunction, free_signals, parse_ltl,
    prime, substitute, to_string,
)
from .machines import (
    MealyMachine, MooreMachine, compose_serial, machine_from_json, machine_to_dot,
    machine_to_json,
)
from .modelcheck import check_mealy, check_moore
from .objectives import (
    DEFAULT_FREQUENCIES, FaultFrequency, FaultModel, fault_kind, frequency, hidden_signals,
    make_multi_objective, make_objective, objective_guard,
)
from .synthesis import (
    DEFAULT_KMAX, BehavioralBlock, EngineStats, SynthesisProblem, Unrealizable,
    enumerate_machines, synth_increasing,
)

KindSpec = "str | Formula | Callable[[str], Formula]"


@dataclass(frozen=True)
class SynthOptions:
    k_max: int = DEFAULT_KMAX
    frequencies: tuple = DEFAULT_FREQUENCIES
    multi: int = 1
    generalize: bool = False
    input_faults: bool = False
    simplify: bool = True
    backend: str | None = None
    visit_order: str = "state"  # "state": states outer, signals inner; "signal": the reverse


@dataclass(frozen=True)
class SuiteEntry:
    strategy: MooreMachine
    target: str
    kind: Formula
    frequency: FaultFrequency
    objective: Formula
    provenance: dict = field(default_factory=dict, compare=False)

    @property
    def kind_text(self) -> str:
        return to_string(self.kind)


class TestSuite:
    """Strategies with their objectives; every entry is re-checked on insertion."""

    __test__ = False  # not a pytest class

    def __init__(self, entries: Iterable[SuiteEntry] = (), verify: bool = True):
        self.entries: list[SuiteEntry] = []
        for e in entries:
            self.add(e, verify)

    def add(self, entry: SuiteEntry, verify: bool = True) -> None:
        if verify:
            res = check_moore(entry.strategy, entry.objective)
            if not res.holds:
                raise AssertionError(f"suite entry for {entry.target} does not enforce its objective")
        self.entries.append(entry)

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def for_target(self, target: str) -> list[SuiteEntry]:
        return [e for e in self.entries if e.target == target]


@dataclass
class Outcome:
    target: str
    frequency: str
    result: str  # "found" or UNREAL_UP_TO(k)
    states: int | None = None
    guard: str = ""
    stats: dict = field(default_factory=dict)


@dataclass
class SynthesisReport:
    outcomes: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    diagnoses: dict = field(default_factory=dict)

    @property
    def has_unrealizable(self) -> bool:
        return bool(self.warnings)

    def as_dict(self) -> dict:
        return {"outcomes": [o.__dict__ for o in self.outcomes], "warnings": list(self.warnings)}


def resolve_kind(kind, target: str) -> Formula:
    """Fault kind for ``target``: builtin name, ``expr:<ltl>`` text, formula or callable."""
    if callable(kind) and not isinstance(kind, Formula):
        return kind(target)
    if isinstance(kind, Formula):
        return kind
    if isinstance(kind, str) and kind.startswith("expr:"):
        return parse_ltl(kind[5:])
    return fault_kind(kind, target)


def strategy_problem(ctx: SpecContext, objective: Formula, exclusions=()) -> SynthesisProblem:
    """Moore strategy problem: reads the outputs, drives the inputs, hidden signals unobserved."""
    extra = sorted(hidden_signals(ctx, objective) - set(ctx.hidden))
    env = tuple(ctx.outputs) + tuple(ctx.hidden) + tuple(extra)
    return SynthesisProblem(env, ctx.inputs, objective, ctx.outputs, "moore", tuple(exclusions))


def _targets(ctx: SpecContext, targets, opts: SynthOptions) -> list[str]:
    if targets is not None:
        out = list(targets)
        for t in out:
            if t not in ctx.outputs and t not in ctx.inputs:
                raise ValueError(f"target {t!r} is neither an input nor an output")
        return out
    return list(ctx.outputs) + (list(ctx.inputs) if opts.input_faults else [])


def synt_ltl_iterate(ctx: SpecContext, o: str, kappa: Formula, exclusions=(),
                     opts: SynthOptions = SynthOptions(),
                     report: SynthesisReport | None = None) -> list[SuiteEntry]:
    """Strategies for the lowest frequency at which faults of kind ``kappa`` at ``o`` can be revealed.

    Returns up to ``opts.multi`` entries with distinct tables, all at that
    frequency, or an empty list when every frequency is unrealizable up to
    ``opts.k_max``.
    """
    report = report if report is not None else SynthesisReport()
    for freq in opts.frequencies:
        objective = make_objective(ctx, o, kappa, freq, opts.simplify)
        guard = objective_guard(o, kappa, freq) if opts.simplify else "full"
        problem = strategy_problem(ctx, objective, exclusions)
        stats = EngineStats()
        start = time.perf_counter()
        if opts.multi > 1:
            found = enumerate_machines(problem, opts.multi, opts.k_max, backend=opts.backend,
                                       stats=stats)
        else:
            r = synth_increasing(problem, opts.k_max, backend=opts.backend, stats=stats)
            found = [r] if r else []
        elapsed = time.perf_counter() - start
        if not found:
            report.outcomes.append(Outcome(o, freq.name, str(Unrealizable(opts.k_max)),
                                           guard=guard, stats=stats.as_dict()))
            continue
        entries = []
        for m in found:
            prov = {"bound": m.n_states, "guard": guard, "seconds": round(elapsed, 3),
                    "nba_states": stats.nba_states, "backend": stats.backend,
                    "variables": stats.variables, "clauses": stats.clauses}
            e = SuiteEntry(m, o, kappa, freq, objective, prov)
            if opts.generalize:
                e = generalize(e, opts.visit_order)
            entries.append(e)
        report.outcomes.append(Outcome(o, freq.name, "found", found[0].n_states, guard,
                                       stats.as_dict()))
        return entries
    last = opts.frequencies[-1].name if opts.frequencies else "-"
    report.warnings.append(f"no strategy for faults of kind {to_string(kappa)} at {o} "
                           f"up to frequency {last} and {opts.k_max} states; examine manually")
    return []


def synt_ltl_test(ctx: SpecContext, kind, opts: SynthOptions = SynthOptions(),
                  targets: Sequence[str] | None = None) -> tuple[TestSuite, SynthesisReport]:
    """One (or ``opts.multi``) strategy per target at its lowest revealing frequency."""
    report = SynthesisReport()
    suite = TestSuite()
    for o in _targets(ctx, targets, opts):
        kappa = resolve_kind(kind, o)
        for e in synt_ltl_iterate(ctx, o, kappa, (), opts, report):
            suite.add(e)
    return suite, report


# ---------------------------------------------------------------------------
# generalization
# ---------------------------------------------------------------------------

def generalize(entry: SuiteEntry, order: str = "state") -> SuiteEntry:
    """Drop output assignments of the strategy that the objective does not need.

    Visits states in ascending order and, within a state, signals in
    lexicographic order (``order="signal"`` swaps the loops).  An assignment
    stays removed iff the partial strategy still enforces the objective with
    the freed signal chosen adversarially.
    """
    m = entry.strategy
    pairs = [(q, s) for q in range(m.n_states) for s in sorted(m.outputs)]
    if order == "signal":
        pairs = [(q, s) for s in sorted(m.outputs) for q in range(m.n_states)]
    elif order != "state":
        raise ValueError(f"unknown visit order {order!r}")
    from .automata import ltl_to_nba
    nba = ltl_to_nba(Not(entry.objective))
    for q, s in pairs:
        if m.output(q)[s] is None:
            continue
        trial = m.unconstrain(q, s)
        if check_moore(trial, entry.objective, nba).holds:
            m = trial
    prov = dict(entry.provenance)
    prov["generalized"] = True
    return SuiteEntry(m, entry.target, entry.kind, entry.frequency, entry.objective, prov)


# ---------------------------------------------------------------------------
# sanity checks and diagnosis
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SanityReport:
    spec_realizable: bool
    fault_realizable: bool
    bound: int
    spec_witness: MealyMachine | None = None
    fault_witness: MealyMachine | None = None

    @property
    def advisory(self) -> bool:
        """Negative answers only hold up to the bound."""
        return not (self.spec_realizable and self.fault_realizable)


def fault_problem(ctx: SpecContext, o: str, kappa: Formula) -> SynthesisProblem:
    env = tuple(s for s in list(ctx.inputs) + list(ctx.outputs) + [prime(o)] if s != o)
    env = tuple(s for s in env if s in free_signals(kappa) or s != prime(o))
    return SynthesisProblem(env, (o,), Always(kappa), env, "mealy")


def sanity_check(ctx: SpecContext, kappa: Formula | str, o: str | None = None,
                 k_max: int = DEFAULT_KMAX, backend: str | None = None) -> SanityReport:
    """Mealy realizability of the specification and of ``G kappa``."""
    target = o or (ctx.outputs[0] if ctx.outputs else None)
    if isinstance(kappa, str):
        kappa = resolve_kind(kappa, target)
    spec_p = SynthesisProblem(ctx.inputs, tuple(ctx.outputs) + tuple(ctx.hidden), ctx.spec,
                              ctx.inputs, "mealy")
    spec_m = synth_increasing(spec_p, k_max, backend=backend)
    if target is None:
        t = next(iter(sorted(free_signals(kappa))), None)
        target = t
    fault_m = synth_increasing(fault_problem(ctx, target, kappa), k_max, backend=backend)
    return SanityReport(bool(spec_m), bool(fault_m), k_max,
                        spec_m if spec_m else None, fault_m if fault_m else None)


@dataclass(frozen=True)
class Diagnosis:
    """A correct system and a fault whose composition still satisfies the specification."""

    system: MealyMachine  # writes o' in place of o
    fault: MealyMachine   # reads the inputs and o', writes o
    composed: MealyMachine


def diagnose_unrealizable(ctx: SpecContext, o: str, kappa: Formula,
                          k_max: int = DEFAULT_KMAX, backend: str | None = None) -> Diagnosis | None:
    """Witness for an undetectable fault: ``S ⊨ φ[o←o'] ∧ G κ ∧ φ`` split into ``S'`` and ``F``.

    ``S'`` is ``S`` without output ``o``.  ``F`` reads the inputs and ``o'``,
    replays ``S`` on the inputs and emits its value of ``o`` while the
    observed ``o'`` agrees with ``S``; after the first disagreement it falls
    back to a separately synthesized machine for ``G κ``.  All three
    certificates are checked before returning; ``None`` means no certified
    witness exists up to ``k_max`` states.
    """
    op = prime(o)
    phi = ctx.spec
    body = And(And(substitute(phi, o, _atom(op)), Always(kappa)), phi)
    outs = tuple(ctx.outputs) + (op,) + tuple(ctx.hidden)
    p = SynthesisProblem(ctx.inputs, outs, body, ctx.inputs, "mealy")
    s = synth_increasing(p, k_max, backend=backend)
    if not s:
        return None
    sys_outs = tuple(x for x in outs if x != o)
    s_prime = _project_outputs(s, sys_outs)
    fallback = synth_increasing(fault_problem(ctx, o, kappa), k_max, backend=backend)
    if not fallback:
        return None
    fault = _follow_then_fallback(s, o, op, fallback)
    composed = compose_serial(s_prime, fault)
    ok = (check_mealy(s_prime, substitute(phi, o, _atom(op))).holds
          and check_mealy(fault, Always(kappa)).holds
          and check_mealy(composed, phi).holds)
    if not ok:
        return None
    return Diagnosis(s_prime, fault, composed)


def _atom(name):
    from .ltl import Atom
    return Atom(name)


def _project_outputs(m: MealyMachine, keep: Sequence[str]) -> MealyMachine:
    keep_set = set(keep)
    return MealyMachine(m.inputs, tuple(keep), m.delta,
                        [[y & keep_set for y in row] for row in m.out], m.initial).prune()


def _follow_then_fallback(s: MealyMachine, o: str, op: str, fb: MealyMachine) -> MealyMachine:
    """Fault machine over inputs ``s.inputs + [o']`` (plus what ``fb`` reads)."""
    from .machines import index_letter, letter_index
    ins = tuple(dict.fromkeys(list(s.inputs) + [op] + [x for x in fb.inputs if x not in s.inputs]))
    # state: ("follow", s_state, fb_state) or ("fallback", fb_state)
    states = {}
    order = []

    def sid(key):
        if key not in states:
            states[key] = len(order)
            order.append(key)
        return states[key]

    sid(("follow", s.initial, fb.initial))
    delta, out = [], []
    i = 0
    while i < len(order):
        key = order[i]
        i += 1
        drow, orow = [], []
        for xi in range(1 << len(ins)):
            x = index_letter(ins, xi)
            fbx = letter_index(fb.inputs, x)
            fq = key[-1]
            fb_next, fb_y = fb.delta[fq][fbx], fb.out[fq][fbx]
            if key[0] == "follow":
                sx = letter_index(s.inputs, x)
                y = s.out[key[1]][sx]
                if (op in y) == (op in x):
                    drow.append(sid(("follow", s.delta[key[1]][sx], fb_next)))
                    orow.append(frozenset([o]) if o in y else frozenset())
                    continue
            drow.append(sid(("fallback", fb_next)))
            orow.append(frozenset([o]) if o in fb_y else frozenset())
        delta.append(drow)
        out.append(orow)
    return MealyMachine(ins, (o,), delta, out, 0)


# ---------------------------------------------------------------------------
# extensions
# ---------------------------------------------------------------------------

def synth_multi_fault(ctx: SpecContext, faults: Sequence[FaultModel],
                      opts: SynthOptions = SynthOptions()) -> SuiteEntry | None:
    """One strategy for faults striking several signals at the same time."""
    if not faults:
        raise ValueError("at least one fault model is required")
    objective = make_multi_objective(ctx, faults)
    r = synth_increasing(strategy_problem(ctx, objective), opts.k_max, backend=opts.backend)
    if not r:
        return None
    first = faults[0]
    targets = ",".join(f.target for f in faults)
    kind = conjunction(f.kind for f in faults)
    e = SuiteEntry(r, targets, kind, first.frequency, objective,
                   {"bound": r.n_states, "faults": [(f.target, to_string(f.kind), f.frequency.name)
                                                    for f in faults]})
    return generalize(e, opts.visit_order) if opts.generalize else e


def synth_spec_mutation(ctx: SpecContext, phi_mut: Formula,
                        opts: SynthOptions = SynthOptions()) -> SuiteEntry | None:
    """Strategy forcing any implementation of ``phi_mut`` to violate the specification."""
    objective = Implies(phi_mut, Not(ctx.spec))
    extra = free_signals(phi_mut) - ctx.universe
    if extra:
        raise ValueError(f"mutated specification uses undeclared signals {sorted(extra)}")
    r = synth_increasing(strategy_problem(ctx, objective), opts.k_max, backend=opts.backend)
    if not r:
        return None
    from .ltl import TRUE
    return SuiteEntry(r, "*", TRUE, frequency("G"), objective,
                      {"bound": r.n_states, "mutation": to_string(phi_mut)})


def frequency_dominates(entry: SuiteEntry, ctx: SpecContext, simplify: bool = True) -> bool:
    """Does the entry also enforce the objectives of all stronger frequencies?"""
    for f in DEFAULT_FREQUENCIES:
        if f.order <= entry.frequency.order:
            continue
        obj = make_objective(ctx, entry.target, entry.kind, f, simplify)
        if not check_moore(entry.strategy, obj).holds:
            return False
    return True


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------

def export_suite(suite: TestSuite, outdir, report: SynthesisReport | None = None,
                 ctx: SpecContext | None = None) -> Path:
    """Directory with machine JSON, DOT and objective text per entry plus a manifest."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {"entries": []}
    if ctx is not None:
        manifest["signals"] = {"inputs": list(ctx.inputs), "outputs": list(ctx.outputs),
                               "hidden": list(ctx.hidden)}
        manifest["spec"] = to_string(ctx.spec)
    counts: dict = {}
    for e in suite:
        base = f"{e.target.replace(',', '+')}_{e.frequency.name}"
        n = counts.get(base, 0)
        counts[base] = n + 1
        stem = f"{base}_{n}"
        (out / f"{stem}.json").write_text(json.dumps(machine_to_json(e.strategy), indent=2) + "\n")
        (out / f"{stem}.dot").write_text(machine_to_dot(e.strategy, "strategy") + "\n")
        (out / f"{stem}.ltl").write_text(to_string(e.objective) + "\n")
        manifest["entries"].append({
            "machine": f"{stem}.json", "dot": f"{stem}.dot", "objective_file": f"{stem}.ltl",
            "target": e.target, "kind": to_string(e.kind), "frequency": e.frequency.name,
            "objective": to_string(e.objective), "states": e.strategy.n_states,
            "partial": e.strategy.is_partial, "provenance": e.provenance,
        })
    if report is not None:
        manifest["report"] = report.as_dict()
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, default=str) + "\n")
    return out


def load_suite(directory, verify: bool = True) -> TestSuite:
    d = Path(directory)
    manifest = json.loads((d / "manifest.json").read_text())
    suite = TestSuite()
    for item in manifest["entries"]:
        m = machine_from_json(json.loads((d / item["machine"]).read_text()))
        objective = parse_ltl((d / item["objective_file"]).read_text().strip())
        freq_name = item["frequency"]
        try:
            freq = frequency(freq_name)
        except ValueError:
            freq = FaultFrequency(freq_name, 99)
        suite.add(SuiteEntry(m, item["target"], parse_ltl(item["kind"]), freq, objective,
                             item.get("provenance", {})), verify)
    return suite
