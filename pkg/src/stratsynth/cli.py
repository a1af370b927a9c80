"""Command-line front end.

Exit codes: 0 success, 1 user error, 2 negative outcome (an unrealizable
bound, a failed check, an incomplete suite, no diagnosis), 3 engine error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .algorithms import (
    SuiteEntry, SynthOptions, TestSuite, diagnose_unrealizable, export_suite, generalize,
    load_suite, resolve_kind, synt_ltl_test, synth_multi_fault,
)
from .harness import (
    EnumerationTooLarge, builtin_mutants, check_universally_complete_bounded,
    mutation_experiment, run_suite,
)
from .ltl import LtlSyntaxError, parse_ltl, to_string
from .machines import (
    MachineError, MealyMachine, MooreMachine, load_machine, machine_to_dot, make_resolver,
    save_machine,
)
from .modelcheck import check_mealy, check_moore, render_timing
from .objectives import DEFAULT_FREQUENCIES, FaultModel, frequency
from .sat import SolverError
from .specfile import SpecFileError, load_spec
from .synthesis import DEFAULT_KMAX, EngineError

OK, USER_ERROR, NEGATIVE, ENGINE_ERROR = 0, 1, 2, 3


class UsageError(ValueError):
    pass


def _split(text: str | None) -> list[str] | None:
    if text is None:
        return None
    return [t for t in text.replace(",", " ").split() if t]


def _freqs(text: str | None) -> tuple:
    if not text:
        return DEFAULT_FREQUENCIES
    return tuple(frequency(f) for f in _split(text))


def _ctx(path):
    return load_spec(path).context()


def _say(*args) -> None:
    print(*args, file=sys.stderr)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_synth(a) -> int:
    sf = load_spec(a.spec)
    ctx = sf.context()
    opts = SynthOptions(k_max=a.kmax, frequencies=_freqs(a.freqs), multi=a.multi,
                        generalize=a.generalize, input_faults=a.input_faults,
                        backend=a.backend)
    if a.multi_fault:
        faults = []
        for item in a.multi_fault:
            try:
                target, kind, freq = item.split(":", 2)
            except ValueError:
                raise UsageError(f"--multi-fault expects target:kind:freq, got {item!r}") from None
            faults.append(FaultModel(resolve_kind(kind, target), frequency(freq), target))
        entry = synth_multi_fault(ctx, faults, opts)
        suite = TestSuite([entry] if entry else [])
        from .algorithms import SynthesisReport
        report = SynthesisReport()
        if entry is None:
            report.warnings.append(f"no multi-fault strategy up to {a.kmax} states")
    else:
        targets = _split(a.targets) or (list(sf.targets) or None)
        suite, report = synt_ltl_test(ctx, a.fault_kind, opts, targets)
    for o in report.outcomes:
        size = f" states={o.states}" if o.states else ""
        print(f"{o.target}\t{o.frequency}\t{o.result}{size}\t[{o.guard}]")
    for w in report.warnings:
        _say("warning:", w)
    if a.out:
        export_suite(suite, a.out, report, ctx)
        print(f"wrote {len(suite)} strategies to {a.out}")
    return NEGATIVE if report.has_unrealizable or not len(suite) else OK


def cmd_check(a) -> int:
    m = load_machine(a.machine)
    if a.formula:
        phi = parse_ltl(a.formula)
    elif a.formula_file:
        phi = parse_ltl(Path(a.formula_file).read_text().strip())
    elif a.spec:
        phi = _ctx(a.spec).spec
    else:
        raise UsageError("give --formula, --formula-file or --spec")
    res = check_moore(m, phi) if isinstance(m, MooreMachine) else check_mealy(m, phi)
    print(res.verdict)
    if not res.holds:
        signals = sorted({s for x in res.counterexample.prefix + res.counterexample.loop for s in x}
                         | set(m.inputs) | set(m.outputs))
        print(f"counterexample (loop starts at step {len(res.counterexample.prefix)}):")
        print(render_timing(res.counterexample, signals))
    return OK if res.holds else NEGATIVE


def cmd_generalize(a) -> int:
    suite = load_suite(a.suite)
    picks = range(len(suite)) if a.entry is None else [a.entry]
    out = TestSuite()
    for k, e in enumerate(suite):
        if k in picks:
            g = generalize(e, a.order)
            free = sorted((q, s) for q in range(g.strategy.n_states)
                          for s, v in g.strategy.out[q] if v is None)
            print(f"{k}: {e.target}/{e.frequency.name}: unconstrained {free}")
            out.add(g)
        else:
            out.add(e)
    export_suite(out, a.out or a.suite)
    return OK


def cmd_run(a) -> int:
    ctx = _ctx(a.spec)
    suite = load_suite(a.suite)
    sut = load_machine(a.sut)
    if isinstance(sut, MooreMachine):
        sut = sut.as_mealy()
    resolver = make_resolver(a.resolver, a.seed)
    results = run_suite(suite, sut, ctx, a.steps, resolver, a.horizon)
    log = open(a.log, "w") if a.log else None
    violated = False
    try:
        for r in results:
            exact = "" if r.satisfied is None else f"\texact={'satisfied' if r.satisfied else 'violated'}"
            print(f"{r.label}\t{r.verdict}{exact}")
            violated |= r.verdict.violated or r.satisfied is False
            if a.timing:
                print(render_timing(r.trace, list(ctx.inputs) + list(ctx.outputs), a.timing))
            if log:
                log.write(json.dumps({"entry": r.label}) + "\n")
                log.write(r.to_jsonl())
    finally:
        if log:
            log.close()
    return NEGATIVE if violated else OK


def cmd_mutate(a) -> int:
    ctx = _ctx(a.spec)
    golden = load_machine(a.golden)
    suite = load_suite(a.suite)
    kinds = _split(a.kinds) or ["stuck_at_0", "stuck_at_1", "bit_flip"]
    mutants = builtin_mutants(golden, _split(a.targets), kinds)
    km = mutation_experiment(golden, suite, mutants, ctx, a.steps, make_resolver(a.resolver, a.seed))
    print(km.summary())
    if a.csv:
        Path(a.csv).write_text(km.to_csv())
    return OK


def cmd_complete_check(a) -> int:
    ctx = _ctx(a.spec)
    if a.suite:
        suite = list(load_suite(a.suite))
    else:
        suite = []
    for path in a.strategy or []:
        suite.append(load_machine(path))
    delta = FaultModel(resolve_kind(a.fault_kind, a.target), frequency(a.freq), a.target)
    res = check_universally_complete_bounded(suite, ctx, delta, a.nmax, a.cap,
                                             _split(a.fault_inputs))
    print(f"{'complete' if res.complete else 'incomplete'} "
          f"(systems={res.systems}, faults={res.faults}, pairs={res.pairs})")
    if res.witness:
        s, f = res.witness
        print("witness system:", json.dumps(_table(s)))
        print("witness fault:", json.dumps(_table(f)))
    return OK if res.complete else NEGATIVE


def _table(m: MealyMachine) -> dict:
    from .machines import machine_to_json
    return machine_to_json(m)


def cmd_diagnose(a) -> int:
    ctx = _ctx(a.spec)
    kappa = resolve_kind(a.fault_kind, a.target)
    d = diagnose_unrealizable(ctx, a.target, kappa, a.kmax, a.backend)
    if d is None:
        print(f"no certified witness up to {a.kmax} states")
        return NEGATIVE
    print(f"witness: system {d.system.n_states} states, fault {d.fault.n_states} states, "
          f"composition {d.composed.n_states} states")
    if a.out:
        out = Path(a.out)
        out.mkdir(parents=True, exist_ok=True)
        for name, m in (("system", d.system), ("fault", d.fault), ("composed", d.composed)):
            save_machine(m, out / f"{name}.json")
            (out / f"{name}.dot").write_text(machine_to_dot(m, name) + "\n")
        print(f"wrote witness to {out}")
    return OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stratsynth",
                                description="Adaptive test strategies from LTL specifications.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--seed", type=int, default=0, help="seed for the pseudorandom resolver")
    p.add_argument("--jobs", type=int, default=1, help="worker cap (runs are single-process)")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="synthesize a test suite")
    s.add_argument("--spec", required=True)
    s.add_argument("--fault-kind", default="stuck0",
                   help="stuck0 | stuck1 | bitflip | delay | expr:<ltl>")
    s.add_argument("--targets")
    s.add_argument("--freqs", help="comma-separated frequencies, weakest first")
    s.add_argument("--multi", type=int, default=1)
    s.add_argument("--kmax", type=int, default=DEFAULT_KMAX)
    s.add_argument("--generalize", action="store_true")
    s.add_argument("--input-faults", action="store_true")
    s.add_argument("--multi-fault", nargs="+", metavar="TARGET:KIND:FREQ")
    s.add_argument("--backend")
    s.add_argument("--out")
    s.set_defaults(func=cmd_synth)

    c = sub.add_parser("check", help="model-check a machine file")
    c.add_argument("--machine", required=True)
    c.add_argument("--formula")
    c.add_argument("--formula-file")
    c.add_argument("--spec")
    c.set_defaults(func=cmd_check)

    g = sub.add_parser("generalize", help="drop unneeded output assignments of suite entries")
    g.add_argument("--suite", required=True)
    g.add_argument("--entry", type=int)
    g.add_argument("--order", choices=("state", "signal"), default="state")
    g.add_argument("--out")
    g.set_defaults(func=cmd_generalize)

    r = sub.add_parser("run", help="execute a suite against a machine SUT")
    r.add_argument("--suite", required=True)
    r.add_argument("--sut", required=True)
    r.add_argument("--spec", required=True)
    r.add_argument("--steps", type=int, default=80)
    r.add_argument("--resolver", default="false",
                   help="false | true | random | random-step (for unconstrained outputs)")
    r.add_argument("--horizon", type=int)
    r.add_argument("--log", help="JSON-lines trace log")
    r.add_argument("--timing", type=int, metavar="STEPS", help="print timing diagrams")
    r.set_defaults(func=cmd_run)

    m = sub.add_parser("mutate", help="machine-level mutation experiment")
    m.add_argument("--golden", required=True)
    m.add_argument("--suite", required=True)
    m.add_argument("--spec", required=True)
    m.add_argument("--kinds")
    m.add_argument("--targets")
    m.add_argument("--steps", type=int, default=80)
    m.add_argument("--resolver", default="false")
    m.add_argument("--csv")
    m.set_defaults(func=cmd_mutate)

    k = sub.add_parser("complete-check", help="bounded universal-completeness oracle")
    k.add_argument("--spec", required=True)
    k.add_argument("--suite")
    k.add_argument("--strategy", nargs="+")
    k.add_argument("--target", required=True)
    k.add_argument("--fault-kind", default="stuck0")
    k.add_argument("--freq", default="G")
    k.add_argument("--nmax", type=int, default=2)
    k.add_argument("--cap", type=int, default=2_000_000)
    k.add_argument("--fault-inputs", help="signals the fault machine may read (o' is always added)")
    k.set_defaults(func=cmd_complete_check)

    d = sub.add_parser("diagnose", help="witness for an undetectable fault")
    d.add_argument("--spec", required=True)
    d.add_argument("--target", required=True)
    d.add_argument("--fault-kind", default="stuck0")
    d.add_argument("--kmax", type=int, default=DEFAULT_KMAX)
    d.add_argument("--backend")
    d.add_argument("--out")
    d.set_defaults(func=cmd_diagnose)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    a = parser.parse_args(argv)
    try:
        return a.func(a)
    except (EngineError, SolverError) as exc:
        _say(f"engine error: {exc}")
        return ENGINE_ERROR
    except (UsageError, SpecFileError, LtlSyntaxError, MachineError, EnumerationTooLarge,
            FileNotFoundError, ValueError) as exc:
        _say(f"error: {exc}")
        return USER_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
