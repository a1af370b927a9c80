"""Traffic light, end to end: synthesize a suite, run it, mutate the golden model.

Run from the repository root:  python3 scripts/traffic_walkthrough.py
"""
from __future__ import annotations

from stratsynth.algorithms import SynthOptions, synt_ltl_test
from stratsynth.harness import builtin_mutants, mutation_experiment, run_suite, timing_diagram
from stratsynth.machines import load_machine, machine_to_dot
from stratsynth.specfile import bundled_spec, fixture_path


def main() -> None:
    ctx = bundled_spec("traffic").context()
    print("specification:", ctx.spec)

    # one strategy per output, weakest frequency first
    suite, report = synt_ltl_test(ctx, "stuck0", SynthOptions(k_max=4))
    for o in report.outcomes:
        print(f"  {o.target:2} {o.frequency:3} {o.result}")
    for e in suite:
        print(f"\n{e.target}/{e.frequency.name}: {e.strategy.n_states}-state strategy")
        print(machine_to_dot(e.strategy, f"{e.target}_{e.frequency.name}"))

    golden = load_machine(fixture_path("traffic_golden.json"))
    print("\nrunning the suite against the golden model (80 steps)")
    for r in run_suite(suite, golden, ctx):
        print(f"  {r.label}: {r.verdict}")
    first = run_suite(list(suite)[:1], golden, ctx, steps=12)[0]
    print(timing_diagram(first, list(ctx.inputs) + list(ctx.outputs)))

    print("\nmachine-level mutation experiment")
    km = mutation_experiment(golden, suite, builtin_mutants(golden), ctx)
    print(km.summary())


if __name__ == "__main__":
    main()
