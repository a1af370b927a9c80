"""Limited observability: no small strategy, yet a hand-written one is complete.

The objective for a transient bit flip on o is unrealizable for small bounds,
because the strategy cannot see the correct value o'.  The hand-encoded S5
still reveals every such fault on every correct system with at most two
states, which the bounded completeness oracle confirms.

Run from the repository root:  python3 scripts/example1_completeness.py
"""
from __future__ import annotations

import time

from stratsynth.harness import check_universally_complete_bounded
from stratsynth.machines import load_machine
from stratsynth.objectives import FaultModel, fault_kind, frequency, make_objective
from stratsynth.specfile import bundled_spec, fixture_path
from stratsynth.synthesis import SynthesisProblem, synth_bounded


def main() -> None:
    ctx = bundled_spec("example1").context()
    kappa = fault_kind("bitflip", "o")
    obj = make_objective(ctx, "o", kappa, frequency("F"))
    print("objective:", obj)
    problem = SynthesisProblem(("o", "o_prime"), ctx.inputs, obj, ctx.outputs, "moore")
    for k in range(1, 9):
        t = time.perf_counter()
        res = synth_bounded(problem, k)
        print(f"  k={k}: {'found' if res else 'unrealizable'} ({time.perf_counter() - t:.2f}s)")

    s5 = load_machine(fixture_path("example1_s5.json"))
    print("\nS5 holds i low until it sees o, then raises i")
    res = check_universally_complete_bounded([s5], ctx, FaultModel(kappa, frequency("F"), "o"), 2)
    print(f"  complete for nMax=2: {res.complete} "
          f"({res.systems} systems x {res.faults} faults = {res.pairs} pairs)")
    res = check_universally_complete_bounded([], ctx, FaultModel(kappa, frequency("F"), "o"), 1)
    print(f"  the empty suite: complete={res.complete}, witness system has "
          f"{res.witness[0].n_states} state(s)")


if __name__ == "__main__":
    main()
