"""Generalization: drop strategy outputs that the objective does not need.

For a stuck-at-0 fault on grant g1 the synthesized strategy also fixes the
second request r2.  Generalization frees every assignment whose removal keeps
the objective enforced, leaving r1 high and r2 unconstrained.

Run from the repository root:  python3 scripts/arbiter_generalize.py
"""
from __future__ import annotations

from stratsynth.algorithms import SynthOptions, generalize, synt_ltl_iterate
from stratsynth.ltl import Atom, Not
from stratsynth.machines import machine_to_dot
from stratsynth.modelcheck import check_moore
from stratsynth.objectives import frequency
from stratsynth.specfile import bundled_spec


def main() -> None:
    ctx = bundled_spec("arbiter").context()
    (entry,) = synt_ltl_iterate(ctx, "g1", Not(Atom("g1")), (),
                                SynthOptions(k_max=3, frequencies=(frequency("FG"),)))
    print("synthesized:")
    print(machine_to_dot(entry.strategy, "before"))
    g = generalize(entry)
    print("\ngeneralized:")
    print(machine_to_dot(g.strategy, "after"))
    for q in range(g.strategy.n_states):
        print(f"  state {q}: {g.strategy.output(q)}")
    print("objective still enforced:", check_moore(g.strategy, g.objective).holds)


if __name__ == "__main__":
    main()
