"""Construct the bundled machine files and verify each one before writing it.

Run from the repository root:  python3 scripts/build_fixtures.py
"""
from __future__ import annotations

import sys
from pathlib import Path

from stratsynth.ltl import Implies, Not, parse_ltl
from stratsynth.machines import MealyMachine, MooreMachine, save_machine
from stratsynth.modelcheck import check_mealy, check_moore
from stratsynth.objectives import frequency, make_objective, fault_kind
from stratsynth.specfile import bundled_spec

OUT = Path(__file__).resolve().parents[1] / "src" / "stratsynth" / "fixtures"


def traffic_golden() -> MealyMachine:
    """f follows c, h is its complement; p fires on the c pattern 0,1,0.

    State encodes the last two values of c (with two warm-up states).
    """
    # states: 0 start, 1 one value seen (c1), 2.. history (c2, c1)
    states = ["start", ("one", False), ("one", True)]
    states += [(a, b) for a in (False, True) for b in (False, True)]
    index = {s: k for k, s in enumerate(states)}
    delta, out = [], []
    for s in states:
        drow, orow = [], []
        for c in (False, True):
            if s == "start":
                nxt, p = ("one", c), False
            elif s[0] == "one":
                nxt, p = (s[1], c), False
            else:
                c2, c1 = s
                nxt, p = (c1, c), (not c2) and c1 and not c
            y = {"f"} if c else {"h"}
            if p:
                y.add("p")
            drow.append(index[nxt])
            orow.append(frozenset(y))
        delta.append(drow)
        out.append(orow)
    return MealyMachine(("c",), ("h", "f", "p"), delta, out, 0)


def arbiter_golden() -> MealyMachine:
    """Grants alternate every step regardless of requests."""
    g1, g2 = frozenset({"g1"}), frozenset({"g2"})
    return MealyMachine(("r1", "r2"), ("g1", "g2"), [[1] * 4, [0] * 4], [[g1] * 4, [g2] * 4], 0)


def traffic_s1() -> MooreMachine:
    """Wait for the highway light, request, wait for the farmroad light, release."""
    obs = ("h", "f", "p")
    d0 = [1 if i & 1 else 0 for i in range(8)]
    d1 = [2 if i & 2 else 1 for i in range(8)]
    return MooreMachine(obs, ("c",), [d0, d1, [2] * 8],
                        [{"c": False}, {"c": True}, {"c": False}], 0)


def traffic_s2() -> MooreMachine:
    s1 = traffic_s1()
    return MooreMachine(s1.inputs, s1.outputs, [s1.delta[0], s1.delta[1], [0] * 8],
                        [dict(r) for r in s1.out], 0)


def example1_s5() -> MooreMachine:
    """Keep i low until o is seen high, then raise i forever."""
    return MooreMachine(("o",), ("i",), [[0, 1], [1, 1]], [{"i": False}, {"i": True}], 0)


def example2_s6() -> MooreMachine:
    """Flip i in every step, starting with i high."""
    return MooreMachine(("o",), ("i",), [[1, 1], [0, 0]], [{"i": True}, {"i": False}], 0)


def example2_faulty() -> MealyMachine:
    """Correct when i starts high; o stuck at 0 when i starts low."""
    o, none = frozenset({"o"}), frozenset()
    return MealyMachine(("i",), ("o",), [[2, 1], [1, 1], [2, 2]],
                        [[none, o], [o, o], [none, none]], 0)


def main() -> int:
    traffic = bundled_spec("traffic").context()
    arbiter = bundled_spec("arbiter").context()
    ex1 = bundled_spec("example1").context()
    ex2 = bundled_spec("example2").context()
    ok = True

    def expect(name, res, want=True):
        nonlocal ok
        good = res.holds == want
        ok &= good
        print(f"{'ok  ' if good else 'FAIL'} {name}: holds={res.holds}")

    g = traffic_golden()
    expect("traffic golden |= phi", check_mealy(g, traffic.spec))
    a = arbiter_golden()
    expect("arbiter golden |= phi", check_mealy(a, arbiter.spec))
    stuck0 = fault_kind("stuck0", "p")
    for name, m, freq in (("traffic S1", traffic_s1(), "G"), ("traffic S2", traffic_s2(), "FG")):
        obj = make_objective(traffic, "p", stuck0, frequency(freq))
        expect(f"{name} enforces {freq}(!p) -> !phi", check_moore(m, obj))
    s5 = example1_s5()
    full = make_objective(ex1, "o", parse_ltl("o <-> !o_prime"), frequency("F"))
    expect("example1 S5 satisfies the full objective", check_moore(s5, full), want=False)
    s6 = example2_s6()
    obj2 = make_objective(ex2, "o", fault_kind("stuck0", "o"), frequency("GF"))
    expect("example2 S6 |= GF(!o) -> !phi", check_moore(s6, obj2))
    bad = example2_faulty()
    expect("example2 faulty implementation |= phi", check_mealy(bad, ex2.spec), want=False)
    if not ok:
        return 1
    for fname, m in (("traffic_golden.json", g), ("arbiter_golden.json", a),
                     ("traffic_s1.json", traffic_s1()), ("traffic_s2.json", traffic_s2()),
                     ("example1_s5.json", s5), ("example2_s6.json", s6),
                     ("example2_faulty.json", bad)):
        save_machine(m, OUT / fname)
        print("wrote", OUT / fname)
    return 0


if __name__ == "__main__":
    sys.exit(main())
