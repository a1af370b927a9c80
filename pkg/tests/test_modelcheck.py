from __future__ import annotations

import random

from helpers import random_formula
from stratsynth.ltl import TRUE, Always, Atom, Eventually, Not, eval_lasso, to_string
from stratsynth.machines import (
    MooreMachine, constant_mealy, constant_moore, enumerate_mealy, load_machine, make_resolver,
    run_to_lasso,
)
from stratsynth.modelcheck import check_mealy, check_moore, render_timing
from stratsynth.objectives import fault_kind, frequency, make_objective
from stratsynth.specfile import bundled_spec, fixture_path

o = Atom("o")


def brute_force_moore(strategy, phi, env_inputs, env_outputs, n_max=2):
    """Does ``phi`` hold on the run against every environment with <= n_max states?"""
    for env in enumerate_mealy(env_inputs, env_outputs, n_max):
        if not eval_lasso(phi, run_to_lasso(strategy, env, make_resolver(None))):
            return False
    return True


class TestCheck:
    def test_constant_true_vs_g(self):
        assert check_moore(constant_moore((), ("o",), {"o": True}), Always(o)).holds

    def test_constant_false_vs_f(self):
        res = check_moore(constant_moore((), ("o",), {"o": False}), Eventually(o))
        assert not res.holds
        lasso = res.counterexample
        assert all("o" not in x for x in lasso.prefix + lasso.loop)

    def test_anything_vs_true(self):
        g = load_machine(fixture_path("traffic_golden.json"))
        assert check_mealy(g, TRUE).holds

    def test_traffic_golden_realizes_phi(self):
        ctx = bundled_spec("traffic").context()
        assert check_mealy(load_machine(fixture_path("traffic_golden.json")), ctx.spec).holds

    def test_disconnected_p_fails(self):
        ctx = bundled_spec("traffic").context()
        g = load_machine(fixture_path("traffic_golden.json"))
        stuck = type(g)(g.inputs, g.outputs, g.delta,
                        [[y - {"p"} for y in row] for row in g.out], g.initial)
        res = check_mealy(stuck, ctx.spec)
        assert not res.holds
        assert not eval_lasso(ctx.spec, res.counterexample)

    def test_s2_enforces_fg_objective_and_brute_force_agrees(self):
        ctx = bundled_spec("traffic").context()
        obj = make_objective(ctx, "p", fault_kind("stuck0", "p"), frequency("FG"))
        s2 = load_machine(fixture_path("traffic_s2.json"))
        assert check_moore(s2, obj).holds
        assert brute_force_moore(s2, obj, ("c",), ("h", "f", "p"), 1)

    def test_partial_outputs_are_adversarial(self):
        m = constant_moore((), ("o",), {"o": None})
        assert not check_moore(m, Eventually(o)).holds
        assert not check_moore(m, Always(Not(o))).holds

    def test_hidden_signals_are_environment_choices(self):
        m = constant_moore(("e",), ("o",), {"o": True})
        assert not check_moore(m, Eventually(Atom("h"))).holds

    def test_mealy_counterexample_is_valid(self):
        m = constant_mealy(("i",), ("o",), ())
        res = check_mealy(m, Always(Eventually(Atom("i"))))
        assert not res.holds
        assert not eval_lasso(Always(Eventually(Atom("i"))), res.counterexample)

    def test_timing_diagram(self):
        res = check_moore(constant_moore((), ("o",), {"o": False}), Eventually(o))
        text = render_timing(res.counterexample, ["o"], 4)
        assert text.splitlines()[0] == "o ____"


class TestOracleAgreement:
    def test_check_moore_agrees_with_environment_enumeration(self):
        """Model checking vs. brute force over all <= 2-state environments; zero disagreements."""
        rng = random.Random(3)
        envs = list(enumerate_mealy(("c",), ("e", "h"), 2))
        disagreements = []
        pairs = 0
        while pairs < 200:
            n = rng.randint(1, 3)
            strat = MooreMachine(("e",), ("c",),
                                 [[rng.randrange(n) for _ in range(2)] for _ in range(n)],
                                 [{"c": rng.random() < 0.5} for _ in range(n)])
            f = random_formula(rng, "ceh", rng.randint(1, 3), ["not", "and", "or", "X", "F", "G", "U"])
            res = check_moore(strat, f)
            brute = all(eval_lasso(f, run_to_lasso(strat, env)) for env in envs)
            pairs += 1
            if res.holds != brute:
                disagreements.append(to_string(f))
            if not res.holds:
                assert not eval_lasso(f, res.counterexample)
        assert pairs >= 200
        assert not disagreements, disagreements[:5]
