from __future__ import annotations

import pytest

from stratsynth.algorithms import (
    SuiteEntry, SynthOptions, TestSuite, diagnose_unrealizable, export_suite, frequency_dominates,
    generalize, load_suite, sanity_check, synt_ltl_iterate, synt_ltl_test, synth_multi_fault,
    synth_spec_mutation,
)
from stratsynth.ltl import FALSE, TRUE, And, Atom, Not, SpecContext, conjunction, parse_ltl
from stratsynth.machines import constant_moore, load_machine, run_to_lasso
from stratsynth.modelcheck import check_mealy, check_moore
from stratsynth.objectives import FaultModel, fault_kind, frequency
from stratsynth.specfile import bundled_spec, fixture_path

FG_G = (frequency("FG"), frequency("G"))


@pytest.fixture(scope="module")
def traffic():
    return bundled_spec("traffic").context()


@pytest.fixture(scope="module")
def traffic_suite(traffic):
    return synt_ltl_test(traffic, "stuck0", SynthOptions(k_max=4, frequencies=FG_G))


class TestSuiteSynthesis:
    def test_one_verified_strategy_per_output(self, traffic, traffic_suite):
        suite, report = traffic_suite
        assert sorted(e.target for e in suite) == ["f", "h", "p"]
        for e in suite:
            assert check_moore(e.strategy, e.objective).holds
            assert e.frequency.name == "FG"
        assert not report.has_unrealizable

    def test_empty_output_set(self):
        ctx = SpecContext(("i",), (), parse_ltl("G(i | !i)"))
        suite, _ = synt_ltl_test(ctx, "stuck0")
        assert len(suite) == 0

    def test_frequency_ladder_for_p(self, traffic):
        from stratsynth.algorithms import SynthesisReport
        rep = SynthesisReport()
        entries = synt_ltl_iterate(traffic, "p", Not(Atom("p")), (), SynthOptions(k_max=4), rep)
        assert [o.result for o in rep.outcomes] == ["UNREAL_UP_TO(4)", "UNREAL_UP_TO(4)", "found"]
        assert entries[0].frequency.name == "FG" and entries[0].strategy.n_states <= 4

    def test_example2_gf_alternates_input(self):
        ctx = bundled_spec("example2").context()
        (e,) = synt_ltl_iterate(ctx, "o", Not(Atom("o")), (), SynthOptions(k_max=4))
        assert e.frequency.name == "GF"
        lasso = run_to_lasso(e.strategy, load_machine(fixture_path("example2_faulty.json")))
        values = [("i" in x) for x in lasso.loop]
        assert len(lasso.loop) == 2 and values[0] != values[1]

    def test_multi_returns_distinct_tables(self):
        ctx = bundled_spec("example2").context()
        es = synt_ltl_iterate(ctx, "o", Not(Atom("o")), (), SynthOptions(k_max=3, multi=3))
        tables = [e.strategy.table() for e in es]
        assert len(es) == 3 and len(set(tables)) == 3

    def test_suite_rejects_unsound_entry(self, traffic):
        bad = SuiteEntry(constant_moore(("h", "f", "p"), ("c",), {"c": False}), "p", Not(Atom("p")),
                         frequency("G"), parse_ltl("G !p -> !(%s)" % traffic.spec))
        with pytest.raises(AssertionError):
            TestSuite([bad])

    def test_dominates_stronger_frequencies(self, traffic, traffic_suite):
        suite, _ = traffic_suite
        assert all(frequency_dominates(e, traffic) for e in suite)

    def test_export_round_trip(self, tmp_path, traffic, traffic_suite):
        suite, report = traffic_suite
        export_suite(suite, tmp_path, report, traffic)
        again = load_suite(tmp_path)
        assert [e.strategy for e in again] == [e.strategy for e in suite]
        assert [e.objective for e in again] == [e.objective for e in suite]


class TestGeneralize:
    def test_arbiter_frees_r2(self):
        ctx = bundled_spec("arbiter").context()
        (e,) = synt_ltl_iterate(ctx, "g1", Not(Atom("g1")), (), SynthOptions(k_max=3, frequencies=(frequency("FG"),)))
        g = generalize(e)
        for q in range(g.strategy.n_states):
            assert g.strategy.output(q) == {"r1": True, "r2": None}
        assert check_moore(g.strategy, g.objective).holds

    def test_objective_true_frees_everything(self):
        m = constant_moore(("o",), ("i", "j"), {"i": True, "j": False})
        g = generalize(SuiteEntry(m, "o", TRUE, frequency("G"), TRUE))
        assert g.strategy.output(0) == {"i": None, "j": None}

    def test_load_bearing_assignments_stay(self):
        m = constant_moore(("o",), ("i",), {"i": True})
        obj = parse_ltl("G i")
        g = generalize(SuiteEntry(m, "o", TRUE, frequency("G"), obj))
        assert g.strategy == m

    def test_signal_order(self):
        m = constant_moore(("o",), ("i", "j"), {"i": True, "j": True})
        obj = parse_ltl("G(i | j)")
        by_state = generalize(SuiteEntry(m, "o", TRUE, frequency("G"), obj), "state").strategy
        assert by_state.output(0) == {"i": None, "j": True}


class TestSanityAndDiagnosis:
    def test_example1_realizable(self):
        rep = sanity_check(bundled_spec("example1").context(), "stuck0", "o", k_max=3)
        assert rep.spec_realizable and rep.fault_realizable
        assert check_mealy(rep.spec_witness, bundled_spec("example1").spec).holds

    def test_contradictory_fault(self, traffic):
        rep = sanity_check(traffic, And(Atom("p"), Not(Atom("p"))), "p", k_max=3)
        assert rep.spec_realizable and not rep.fault_realizable and rep.advisory

    def test_dead_output_diagnosis(self):
        ctx = SpecContext(("i",), ("o", "z"), parse_ltl("G(i -> X z)"))
        d = diagnose_unrealizable(ctx, "o", Not(Atom("o")), k_max=3)
        assert d is not None
        assert check_mealy(d.system, parse_ltl("G(i -> X z)")).holds
        assert check_mealy(d.fault, parse_ltl("G !o")).holds
        assert check_mealy(d.composed, ctx.spec).holds


class TestExtensions:
    def test_multi_fault(self, traffic):
        faults = [FaultModel(fault_kind("stuck1", t), frequency("G"), t) for t in ("h", "f")]
        e = synth_multi_fault(traffic, faults, SynthOptions(k_max=3))
        if e is not None:
            assert check_moore(e.strategy, e.objective).holds
        with pytest.raises(ValueError):
            synth_multi_fault(traffic, [])

    def test_mutation_equal_to_spec_is_unrealizable(self):
        ctx = bundled_spec("example2").context()
        assert synth_spec_mutation(ctx, ctx.spec, SynthOptions(k_max=3)) is None

    def test_mutation_false_is_trivial(self, traffic):
        e = synth_spec_mutation(traffic, FALSE, SynthOptions(k_max=2))
        assert e.strategy.n_states == 1

    def test_weakened_spec_alone_is_unrealizable(self, traffic):
        # every correct system also satisfies the weakened formula
        sf = bundled_spec("traffic")
        weaker = conjunction(f for n, f in sf.guarantees if n != "phi2")
        assert synth_spec_mutation(traffic, weaker, SynthOptions(k_max=2)) is None

    def test_system_ignoring_c_is_driven_to_violation(self, traffic):
        sf = bundled_spec("traffic")
        mutated = And(conjunction(f for n, f in sf.guarantees if n != "phi2"), parse_ltl("G !f"))
        e = synth_spec_mutation(traffic, mutated, SynthOptions(k_max=4))
        assert e is not None and check_moore(e.strategy, e.objective).holds
        assert e.strategy.output(e.strategy.initial)["c"] or e.strategy.n_states > 1
