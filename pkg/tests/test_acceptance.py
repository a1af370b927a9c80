"""Acceptance criteria, one test per criterion.

Run with ``pytest tests/test_acceptance.py``; the terminal summary prints one
``criterion N: PASS/FAIL/SKIP`` line each.  Bounds and runtime limits are
pinned below.
"""
from __future__ import annotations

import os
import subprocess
import sys
import textwrap
import time

import pytest

from stratsynth.algorithms import SynthOptions, diagnose_unrealizable, generalize, synt_ltl_iterate, synt_ltl_test
from stratsynth.cli import OK, main
from stratsynth.harness import builtin_mutants, check_universally_complete_bounded, mutation_experiment, run_entry
from stratsynth.ltl import Atom, Not, SpecContext, parse_ltl
from stratsynth.machines import load_machine
from stratsynth.modelcheck import check_mealy, check_moore
from stratsynth.objectives import FaultModel, fault_kind, frequency, make_objective
from stratsynth.specfile import bundled_spec, fixture_path
from stratsynth.synthesis import EngineError, SynthesisProblem, synth_bounded, synth_increasing

# pinned bounds and limits (seconds)
TRAFFIC_K, TRAFFIC_LIMIT = 4, 60
EX1_K, EX1_NMAX, EX1_LIMIT = 8, 2, 600
EX2_MULTI, EX2_K, EX2_STEPS, EX2_LIMIT = 4, 4, 40, 300
ARBITER_K, ARBITER_LIMIT = 4, 120
FDIR_K = 4
FDIR_BUDGET = int(os.environ.get("STRATSYNTH_FDIR_BUDGET", "600"))
FDIR_MEMORY = int(os.environ.get("STRATSYNTH_FDIR_MEMORY", str(3_500_000_000)))
ORACLE_NBA_PAIRS, ORACLE_MC_PAIRS = 10_000, 200
MUTANTS, MUTATION_LIMIT = 9, 120
DIAGNOSIS_LIMIT = 30


def _detail(record_property, text: str) -> None:
    record_property("detail", text)


def test_criterion_1_traffic_frequency_ladder(tmp_path, capsys, record_property):
    t = time.perf_counter()
    rc = main(["synth", "--spec", str(fixture_path("traffic.spec")), "--targets", "p",
               "--fault-kind", "stuck0", "--kmax", str(TRAFFIC_K), "--out", str(tmp_path)])
    elapsed = time.perf_counter() - t
    rows = [line.split("\t") for line in capsys.readouterr().out.splitlines() if line.startswith("p\t")]
    results = {r[1]: r[2] for r in rows}
    strat = load_machine(tmp_path / "p_FG_0.json")
    ctx = bundled_spec("traffic").context()
    obj = make_objective(ctx, "p", Not(Atom("p")), frequency("FG"))
    holds = check_moore(strat, obj).holds
    _detail(record_property, f"F={results.get('F')} GF={results.get('GF')} FG={results.get('FG')} "
                             f"size={strat.n_states} check={holds} t={elapsed:.1f}s")
    assert rc == OK
    assert results["F"] == results["GF"] == f"UNREAL_UP_TO({TRAFFIC_K})"
    assert results["FG"].startswith("found")
    assert strat.n_states <= TRAFFIC_K and holds
    assert elapsed < TRAFFIC_LIMIT


def test_criterion_2_example1_incompleteness(record_property):
    t = time.perf_counter()
    ctx = bundled_spec("example1").context()
    kappa = fault_kind("bitflip", "o")
    obj = make_objective(ctx, "o", kappa, frequency("F"))
    problem = SynthesisProblem(tuple(ctx.outputs) + ("o_prime",), ctx.inputs, obj, ctx.outputs, "moore")
    res = synth_increasing(problem, EX1_K)
    s5 = load_machine(fixture_path("example1_s5.json"))
    complete = check_universally_complete_bounded([s5], ctx, FaultModel(kappa, frequency("F"), "o"), EX1_NMAX)
    elapsed = time.perf_counter() - t
    _detail(record_property, f"synth={'UNREAL_UP_TO(%d)' % res.bound if not res else 'found'} "
                             f"S5 complete(nMax={EX1_NMAX})={complete.complete} "
                             f"pairs={complete.pairs} t={elapsed:.1f}s")
    assert not res and res.bound == EX1_K and res.exact
    assert complete.complete and complete.systems > 0
    assert elapsed < EX1_LIMIT


def test_criterion_3_example2_enumeration(record_property):
    t = time.perf_counter()
    ctx = bundled_spec("example2").context()
    entries = synt_ltl_iterate(ctx, "o", Not(Atom("o")), (),
                               SynthOptions(k_max=EX2_K, multi=EX2_MULTI))
    gf = [e for e in entries if e.frequency.name == "GF"]
    faulty = load_machine(fixture_path("example2_faulty.json"))
    s6 = load_machine(fixture_path("example2_s6.json"))

    def killed(strategy) -> bool:
        r = run_entry(strategy, faulty, ctx, EX2_STEPS)
        return r.verdict.violated or r.satisfied is False

    def s6_like(strategy) -> bool:
        return strategy.output(strategy.initial) == s6.output(s6.initial)

    first_s6_like = next((e for e in gf if s6_like(e.strategy)), None)
    kills = [killed(e.strategy) for e in gf]
    elapsed = time.perf_counter() - t
    _detail(record_property, f"GF strategies={len(gf)} distinct={len({e.strategy.table() for e in gf})} "
                             f"kills={kills} S6-like survives="
                             f"{first_s6_like is not None and not killed(first_s6_like.strategy)} t={elapsed:.1f}s")
    assert len(gf) >= 2 and len({e.strategy.table() for e in gf}) == len(gf)
    assert not killed(s6)
    assert first_s6_like is not None and not killed(first_s6_like.strategy)
    assert any(kills)
    assert elapsed < EX2_LIMIT


def test_criterion_4_arbiter_generalization(record_property):
    t = time.perf_counter()
    ctx = bundled_spec("arbiter").context()
    (entry,) = synt_ltl_iterate(ctx, "g1", Not(Atom("g1")), (),
                                SynthOptions(k_max=ARBITER_K, frequencies=(frequency("FG"),)))
    g = generalize(entry)
    outputs = [g.strategy.output(q) for q in range(g.strategy.n_states)]
    holds = check_moore(g.strategy, g.objective).holds
    elapsed = time.perf_counter() - t
    _detail(record_property, f"states={g.strategy.n_states} outputs={outputs} check={holds} t={elapsed:.1f}s")
    assert all(o["r1"] is True for o in outputs)
    assert all(o["r2"] is None for o in outputs)
    assert holds and elapsed < ARBITER_LIMIT


FDIR_ATTEMPT = textwrap.dedent("""
    import resource, sys
    resource.setrlimit(resource.RLIMIT_AS, ({memory}, {memory}))
    from stratsynth.algorithms import SynthOptions, SynthesisReport, resolve_kind, synt_ltl_iterate
    from stratsynth.modelcheck import check_moore
    from stratsynth.objectives import frequency
    from stratsynth.specfile import bundled_spec
    ctx = bundled_spec("fdir").context()
    for kind in ("stuck0", "stuck1"):
        rep = SynthesisReport()
        try:
            es = synt_ltl_iterate(ctx, "safemode", resolve_kind(kind, "safemode"), (),
                                  SynthOptions(k_max={k}), rep)
        except MemoryError:
            print(kind, "MEMORY", flush=True)
            continue
        for e in es:
            assert check_moore(e.strategy, e.objective).holds
            print(kind, e.frequency.name, e.strategy.n_states, flush=True)
        if not es:
            print(kind, "NONE", flush=True)
""")


@pytest.mark.slow
def test_criterion_5_fdir_desk_scale(record_property):
    script = FDIR_ATTEMPT.format(memory=FDIR_MEMORY, k=FDIR_K)
    t = time.perf_counter()
    try:
        r = subprocess.run([sys.executable, "-c", script], capture_output=True, text=True,
                           timeout=FDIR_BUDGET)
        out, err, code = r.stdout, r.stderr, r.returncode
    except subprocess.TimeoutExpired as exc:
        out = exc.stdout.decode() if isinstance(exc.stdout, bytes) else (exc.stdout or "")
        err, code = "", None
    elapsed = time.perf_counter() - t
    got = {}
    for line in out.splitlines():
        kind, *rest = line.split()
        got[kind] = rest
    summary = f"{got or 'no result'} exit={code} t={elapsed:.0f}s budget={FDIR_BUDGET}s"
    # any strategy that was produced passed its check inside the subprocess
    assert code in (0, None) or "MEMORY" in out, err[-2000:]
    ok = got.get("stuck0", [None])[0] == "FG" and got.get("stuck1", [None])[0] == "GF"
    if not ok:
        _detail(record_property, f"logged skip: {summary}")
        pytest.skip(f"FDIR synthesis not reached within budget: {summary}")
    _detail(record_property, summary)
    assert int(got["stuck0"][1]) <= FDIR_K and int(got["stuck1"][1]) <= FDIR_K


def test_criterion_6_oracle_agreement(monkeypatch, record_property):
    from test_automata import TestOracleAgreement as NbaOracle
    from test_modelcheck import TestOracleAgreement as McOracle
    from test_synthesis import TestOracleAgreement as SynthOracle

    NbaOracle().test_nba_agrees_with_lasso_evaluation_on_10000_pairs()
    McOracle().test_check_moore_agrees_with_environment_enumeration()
    SynthOracle().test_realizability_at_bound_matches_enumeration()

    # every returned machine is model-checked; a failing check is a hard error
    import stratsynth.synthesis as synthesis
    problem = SynthesisProblem(("o",), ("i",), parse_ltl("G(o -> X i)"), ("o",), "moore")
    assert synth_bounded(problem, 1)

    class Refuted:
        holds = False
        counterexample = None

    monkeypatch.setattr(synthesis, "check_moore", lambda *a, **k: Refuted())
    with pytest.raises(EngineError):
        synth_bounded(problem, 1)
    _detail(record_property, f"nba pairs>={ORACLE_NBA_PAIRS} mc pairs>={ORACLE_MC_PAIRS} "
                             "synth results model-checked; 0 disagreements")


def test_criterion_7_mutation_score(record_property):
    t = time.perf_counter()
    ctx = bundled_spec("traffic").context()
    golden = load_machine(fixture_path("traffic_golden.json"))
    suite, _ = synt_ltl_test(ctx, "stuck0", SynthOptions(k_max=TRAFFIC_K))
    mutants = builtin_mutants(golden)
    km = mutation_experiment(golden, suite, mutants, ctx)
    flags_agree = all(km.equivalent[m.name] == check_mealy(m.machine, ctx.spec).holds for m in mutants)
    elapsed = time.perf_counter() - t
    _detail(record_property, f"mutants={len(mutants)} equivalent={sum(km.equivalent.values())} "
                             f"score[diff]={km.score('diff'):.2f} score[violation]={km.score('violation'):.2f} "
                             f"t={elapsed:.1f}s")
    assert len(mutants) == MUTANTS and flags_agree
    assert km.score("diff") == 1.0
    assert elapsed < MUTATION_LIMIT


def test_criterion_8_diagnosis_certificate(record_property):
    t = time.perf_counter()
    ctx = SpecContext((), ("o",), parse_ltl("G o"))
    d = diagnose_unrealizable(ctx, "o", fault_kind("bitflip", "o"))
    elapsed = time.perf_counter() - t
    _detail(record_property, f"witness={'found' if d else 'none'} t={elapsed:.1f}s "
                             "(S' |= G o' and F |= G(o <-> !o') force o false, so S'.F |= G o is impossible)")
    assert d is not None
    assert elapsed < DIAGNOSIS_LIMIT
