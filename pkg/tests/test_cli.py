from __future__ import annotations

import json
import subprocess
import sys

import pytest

from stratsynth.cli import ENGINE_ERROR, NEGATIVE, OK, USER_ERROR, main
from stratsynth.machines import load_machine
from stratsynth.specfile import fixture_path

TRAFFIC = str(fixture_path("traffic.spec"))
GOLDEN = str(fixture_path("traffic_golden.json"))
EX1 = str(fixture_path("example1.spec"))
KAPPA = "expr:o <-> !o_prime"


@pytest.fixture(scope="module")
def suite_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("suite")
    assert main(["synth", "--spec", TRAFFIC, "--targets", "p", "--kmax", "4", "--out", str(out)]) == OK
    return out


class TestSynth:
    def test_frequency_ladder_and_export(self, suite_dir, capsys):
        manifest = json.loads((suite_dir / "manifest.json").read_text())
        assert len(manifest["entries"]) == 1
        assert (suite_dir / "p_FG_0.json").exists() and (suite_dir / "p_FG_0.dot").exists()
        m = load_machine(suite_dir / "p_FG_0.json")
        assert m.n_states == 2

    def test_output_lines(self, capsys):
        assert main(["synth", "--spec", TRAFFIC, "--targets", "p", "--kmax", "2"]) in (OK, NEGATIVE)
        out = capsys.readouterr().out
        assert "p\tF\tUNREAL_UP_TO(2)" in out and "p\tFG\tfound states=2" in out

    def test_unrealizable_everywhere_is_negative(self, capsys):
        rc = main(["synth", "--spec", EX1, "--fault-kind", KAPPA, "--freqs", "F", "--kmax", "2"])
        assert rc == NEGATIVE

    def test_bad_multi_fault_syntax(self, capsys):
        assert main(["synth", "--spec", TRAFFIC, "--multi-fault", "p"]) == USER_ERROR

    def test_missing_spec(self, capsys):
        assert main(["synth", "--spec", "does-not-exist.spec"]) == USER_ERROR

    def test_engine_error_code(self, monkeypatch, capsys):
        monkeypatch.setenv("STRATSYNTH_SAT_SOLVER", "/nonexistent/solver")
        rc = main(["synth", "--spec", TRAFFIC, "--targets", "p", "--kmax", "1", "--backend", "dimacs"])
        assert rc == ENGINE_ERROR


class TestCheck:
    def test_golden_holds(self, capsys):
        assert main(["check", "--machine", GOLDEN, "--spec", TRAFFIC]) == OK
        assert capsys.readouterr().out.startswith("holds")

    def test_counterexample_printed(self, capsys):
        rc = main(["check", "--machine", str(fixture_path("traffic_s1.json")), "--formula", "G h"])
        out = capsys.readouterr().out
        assert rc == NEGATIVE and "counterexample" in out and "^ loop" in out

    def test_formula_file(self, tmp_path, capsys):
        f = tmp_path / "phi.ltl"
        f.write_text("G (h -> !f)\n")
        assert main(["check", "--machine", GOLDEN, "--formula-file", str(f)]) == OK

    def test_syntax_error(self, capsys):
        assert main(["check", "--machine", GOLDEN, "--formula", "G ("]) == USER_ERROR
        assert "position" in capsys.readouterr().err

    def test_needs_a_formula(self, capsys):
        assert main(["check", "--machine", GOLDEN]) == USER_ERROR


class TestSuiteCommands:
    def test_run_golden(self, suite_dir, tmp_path, capsys):
        log = tmp_path / "trace.jsonl"
        rc = main(["run", "--suite", str(suite_dir), "--sut", GOLDEN, "--spec", TRAFFIC,
                   "--steps", "10", "--log", str(log), "--timing", "8"])
        assert rc == OK
        rows = [json.loads(x) for x in log.read_text().splitlines()]
        assert rows[0] == {"entry": "0:p/FG"} and len(rows) == 12

    def test_run_faulty_sut(self, suite_dir, tmp_path, capsys):
        from stratsynth.machines import inject_fault, make_fault_machine, save_machine
        bad = inject_fault(load_machine(GOLDEN), "p", make_fault_machine("stuck_at_0", "p"))
        save_machine(bad, tmp_path / "bad.json")
        rc = main(["run", "--suite", str(suite_dir), "--sut", str(tmp_path / "bad.json"),
                   "--spec", TRAFFIC, "--steps", "30"])
        assert rc == NEGATIVE and "violated" in capsys.readouterr().out

    def test_mutate(self, suite_dir, tmp_path, capsys):
        csv = tmp_path / "kill.csv"
        rc = main(["mutate", "--golden", GOLDEN, "--suite", str(suite_dir), "--spec", TRAFFIC,
                   "--targets", "p", "--csv", str(csv)])
        assert rc == OK and "score[diff]: 1.0000" in capsys.readouterr().out
        assert len(csv.read_text().splitlines()) == 4

    def test_generalize(self, suite_dir, tmp_path, capsys):
        out = tmp_path / "gen"
        assert main(["generalize", "--suite", str(suite_dir), "--out", str(out)]) == OK
        assert (out / "manifest.json").exists()


class TestCompleteness:
    def test_s5_complete(self, capsys):
        rc = main(["complete-check", "--spec", EX1, "--strategy", str(fixture_path("example1_s5.json")),
                   "--target", "o", "--fault-kind", KAPPA, "--freq", "F"])
        assert rc == OK and capsys.readouterr().out.startswith("complete")

    def test_empty_incomplete_with_witness(self, capsys):
        rc = main(["complete-check", "--spec", EX1, "--target", "o", "--fault-kind", KAPPA,
                   "--freq", "F", "--nmax", "1"])
        out = capsys.readouterr().out
        assert rc == NEGATIVE and "witness system" in out and "witness fault" in out

    def test_cap_is_user_error(self, suite_dir, capsys):
        rc = main(["complete-check", "--spec", TRAFFIC, "--suite", str(suite_dir), "--target", "p",
                   "--freq", "FG", "--cap", "10"])
        assert rc == USER_ERROR


class TestDiagnose:
    def test_witness_written(self, tmp_path, capsys):
        spec = tmp_path / "free.spec"
        spec.write_text("[inputs]\ni\n[outputs]\no\nz\n[guarantee]\nG1: G(i -> X z)\n")
        rc = main(["diagnose", "--spec", str(spec), "--target", "o", "--kmax", "3",
                   "--out", str(tmp_path / "d")])
        assert rc == OK
        for name in ("system", "fault", "composed"):
            assert (tmp_path / "d" / f"{name}.json").exists()

    def test_no_witness_is_negative(self, capsys):
        rc = main(["diagnose", "--spec", EX1, "--target", "o", "--fault-kind", KAPPA, "--kmax", "2"])
        assert rc == NEGATIVE


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "stratsynth", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and "stratsynth" in r.stdout
