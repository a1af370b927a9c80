from __future__ import annotations

import pytest

from stratsynth.ltl import Implies, parse_ltl
from stratsynth.specfile import SpecFileError, bundled_spec, format_spec, load_spec, parse_spec

TEXT = """
# comment
[inputs]
i
[outputs]
o
[assume]
A1: G(i -> G i)
F i
[guarantee]
G(o -> G o)
"""


class TestParse:
    def test_sections_and_default_names(self):
        sf = parse_spec(TEXT)
        assert sf.inputs == ("i",) and sf.outputs == ("o",)
        assert [n for n, _ in sf.assumptions] == ["A1", "A2"]
        assert [n for n, _ in sf.guarantees] == ["G1"]

    def test_assume_guarantee_combination(self):
        sf = parse_spec(TEXT)
        assert sf.spec == Implies(parse_ltl("G(i -> G i) & F i"), parse_ltl("G(o -> G o)"))

    def test_spec_section(self):
        sf = parse_spec("[inputs]\ni\n[outputs]\no\n[spec]\nG(i -> X o)\n")
        assert sf.spec == parse_ltl("G(i -> X o)")

    def test_format_round_trip(self):
        for name in ("traffic", "example1", "example2", "arbiter", "fdir"):
            sf = bundled_spec(name)
            again = parse_spec(format_spec(sf))
            assert again.spec == sf.spec and again.hidden == sf.hidden

    @pytest.mark.parametrize("text, match", [
        ("[inputs]\ni\n", "missing \\[outputs\\]"),
        ("i\n[inputs]\n", "before the first section"),
        ("[inputs]\ni\n[outputs]\ni\n[spec]\ntrue\n", "declared twice"),
        ("[inputs]\ni\n[outputs]\no\n[guarantee]\nG q\n", "q"),
        ("[inputs]\ni\n[outputs]\no\n[bogus]\n", "unknown section"),
        ("[inputs]\ni\n[outputs]\no\n[guarantee]\nG(o\n", ":6: expected"),
        ("[inputs]\ni\n[outputs]\no\n[spec]\no\n[guarantee]\no\n", "cannot be combined"),
    ])
    def test_errors(self, text, match):
        with pytest.raises(SpecFileError, match=match):
            parse_spec(text)

    def test_fdir_fixture(self):
        sf = bundled_spec("fdir")
        assert len(sf.assumptions) == 8 and len(sf.guarantees) == 22
        assert sf.hidden == ("last_up_is_nom", "allow_switch")

    def test_load_falls_back_to_bundled(self):
        assert load_spec("examples/traffic.spec").outputs == ("h", "f", "p")
