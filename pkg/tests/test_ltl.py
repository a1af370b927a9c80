from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from helpers import naive_eval, random_formula, random_lasso
from stratsynth.ltl import (
    FALSE, TRUE, Always, And, Atom, Eventually, Implies, LassoTrace, LtlSyntaxError, Next, Not,
    Or, Release, SpecContext, Until, desugar, eval_lasso, free_signals, label_lasso, nnf, parse_ltl,
    prime, rename, rotate_loop, simplify, substitute, to_string,
)
from stratsynth.specfile import bundled_spec

a, b, c, p = Atom("a"), Atom("b"), Atom("c"), Atom("p")


def L(*letters, loop=()):
    return LassoTrace(tuple(frozenset(x) for x in letters), tuple(frozenset(x) for x in loop))


class TestParse:
    def test_mutual_exclusion_shape(self):
        f = parse_ltl("G(!f | !h)")
        assert f == Always(Or(Not(Atom("f")), Not(Atom("h"))))

    def test_atom(self):
        assert parse_ltl("p") == p

    def test_precedence_until_binds_tighter_than_implication(self):
        assert parse_ltl("a U b -> G c") == Implies(Until(a, b), Always(c))

    def test_unary_binds_tightest(self):
        assert parse_ltl("!a & X b | F c") == Or(And(Not(a), Next(b)), Eventually(c))

    def test_implication_is_right_associative(self):
        assert parse_ltl("a -> b -> c") == Implies(a, Implies(b, c))

    def test_release_and_constants(self):
        assert parse_ltl("false R a") == Release(FALSE, a)
        assert parse_ltl("TRUE") is TRUE

    def test_syntax_error_carries_position(self):
        with pytest.raises(LtlSyntaxError) as info:
            parse_ltl("a & (b | ")
        assert info.value.pos == len("a & (b | ")

    def test_undeclared_signal_is_rejected(self):
        with pytest.raises(ValueError):
            parse_ltl("a & q", {"a"})

    def test_traffic_fixture_parses(self):
        sf = bundled_spec("traffic")
        assert [n for n, _ in sf.guarantees] == ["phi1", "phi2", "phi3", "phi4"]
        assert free_signals(sf.spec) == {"c", "h", "f", "p"}

    def test_round_trip_random(self):
        rng = random.Random(7)
        for _ in range(500):
            f = random_formula(rng, "abc", rng.randint(0, 4))
            assert parse_ltl(to_string(f)) is f

    def test_hash_consing(self):
        assert And(a, b) is parse_ltl("a & b")


class TestRewrites:
    def test_substitute_atom(self):
        assert substitute(Always(p), "p", Atom(prime("p"))) == Always(Atom("p_prime"))

    def test_substitute_traffic_phi4_primes_both_occurrences(self):
        phi4 = dict(bundled_spec("traffic").guarantees)["phi4"]
        out = substitute(phi4, "p", Atom("p_prime"))
        assert "p" not in free_signals(out)
        assert to_string(out).count("p_prime") == to_string(phi4).count(" p")

    def test_substitute_no_occurrence(self):
        assert substitute(Atom("q"), "p", TRUE) == Atom("q")

    def test_rename(self):
        assert rename(And(a, Next(b)), {"a": "x"}) == And(Atom("x"), Next(b))

    def test_simplify_constants(self):
        assert simplify(Implies(FALSE, a)) is TRUE
        assert simplify(And(TRUE, Or(a, FALSE))) is a
        assert simplify(Always(TRUE)) is TRUE

    def test_nnf_pushes_negation_to_atoms(self):
        f = nnf(Not(Always(Implies(a, Eventually(b)))))
        for g in _nodes(f):
            if g.op == "not":
                assert g.arg.op == "atom"
            assert g.op not in ("implies", "iff", "eventually", "always")


def _nodes(f):
    from stratsynth.ltl import subformulas
    return list(subformulas(f))


class TestSemantics:
    def test_gf_on_constant_loop(self):
        assert eval_lasso(Always(Eventually(p)), L(loop=[{"p"}]))

    def test_g_fails_in_loop(self):
        assert not eval_lasso(Always(p), L({"p"}, loop=[()]))

    def test_until_witness_in_prefix(self):
        assert eval_lasso(Until(a, b), L({"a"}, {"a"}, {"b"}, loop=[()]))

    def test_until_requires_right_side(self):
        assert not eval_lasso(Until(a, b), L(loop=[{"a"}]))

    def test_release_vacuous(self):
        assert eval_lasso(Release(a, b), L(loop=[{"b"}]))

    def test_next_wraps_into_loop(self):
        t = L({"a"}, loop=[(), {"b"}])
        assert eval_lasso(Next(Next(b)), t)
        assert not eval_lasso(Next(Next(Next(b))), t)
        assert eval_lasso(Next(Next(Next(Next(b)))), t)

    def test_label_lasso_positions(self):
        t = L((), loop=[{"a"}, ()])
        lab = label_lasso(Eventually(a), t)
        assert lab[Eventually(a)] == [True, True, True]

    def test_agrees_with_naive_semantics(self):
        rng = random.Random(11)
        for _ in range(3000):
            f = random_formula(rng, "ab", rng.randint(0, 4))
            t = random_lasso(rng, "ab")
            assert eval_lasso(f, t) == naive_eval(f, t), (to_string(f), t)

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 10**6))
    def test_rewrites_preserve_semantics(self, seed):
        rng = random.Random(seed)
        f = random_formula(rng, "ab", rng.randint(0, 4))
        t = random_lasso(rng, "ab")
        v = eval_lasso(f, t)
        assert eval_lasso(nnf(f), t) == v
        assert eval_lasso(desugar(f), t) == v
        assert eval_lasso(simplify(f), t) == v
        assert eval_lasso(f, rotate_loop(t, rng.randint(1, 3))) == v

    def test_lasso_json_round_trip(self):
        t = L({"a"}, loop=[{"a", "b"}, ()])
        assert LassoTrace.from_json(t.to_json()) == t

    def test_empty_loop_rejected(self):
        with pytest.raises(ValueError):
            LassoTrace((), ())


class TestSpecContext:
    def test_disjoint_signals(self):
        with pytest.raises(ValueError):
            SpecContext(("a",), ("a",), a)

    def test_prime_collision(self):
        with pytest.raises(ValueError):
            SpecContext(("a",), ("o", "o_prime"), a)

    def test_undeclared_in_spec(self):
        with pytest.raises(ValueError):
            SpecContext(("a",), ("o",), b)

    def test_universe(self):
        ctx = bundled_spec("fdir").context()
        assert {"last_up_is_nom", "allow_switch"} <= ctx.universe
        assert "safemode" in ctx.observable_outputs
