"""Explicit-state LTL model checking of Moore strategies and Mealy machines.

Both checks search the product of the machine with an automaton for the
negated formula for an accepting lasso (nested DFS).  Whatever the machine
does not fix is chosen by the environment letter by letter: unobserved and
hidden signals, input letters of a Mealy machine, and unconstrained outputs
of a partial Moore machine.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .automata import Nba, ltl_to_nba
from .graphs import nested_dfs
from .ltl import Formula, LassoTrace, Not, eval_lasso
from .machines import MealyMachine, MooreMachine, index_letter, letter_index


@dataclass(frozen=True)
class CheckResult:
    holds: bool
    counterexample: LassoTrace | None = None

    @property
    def verdict(self) -> str:
        return "holds" if self.holds else "fails"

    def __bool__(self) -> bool:
        return self.holds


def _free_letters(signals: Sequence[str]) -> list[frozenset]:
    return [index_letter(signals, i) for i in range(1 << len(signals))]


def _search(nba: Nba, init_nodes, succ, check_phi: Formula) -> CheckResult:
    accepting = lambda node: node[1] in nba.accepting
    for node in init_nodes:
        hit = nested_dfs(node, succ, accepting)
        if hit is not None:
            stem, cycle = hit
            cex = LassoTrace(tuple(stem), tuple(cycle))
            assert not eval_lasso(check_phi, cex), "model checker produced a bogus counterexample"
            return CheckResult(False, cex)
    return CheckResult(True)


def check_moore(m: MooreMachine, phi: Formula, nba: Nba | None = None) -> CheckResult:
    """Does every closed-loop trace of the (partial) Moore machine satisfy ``phi``?

    ``m.inputs`` are the observed environment signals; every other signal of
    ``phi`` that is not an output of ``m`` is an unobserved environment
    signal.  Unconstrained outputs are resolved adversarially in every step.
    """
    a = nba if nba is not None else ltl_to_nba(Not(phi))
    if a.n_states == 0:
        return CheckResult(True)
    outs = set(m.outputs)
    obs = m.inputs
    memo: dict = {}

    def succ(node):
        hit = memo.get(node)
        if hit is not None:
            return hit
        t, q = node
        fixed = dict(m.out[t])
        base_x = frozenset(s for s, v in fixed.items() if v)
        res = []
        for cube, q2 in a.succ[q]:
            if any(fixed.get(s) is False for s in cube.pos & outs):
                continue
            if any(fixed.get(s) is True for s in cube.neg & outs):
                continue
            x = base_x | (cube.pos & outs)
            others = cube.pos - outs - set(obs)
            free_obs = [s for s in obs if s not in cube.pos and s not in cube.neg]
            for extra in _free_letters(free_obs):
                y_obs = (cube.pos & set(obs)) | extra
                t2 = m.delta[t][letter_index(obs, y_obs)]
                res.append((x | y_obs | others, (t2, q2)))
        memo[node] = res
        return res

    return _search(a, [(m.initial, q0) for q0 in a.initial], succ, phi)


def check_mealy(m: MealyMachine, phi: Formula, nba: Nba | None = None) -> CheckResult:
    """Does every trace of the Mealy machine satisfy ``phi``?

    The environment picks the input letter, and also any signal of ``phi``
    that is neither an input nor an output of ``m``.
    """
    a = nba if nba is not None else ltl_to_nba(Not(phi))
    if a.n_states == 0:
        return CheckResult(True)
    ins = m.inputs
    outs = set(m.outputs)
    memo: dict = {}

    def succ(node):
        hit = memo.get(node)
        if hit is not None:
            return hit
        s, q = node
        res = []
        for cube, q2 in a.succ[q]:
            fixed_in = cube.pos & set(ins)
            free_in = [x for x in ins if x not in cube.pos and x not in cube.neg]
            others = cube.pos - outs - set(ins)
            for extra in _free_letters(free_in):
                x = fixed_in | extra
                i = letter_index(ins, x)
                y = m.out[s][i]
                if not (cube.pos & outs) <= y or (cube.neg & y):
                    continue
                res.append((x | y | others, (m.delta[s][i], q2)))
        memo[node] = res
        return res

    return _search(a, [(m.initial, q0) for q0 in a.initial], succ, phi)


def realizes(m, phi: Formula) -> bool:
    if isinstance(m, MooreMachine):
        return check_moore(m, phi).holds
    return check_mealy(m, phi).holds


def render_timing(trace: LassoTrace | Sequence[Iterable[str]], signals: Sequence[str],
                  steps: int | None = None) -> str:
    """Text timing diagram: one row per signal, ``#`` for true and ``_`` for false."""
    if isinstance(trace, LassoTrace):
        n = steps if steps is not None else len(trace)
        letters = trace.expand(n)
        loop_at = len(trace.prefix)
    else:
        letters = [frozenset(x) for x in trace]
        if steps is not None:
            letters = letters[:steps]
        loop_at = None
    width = max((len(s) for s in signals), default=0)
    rows = []
    for s in signals:
        cells = "".join("#" if s in x else "_" for x in letters)
        rows.append(f"{s.rjust(width)} {cells}")
    ruler = "".join(str(i % 10) for i in range(len(letters)))
    rows.append(f"{' ' * width} {ruler}")
    if loop_at is not None and loop_at < len(letters):
        rows.append(f"{' ' * width} {' ' * loop_at}^ loop")
    return "\n".join(rows)
