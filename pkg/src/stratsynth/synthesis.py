"""Bounded synthesis of Moore and Mealy machines with partial information.

The objective is negated and translated to a Büchi automaton ``A``; read
universally, a machine realizes the objective iff no run of ``A`` on any of
its traces visits accepting states infinitely often.  For a bound ``k`` the
encoding has

* ``lam``: output values per state (Moore) or per state and observed letter
  (Mealy),
* ``d[t][x][t']``: one-hot transition function over observed letters,
* ``reach[t][q]``: an over-approximation of the reachable product pairs,
* binary ranks for automaton states of accepting strongly connected
  components, which must grow strictly on entering an accepting state and
  never shrink inside the component.

Unobserved environment signals are left open in the automaton guards, so
every constraint holds for all of their values.  States are numbered in
breadth-first order of the transition table, which removes isomorphic copies
and forces every state to be reachable.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Sequence

from .automata import Nba, ltl_to_nba
from .ltl import Formula, Not, free_signals, to_string
from .machines import MealyMachine, MooreMachine, index_letter
from .modelcheck import check_mealy, check_moore
from .sat import SatSolver, SolverError, make_solver

DEFAULT_KMAX = 8


class EngineError(RuntimeError):
    """Synthesis engine failure, distinct from an unrealizable answer."""


@dataclass(frozen=True)
class Unrealizable:
    """No machine exists up to ``bound`` states (under the given exclusions)."""

    bound: int
    exact: bool = True  # False: the bound ran out of time/budget

    def __bool__(self) -> bool:
        return False

    def __str__(self) -> str:
        return f"UNREAL_UP_TO({self.bound})"


@dataclass(frozen=True)
class BehavioralBlock:
    """The full table of a machine found earlier; excludes exactly this table."""

    kind: str
    n_states: int
    lam: tuple
    delta: tuple

    @classmethod
    def of(cls, m: MooreMachine | MealyMachine) -> BehavioralBlock:
        if isinstance(m, MooreMachine):
            lam = tuple(tuple(bool(v) for _, v in row) for row in m.out)
            return cls("moore", m.n_states, lam, m.delta)
        lam = tuple(tuple(tuple(s in y for s in m.outputs) for y in row) for row in m.out)
        return cls("mealy", m.n_states, lam, m.delta)


def block(m: MooreMachine | MealyMachine) -> BehavioralBlock:
    return BehavioralBlock.of(m)


@dataclass(frozen=True)
class SynthesisProblem:
    """Machine reading ``observed ⊆ env_signals`` and writing ``ctrl_signals``.

    For a test strategy the environment signals are the SUT outputs (and any
    hidden copies), and the controlled signals are the SUT inputs.
    """

    env_signals: tuple
    ctrl_signals: tuple
    objective: Formula
    observed: tuple | None = None
    kind: str = "moore"
    exclusions: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "env_signals", tuple(self.env_signals))
        object.__setattr__(self, "ctrl_signals", tuple(self.ctrl_signals))
        obs = self.env_signals if self.observed is None else tuple(self.observed)
        object.__setattr__(self, "observed", obs)
        object.__setattr__(self, "exclusions", tuple(self.exclusions))
        if self.kind not in ("moore", "mealy"):
            raise ValueError(f"kind must be 'moore' or 'mealy', not {self.kind!r}")
        if set(self.env_signals) & set(self.ctrl_signals):
            raise ValueError("environment and controlled signals overlap")
        if not set(obs) <= set(self.env_signals):
            raise ValueError("observed signals must be environment signals")
        extra = free_signals(self.objective) - set(self.env_signals) - set(self.ctrl_signals)
        if extra:
            raise ValueError(f"objective uses undeclared signals {sorted(extra)}")

    def with_exclusions(self, blocks) -> SynthesisProblem:
        return SynthesisProblem(self.env_signals, self.ctrl_signals, self.objective,
                                self.observed, self.kind, tuple(self.exclusions) + tuple(blocks))


@dataclass
class EngineStats:
    bound: int = 0
    nba_states: int = 0
    variables: int = 0
    clauses: int = 0
    seconds: float = 0.0
    backend: str = ""
    calls: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {"bound": self.bound, "nba_states": self.nba_states, "variables": self.variables,
                "clauses": self.clauses, "seconds": round(self.seconds, 3),
                "backend": self.backend}


class Encoding:
    """CNF for one problem at one bound; variable numbering is deterministic.

    Variables are allocated in this order: output values, transition
    one-hots, reachability, rank bits, then comparator and symmetry
    auxiliaries in the order the constraints are generated.
    """

    def __init__(self, problem: SynthesisProblem, k: int, nba: Nba, solver: SatSolver):
        self.p = problem
        self.k = k
        self.nba = nba
        self.s = solver
        self.obs = list(problem.observed)
        self.ctrl = list(problem.ctrl_signals)
        self.n_obs = 1 << len(self.obs)
        self._build()

    def var(self) -> int:
        return self.s.new_var()

    def _build(self):
        p, k, a, s = self.p, self.k, self.nba, self.s
        mealy = p.kind == "mealy"
        X = self.n_obs
        if mealy:
            self.lam = [[[self.var() for _ in self.ctrl] for _ in range(X)] for _ in range(k)]
        else:
            self.lam = [[self.var() for _ in self.ctrl] for _ in range(k)]
        self.d = [[[self.var() for _ in range(k)] for _ in range(X)] for _ in range(k)]
        for t in range(k):
            for x in range(X):
                row = self.d[t][x]
                s.add_clause(row)
                for i in range(k):
                    for j in range(i + 1, k):
                        s.add_clause([-row[i], -row[j]])
        nq = a.n_states
        self.reach = [[self.var() for _ in range(nq)] for _ in range(k)]

        # ranks only where an accepting cycle is possible
        scc_of = {}
        ranked = {}
        for ci, comp in enumerate(a.sccs()):
            for q in comp:
                scc_of[q] = ci
            acc = [q for q in comp if q in a.accepting]
            cyclic = len(comp) > 1 or any(d == comp[0] for _, d in a.succ[comp[0]])
            if acc and cyclic:
                width = (k * len(acc)).bit_length()
                for q in comp:
                    ranked[q] = width
        self.rank = {(t, q): [self.var() for _ in range(ranked[q])]
                     for t in range(k) for q in ranked}

        # initial pair
        for q0 in a.initial:
            s.add_clause([self.reach[0][q0]])

        cmp_cache: dict = {}

        def step_lits(t, q, t2, q2):
            """Literals whose conjunction is required of successor pair (t2, q2)."""
            lits = [self.reach[t2][q2]]
            if q in ranked and q2 in ranked and scc_of[q] == scc_of[q2]:
                key = (t, q, t2, q2)
                c = cmp_cache.get(key)
                if c is None:
                    c = self._comparator(self.rank[(t2, q2)], self.rank[(t, q)],
                                         strict=q2 in a.accepting)
                    cmp_cache[key] = c
                if c is False:
                    return None
                if c is not True:
                    lits.append(c)
            return lits

        obs_set = set(self.obs)
        ctrl_set = set(self.ctrl)
        for t in range(k):
            for q in range(nq):
                r = self.reach[t][q]
                for cube, q2 in a.succ[q]:
                    cpos = [self.ctrl.index(c) for c in sorted(cube.pos & ctrl_set)]
                    cneg = [self.ctrl.index(c) for c in sorted(cube.neg & ctrl_set)]
                    opos = cube.pos & obs_set
                    oneg = cube.neg & obs_set
                    for x in range(X):
                        letter = index_letter(self.obs, x)
                        if not opos <= letter or oneg & letter:
                            continue
                        lam = self.lam[t][x] if mealy else self.lam[t]
                        guard = [-r] + [-lam[j] for j in cpos] + [lam[j] for j in cneg]
                        for t2 in range(k):
                            req = step_lits(t, q, t2, q2)
                            base = guard + [-self.d[t][x][t2]]
                            if req is None:
                                s.add_clause(base)
                                continue
                            for lit in req:
                                s.add_clause(base + [lit])
        self._symmetry()
        for b in p.exclusions:
            self._exclude(b)

    def _comparator(self, a_bits, b_bits, strict: bool):
        """A literal implying ``a > b`` (strict) or ``a >= b``, LSB first."""
        s = self.s
        prev = not strict  # constant for the empty prefix
        for ai, bi in zip(a_bits, b_bits):
            c = self.var()
            s.add_clause([-c, ai, -bi])
            if prev is True:
                pass
            elif prev is False:
                s.add_clause([-c, ai])
                s.add_clause([-c, -bi])
            else:
                s.add_clause([-c, ai, prev])
                s.add_clause([-c, -bi, prev])
            prev = c
        return prev

    def _symmetry(self):
        """Breadth-first numbering of states over (state, letter) edges."""
        k, X, s = self.k, self.n_obs, self.s
        if k == 1:
            return
        # e[i][j] <-> some edge i -> j
        e = [[None] * k for _ in range(k)]
        for i in range(k):
            for j in range(1, k):
                if i < j:
                    v = self.var()
                    e[i][j] = v
                    lits = [self.d[i][x][j] for x in range(X)]
                    s.add_clause([-v] + lits)
                    for lit in lits:
                        s.add_clause([-lit, v])
        # p[j][i]: parent of j is i, i.e. the smallest state with an edge into j
        par = [[None] * k for _ in range(k)]
        for j in range(1, k):
            for i in range(j):
                v = self.var()
                par[j][i] = v
                s.add_clause([-v, e[i][j]])
                for i2 in range(i):
                    s.add_clause([-v, -e[i2][j]])
                s.add_clause([v, -e[i][j]] + [e[i2][j] for i2 in range(i)])
            s.add_clause([par[j][i] for i in range(j)])
        # no edge from a state below j's parent into a state beyond j
        for j in range(1, k - 1):
            for i in range(j):
                for i2 in range(i):
                    s.add_clause([-par[j][i], -par[j + 1][i2]])
        # same parent: j is entered on a smaller letter than j + 1
        m = {}
        for j in range(1, k):
            for i in range(j):
                for x in range(X):
                    v = self.var()
                    m[(i, j, x)] = v
                    s.add_clause([-v, self.d[i][x][j]])
                    for x2 in range(x):
                        s.add_clause([-v, -self.d[i][x2][j]])
                    s.add_clause([v, -self.d[i][x][j]] + [self.d[i][x2][j] for x2 in range(x)])
        for j in range(1, k - 1):
            for i in range(j):
                for x in range(X):
                    for x2 in range(x + 1, X):
                        s.add_clause([-par[j][i], -par[j + 1][i], -m[(i, j + 1, x)], -m[(i, j, x2)]])

    def _exclude(self, b: BehavioralBlock):
        if b.kind != self.p.kind or b.n_states != self.k:
            return
        lits = []
        mealy = self.p.kind == "mealy"
        for t in range(self.k):
            if mealy:
                for x in range(self.n_obs):
                    for j, val in enumerate(b.lam[t][x]):
                        v = self.lam[t][x][j]
                        lits.append(-v if val else v)
            else:
                for j, val in enumerate(b.lam[t]):
                    v = self.lam[t][j]
                    lits.append(-v if val else v)
            for x in range(self.n_obs):
                lits.append(-self.d[t][x][b.delta[t][x]])
        self.s.add_clause(lits)

    def decode(self) -> MooreMachine | MealyMachine:
        s, k, X = self.s, self.k, self.n_obs
        delta = []
        for t in range(k):
            row = []
            for x in range(X):
                hits = [t2 for t2 in range(k) if s.value(self.d[t][x][t2])]
                if len(hits) != 1:
                    raise EngineError("solver model violates the one-hot transition encoding")
                row.append(hits[0])
            delta.append(row)
        if self.p.kind == "mealy":
            out = [[frozenset(c for j, c in enumerate(self.ctrl) if s.value(self.lam[t][x][j]))
                    for x in range(X)] for t in range(k)]
            return MealyMachine(self.obs, self.ctrl, delta, out)
        out = [{c: s.value(self.lam[t][j]) for j, c in enumerate(self.ctrl)} for t in range(k)]
        return MooreMachine(self.obs, self.ctrl, delta, out)


def _verify(problem: SynthesisProblem, m, nba: Nba):
    if problem.kind == "mealy":
        res = check_mealy(m, problem.objective, nba)
    else:
        res = check_moore(m, problem.objective, nba)
    if not res.holds:
        raise EngineError("decoded machine does not realize the objective "
                          f"{to_string(problem.objective)}; counterexample {res.counterexample}")


def objective_nba(problem: SynthesisProblem) -> Nba:
    return ltl_to_nba(Not(problem.objective),
                      set(problem.env_signals) | set(problem.ctrl_signals))


def synth_bounded(problem: SynthesisProblem, k: int, backend: str | None = None,
                  nba: Nba | None = None, stats: EngineStats | None = None):
    """A machine with exactly ``k`` reachable states realizing the objective, or ``Unrealizable(k)``.

    By the breadth-first numbering every machine with at most ``k`` states
    has an equivalent one with exactly ``k`` reachable states, so an
    unsatisfiable encoding rules out all machines up to ``k`` states.
    """
    if k < 1:
        raise ValueError("state bound must be at least 1")
    a = nba if nba is not None else objective_nba(problem)
    start = time.perf_counter()
    try:
        solver = make_solver(backend)
        enc = Encoding(problem, k, a, solver)
        sat = solver.solve()
    except SolverError as exc:
        raise EngineError(str(exc)) from exc
    _record(stats, k, a, solver, start, backend)
    if not sat:
        return Unrealizable(k)
    m = enc.decode()
    _verify(problem, m, a)
    return m


def _record(stats, k, a, solver, start, backend):
    if stats is None:
        return
    stats.bound = k
    stats.nba_states = a.n_states
    if solver is not None:
        stats.variables = solver.n_vars
        stats.clauses = len(solver.clauses)
        stats.backend = solver.name
    stats.seconds += time.perf_counter() - start
    stats.calls.append((k, solver.n_vars if solver else 0, len(solver.clauses) if solver else 0))


def synth_increasing(problem: SynthesisProblem, k_max: int = DEFAULT_KMAX, k_min: int = 1,
                     backend: str | None = None, stats: EngineStats | None = None):
    """Try bounds ``k_min..k_max`` in order; first machine found, else ``Unrealizable(k_max)``."""
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    a = objective_nba(problem)
    for k in range(k_min, k_max + 1):
        r = synth_bounded(problem, k, backend, a, stats)
        if r:
            return r
    return Unrealizable(k_max)


def enumerate_machines(problem: SynthesisProblem, count: int, k_max: int = DEFAULT_KMAX,
                       k_min: int = 1, backend: str | None = None,
                       stats: EngineStats | None = None) -> list:
    """Up to ``count`` machines with pairwise distinct tables, smallest bounds first."""
    a = objective_nba(problem)
    found: list = []
    blocks = list(problem.exclusions)
    for k in range(k_min, k_max + 1):
        while len(found) < count:
            current = problem.with_exclusions(blocks[len(problem.exclusions):])
            r = synth_bounded(current, k, backend, a, stats)
            if not r:
                break
            found.append(r)
            blocks.append(BehavioralBlock.of(r))
        if len(found) >= count:
            break
    return found
