"""SAT solver backends behind one small interface.

Literals are nonzero integers in DIMACS convention.  Three backends:

* ``pysat``: an industrial solver through the python-sat bindings (default
  when installed);
* ``builtin``: a pure-Python CDCL solver, adequate for small encodings;
* ``dimacs``: writes a DIMACS file and runs an external solver binary whose
  path is given explicitly or through the ``STRATSYNTH_SAT_SOLVER``
  environment variable.
"""
from __future__ import annotations

import heapq
import os
import subprocess
import tempfile
from typing import Iterable, Sequence

SOLVER_ENV = "STRATSYNTH_SAT_SOLVER"


class SolverError(RuntimeError):
    """The backend failed to produce an answer (crash, timeout, bad output)."""


class SatSolver:
    """Common interface: allocate variables, add clauses, solve, read the model."""

    name = "abstract"

    def __init__(self):
        self.n_vars = 0
        self.clauses: list[list[int]] = []
        self._model: set[int] | None = None

    def new_var(self) -> int:
        self.n_vars += 1
        return self.n_vars

    def add_clause(self, clause: Iterable[int]) -> None:
        c = list(clause)
        for lit in c:
            v = abs(lit)
            if v == 0:
                raise ValueError("literal 0 is not allowed")
            if v > self.n_vars:
                self.n_vars = v
        self.clauses.append(c)

    def solve(self, assumptions: Sequence[int] = ()) -> bool:
        raise NotImplementedError

    def value(self, var: int) -> bool:
        if self._model is None:
            raise SolverError("no model available")
        return var in self._model

    def to_dimacs(self) -> str:
        lines = [f"p cnf {self.n_vars} {len(self.clauses)}"]
        lines.extend(" ".join(map(str, c)) + " 0" for c in self.clauses)
        return "\n".join(lines) + "\n"


class PySatSolver(SatSolver):
    name = "pysat"

    def __init__(self, engine: str = "cadical153"):
        super().__init__()
        from pysat.solvers import Solver

        self.engine = engine
        self._solver = Solver(name=engine)

    def add_clause(self, clause):
        c = list(clause)
        super().add_clause(c)
        self._solver.add_clause(c)

    def solve(self, assumptions=()):
        ok = self._solver.solve(assumptions=list(assumptions))
        if ok:
            self._model = {lit for lit in self._solver.get_model() if lit > 0}
        else:
            self._model = None
        return bool(ok)

    def close(self):
        self._solver.delete()


class DimacsSolver(SatSolver):
    """External solver speaking the SAT-competition output format."""

    name = "dimacs"

    def __init__(self, path: str | None = None, args: Sequence[str] = (), timeout: float | None = None):
        super().__init__()
        self.path = path or os.environ.get(SOLVER_ENV)
        if not self.path:
            raise SolverError(f"no external solver given; set {SOLVER_ENV}")
        self.args = list(args)
        self.timeout = timeout

    def solve(self, assumptions=()):
        text = self.to_dimacs()
        if assumptions:
            body = "".join(f"{a} 0\n" for a in assumptions)
            head, rest = text.split("\n", 1)
            text = f"p cnf {self.n_vars} {len(self.clauses) + len(assumptions)}\n{rest}{body}"
        with tempfile.NamedTemporaryFile("w", suffix=".cnf", delete=False) as fh:
            fh.write(text)
            cnf = fh.name
        try:
            proc = subprocess.run([self.path, *self.args, cnf], capture_output=True, text=True,
                                  timeout=self.timeout)
        except (OSError, subprocess.TimeoutExpired) as exc:
            raise SolverError(f"external solver failed: {exc}") from exc
        finally:
            os.unlink(cnf)
        return self._parse(proc.stdout)

    def _parse(self, out: str) -> bool:
        status = None
        model: set[int] = set()
        for line in out.splitlines():
            if line.startswith("s "):
                status = line[2:].strip()
            elif line.startswith("v "):
                model.update(int(t) for t in line[2:].split() if int(t) > 0)
        if status == "SATISFIABLE":
            self._model = model
            return True
        if status == "UNSATISFIABLE":
            self._model = None
            return False
        raise SolverError(f"external solver gave no verdict (status {status!r})")


class BuiltinSolver(SatSolver):
    """Pure-Python CDCL: two watched literals, first-UIP learning, VSIDS, Luby restarts."""

    name = "builtin"

    def solve(self, assumptions=()):
        n = self.n_vars
        clauses: list[list[int]] = []
        units: list[int] = []
        for c in self.clauses:
            c = list(dict.fromkeys(c))
            if any(-lit in c for lit in c):
                continue
            if not c:
                self._model = None
                return False
            if len(c) == 1:
                units.append(c[0])
            else:
                clauses.append(c)
        units.extend(assumptions)

        value = [0] * (n + 1)  # +1 true, -1 false
        level = [0] * (n + 1)
        reason: list = [None] * (n + 1)
        trail: list[int] = []
        trail_lim: list[int] = []
        watches: dict[int, list[int]] = {}
        activity = [0.0] * (n + 1)
        inc = 1.0
        heap = [(0.0, v) for v in range(1, n + 1)]
        heapq.heapify(heap)

        def lit_val(lit):
            v = value[abs(lit)]
            return v if lit > 0 else -v

        def assign(lit, why):
            v = abs(lit)
            value[v] = 1 if lit > 0 else -1
            level[v] = len(trail_lim)
            reason[v] = why
            trail.append(lit)

        for ci, c in enumerate(clauses):
            watches.setdefault(c[0], []).append(ci)
            watches.setdefault(c[1], []).append(ci)

        qhead = 0

        def propagate():
            nonlocal qhead
            while qhead < len(trail):
                lit = trail[qhead]
                qhead += 1
                false_lit = -lit
                ws = watches.get(false_lit)
                if not ws:
                    continue
                keep = []
                i = 0
                conflict = None
                while i < len(ws):
                    ci = ws[i]
                    i += 1
                    c = clauses[ci]
                    if c[0] == false_lit:
                        c[0], c[1] = c[1], c[0]
                    if lit_val(c[0]) == 1:
                        keep.append(ci)
                        continue
                    for k in range(2, len(c)):
                        if lit_val(c[k]) != -1:
                            c[1], c[k] = c[k], c[1]
                            watches.setdefault(c[1], []).append(ci)
                            break
                    else:
                        keep.append(ci)
                        if lit_val(c[0]) == -1:
                            conflict = ci
                            keep.extend(ws[i:])
                            break
                        assign(c[0], ci)
                watches[false_lit] = keep
                if conflict is not None:
                    return conflict
            return None

        def backtrack(lvl):
            nonlocal qhead
            if len(trail_lim) <= lvl:
                return
            cut = trail_lim[lvl]
            for lit in trail[cut:]:
                v = abs(lit)
                value[v] = 0
                reason[v] = None
                heapq.heappush(heap, (-activity[v], v))
            del trail[cut:]
            del trail_lim[lvl:]
            qhead = len(trail)

        def analyze(ci):
            nonlocal inc
            seen = set()
            learnt = []
            counter = 0
            cur_level = len(trail_lim)
            idx = len(trail) - 1
            clause = clauses[ci]
            p = None
            while True:
                for q in clause:
                    if p is not None and q == p:
                        continue
                    v = abs(q)
                    if v in seen or level[v] == 0:
                        continue
                    seen.add(v)
                    activity[v] += inc
                    if level[v] == cur_level:
                        counter += 1
                    else:
                        learnt.append(q)
                while abs(trail[idx]) not in seen:
                    idx -= 1
                p = trail[idx]
                idx -= 1
                counter -= 1
                if counter == 0:
                    break
                clause = clauses[reason[abs(p)]]
            learnt.insert(0, -p)
            inc *= 1.05
            if inc > 1e100:
                for v in range(1, n + 1):
                    activity[v] *= 1e-100
                inc *= 1e-100
            if len(learnt) == 1:
                return learnt, 0
            best = max(range(1, len(learnt)), key=lambda j: level[abs(learnt[j])])
            learnt[1], learnt[best] = learnt[best], learnt[1]
            return learnt, level[abs(learnt[1])]

        for u in units:
            if lit_val(u) == -1:
                self._model = None
                return False
            if lit_val(u) == 0:
                assign(u, None)
        if propagate() is not None:
            self._model = None
            return False

        def luby(i):
            k = 1
            while (1 << k) - 1 < i:
                k += 1
            while (1 << k) - 1 != i:
                i -= (1 << (k - 1)) - 1
                k = 1
                while (1 << k) - 1 < i:
                    k += 1
            return 1 << (k - 1)

        restart_no = 1
        budget = 100 * luby(restart_no)
        conflicts = 0
        while True:
            ci = propagate()
            if ci is not None:
                if not trail_lim:
                    self._model = None
                    return False
                learnt, back = analyze(ci)
                backtrack(back)
                if len(learnt) == 1:
                    assign(learnt[0], None)
                else:
                    clauses.append(learnt)
                    cj = len(clauses) - 1
                    watches.setdefault(learnt[0], []).append(cj)
                    watches.setdefault(learnt[1], []).append(cj)
                    assign(learnt[0], cj)
                conflicts += 1
                if conflicts >= budget:
                    conflicts = 0
                    restart_no += 1
                    budget = 100 * luby(restart_no)
                    backtrack(0)
                continue
            var = 0
            while heap:
                _, v = heapq.heappop(heap)
                if value[v] == 0:
                    var = v
                    break
            if var == 0:
                if any(value[v] == 0 for v in range(1, n + 1)):
                    var = next(v for v in range(1, n + 1) if value[v] == 0)
                else:
                    self._model = {v for v in range(1, n + 1) if value[v] == 1}
                    return True
            trail_lim.append(len(trail))
            assign(-var, None)


def available_backends() -> list[str]:
    names = ["builtin"]
    try:
        import pysat.solvers  # noqa: F401
        names.insert(0, "pysat")
    except ImportError:
        pass
    if os.environ.get(SOLVER_ENV):
        names.append("dimacs")
    return names


def make_solver(backend: str | None = None) -> SatSolver:
    """``backend`` is ``pysat``, ``pysat:<engine>``, ``builtin`` or ``dimacs``; default picks the best available."""
    if backend is None:
        backend = available_backends()[0]
    if backend == "builtin":
        return BuiltinSolver()
    if backend.startswith("pysat"):
        _, _, engine = backend.partition(":")
        return PySatSolver(engine or "cadical153")
    if backend == "dimacs":
        return DimacsSolver()
    raise ValueError(f"unknown SAT backend {backend!r}")
