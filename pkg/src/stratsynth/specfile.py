"""Line-oriented specification files.

::

    # comment
    [inputs]
    c
    [outputs]
    h f p
    [hidden]          # optional: unobservable auxiliary outputs
    [assume]          # optional
    A1: G(i -> G i)
    [guarantee]
    G1: G(!f | !h)

Signals are separated by whitespace or commas.  Each formula takes one line
and may carry a ``name:`` label.  The specification is ``(⋀A) -> (⋀G)``, or
just ``⋀G`` without assumptions.  A ``[spec]`` section holding one formula
may replace ``[assume]``/``[guarantee]``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .ltl import Formula, Implies, SpecContext, conjunction, parse_ltl

SECTIONS = ("inputs", "outputs", "hidden", "targets", "assume", "guarantee", "spec")
_LABEL = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*:(?!:)\s*(.*)$")


class SpecFileError(ValueError):
    def __init__(self, message: str, line: int | None = None, source: str = "<spec>"):
        where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(where + message)
        self.line = line


@dataclass(frozen=True)
class SpecFile:
    inputs: tuple
    outputs: tuple
    hidden: tuple = ()
    assumptions: tuple = ()  # (name, formula)
    guarantees: tuple = ()
    targets: tuple = ()
    source: str = "<spec>"
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def spec(self) -> Formula:
        g = conjunction(f for _, f in self.guarantees)
        if not self.assumptions:
            return g
        return Implies(conjunction(f for _, f in self.assumptions), g)

    @property
    def assumption(self) -> Formula:
        return conjunction(f for _, f in self.assumptions)

    def context(self) -> SpecContext:
        names = {n: f for n, f in self.assumptions + self.guarantees}
        return SpecContext(self.inputs, self.outputs, self.spec, self.hidden, names)


def parse_spec(text: str, source: str = "<spec>") -> SpecFile:
    section = None
    decl = {"inputs": [], "outputs": [], "hidden": [], "targets": []}
    formulas = {"assume": [], "guarantee": [], "spec": []}
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = re.fullmatch(r"\[\s*([A-Za-z]+)\s*\]", line)
        if m:
            section = m.group(1).lower()
            if section in ("assumptions", "assumption"):
                section = "assume"
            if section in ("guarantees",):
                section = "guarantee"
            if section not in SECTIONS:
                raise SpecFileError(f"unknown section [{m.group(1)}]", lineno, source)
            if section in seen:
                raise SpecFileError(f"section [{section}] appears twice", lineno, source)
            seen.add(section)
            continue
        if section is None:
            raise SpecFileError("content before the first section header", lineno, source)
        if section in decl:
            for name in re.split(r"[\s,]+", line):
                if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_']*", name):
                    raise SpecFileError(f"bad signal name {name!r}", lineno, source)
                decl[section].append(name)
            continue
        lab = _LABEL.match(line)
        if lab:
            name, body = lab.group(1), lab.group(2)
        else:
            prefix = "A" if section == "assume" else "G"
            name, body = f"{prefix}{len(formulas[section]) + 1}", line
        formulas[section].append((name, body, lineno))

    for key in ("inputs", "outputs"):
        if key not in seen:
            raise SpecFileError(f"missing [{key}] section", None, source)
    universe = decl["inputs"] + decl["outputs"] + decl["hidden"]
    if len(set(universe)) != len(universe):
        dup = sorted({s for s in universe if universe.count(s) > 1})
        raise SpecFileError(f"signals declared twice: {dup}", None, source)
    if formulas["spec"] and (formulas["assume"] or formulas["guarantee"]):
        raise SpecFileError("[spec] cannot be combined with [assume]/[guarantee]", None, source)
    if len(formulas["spec"]) > 1:
        raise SpecFileError("[spec] holds exactly one formula", formulas["spec"][1][2], source)

    def parse_all(items):
        out = []
        names = set()
        for name, body, lineno in items:
            if name in names:
                raise SpecFileError(f"formula name {name!r} used twice", lineno, source)
            names.add(name)
            try:
                out.append((name, parse_ltl(body, universe)))
            except ValueError as exc:
                raise SpecFileError(str(exc), lineno, source) from None
        return tuple(out)

    assumptions = parse_all(formulas["assume"])
    guarantees = parse_all(formulas["guarantee"] or formulas["spec"])
    for t in decl["targets"]:
        if t not in universe:
            raise SpecFileError(f"target {t!r} is not a declared signal", None, source)
    sf = SpecFile(tuple(decl["inputs"]), tuple(decl["outputs"]), tuple(decl["hidden"]),
                  assumptions, guarantees, tuple(decl["targets"]), source)
    try:
        sf.context()
    except ValueError as exc:
        raise SpecFileError(str(exc), None, source) from None
    return sf


def load_spec(path) -> SpecFile:
    p = Path(path)
    if not p.exists():
        bundled = fixture_path(p.name)
        if bundled.exists():
            p = bundled
    return parse_spec(p.read_text(), str(path))


def fixture_path(name: str) -> Path:
    return Path(str(resources.files("stratsynth") / "fixtures" / name))


def bundled_spec(name: str) -> SpecFile:
    """One of the bundled specifications: traffic, example1, example2, arbiter, fdir."""
    fname = name if name.endswith(".spec") else name + ".spec"
    return parse_spec(fixture_path(fname).read_text(), fname)


def format_spec(sf: SpecFile) -> str:
    from .ltl import to_string

    lines = ["[inputs]", " ".join(sf.inputs), "[outputs]", " ".join(sf.outputs)]
    if sf.hidden:
        lines += ["[hidden]", " ".join(sf.hidden)]
    if sf.targets:
        lines += ["[targets]", " ".join(sf.targets)]
    if sf.assumptions:
        lines.append("[assume]")
        lines += [f"{n}: {to_string(f)}" for n, f in sf.assumptions]
    lines.append("[guarantee]")
    lines += [f"{n}: {to_string(f)}" for n, f in sf.guarantees]
    return "\n".join(lines) + "\n"
