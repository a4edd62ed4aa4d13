"""Stored axiom sets and worked examples, each re-checked when loaded.

Law sets live in ``data/*.laws``.  Besides laws, a file may carry
``#! key: value`` lines: ``description``, ``signature``, ``include`` (other
sets spliced in at that position) and ``expect-quarantine`` (law names the
soundness gate is expected to reject).  Laws without an explicit name are
called ``<set>.<n>``, numbering only the set's own laws.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from ..errors import InternalContradiction, UnknownName
from ..pfun import FinSet, all_pfuns, parse_pfuns
from ..signature import make_signature, ordered
from ..syntax import Law, Violation, law_holds_pointwise, parse_law

ENDO_SYMBOLS = frozenset({"cmp", "dom", "one"})


def _data_dir():
    return resources.files(__package__) / "data"


def _read(name: str) -> str:
    return (_data_dir() / name).read_text(encoding="utf-8")


def lawset_names() -> list[str]:
    return sorted(p.name[:-5] for p in _data_dir().iterdir() if p.name.endswith(".laws"))


def example_names() -> list[str]:
    return sorted(EXAMPLES)


# -- law sets ------------------------------------------------------------------

@dataclass
class LawSetEntry:
    name: str
    signature: frozenset
    laws: list
    description: str = ""
    expected_quarantine: tuple = ()
    verdicts: dict = field(default_factory=dict)  # law name -> True | Violation

    @property
    def quarantined(self) -> dict:
        return {k: v for k, v in self.verdicts.items() if v is not True}

    @property
    def status(self) -> str:
        return "quarantined" if self.quarantined else "sound"

    @property
    def sound_laws(self) -> list:
        q = self.quarantined
        return [l for l in self.laws if l.name not in q]

    def law(self, name: str) -> Law:
        for l in self.laws:
            if l.name == name or l.name.endswith("." + name):
                return l
        raise UnknownName(f"{self.name} has no law {name!r}")


def parse_lawset_text(text: str, name: str, resolver=None, _stack=()) -> LawSetEntry:
    """Parse law-file text, splicing ``include`` sets via ``resolver(name)``."""
    if name in _stack:
        raise InternalContradiction(f"include cycle through {name}", _stack)
    laws: list[Law] = []
    meta = {"description": "", "signature": "", "expect-quarantine": ""}
    own = 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        stripped = raw.strip()
        if stripped.startswith("#!"):
            key, _, value = stripped[2:].partition(":")
            key, value = key.strip(), value.strip()
            if key == "include":
                for inc in (v.strip() for v in value.split(",") if v.strip()):
                    sub = resolver(inc, _stack + (name,)) if resolver else None
                    if sub is None:
                        raise UnknownName(f"cannot include {inc!r}")
                    laws.extend(l for l in sub.laws if l.name not in {x.name for x in laws})
            else:
                meta[key] = value
            continue
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        law = parse_law(line, line=lineno)
        own += 1
        laws.append(law if law.name else law.renamed(f"{name}.{own}"))
    sig = make_signature(meta["signature"]) if meta["signature"] else frozenset(
        s for l in laws for s in l.symbols)
    expected = tuple(v.strip() for v in meta["expect-quarantine"].split(",") if v.strip())
    return LawSetEntry(name, sig, laws, meta["description"], expected)


def _resolve_builtin(name, stack=()):
    if name not in lawset_names():
        raise UnknownName(f"unknown law set {name!r}")
    return parse_lawset_text(_read(name + ".laws"), name, _resolve_builtin, stack)


@functools.lru_cache(maxsize=None)
def _load_cached(name: str, gate: bool) -> LawSetEntry:
    entry = _resolve_builtin(name)
    if gate:
        entry.verdicts = soundness_gate(entry.laws)
    return entry


def load_lawset(name: str, gate: bool = True) -> LawSetEntry:
    """A catalog law set; the soundness gate runs on first load and is cached."""
    return _load_cached(name, gate)


def load_lawset_file(path, gate: bool = False) -> LawSetEntry:
    path = Path(path)
    entry = parse_lawset_text(path.read_text(encoding="utf-8"), path.stem, _resolve_builtin)
    if gate:
        entry.verdicts = soundness_gate(entry.laws)
    return entry


def resolve_lawset(spec: str, gate: bool = False) -> LawSetEntry:
    """A catalog name or a path to a law file."""
    if spec in lawset_names():
        return load_lawset(spec, gate)
    if Path(spec).is_file():
        return load_lawset_file(spec, gate)
    raise UnknownName(f"no law set or file named {spec!r}")


# -- soundness gate ------------------------------------------------------------

@dataclass(frozen=True)
class UniverseSpec:
    """Concrete functions to test laws on.

    ``endo`` forces source = target; by default composition-bearing laws get
    an endo-carrier and the rest get distinct carriers.  ``max_vars`` skips
    laws with more variables.  In sampled mode ``count`` random assignments
    are drawn with ``seed``.
    """

    size: int = 2
    target_size: int | None = None
    endo: bool | None = None
    mode: str = "exhaustive"
    count: int = 10000
    seed: int = 0
    max_vars: int | None = None

    def carriers(self, law: Law):
        endo = self.endo if self.endo is not None else bool(law.symbols & ENDO_SYMBOLS)
        src = FinSet.of("X", [f"x{i}" for i in range(self.size)])
        if endo:
            return src, src
        return src, FinSet.of("Y", [f"y{i}" for i in range(self.target_size or self.size)])


DEFAULT_UNIVERSES = (UniverseSpec(2), UniverseSpec(3, endo=True, max_vars=3))


def _gate_one(law: Law, spec: UniverseSpec):
    src, tgt = spec.carriers(law)
    funcs = all_pfuns(src, tgt)
    universe = np.array([f.values for f in funcs], dtype=np.int64)
    labels = [_fun_label(f) for f in funcs]
    if spec.mode == "sampled":
        rng = np.random.default_rng(spec.seed)
        assignments = rng.integers(0, len(funcs), size=(spec.count, len(law.variables)))
        return law_holds_pointwise(law, universe, assignments, labels, (src.labels, tgt.labels))
    return law_holds_pointwise(law, universe, labels=labels, carriers=(src.labels, tgt.labels))


def _fun_label(f) -> str:
    return "{" + ", ".join(f"{p}->{q}" for p, q in f.graph.items()) + "}"


def soundness_gate(laws, universes=DEFAULT_UNIVERSES) -> dict:
    """Check each law on concrete functions; returns name -> True | Violation."""
    out = {}
    for law in laws:
        verdict = True
        for spec in universes:
            if spec.max_vars is not None and len(law.variables) > spec.max_vars:
                continue
            verdict = _gate_one(law, spec)
            if verdict is not True:
                break
        out[law.name] = verdict
    return out


# -- examples ------------------------------------------------------------------

@dataclass
class Fact:
    name: str
    ok: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.ok else 'FAIL'} {self.name}" + (f": {self.detail}" if self.detail else "")


@dataclass
class ExampleEntry:
    name: str
    description: str
    functions: dict
    signature: frozenset
    algebra: object
    elements: list
    facts: list = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    @property
    def all_pass(self) -> bool:
        return all(f.ok for f in self.facts)


def load_example(name: str, strict: bool = True) -> ExampleEntry:
    """Functions, their generated algebra, and the expected facts re-verified.

    With ``strict`` a failing fact raises ``InternalContradiction``.
    """
    from . import examples  # noqa: F401  (registers builders)

    if name not in EXAMPLES:
        raise UnknownName(f"unknown example {name!r}")
    entry = EXAMPLES[name]()
    if strict and not entry.all_pass:
        bad = [f for f in entry.facts if not f.ok]
        raise InternalContradiction(f"{name}: expected fact failed: {bad[0].line()}", bad)
    return entry


EXAMPLES: dict = {}


def example(name):
    def register(fn):
        EXAMPLES[name] = fn
        return fn
    return register


def example_functions(name: str) -> dict:
    return parse_pfuns(_read(name + ".pfun"))


def read_data(name: str) -> str:
    return _read(name)


from . import examples  # noqa: E402,F401
