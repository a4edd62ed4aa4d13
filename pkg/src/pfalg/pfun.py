"""Finite partial functions and the operations on them.

A partial function is stored as a tuple of target indices, one slot per
source point, with ``-1`` marking an undefined point.  The ``batch_*``
functions implement every operation on numpy arrays of such vectors
(shape ``(..., |X|)``), so whole universes of functions can be processed
at once; the ``PFun`` methods are thin wrappers over the same code with
carrier checks added.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import CarrierMismatch, NotApplicable, ParseError, SizeCapExceeded
from .signature import ARITY, ordered

UNDEF = -1
DEFAULT_ELEMENT_CAP = 4096


@dataclass(frozen=True)
class FinSet:
    name: str
    labels: tuple[str, ...]

    def __post_init__(self):
        if len(self.labels) < 1:
            raise ValueError("a carrier must be non-empty")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError(f"duplicate point labels in {self.labels}")

    @property
    def size(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"{label!r} is not a point of {self.name}") from None

    @classmethod
    def of(cls, name: str, labels: Iterable) -> "FinSet":
        return cls(name, tuple(str(x) for x in labels))

    @classmethod
    def range(cls, name: str, n: int) -> "FinSet":
        return cls(name, tuple(str(i) for i in range(n)))


# -- vectorised operations ---------------------------------------------------

def batch_res(f, g):
    return np.where(f >= 0, g, UNDEF)


def batch_mns(f, g):
    return np.where(g < 0, f, UNDEF)


def batch_ovr(f, g):
    return np.where(f >= 0, f, g)


def batch_upd(f, g):
    return np.where(f >= 0, np.where(g >= 0, g, f), UNDEF)


def batch_cap(f, g):
    return np.where(f == g, f, UNDEF)


def batch_dif(f, g):
    return np.where(f != g, f, UNDEF)


def batch_cmp(f, g):
    f, g = np.broadcast_arrays(f, g)
    picked = np.take_along_axis(g, np.clip(f, 0, None), axis=-1)
    return np.where(f >= 0, picked, UNDEF)


def batch_dom(f):
    points = np.arange(f.shape[-1])
    return np.where(f >= 0, points, UNDEF)


def batch_K(f, g, h, k):
    return np.where(f == g, h, k)


BATCH_OPS = {
    "cmp": batch_cmp, "res": batch_res, "mns": batch_mns, "ovr": batch_ovr,
    "upd": batch_upd, "cap": batch_cap, "dif": batch_dif, "dom": batch_dom,
    "K": batch_K,
}


# -- PFun --------------------------------------------------------------------

@dataclass(frozen=True)
class PFun:
    source: FinSet
    target: FinSet
    values: tuple[int, ...]

    def __post_init__(self):
        if len(self.values) != self.source.size:
            raise ValueError("one value slot per source point is required")
        for v in self.values:
            if not (v == UNDEF or 0 <= v < self.target.size):
                raise ValueError(f"value {v} out of range for {self.target.name}")

    @classmethod
    def from_graph(cls, source: FinSet, target: FinSet, graph: Mapping) -> "PFun":
        """Build from a mapping keyed by point labels (or indices)."""
        vals = [UNDEF] * source.size
        for p, q in graph.items():
            i = p if isinstance(p, int) else source.index(str(p))
            j = q if isinstance(q, int) else target.index(str(q))
            vals[i] = j
        return cls(source, target, tuple(vals))

    @classmethod
    def empty(cls, source: FinSet, target: FinSet) -> "PFun":
        return cls(source, target, (UNDEF,) * source.size)

    @classmethod
    def identity(cls, carrier: FinSet) -> "PFun":
        return cls(carrier, carrier, tuple(range(carrier.size)))

    @property
    def graph(self) -> dict[str, str]:
        return {self.source.labels[i]: self.target.labels[v]
                for i, v in enumerate(self.values) if v != UNDEF}

    @property
    def domain(self) -> frozenset[int]:
        return frozenset(i for i, v in enumerate(self.values) if v != UNDEF)

    @property
    def is_endo(self) -> bool:
        return self.source == self.target

    def pairs(self) -> frozenset[tuple[int, int]]:
        return frozenset((i, v) for i, v in enumerate(self.values) if v != UNDEF)

    def issubset(self, other: "PFun") -> bool:
        return self.pairs() <= other.pairs()

    def __call__(self, label):
        v = self.values[self.source.index(str(label))]
        return None if v == UNDEF else self.target.labels[v]

    def __repr__(self):
        body = ", ".join(f"{p}->{q}" for p, q in self.graph.items()) or "-"
        return f"PFun({body})"

    def _array(self):
        return np.array(self.values, dtype=np.int64)

    def _same(self, other: "PFun"):
        if self.source != other.source or self.target != other.target:
            raise CarrierMismatch(
                f"carriers differ: {self.source.name}->{self.target.name} vs "
                f"{other.source.name}->{other.target.name}")

    def _wrap(self, arr, target=None) -> "PFun":
        return PFun(self.source, target or self.target, tuple(int(v) for v in arr))

    def restrict(self, g: "PFun") -> "PFun":
        """self ∘ g: g restricted to the domain of self."""
        self._same(g)
        return self._wrap(batch_res(self._array(), g._array()))

    def minus(self, g: "PFun") -> "PFun":
        self._same(g)
        return self._wrap(batch_mns(self._array(), g._array()))

    def override(self, g: "PFun") -> "PFun":
        self._same(g)
        return self._wrap(batch_ovr(self._array(), g._array()))

    def update(self, g: "PFun") -> "PFun":
        self._same(g)
        return self._wrap(batch_upd(self._array(), g._array()))

    def intersect(self, g: "PFun") -> "PFun":
        self._same(g)
        return self._wrap(batch_cap(self._array(), g._array()))

    def difference(self, g: "PFun") -> "PFun":
        self._same(g)
        return self._wrap(batch_dif(self._array(), g._array()))

    def compose(self, g: "PFun") -> "PFun":
        """Diagrammatic composite: apply self, then g."""
        if self.target == g.source:
            return PFun(self.source, g.target,
                        tuple(int(v) for v in batch_cmp(self._array(), g._array())))
        if set(self.target.labels).isdisjoint(g.source.labels):
            # No output of self is an input of g.
            return PFun.empty(self.source, g.target)
        raise CarrierMismatch(
            f"cannot compose {self.source.name}->{self.target.name} "
            f"with {g.source.name}->{g.target.name}")

    def domain_map(self) -> "PFun":
        if not self.is_endo:
            raise CarrierMismatch("D needs a function from a set to itself")
        return self._wrap(batch_dom(self._array()))


def restrict(f: PFun, g: PFun) -> PFun:
    return f.restrict(g)


def minus(f: PFun, g: PFun) -> PFun:
    return f.minus(g)


def override(f: PFun, g: PFun) -> PFun:
    return f.override(g)


def update(f: PFun, g: PFun) -> PFun:
    return f.update(g)


def intersect(f: PFun, g: PFun) -> PFun:
    return f.intersect(g)


def difference(f: PFun, g: PFun) -> PFun:
    return f.difference(g)


def compose(f: PFun, g: PFun) -> PFun:
    return f.compose(g)


def domain_map(f: PFun) -> PFun:
    return f.domain_map()


def comparison(f: PFun, g: PFun, h: PFun, k: PFun) -> PFun:
    """(f,g)[h,k]: h where f and g do not disagree, k elsewhere."""
    if f.source != g.source or f.source != h.source or f.source != k.source:
        raise CarrierMismatch("comparison needs a common source")
    if f.target != g.target or h.target != k.target:
        raise CarrierMismatch("comparison needs f,g and h,k to share targets")
    out = batch_K(f._array(), g._array(), h._array(), k._array())
    return PFun(h.source, h.target, tuple(int(v) for v in out))


def apply_op(symbol: str, args: Sequence[PFun], source: FinSet = None,
             target: FinSet = None) -> PFun:
    """Apply a vocabulary symbol to concrete functions."""
    if symbol == "zero":
        return PFun.empty(source, target)
    if symbol == "one":
        if source != target:
            raise CarrierMismatch("the identity needs source = target")
        return PFun.identity(source)
    if len(args) != ARITY[symbol]:
        raise NotApplicable(f"{symbol} takes {ARITY[symbol]} arguments")
    if symbol == "dom":
        return args[0].domain_map()
    if symbol == "K":
        return comparison(*args)
    method = {"cmp": PFun.compose, "res": PFun.restrict, "mns": PFun.minus,
              "ovr": PFun.override, "upd": PFun.update, "cap": PFun.intersect,
              "dif": PFun.difference}[symbol]
    return method(*args)


def all_pfuns(source: FinSet, target: FinSet) -> list[PFun]:
    """Every partial function source -> target, undefined-first lexicographic."""
    choices = range(UNDEF, target.size)
    return [PFun(source, target, vals)
            for vals in itertools.product(choices, repeat=source.size)]


def universe_array(source: FinSet, target: FinSet) -> np.ndarray:
    return np.array([f.values for f in all_pfuns(source, target)], dtype=np.int64)


# -- subalgebra generation ---------------------------------------------------

def _fresh_label(f: PFun, taken: set, index: int) -> str:
    if all(v == UNDEF for v in f.values) and "0" not in taken:
        return "0"
    if f.is_endo and f.values == tuple(range(f.source.size)) and "1" not in taken:
        return "1"
    label = f"g{index}"
    while label in taken:
        label += "'"
    return label


def generate_subalgebra(generators, sig, cap: int = DEFAULT_ELEMENT_CAP):
    """Close a set of functions under the operations of ``sig``.

    ``generators`` is a sequence of PFun or a mapping label -> PFun.  Returns
    ``(algebra, elements)`` where ``elements[i]`` is the function numbered
    ``i``.  Generators keep their order; new elements are appended pass by
    pass, each pass applying the symbols in canonical order to argument
    tuples in lexicographic order.
    """
    from .algebra import FinAlgebra

    if isinstance(generators, Mapping):
        named = list(generators.items())
    else:
        named = [(None, g) for g in generators]
    if not named:
        raise NotApplicable("at least one generator is required")
    src, tgt = named[0][1].source, named[0][1].target
    for _, g in named:
        if g.source != src or g.target != tgt:
            raise CarrierMismatch("generators must share carriers")
    symbols = ordered(sig)
    if "dom" in symbols and src != tgt:
        raise CarrierMismatch("D needs source = target")
    if "one" in symbols and src != tgt:
        raise CarrierMismatch("the identity needs source = target")
    if "cmp" in symbols and src != tgt and not set(src.labels).isdisjoint(tgt.labels):
        raise CarrierMismatch("composition needs source = target (or disjoint carriers)")

    elements: list[PFun] = []
    index: dict[PFun, int] = {}
    labels: list[str] = []

    def add(f, label=None):
        if f in index:
            return index[f]
        if len(elements) >= cap:
            raise SizeCapExceeded(f"closure exceeds {cap} elements")
        index[f] = len(elements)
        elements.append(f)
        labels.append(label if label is not None else _fresh_label(f, set(labels), len(elements) - 1))
        return index[f]

    for name, g in named:
        add(g, name)
    for c in ("zero", "one"):
        if c in symbols:
            add(apply_op(c, (), src, tgt))
    operations = [s for s in symbols if ARITY[s] > 0]

    frontier = 0
    while True:
        n = len(elements)
        for sym in operations:
            ar = ARITY[sym]
            for args in itertools.product(range(n), repeat=ar):
                if max(args) < frontier:
                    continue
                add(apply_op(sym, [elements[i] for i in args]))
        if len(elements) == n:
            break
        frontier = n

    n = len(elements)
    tables = {}
    for sym in operations:
        ar = ARITY[sym]
        t = np.empty((n,) * ar, dtype=np.int64)
        for args in itertools.product(range(n), repeat=ar):
            t[args] = index[apply_op(sym, [elements[i] for i in args])]
        tables[sym] = t
    empty = PFun.empty(src, tgt)
    zero = index.get(empty)
    one = index.get(PFun.identity(src)) if "one" in symbols else None
    alg = FinAlgebra(n, tables, tuple(labels), zero=zero, one=one)
    return alg, elements


def random_subalgebras(sig, count: int, seed: int = 0, source_size: int = 2,
                       target_size: int = 2, max_generators: int = 3):
    """Yield ``count`` subalgebras generated by random sets of functions.

    Signatures with composition, D or the identity use one carrier.
    """
    sig = frozenset(sig)
    src = FinSet.of("X", [f"x{i}" for i in range(source_size)])
    if sig & {"cmp", "dom", "one"}:
        tgt = src
    else:
        tgt = FinSet.of("Y", [f"y{i}" for i in range(target_size)])
    funcs = all_pfuns(src, tgt)
    rng = np.random.default_rng(seed)
    for _ in range(count):
        k = int(rng.integers(1, max_generators + 1))
        picked = sorted(rng.choice(len(funcs), size=k, replace=False).tolist())
        yield generate_subalgebra([funcs[i] for i in picked], sig)


# -- text format -------------------------------------------------------------

def format_pfuns(functions: Mapping[str, PFun]) -> str:
    """Serialise named functions over a shared pair of carriers."""
    funcs = list(functions.items())
    if not funcs:
        return ""
    src, tgt = funcs[0][1].source, funcs[0][1].target
    lines = ["source: " + " ".join(src.labels), "target: " + " ".join(tgt.labels)]
    for name, f in funcs:
        if f.source != src or f.target != tgt:
            raise CarrierMismatch("all serialised functions must share carriers")
        body = ", ".join(f"{p}->{q}" for p, q in f.graph.items()) or "-"
        lines.append(f"{name}: {body}")
    return "\n".join(lines) + "\n"


def parse_pfuns(text: str, source_name="X", target_name="Y") -> dict[str, PFun]:
    src = tgt = None
    out: dict[str, PFun] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ": " not in line and not line.endswith(":"):
            raise ParseError("expected 'name: ...'", lineno, 1)
        head, _, body = line.partition(":")
        head, body = head.strip(), body.strip()
        if head == "source":
            src = FinSet.of(source_name, body.split())
            continue
        if head == "target":
            tgt = FinSet.of(target_name, body.split())
            continue
        if src is None:
            raise ParseError("function before 'source:' header", lineno, 1)
        if tgt is None or tgt.labels == src.labels:
            tgt = src
        graph = {}
        if body != "-":
            for item in body.split(","):
                p, arrow, q = item.strip().partition("->")
                if not arrow:
                    raise ParseError(f"bad pair {item.strip()!r}", lineno, 1)
                p, q = p.strip(), q.strip()
                if p in graph:
                    raise ParseError(f"point {p!r} mapped twice", lineno, 1)
                graph[p] = q
        try:
            out[head] = PFun.from_graph(src, tgt, graph)
        except KeyError as exc:
            raise ParseError(str(exc), lineno, 1) from None
    if src is not None and tgt is None:
        tgt = src
    return out
