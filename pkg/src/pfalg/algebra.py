"""Finite algebras given by total operation tables over ``{0..n-1}``."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (MissingSymbol, NotACongruence, NotApplicable, ParseError,
                     UnsupportedSignature)
from .signature import ARITY, CONSTANTS, canonical, ordered

MAX_CONGRUENCE_ENUMERATION = 8


class FinAlgebra:
    """An algebra on ``{0..size-1}`` with one numpy table per operation.

    Nullary symbols are not tables: ``zero`` and ``one`` are optional
    distinguished element indices.
    """

    def __init__(self, size: int, tables: Mapping[str, np.ndarray],
                 labels: Sequence[str] | None = None,
                 zero: int | None = None, one: int | None = None):
        if size < 1:
            raise ValueError("an algebra needs at least one element")
        self.size = int(size)
        self.tables: dict[str, np.ndarray] = {}
        for sym in ordered(tables):
            t = np.asarray(tables[sym], dtype=np.int64)
            if t.shape != (self.size,) * ARITY[sym]:
                raise ValueError(f"table {sym} has shape {t.shape}")
            if t.size and (t.min() < 0 or t.max() >= self.size):
                raise ValueError(f"table {sym} has entries out of range")
            t = t.copy()
            t.setflags(write=False)
            self.tables[sym] = t
        unknown = set(tables) - set(self.tables)
        if unknown:
            raise ValueError(f"tables for unknown or nullary symbols: {sorted(unknown)}")
        self.labels = tuple(labels) if labels is not None else tuple(str(i) for i in range(size))
        if len(self.labels) != self.size:
            raise ValueError("one label per element is required")
        for c in (zero, one):
            if c is not None and not 0 <= c < self.size:
                raise ValueError("distinguished element out of range")
        self.zero = zero
        self.one = one

    @property
    def signature(self) -> frozenset[str]:
        sig = set(self.tables)
        if self.zero is not None:
            sig.add("zero")
        if self.one is not None:
            sig.add("one")
        return frozenset(sig)

    def label(self, i: int) -> str:
        return self.labels[i]

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def has(self, sym: str) -> bool:
        """True if ``sym`` is a table or obtainable through a derived-term macro."""
        try:
            self.op(sym)
        except MissingSymbol:
            return False
        return True

    def op(self, sym: str) -> np.ndarray:
        """The table for ``sym``, expanding a derived-term macro if needed."""
        if sym in self.tables:
            return self.tables[sym]
        from .syntax import derived_table
        return derived_table(self, sym)

    def replace(self, tables=None, labels=None, zero=..., one=...) -> "FinAlgebra":
        t = dict(self.tables)
        if tables:
            t.update(tables)
        return FinAlgebra(self.size, t, labels if labels is not None else self.labels,
                          self.zero if zero is ... else zero,
                          self.one if one is ... else one)

    def reduct(self, symbols: Iterable[str], keep_constants: bool = True) -> "FinAlgebra":
        """Keep only ``symbols`` (materialising macro-derived tables)."""
        tabs = {s: self.op(s) for s in symbols if s not in CONSTANTS}
        return FinAlgebra(self.size, tabs, self.labels,
                          self.zero if keep_constants else None,
                          self.one if keep_constants else None)

    def __eq__(self, other):
        if not isinstance(other, FinAlgebra):
            return NotImplemented
        return (self.size == other.size and self.labels == other.labels
                and self.zero == other.zero and self.one == other.one
                and self.tables.keys() == other.tables.keys()
                and all(np.array_equal(self.tables[s], other.tables[s]) for s in self.tables))

    __hash__ = None

    def __repr__(self):
        return f"FinAlgebra(size={self.size}, sig={ordered(self.signature)})"


# -- orders ------------------------------------------------------------------

def natural_le(alg: FinAlgebra, a: int, b: int) -> bool:
    """a <= b iff a = a∘b."""
    return int(alg.op("res")[a, b]) == a


def proj_quasiorder(alg: FinAlgebra, a: int, b: int) -> bool:
    """a ≲ b iff b∘a = a."""
    return int(alg.op("res")[b, a]) == a


def natural_le_matrix(alg: FinAlgebra) -> np.ndarray:
    r = alg.op("res")
    return r == np.arange(alg.size)[:, None]


def quasiorder_matrix(alg: FinAlgebra) -> np.ndarray:
    """M[a, b] is True iff a ≲ b."""
    r = alg.op("res")
    return (r == np.arange(alg.size)[None, :]).T


# -- partitions and congruences ----------------------------------------------

@dataclass(frozen=True)
class CongruencePartition:
    """A partition of ``{0..n-1}``; ``block_of[i]`` numbers blocks by first occurrence."""

    block_of: tuple[int, ...]

    def __post_init__(self):
        seen: dict[int, int] = {}
        norm = []
        for b in self.block_of:
            if b not in seen:
                seen[b] = len(seen)
            norm.append(seen[b])
        object.__setattr__(self, "block_of", tuple(norm))

    @classmethod
    def from_blocks(cls, n: int, blocks: Iterable[Iterable[int]]) -> "CongruencePartition":
        ids = list(range(n))
        covered = set()
        for blk in blocks:
            blk = list(blk)
            for x in blk:
                if not 0 <= x < n or x in covered:
                    raise NotApplicable(f"malformed partition at element {x}")
                covered.add(x)
                ids[x] = n + min(blk)
        return cls(tuple(ids))

    @classmethod
    def identity(cls, n: int) -> "CongruencePartition":
        return cls(tuple(range(n)))

    @classmethod
    def full(cls, n: int) -> "CongruencePartition":
        return cls((0,) * n)

    @property
    def size(self) -> int:
        return len(self.block_of)

    @property
    def blocks(self) -> tuple[tuple[int, ...], ...]:
        out: dict[int, list[int]] = {}
        for i, b in enumerate(self.block_of):
            out.setdefault(b, []).append(i)
        return tuple(tuple(v) for _, v in sorted(out.items()))

    @property
    def nontrivial_blocks(self) -> tuple[tuple[int, ...], ...]:
        return tuple(b for b in self.blocks if len(b) > 1)

    def related(self, a: int, b: int) -> bool:
        return self.block_of[a] == self.block_of[b]

    def refines(self, other: "CongruencePartition") -> bool:
        return all(other.related(b[0], x) for b in self.blocks for x in b)

    def array(self) -> np.ndarray:
        return np.array(self.block_of, dtype=np.int64)


def _check_partition(alg: FinAlgebra, part: CongruencePartition):
    if part.size != alg.size:
        raise NotApplicable(f"partition of {part.size} elements for an algebra of {alg.size}")


def _symbols(alg: FinAlgebra, symbols):
    if symbols is None:
        return list(alg.tables)
    return [canonical(s) for s in symbols if canonical(s) not in CONSTANTS]


def is_congruence(alg: FinAlgebra, part: CongruencePartition, symbols=None) -> bool:
    """True iff every listed table (default: all tables) respects the blocks."""
    _check_partition(alg, part)
    B = part.array()
    reps = np.array([part.blocks[b][0] for b in part.block_of], dtype=np.int64)
    for sym in _symbols(alg, symbols):
        t = alg.op(sym)
        for axis in range(t.ndim):
            for a in range(alg.size):
                r = reps[a]
                if r == a:
                    continue
                if not np.array_equal(B[np.take(t, a, axis=axis)], B[np.take(t, r, axis=axis)]):
                    return False
    return True


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True

    def partition(self):
        return CongruencePartition(tuple(self.find(i) for i in range(len(self.parent))))


def generated_congruence(alg: FinAlgebra, pairs: Iterable[tuple[int, int]],
                         symbols=None) -> CongruencePartition:
    """Least congruence containing ``pairs``, by closure to a fixpoint."""
    uf = _UnionFind(alg.size)
    for a, b in pairs:
        if not (0 <= a < alg.size and 0 <= b < alg.size):
            raise NotApplicable(f"pair ({a}, {b}) out of range")
        uf.union(a, b)
    tabs = [alg.op(s) for s in _symbols(alg, symbols)]
    changed = True
    while changed:
        changed = False
        for t in tabs:
            for axis in range(t.ndim):
                for a in range(alg.size):
                    r = uf.find(a)
                    if r == a:
                        continue
                    xs = np.take(t, a, axis=axis).ravel()
                    ys = np.take(t, r, axis=axis).ravel()
                    for x, y in zip(xs.tolist(), ys.tolist()):
                        if x != y and uf.union(x, y):
                            changed = True
    return uf.partition()


def all_congruences(alg: FinAlgebra, symbols=None,
                    max_size: int = MAX_CONGRUENCE_ENUMERATION) -> list[CongruencePartition]:
    """Every congruence, as joins of principal congruences (small algebras only)."""
    if alg.size > max_size:
        raise NotApplicable(f"congruence enumeration is capped at {max_size} elements")
    principal = {}
    for a, b in itertools.combinations(range(alg.size), 2):
        principal.setdefault(generated_congruence(alg, [(a, b)], symbols), (a, b))
    found = {CongruencePartition.identity(alg.size)}
    frontier = list(found)
    while frontier:
        nxt = []
        for theta in frontier:
            for p in principal:
                if p.refines(theta):
                    continue
                pairs = [(blk[0], x) for blk in theta.blocks + p.blocks for x in blk[1:]]
                j = generated_congruence(alg, pairs, symbols)
                if j not in found:
                    found.add(j)
                    nxt.append(j)
        frontier = nxt
    return sorted(found, key=lambda c: (len(c.blocks) * -1, c.block_of))


def sim_partition(alg: FinAlgebra) -> CongruencePartition:
    """Classes of ∼, the equivalence determined by ≲."""
    q = quasiorder_matrix(alg)
    eq = q & q.T
    ids = [int(np.flatnonzero(eq[i])[0]) for i in range(alg.size)]
    return CongruencePartition(tuple(ids))


def quotient(alg: FinAlgebra, part: CongruencePartition, symbols=None) -> FinAlgebra:
    if not is_congruence(alg, part, symbols):
        raise NotACongruence("partition is not a congruence")
    B = part.array()
    reps = np.array([blk[0] for blk in part.blocks], dtype=np.int64)
    tables = {}
    for sym in _symbols(alg, symbols):
        t = alg.tables[sym] if sym in alg.tables else alg.op(sym)
        tables[sym] = B[t[np.ix_(*([reps] * t.ndim))]]
    labels = ["".join(sorted(alg.labels[i] for i in blk)) for blk in part.blocks]
    zero = int(B[alg.zero]) if alg.zero is not None else None
    one = int(B[alg.one]) if alg.one is not None else None
    return FinAlgebra(len(reps), tables, labels, zero, one)


def is_embedding(mapping: Sequence[int], src: FinAlgebra, dst: FinAlgebra) -> bool:
    """Injective and operation-preserving for every table of ``src``."""
    if set(src.tables) != set(dst.tables):
        raise UnsupportedSignature(
            f"signature mismatch: {ordered(src.tables)} vs {ordered(dst.tables)}")
    m = np.asarray(mapping, dtype=np.int64)
    if m.shape != (src.size,):
        raise NotApplicable("mapping must be total on the source carrier")
    if len(set(m.tolist())) != src.size:
        return False
    for sym, t in src.tables.items():
        image_args = dst.tables[sym][np.ix_(*([m] * t.ndim))] if t.ndim else dst.tables[sym]
        if not np.array_equal(m[t], image_args):
            return False
    if src.zero is not None and dst.zero is not None and m[src.zero] != dst.zero:
        return False
    return True


# -- zero-adjoining lifts ----------------------------------------------------

LIFT_CASES = {
    "rnb": ({"res"}, True),
    "cap": ({"res", "cap"}, True),
    "cap-over": ({"res", "cap", "ovr"}, True),
    "cap-update": ({"res", "cap", "upd"}, True),
    "minus": ({"mns"}, False),
    "minus-over": ({"mns", "ovr"}, False),
    "minus-update": ({"mns", "upd"}, False),
    "minus-cap": ({"mns", "cap"}, False),
    "minus-over-cap": ({"mns", "ovr", "cap"}, False),
    "minus-update-cap": ({"mns", "upd", "cap"}, False),
    "dif": ({"res", "dif"}, False),
}


def infer_lift_case(alg: FinAlgebra) -> str:
    sym = set(alg.tables)
    for case, (needed, _) in LIFT_CASES.items():
        if sym == needed or (not LIFT_CASES[case][1] and sym == needed | {"res"}):
            return case
    raise UnsupportedSignature(f"no zero-adjoining lift for {ordered(sym)}")


def lift_to_stack(alg: FinAlgebra, case: str | None = None) -> FinAlgebra:
    """Add an all-zero composition, adjoining a fresh zero unless one is term-defined."""
    if "cmp" in alg.tables or "dom" in alg.tables:
        raise NotApplicable("algebra already carries composition")
    if case is None:
        case = infer_lift_case(alg)
    if case not in LIFT_CASES:
        raise NotApplicable(f"unknown lift case {case!r}")
    needed, adjoin = LIFT_CASES[case]
    missing = needed - set(alg.tables)
    if missing:
        raise MissingSymbol(f"lift case {case!r} needs {sorted(missing)}")
    extra = set(alg.tables) - needed - {"res"}
    if extra:
        raise UnsupportedSignature(f"lift case {case!r} cannot extend {sorted(extra)}")

    if not adjoin:
        base = "mns" if "mns" in alg.tables else "dif"
        z = int(alg.tables[base][0, 0])
        tables = dict(alg.tables)
        tables["cmp"] = np.full((alg.size, alg.size), z, dtype=np.int64)
        return FinAlgebra(alg.size, tables, alg.labels, zero=z, one=alg.one)

    n = alg.size
    z = n
    label = "0"
    while label in alg.labels:
        label += "'"
    tables = {}
    for sym, t in alg.tables.items():
        big = np.full((n + 1, n + 1), -1, dtype=np.int64)
        big[:n, :n] = t
        col = np.arange(n + 1)
        if sym in ("res", "cap"):
            big[z, :] = z
            big[:, z] = z
        elif sym == "ovr":
            big[z, :] = col
            big[:, z] = col
        elif sym == "upd":
            big[:, z] = col      # s⋄0 = s
            big[z, :] = z        # 0⋄s = 0
        tables[sym] = big
    tables["cmp"] = np.full((n + 1, n + 1), z, dtype=np.int64)
    return FinAlgebra(n + 1, tables, alg.labels + (label,), zero=z, one=None)


def adjoin_meet(alg: FinAlgebra) -> FinAlgebra:
    """Add ``cap`` as the greatest lower bound under the natural order."""
    le = natural_le_matrix(alg)
    n = alg.size
    cap = np.empty((n, n), dtype=np.int64)
    for a in range(n):
        for b in range(n):
            lower = np.flatnonzero(le[:, a] & le[:, b])
            glb = [g for g in lower if le[lower, g].all()]
            if not glb:
                raise NotApplicable(f"{alg.labels[a]} and {alg.labels[b]} have no meet")
            cap[a, b] = glb[0]
    return alg.replace(tables={"cap": cap})


# -- text format -------------------------------------------------------------

def format_algebra(alg: FinAlgebra, header: Sequence[str] = ()) -> str:
    lines = [f"# {h}" for h in header]
    lines.append(f"size {alg.size}")
    lines.append("labels: " + " ".join(alg.labels))
    if alg.zero is not None:
        lines.append(f"zero: {alg.zero}")
    if alg.one is not None:
        lines.append(f"one: {alg.one}")
    for sym, t in alg.tables.items():
        lines.append(f"table {sym}:")
        rows = t.reshape(-1, alg.size) if t.ndim > 1 else t.reshape(1, -1)
        lines.extend(" ".join(str(int(v)) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def parse_algebra(text: str) -> FinAlgebra:
    size = None
    labels = None
    zero = one = None
    tables: dict[str, np.ndarray] = {}
    current = None
    rows: list[list[int]] = []

    def flush():
        if current is None:
            return
        ar = ARITY[current]
        need = size ** (ar - 1) if ar > 1 else 1
        if len(rows) != need:
            raise ParseError(f"table {current} needs {need} rows, got {len(rows)}")
        tables[current] = np.array(rows, dtype=np.int64).reshape((size,) * ar)

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("size"):
            size = int(line.split()[1])
        elif line.startswith("labels:"):
            labels = line.split(":", 1)[1].split()
        elif line.startswith("zero:"):
            zero = int(line.split(":", 1)[1])
        elif line.startswith("one:"):
            one = int(line.split(":", 1)[1])
        elif line.startswith("table"):
            flush()
            name = line[len("table"):].strip().rstrip(":").strip()
            try:
                current = canonical(name)
            except Exception:
                raise ParseError(f"unknown table symbol {name!r}", lineno, 1) from None
            rows = []
        else:
            if current is None or size is None:
                raise ParseError("table row outside a table block", lineno, 1)
            try:
                row = [int(v) for v in line.split()]
            except ValueError:
                raise ParseError(f"bad table row {line!r}", lineno, 1) from None
            if len(row) != size:
                raise ParseError(f"row has {len(row)} entries, expected {size}", lineno, 1)
            rows.append(row)
    if size is None:
        raise ParseError("missing 'size' header")
    flush()
    try:
        return FinAlgebra(size, tables, labels, zero, one)
    except ValueError as exc:
        raise ParseError(str(exc)) from None
