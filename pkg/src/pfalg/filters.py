"""Filters of the domain-restriction reduct and the machinery around them.

A filter is a nonempty subset closed under ``res`` and upward closed under
the projection quasiorder (``a ≲ b`` iff ``b∘a = a``).  In a finite algebra
the quotient by ∼ is a finite semilattice, so every filter is the up-set of
a single element; enumeration therefore walks the ∼-classes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import CongruencePartition, FinAlgebra, is_congruence, natural_le, sim_partition
from .errors import InternalContradiction, NotApplicable, SizeCapExceeded

MAX_SIM_CLASSES = 20
KINDS = ("all", "max_separating", "prime_minus", "prime_override", "weakly_prime")


@dataclass(frozen=True, eq=False)
class Filter:
    host: FinAlgebra
    members: frozenset

    def __contains__(self, a):
        return a in self.members

    def __len__(self):
        return len(self.members)

    def __eq__(self, other):
        return isinstance(other, Filter) and self.members == other.members

    def __hash__(self):
        return hash(self.members)

    @property
    def sorted_members(self) -> list[int]:
        return sorted(self.members)

    @property
    def is_proper(self) -> bool:
        return len(self.members) < self.host.size

    def labels(self) -> list[str]:
        return sorted(self.host.labels[i] for i in self.members)

    def mask(self) -> np.ndarray:
        m = np.zeros(self.host.size, dtype=bool)
        m[list(self.members)] = True
        return m

    def __str__(self):
        return "{" + ", ".join(self.labels()) + "}"

    __repr__ = __str__


def is_filter(alg: FinAlgebra, members) -> bool:
    s = set(members)
    if not s:
        return False
    r = alg.op("res")
    idx = sorted(s)
    if not set(r[np.ix_(idx, idx)].ravel().tolist()) <= s:
        return False
    # up-closure: a in F and b∘a = a  =>  b in F
    for a in idx:
        above = np.flatnonzero(r[:, a] == a)
        if not set(above.tolist()) <= s:
            return False
    return True


def principal_filter(alg: FinAlgebra, a: int) -> Filter:
    """a↑ = {e : a ≲ e}."""
    r = alg.op("res")
    return Filter(alg, frozenset(np.flatnonzero(r[:, a] == a).tolist()))


def extend_filter(alg: FinAlgebra, F: Filter, a: int) -> Filter:
    """F_a = {b : f∘a ≲ b for some f in F}, the least filter containing F and a."""
    if a in F:
        raise NotApplicable(f"{alg.labels[a]} is already in the filter")
    r = alg.op("res")
    lows = set(r[F.sorted_members, a].tolist())
    out = set()
    for c in lows:
        out.update(np.flatnonzero(r[:, c] == c).tolist())
    return Filter(alg, frozenset(out))


def is_separating_for(alg: FinAlgebra, F: Filter, a: int, b: int) -> bool:
    if natural_le(alg, a, b):
        raise NotApplicable(f"{alg.labels[a]} <= {alg.labels[b]}; nothing to separate")
    if a not in F:
        return False
    r = alg.op("res")
    m = F.sorted_members
    return not bool(np.any(r[m, a] == r[m, b]))


def maximal_separating_filter(alg: FinAlgebra, a: int, b: int) -> Filter:
    """Grow a↑ by least-index single-element extensions that keep it (a,b)-separating.

    One ascending pass suffices: if extending by c fails at some stage it
    fails at every later stage, because the later extension is larger and
    still contains the merging element.
    """
    F = principal_filter(alg, a)
    if not is_separating_for(alg, F, a, b):
        raise InternalContradiction(
            "a principal filter failed to separate", (alg.labels[a], alg.labels[b]))
    for c in range(alg.size):
        if c in F:
            continue
        G = extend_filter(alg, F, c)
        if is_separating_for(alg, G, a, b):
            F = G
    return F


def is_prime_minus(alg: FinAlgebra, F: Filter) -> bool:
    """a in F implies b in F or a-b in F."""
    m = alg.op("mns")
    inside = F.mask()
    for a in F.sorted_members:
        if not np.all(inside | inside[m[a]]):
            return False
    return True


def is_prime_override(alg: FinAlgebra, F: Filter) -> bool:
    """a⊔b in F implies a in F or b in F."""
    o = alg.op("ovr")
    inside = F.mask()
    hit = inside[o]
    return bool(np.all(~hit | inside[:, None] | inside[None, :]))


def is_weakly_prime(alg: FinAlgebra, F: Filter) -> bool:
    """a in F implies b in F or a∩(a⋄b) in F."""
    u = alg.op("upd")
    c = alg.op("cap")
    inside = F.mask()
    for a in F.sorted_members:
        if not np.all(inside | inside[c[a, u[a]]]):
            return False
    return True


PREDICATES = {
    "prime_minus": is_prime_minus,
    "prime_override": is_prime_override,
    "weakly_prime": is_weakly_prime,
}


def eps_relation(alg: FinAlgebra, F: Filter) -> np.ndarray:
    """R[a, b] iff e∘a = e∘b for some e in F."""
    rows = alg.op("res")[F.sorted_members]
    return (rows[:, :, None] == rows[:, None, :]).any(axis=0)


def eps_congruence(alg: FinAlgebra, F: Filter) -> CongruencePartition:
    """ε_F as a partition.  Works for the whole carrier too (see ``Filter.is_proper``)."""
    R = eps_relation(alg, F)
    Ri = R.astype(np.int64)
    if not np.array_equal(R, R.T) or not np.all(np.diag(R)) or np.any((Ri @ Ri > 0) & ~R):
        bad = np.argwhere((Ri @ Ri > 0) & ~R)
        raise InternalContradiction("ε_F is not an equivalence",
                                    tuple(alg.labels[i] for i in bad[0]) if len(bad) else None)
    return CongruencePartition(tuple(int(np.flatnonzero(R[i])[0]) for i in range(alg.size)))


def all_filters(alg: FinAlgebra, max_classes: int = MAX_SIM_CLASSES) -> list[Filter]:
    """Every filter, one per ∼-class (in order of least class member)."""
    sim = sim_partition(alg)
    if len(sim.blocks) > max_classes:
        raise SizeCapExceeded(f"{len(sim.blocks)} ∼-classes exceed the cap of {max_classes}")
    return [principal_filter(alg, blk[0]) for blk in sim.blocks]


def uncovered_pair(alg: FinAlgebra, filters) -> tuple[int, int] | None:
    """First (a, b) with a ≰ b that no filter separates, or None."""
    r = alg.op("res")
    for a in range(alg.size):
        for b in range(alg.size):
            if r[a, b] == a:
                continue
            if not any(is_separating_for(alg, F, a, b) for F in filters):
                return (a, b)
    return None


@dataclass
class FilterFamily:
    host: FinAlgebra
    filters: tuple
    kind: str

    def __len__(self):
        return len(self.filters)

    def __iter__(self):
        return iter(self.filters)

    def lines(self) -> list[str]:
        return [f"F{i}: {F}" for i, F in enumerate(self.filters)]


def separating_family(alg: FinAlgebra, kind: str = "all",
                      max_classes: int = MAX_SIM_CLASSES) -> FilterFamily:
    """Filters of the requested kind, checked to be separating.

    Filters containing the zero element (only the whole carrier can) are
    left out so that zero is represented by the empty function.
    """
    if kind not in KINDS:
        raise NotApplicable(f"unknown filter family kind {kind!r}")
    if kind == "max_separating":
        chosen: list[Filter] = []
        r = alg.op("res")
        for a in range(alg.size):
            for b in range(alg.size):
                if r[a, b] != a:
                    F = maximal_separating_filter(alg, a, b)
                    if F not in chosen:
                        chosen.append(F)
    else:
        chosen = all_filters(alg, max_classes)
        if kind in PREDICATES:
            chosen = [F for F in chosen if PREDICATES[kind](alg, F)]
    if alg.zero is not None:
        chosen = [F for F in chosen if alg.zero not in F]
    gap = uncovered_pair(alg, chosen)
    if gap is not None:
        raise InternalContradiction(
            f"{kind} filters do not separate {alg.labels[gap[0]]} from {alg.labels[gap[1]]}",
            (alg.labels[gap[0]], alg.labels[gap[1]]))
    return FilterFamily(alg, tuple(chosen), kind)


def matching_predicate(alg: FinAlgebra) -> str | None:
    """The primeness notion maximal separating filters satisfy in this host."""
    sym = set(alg.tables)
    if "mns" in sym:
        return "prime_minus"
    if {"cap", "upd"} <= sym:
        return "weakly_prime"
    if {"cap", "ovr"} <= sym:
        return "prime_override"
    return None


def filter_property_failures(alg: FinAlgebra, predicate: str | None = None) -> list[str]:
    """Check the filter facts the representation relies on; returns failure lines.

    For every filter, ε_F is a ∘-congruence and (for proper F) F is a union of
    its blocks.  For every a ≰ b, a↑ is (a,b)-separating, and the maximal
    (a,b)-separating filter is maximal, passes ``predicate`` and has the
    property that each y outside it merges a and b below some f∘y.  In hosts
    with ∩, x,y ∈ F with x ε_F y iff x∩y ∈ F.  In hosts with − and ⊔ the two
    primeness notions agree; in hosts with ∩ and ⊔ prime filters are weakly
    prime.
    """
    out = []
    lab = alg.labels
    r = alg.op("res")
    filters = all_filters(alg)
    has_cap = alg.has("cap")
    for F in filters:
        eps = eps_congruence(alg, F)
        if not is_congruence(alg, eps, ["res"]):
            out.append(f"eps congruence: fails for {F}")
        if F.is_proper and any(len({m in F for m in blk}) > 1 for blk in eps.blocks):
            out.append(f"eps blocks: {F} is not a union of blocks")
        if has_cap:
            c = alg.op("cap")
            R = eps_relation(alg, F)
            inside = F.mask()
            lhs = inside[:, None] & inside[None, :] & R
            rhs = inside[c]
            if not np.array_equal(lhs, rhs):
                x, y = np.argwhere(lhs != rhs)[0]
                out.append(f"star: {F} at ({lab[x]}, {lab[y]})")
        if alg.has("mns") and alg.has("ovr"):
            if is_prime_minus(alg, F) != is_prime_override(alg, F):
                out.append(f"minus/override primeness disagree on {F}")
        if has_cap and alg.has("ovr") and not alg.has("mns"):
            if is_prime_override(alg, F) and not is_weakly_prime(alg, F):
                out.append(f"prime but not weakly prime: {F}")
    for a in range(alg.size):
        for b in range(alg.size):
            if r[a, b] == a:
                continue
            pair = f"({lab[a]}, {lab[b]})"
            if not is_separating_for(alg, principal_filter(alg, a), a, b):
                out.append(f"principal separation: {lab[a]}↑ for {pair}")
                continue
            M = maximal_separating_filter(alg, a, b)
            for y in range(alg.size):
                if y in M:
                    continue
                if is_separating_for(alg, extend_filter(alg, M, y), a, b):
                    out.append(f"maximality: {M} extends by {lab[y]} for {pair}")
                fy = r[M.sorted_members, y]
                if not np.any(r[fy, a] == r[fy, b]):
                    out.append(f"maxeq: {M}, y = {lab[y]} for {pair}")
            if predicate is not None and not PREDICATES[predicate](alg, M):
                out.append(f"{predicate}: {M} for {pair}")
    return out


def weakly_prime_not_prime(alg: FinAlgebra) -> Filter | None:
    """A weakly prime filter that is not prime (needs ∩ and ⊔), or None."""
    for F in all_filters(alg):
        if is_weakly_prime(alg, F) and not is_prime_override(alg, F):
            return F
    return None
