"""A small deterministic finite-model finder.

Cells are filled depth first: distinguished constants first, then every
table in canonical symbol order, row-major.  After each choice the
equations are evaluated on all assignments at once with ``-1`` standing
for "not yet known"; an equation instance whose one side is known and
whose other side is an application with known arguments forces that
table cell.  Quasiequations and the negated law are only checked once
the tables are complete.
"""

from __future__ import annotations

import itertools
import os
import time
from dataclasses import dataclass, field

import numpy as np

from .algebra import FinAlgebra, all_congruences, format_algebra, is_congruence, quotient
from .errors import MissingSymbol, NotApplicable
from .signature import ARITY, CONSTANTS, ordered
from .syntax import App, Law, Var, check_lawset, law_holds, macro_for, substitute

DEFAULT_TIMEOUT = 60.0
CELL_ORDERS = ("natural", "reverse")


def default_timeout() -> float:
    value = os.environ.get("PFALG_TIMEOUT_SECS")
    return float(value) if value else DEFAULT_TIMEOUT


@dataclass
class SearchResult:
    outcome: str            # "model", "exhausted" or "timeout"
    size: int
    nodes: int
    model: FinAlgebra | None = None
    elapsed: float = 0.0
    violation: object = None  # the negated law's violation in the model

    @property
    def found(self) -> bool:
        return self.outcome == "model"

    def as_dict(self):
        out = {"outcome": self.outcome, "size": self.size, "nodes": self.nodes}
        if self.model is not None:
            out["model"] = format_algebra(self.model)
        if self.violation is not None:
            out["violation"] = self.violation.as_dict()
        return out


# -- law preparation -------------------------------------------------------------

def _expand(t, sig):
    """Rewrite symbols missing from ``sig`` through derived-term macros."""
    if isinstance(t, Var) or t.sym in CONSTANTS:
        return t
    args = tuple(_expand(a, sig) for a in t.args)
    if t.sym in sig:
        return App(t.sym, args)
    template = macro_for(sig, t.sym)
    if template is None:
        raise MissingSymbol(f"{t.sym!r} is neither in the signature nor derivable from it")
    return _expand(substitute(template, {"x": args[0], "y": args[1]}), sig)


def expand_law(law: Law, sig) -> Law:
    hyps = tuple((_expand(l, sig), _expand(r, sig)) for l, r in law.hypotheses)
    return Law(hyps, (_expand(law.conclusion[0], sig), _expand(law.conclusion[1], sig)), law.name)


def search_signature(laws, sig=None) -> frozenset:
    """Symbols to build tables for: ``sig`` if given, else those the laws use."""
    if sig is not None:
        return frozenset(sig)
    return frozenset(s for law in laws for s in law.symbols)


# -- the search state ------------------------------------------------------------

class _Compiled:
    """An equation with its assignments laid out as index arrays."""

    def __init__(self, law: Law, size: int):
        self.law = law
        self.lhs, self.rhs = law.conclusion
        names = law.variables
        grids = np.indices((size,) * len(names)).reshape(len(names), -1) if names else np.zeros((0, 1), np.int64)
        self.env = {v: grids[i] for i, v in enumerate(names)}
        self.count = grids.shape[1] if names else 1


class _Search:
    def __init__(self, sig, laws, size, negated=None, timeout=None, lnh=False,
                 cell_order="natural"):
        if size < 1:
            raise NotApplicable("model size must be at least 1")
        if cell_order not in CELL_ORDERS:
            raise NotApplicable(f"unknown cell order {cell_order!r}")
        self.size = size
        self.sig = frozenset(sig)
        used = {s for law in laws for s in law.symbols}
        if negated is not None:
            used |= negated.symbols
        self.constants = [c for c in CONSTANTS if c in self.sig or c in used]
        self.ops = [s for s in ordered(self.sig) if s not in CONSTANTS]
        self.laws = [expand_law(l, self.sig) for l in laws]
        self.original = list(laws)
        self.negated = negated
        self.equations = [_Compiled(l, size) for l in self.laws if not l.hypotheses]
        self.quasi = [l for l in self.original if l.hypotheses]
        self.target = None
        if negated is not None and not negated.hypotheses:
            self.target = _Compiled(expand_law(negated, self.sig), size)
        self.timeout = default_timeout() if timeout is None else timeout
        self.lnh = lnh
        cells = [(c, ()) for c in self.constants]
        for sym in self.ops:
            cells.extend((sym, idx) for idx in itertools.product(range(size), repeat=ARITY[sym]))
        if cell_order == "reverse":
            cells.reverse()
        self.cells = cells
        self.nodes = 0
        self.deadline = None

    # tables: dict sym -> array with -1 unknown; constants are 0-d arrays.
    # Each table carries one extra all-unknown row/column at the end, so that
    # looking up an unknown argument (index -1) reads -1 without masking.
    def _empty(self):
        state = {c: np.array(-1, dtype=np.int64) for c in self.constants}
        for sym in self.ops:
            state[sym] = np.full((self.size + 1,) * ARITY[sym], -1, dtype=np.int64)
        return state

    def _eval(self, t, eq, state, cache):
        key = id(t)
        if key in cache:
            return cache[key]
        if isinstance(t, Var):
            out = eq.env[t.name]
        elif t.sym in CONSTANTS:
            out = np.full(eq.count, int(state[t.sym]), dtype=np.int64)
        else:
            out = state[t.sym][tuple(self._eval(a, eq, state, cache) for a in t.args)]
        cache[key] = out
        return out

    def _propagate(self, state) -> bool:
        """Force cells until nothing changes; False on conflict."""
        while True:
            forced_sym, forced_idx, forced_val = [], [], []
            for eq in self.equations:
                cache = {}
                L = self._eval(eq.lhs, eq, state, cache)
                R = self._eval(eq.rhs, eq, state, cache)
                if np.any((L >= 0) & (R >= 0) & (L != R)):
                    return False
                for side, val, other in ((eq.lhs, L, R), (eq.rhs, R, L)):
                    if isinstance(side, Var):
                        continue
                    hit = (val < 0) & (other >= 0)
                    if side.sym in CONSTANTS:
                        if hit.any():
                            forced_sym.append(side.sym)
                            forced_idx.append(None)
                            forced_val.append(other[hit])
                        continue
                    args = [self._eval(a, eq, state, cache) for a in side.args]
                    for a in args:
                        hit &= a >= 0
                    if hit.any():
                        forced_sym.append(side.sym)
                        forced_idx.append(tuple(a[hit] for a in args))
                        forced_val.append(other[hit])
            if not forced_sym:
                return True
            for sym, idx, val in zip(forced_sym, forced_idx, forced_val):
                table = state[sym]
                if sym in CONSTANTS:
                    if np.any(val != val[0]):
                        return False
                    if table >= 0 and table != val[0]:
                        return False
                    state[sym] = np.array(val[0], dtype=np.int64)
                    continue
                current = table[idx]
                if np.any((current >= 0) & (current != val)):
                    return False
                table[idx] = val
                if np.any(table[idx] != val):  # two instances forced one cell differently
                    return False

    def _can_fail(self, state) -> bool:
        """Some instance of the negated equation is still open or already fails."""
        eq = self.target
        if eq is None:
            return True
        cache = {}
        L = self._eval(eq.lhs, eq, state, cache)
        R = self._eval(eq.rhs, eq, state, cache)
        return bool(np.any((L < 0) | (R < 0) | (L != R)))

    def _next_cell(self, state):
        for pos, (sym, idx) in enumerate(self.cells):
            if state[sym][idx] < 0:
                return pos
        return None

    def _max_used(self, state):
        mx = -1
        for sym, idx in self.cells:
            v = state[sym][idx]
            if v >= 0:
                mx = max(mx, int(v), *idx) if idx else max(mx, int(v))
        return mx

    def _algebra(self, state) -> FinAlgebra:
        cut = (slice(0, self.size),)
        tables = {s: state[s][cut * ARITY[s]].copy() for s in self.ops}
        zero = int(state["zero"]) if "zero" in self.constants else None
        one = int(state["one"]) if "one" in self.constants else None
        return FinAlgebra(self.size, tables, None, zero, one)

    def _complete(self, state):
        alg = self._algebra(state)
        for law in self.quasi:
            if law_holds(alg, law) is not True:
                return None
        if self.negated is None:
            return alg, None
        v = law_holds(alg, self.negated)
        return (alg, v) if v is not True else None

    def models(self):
        """Yield (algebra, violation) for each model, in search order."""
        self.deadline = time.monotonic() + self.timeout if self.timeout else None
        state = self._empty()
        if not self._propagate(state) or not self._can_fail(state):
            return
        yield from self._dfs(state)

    def _dfs(self, state):
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise _Timeout()
        pos = self._next_cell(state)
        if pos is None:
            done = self._complete(state)
            if done is not None:
                yield done
            return
        sym, idx = self.cells[pos]
        top = self.size
        if self.lnh:
            mx = max(self._max_used(state), *idx) if idx else self._max_used(state)
            top = min(self.size, mx + 2)
        for value in range(top):
            self.nodes += 1
            child = {k: v.copy() for k, v in state.items()}
            if sym in CONSTANTS:
                child[sym] = np.array(value, dtype=np.int64)
            else:
                child[sym][idx] = value
            if self._propagate(child) and self._can_fail(child):
                yield from self._dfs(child)


class _Timeout(Exception):
    pass


def search_model(sig, laws, size: int, negated: Law | None = None, *, timeout=None,
                 lnh: bool = False, cell_order: str = "natural") -> SearchResult:
    """First model of ``laws`` of the given size (violating ``negated`` if given)."""
    laws = list(laws)
    sig = search_signature(laws + ([negated] if negated else []), sig)
    s = _Search(sig, laws, size, negated, timeout, lnh, cell_order)
    start = time.monotonic()
    try:
        for alg, violation in s.models():
            return SearchResult("model", size, s.nodes, alg, time.monotonic() - start, violation)
    except _Timeout:
        return SearchResult("timeout", size, s.nodes, None, time.monotonic() - start)
    return SearchResult("exhausted", size, s.nodes, None, time.monotonic() - start)


def iter_models(sig, laws, size: int, *, timeout=None, lnh: bool = False):
    """Every model of the given size in search order (stops silently on timeout)."""
    laws = list(laws)
    s = _Search(search_signature(laws, sig), laws, size, None, timeout, lnh)
    try:
        for alg, _ in s.models():
            yield alg
    except _Timeout:
        return


# -- irredundance ------------------------------------------------------------------

@dataclass
class Certificate:
    law: Law
    outcome: str                 # "found", "none" or "timeout"
    size: int | None = None
    model: FinAlgebra | None = None
    violation: object = None
    nodes: int = 0
    verified: bool = False
    attempts: list = field(default_factory=list)  # (size, outcome, nodes)

    def line(self) -> str:
        if self.outcome == "found":
            state = "verified" if self.verified else "NOT VERIFIED"
            return f"{self.law.name}: counter-model of size {self.size} ({state}); {self.violation}"
        tried = ", ".join(f"{k}:{o}" for k, o, _ in self.attempts)
        return f"{self.law.name}: no counter-model up to the bound ({tried})"

    def as_dict(self):
        out = {"law": self.law.name, "text": self.law.body(), "outcome": self.outcome,
               "size": self.size, "verified": self.verified,
               "attempts": [{"size": k, "outcome": o, "nodes": n} for k, o, n in self.attempts]}
        if self.model is not None:
            out["model"] = format_algebra(self.model)
            out["violation"] = self.violation.as_dict()
        return out

    def serialise(self) -> str:
        if self.model is None:
            return ""
        return format_algebra(self.model, [f"omitted law {self.law.name}: {self.law.body()}",
                                           f"violation: {self.violation}"])


def verify_certificate(model: FinAlgebra, others, law: Law):
    """The model satisfies ``others`` and violates ``law``: returns the violation or None."""
    if not check_lawset(model, others).all_pass:
        return None
    v = law_holds(model, law)
    return None if v is True else v


def irredundance_certificates(laws, max_size: int, sig=None, *, timeout=None,
                              lnh: bool = False, min_size: int = 2) -> list[Certificate]:
    """For each law, the smallest counter-model of the others that violates it."""
    laws = list(laws)
    if not laws:
        raise NotApplicable("the law set is empty")
    sig = search_signature(laws, sig)
    out = []
    for i, law in enumerate(laws):
        others = laws[:i] + laws[i + 1:]
        cert = Certificate(law, "none")
        for k in range(min_size, max_size + 1):
            res = search_model(sig, others, k, law, timeout=timeout, lnh=lnh)
            cert.attempts.append((k, res.outcome, res.nodes))
            cert.nodes += res.nodes
            if res.found:
                v = verify_certificate(res.model, others, law)
                cert.outcome, cert.size, cert.model = "found", k, res.model
                cert.violation, cert.verified = res.violation, v is not None
                break
            if res.outcome == "timeout":
                cert.outcome = "timeout"
        out.append(cert)
    return out


# -- quasivariety witnesses ----------------------------------------------------------

@dataclass
class QuasiWitness:
    algebra: FinAlgebra
    congruence: object
    quotient: FinAlgebra
    violation: object


def verify_quasi_witness(alg: FinAlgebra, theta, laws, law_q: Law) -> QuasiWitness | None:
    """``alg`` satisfies ``laws`` and ``law_q``, θ is a congruence, A/θ violates ``law_q``."""
    if not check_lawset(alg, list(laws) + [law_q]).all_pass:
        return None
    if not is_congruence(alg, theta):
        return None
    q = quotient(alg, theta)
    v = law_holds(q, law_q)
    return None if v is True else QuasiWitness(alg, theta, q, v)


def quasivariety_witness(laws, law_q: Law, max_size: int, sig=None, *, timeout=None,
                         lnh: bool = True, min_size: int = 2) -> QuasiWitness | None:
    """Search models of ``laws + [law_q]`` for a quotient that violates ``law_q``."""
    laws = list(laws)
    if not law_q.hypotheses:
        return None  # equations survive quotients
    sig = search_signature(laws + [law_q], sig)
    for k in range(min_size, max_size + 1):
        for alg in iter_models(sig, laws + [law_q], k, timeout=timeout, lnh=lnh):
            for theta in all_congruences(alg):
                if len(theta.blocks) in (1, alg.size):
                    continue
                q = quotient(alg, theta)
                v = law_holds(q, law_q)
                if v is not True:
                    return QuasiWitness(alg, theta, q, v)
    return None


def weakly_prime_search(max_size: int, *, timeout=None, lnh: bool = True, min_size: int = 1):
    """Look for an algebra of the ∩⊔ axioms with a weakly prime filter that is not prime.

    Returns ``(algebra, filter)`` or None if every model up to ``max_size``
    (within the timeout) has none.
    """
    from .catalog import load_lawset
    from .filters import weakly_prime_not_prime

    entry = load_lawset("rnb-cap-over")
    for k in range(min_size, max_size + 1):
        for alg in iter_models(entry.signature, entry.laws, k, timeout=timeout, lnh=lnh):
            F = weakly_prime_not_prime(alg)
            if F is not None:
                return alg, F
    return None
