"""The fixed operation vocabulary and signature helpers."""

from __future__ import annotations

from typing import Iterable

from .errors import UnknownSymbol

# Canonical order; tables, closures and searches all iterate in this order.
ARITY: dict[str, int] = {
    "cmp": 2,   # composition, diagrammatic: (f.g)(p) = g(f(p))
    "res": 2,   # domain restriction
    "mns": 2,   # minus
    "ovr": 2,   # override
    "upd": 2,   # update
    "cap": 2,   # intersection
    "dif": 2,   # difference
    "dom": 1,   # domain map D
    "K": 4,     # generalised comparison (f,g)[h,k]
    "zero": 0,
    "one": 0,
}
SYMBOLS: tuple[str, ...] = tuple(ARITY)
CONSTANTS = ("zero", "one")

ALIASES = {
    ".": "cmp", "·": "cmp", "*": "cmp", "comp": "cmp",
    "∘": "res", "o": "res",
    "-": "mns", "−": "mns", "minus": "mns",
    "⊔": "ovr", "override": "ovr",
    "⋄": "upd", "update": "upd",
    "∩": "cap", "meet": "cap",
    "\\": "dif", "diff": "dif",
    "D": "dom",
    "0": "zero",
    "1": "one",
}

Signature = frozenset


def canonical(symbol: str) -> str:
    s = symbol.strip()
    s = ALIASES.get(s, s)
    if s not in ARITY:
        raise UnknownSymbol(f"unknown symbol {symbol!r}")
    return s


def make_signature(symbols: Iterable[str] | str) -> frozenset[str]:
    """Build a signature from symbol names; a string is split on commas."""
    if isinstance(symbols, str):
        parts = [p for p in symbols.replace("(", "").replace(")", "").split(",") if p.strip()]
    else:
        parts = list(symbols)
    return frozenset(canonical(p) for p in parts)


def ordered(sig: Iterable[str]) -> list[str]:
    sig = set(sig)
    return [s for s in SYMBOLS if s in sig]


def format_signature(sig: Iterable[str]) -> str:
    return ",".join(ordered(sig))
