"""Terms, equations and quasiequations over the fixed vocabulary.

Law text grammar (one law per line)::

    law  := [name ":"] [eq ("&" eq)* "=>"] eq
    eq   := term "=" term
    term := var | sym "(" term ("," term)* ")" | "zero" | "one"

Laws are checked exhaustively, either on the tables of a ``FinAlgebra``
or pointwise on concrete partial functions.  The two evaluators share no
code beyond the term structure.
"""

from __future__ import annotations

import itertools
import logging
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .errors import (ArityError, MissingSymbol, ParseError, UnassignedVariable,
                     UnknownSymbol)
from .pfun import BATCH_OPS, UNDEF, FinSet, PFun, apply_op
from .signature import ARITY, CONSTANTS

log = logging.getLogger(__name__)

CHUNK = 1 << 20
RESERVED = frozenset(ARITY)


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class App:
    sym: str
    args: tuple = ()

    def __post_init__(self):
        if self.sym not in ARITY:
            raise UnknownSymbol(f"unknown symbol {self.sym!r}")
        if len(self.args) != ARITY[self.sym]:
            raise ArityError(f"{self.sym} takes {ARITY[self.sym]} arguments, got {len(self.args)}")

    def __str__(self):
        if not self.args:
            return self.sym
        return f"{self.sym}({','.join(str(a) for a in self.args)})"


Term = Union[Var, App]
Equation = tuple  # (Term, Term)


def term_vars(t: Term, out: list | None = None) -> list[str]:
    out = [] if out is None else out
    if isinstance(t, Var):
        if t.name not in out:
            out.append(t.name)
    else:
        for a in t.args:
            term_vars(a, out)
    return out


def term_symbols(t: Term, out: set | None = None) -> set[str]:
    out = set() if out is None else out
    if isinstance(t, App):
        out.add(t.sym)
        for a in t.args:
            term_symbols(a, out)
    return out


def substitute(t: Term, env: Mapping[str, Term]) -> Term:
    if isinstance(t, Var):
        return env.get(t.name, t)
    return App(t.sym, tuple(substitute(a, env) for a in t.args))


@dataclass(frozen=True)
class Law:
    hypotheses: tuple = ()
    conclusion: tuple = None
    name: str = ""

    @property
    def is_equation(self) -> bool:
        return not self.hypotheses

    @property
    def variables(self) -> list[str]:
        out: list[str] = []
        for lhs, rhs in self.hypotheses + (self.conclusion,):
            term_vars(lhs, out)
            term_vars(rhs, out)
        return out

    @property
    def symbols(self) -> frozenset[str]:
        out: set[str] = set()
        for lhs, rhs in self.hypotheses + (self.conclusion,):
            term_symbols(lhs, out)
            term_symbols(rhs, out)
        return frozenset(out)

    def body(self) -> str:
        concl = f"{self.conclusion[0]} = {self.conclusion[1]}"
        if not self.hypotheses:
            return concl
        hyps = " & ".join(f"{l} = {r}" for l, r in self.hypotheses)
        return f"{hyps} => {concl}"

    def __str__(self):
        return self.body()

    def renamed(self, name: str) -> "Law":
        return Law(self.hypotheses, self.conclusion, name)


def format_law(law: Law) -> str:
    return f"{law.name}: {law.body()}" if law.name else law.body()


# -- parser --------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(=>)|([A-Za-z][A-Za-z0-9_]*)|([(),=&]))")
_NAME_PREFIX = re.compile(r"^\s*([A-Za-z0-9_.\-']+)\s*:")


class _Parser:
    def __init__(self, text: str, line: int, col0: int):
        self.text = text
        self.line = line
        self.col0 = col0
        self.pos = 0
        self.tokens = []
        while True:
            m = _TOKEN.match(text, self.pos)
            if m is None:
                rest = text[self.pos:]
                if rest.strip():
                    col = self.pos + len(rest) - len(rest.lstrip())
                    raise ParseError(f"unexpected character {rest.strip()[0]!r}", line, col0 + col + 1)
                break
            tok = m.group(1) or m.group(2) or m.group(3)
            self.tokens.append((tok, m.start(m.lastindex)))
            self.pos = m.end()
        self.i = 0

    def error(self, msg, cls=ParseError):
        col = self.tokens[self.i][1] if self.i < len(self.tokens) else len(self.text)
        return cls(msg, self.line, self.col0 + col + 1)

    def peek(self):
        return self.tokens[self.i][0] if self.i < len(self.tokens) else None

    def take(self, expected=None):
        tok = self.peek()
        if tok is None:
            raise self.error(f"unexpected end of input, expected {expected or 'a token'}")
        if expected is not None and tok != expected:
            raise self.error(f"expected {expected!r}, found {tok!r}")
        self.i += 1
        return tok

    def term(self) -> Term:
        tok = self.peek()
        if tok is None:
            raise self.error("expected a term, found end of input")
        if not re.match(r"[A-Za-z]", tok):
            raise self.error(f"expected a term, found {tok!r}")
        start = self.i
        self.take()
        if self.peek() == "(":
            if tok not in ARITY:
                self.i = start
                raise self.error(f"unknown symbol {tok!r}", UnknownSymbol)
            self.take("(")
            args = [self.term()]
            while self.peek() == ",":
                self.take(",")
                args.append(self.term())
            self.take(")")
            if len(args) != ARITY[tok]:
                self.i = start
                raise self.error(f"{tok} takes {ARITY[tok]} arguments, got {len(args)}", ArityError)
            return App(tok, tuple(args))
        if tok in CONSTANTS:
            return App(tok)
        if tok in RESERVED:
            self.i = start
            raise self.error(f"{tok} takes {ARITY[tok]} arguments, got 0", ArityError)
        if not re.fullmatch(r"[a-z][a-z0-9]*", tok):
            self.i = start
            raise self.error(f"bad variable name {tok!r}")
        return Var(tok)

    def equation(self):
        lhs = self.term()
        self.take("=")
        return (lhs, self.term())

    def law(self) -> tuple:
        eqs = [self.equation()]
        hyps = ()
        while self.peek() == "&":
            self.take("&")
            eqs.append(self.equation())
        if self.peek() == "=>":
            self.take("=>")
            hyps = tuple(eqs)
            eqs = [self.equation()]
        elif len(eqs) > 1:
            raise self.error("a conjunction must be followed by '=>'")
        if self.peek() is not None:
            raise self.error(f"unexpected {self.peek()!r}")
        return hyps, eqs[0]


def parse_term(text: str) -> Term:
    p = _Parser(text, 1, 0)
    t = p.term()
    if p.peek() is not None:
        raise p.error(f"unexpected {p.peek()!r}")
    return t


def parse_law(text: str, name: str = "", line: int = 1) -> Law:
    """Parse one law, with an optional ``name:`` prefix."""
    col0 = 0
    m = _NAME_PREFIX.match(text)
    if m:
        name = m.group(1)
        col0 = m.end()
        text = text[m.end():]
    hyps, concl = _Parser(text, line, col0).law()
    return Law(hyps, concl, name)


def parse_laws(text: str, prefix: str = "") -> list[Law]:
    """Parse a law file: one law per line, ``#`` comments."""
    laws = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        law = parse_law(line, line=lineno)
        if not law.name:
            law = law.renamed(f"{prefix}{len(laws) + 1}" if prefix else f"law{len(laws) + 1}")
        laws.append(law)
    return laws


def format_laws(laws: Iterable[Law]) -> str:
    return "".join(format_law(l) + "\n" for l in laws)


# -- derived-term macros -----------------------------------------------------

_x, _y = Var("x"), Var("y")
MACROS: dict[str, list[tuple[frozenset, Term]]] = {
    # s∘t = D(s)t where D is present, else y-(y-x) in minus signatures,
    # else (x⋄y)∩y with update and intersection
    "res": [(frozenset({"cmp", "dom"}), App("cmp", (App("dom", (_x,)), _y))),
            (frozenset({"mns"}), App("mns", (_y, App("mns", (_y, _x))))),
            (frozenset({"upd", "cap"}), App("cap", (App("upd", (_x, _y)), _y)))],
    # s∩t = s\(s\t) in difference signatures
    "cap": [(frozenset({"dif"}), App("dif", (_x, App("dif", (_x, _y)))))],
    # s⋄t = s∘(t⊔s) with restriction and override
    "upd": [(frozenset({"res", "ovr"}), App("res", (_x, App("ovr", (_y, _x)))))],
}


def macro_for(tables, sym: str) -> Term | None:
    for needed, template in MACROS.get(sym, ()):
        if needed <= set(tables):
            return template
    return None


def derived_table(alg, sym: str) -> np.ndarray:
    template = macro_for(alg.tables, sym)
    if template is None:
        raise MissingSymbol(f"algebra has no table or macro for {sym!r}")
    n = alg.size
    xs, ys = np.indices((n, n))
    return _TableEvaluator(alg).eval(template, {"x": xs, "y": ys})


# -- evaluation on tables ------------------------------------------------------

class _TableEvaluator:
    def __init__(self, alg):
        self.alg = alg

    def eval(self, t: Term, env: Mapping[str, np.ndarray]):
        if isinstance(t, Var):
            if t.name not in env:
                raise UnassignedVariable(f"variable {t.name!r} is unassigned")
            return env[t.name]
        alg = self.alg
        if t.sym in CONSTANTS:
            val = alg.zero if t.sym == "zero" else alg.one
            if val is None:
                raise MissingSymbol(f"algebra has no distinguished {t.sym}")
            return np.int64(val)
        args = [self.eval(a, env) for a in t.args]
        if t.sym in alg.tables:
            return alg.tables[t.sym][tuple(args)]
        template = macro_for(alg.tables, t.sym)
        if template is None:
            raise MissingSymbol(f"algebra has no table or macro for {t.sym!r}")
        log.debug("expanding %s via %s", t.sym, template)
        return self.eval(template, {"x": args[0], "y": args[1]})


def eval_term(alg, t: Term, assignment: Mapping[str, int]) -> int:
    env = {k: np.int64(v) for k, v in assignment.items()}
    return int(_TableEvaluator(alg).eval(t, env))


@dataclass
class Violation:
    law: str
    assignment: dict
    left: object
    right: object
    assignment_labels: dict = field(default_factory=dict)
    left_label: str = ""
    right_label: str = ""

    def __bool__(self):
        return False

    def __str__(self):
        names = self.assignment_labels or self.assignment
        where = ", ".join(f"{k}={v}" for k, v in names.items())
        left = self.left_label or self.left
        right = self.right_label or self.right
        return f"{self.law}: fails at {where} ({left} != {right})"

    def as_dict(self):
        return {"law": self.law,
                "assignment": {k: self.assignment_labels.get(k, str(v)) for k, v in self.assignment.items()},
                "left": str(self.left_label or self.left),
                "right": str(self.right_label or self.right)}


def _assignments(n: int, v: int):
    total = n ** v
    for start in range(0, total, CHUNK):
        idx = np.arange(start, min(total, start + CHUNK), dtype=np.int64)
        yield np.unravel_index(idx, (n,) * v) if v else ()


def law_holds(alg, law: Law):
    """``True`` if the law holds everywhere, else the least violating assignment.

    Assignments run over variables in order of first occurrence,
    lexicographically by element index.  A returned ``Violation`` is falsy.
    """
    ev = _TableEvaluator(alg)
    names = law.variables
    n = alg.size
    if not names:
        coords_iter = [()]
    else:
        coords_iter = _assignments(n, len(names))
    for coords in coords_iter:
        env = dict(zip(names, coords))
        count = len(coords[0]) if names else 1
        mask = np.ones(count, dtype=bool)
        for lhs, rhs in law.hypotheses:
            mask &= np.broadcast_to(ev.eval(lhs, env) == ev.eval(rhs, env), mask.shape)
            if not mask.any():
                break
        if not mask.any():
            continue
        left = np.broadcast_to(ev.eval(law.conclusion[0], env), mask.shape)
        right = np.broadcast_to(ev.eval(law.conclusion[1], env), mask.shape)
        bad = mask & (left != right)
        if bad.any():
            k = int(np.argmax(bad))
            assignment = {v: int(c[k]) for v, c in zip(names, coords)}
            return Violation(
                law.name or law.body(), assignment, int(left[k]), int(right[k]),
                {v: alg.labels[e] for v, e in assignment.items()},
                alg.labels[int(left[k])], alg.labels[int(right[k])])
    return True


def holds_at(alg, law: Law, assignment: Mapping[str, int]) -> bool:
    """Evaluate a law at one assignment (hypotheses false counts as holding)."""
    for lhs, rhs in law.hypotheses:
        if eval_term(alg, lhs, assignment) != eval_term(alg, rhs, assignment):
            return True
    return eval_term(alg, law.conclusion[0], assignment) == eval_term(alg, law.conclusion[1], assignment)


@dataclass
class LawReport:
    results: list  # (Law, True | Violation)

    @property
    def all_pass(self) -> bool:
        return all(r is True for _, r in self.results)

    @property
    def failures(self) -> list:
        return [(l, r) for l, r in self.results if r is not True]

    def lines(self) -> list[str]:
        out = []
        for law, res in self.results:
            if res is True:
                out.append(f"PASS {law.name}: {law.body()}")
            else:
                out.append(f"FAIL {res}")
        return out

    def as_dict(self):
        return [{"law": l.name, "text": l.body(), "holds": r is True,
                 "violation": None if r is True else r.as_dict()} for l, r in self.results]


def check_lawset(alg, laws: Sequence[Law]) -> LawReport:
    return LawReport([(law, law_holds(alg, law)) for law in laws])


# -- evaluation on concrete functions ----------------------------------------

def eval_concrete(t: Term, env: Mapping[str, PFun], source: FinSet = None,
                  target: FinSet = None) -> PFun:
    """Evaluate a term directly on ``PFun`` values, one operation at a time."""
    if isinstance(t, Var):
        if t.name not in env:
            raise UnassignedVariable(f"variable {t.name!r} is unassigned")
        return env[t.name]
    if source is None:
        some = next(iter(env.values()))
        source, target = some.source, some.target
    args = [eval_concrete(a, env, source, target) for a in t.args]
    return apply_op(t.sym, args, source, target)


def law_holds_concrete(law: Law, functions: Sequence[PFun]):
    """Reference checker: loops over tuples of functions in Python."""
    names = law.variables
    src, tgt = functions[0].source, functions[0].target
    for combo in itertools.product(range(len(functions)), repeat=len(names)):
        env = {v: functions[i] for v, i in zip(names, combo)}
        if all(eval_concrete(l, env, src, tgt) == eval_concrete(r, env, src, tgt)
               for l, r in law.hypotheses):
            left = eval_concrete(law.conclusion[0], env, src, tgt)
            right = eval_concrete(law.conclusion[1], env, src, tgt)
            if left != right:
                return Violation(law.name or law.body(), dict(zip(names, combo)), left, right,
                                 {v: repr(f) for v, f in env.items()}, repr(left), repr(right))
    return True


def _eval_pointwise(t: Term, env, m: int):
    if isinstance(t, Var):
        return env[t.name]
    if t.sym == "zero":
        return np.full((1, m), UNDEF, dtype=np.int64)
    if t.sym == "one":
        return np.arange(m, dtype=np.int64)[None, :]
    args = [_eval_pointwise(a, env, m) for a in t.args]
    return BATCH_OPS[t.sym](*args)


def law_holds_pointwise(law: Law, universe: np.ndarray, assignments=None,
                        labels: Sequence[str] | None = None, carriers=None):
    """Check a law over every tuple drawn from ``universe`` (rows are functions).

    ``assignments`` optionally restricts the check to given index tuples
    (shape ``(count, nvars)``); ``carriers`` is a (source, target) pair of
    point-label sequences used to print values.  Returns ``True`` or a
    ``Violation`` whose assignment holds row indices.
    """
    names = law.variables
    n, m = universe.shape
    if assignments is None:
        chunks = _assignments(n, len(names)) if names else [()]
    else:
        assignments = np.asarray(assignments, dtype=np.int64).reshape(-1, len(names))
        chunks = [tuple(assignments[i:i + CHUNK].T) for i in range(0, len(assignments), CHUNK)] if names else [()]
    for coords in chunks:
        env = {v: universe[c] for v, c in zip(names, coords)}
        count = len(coords[0]) if names else 1
        mask = np.ones(count, dtype=bool)
        for lhs, rhs in law.hypotheses:
            l = np.broadcast_to(_eval_pointwise(lhs, env, m), (count, m))
            r = np.broadcast_to(_eval_pointwise(rhs, env, m), (count, m))
            mask &= (l == r).all(axis=1)
        if not mask.any():
            continue
        left = np.broadcast_to(_eval_pointwise(law.conclusion[0], env, m), (count, m))
        right = np.broadcast_to(_eval_pointwise(law.conclusion[1], env, m), (count, m))
        bad = mask & (left != right).any(axis=1)
        if bad.any():
            k = int(np.argmax(bad))
            assignment = {v: int(c[k]) for v, c in zip(names, coords)}
            lab = (lambda i: labels[i]) if labels is not None else str
            return Violation(law.name or law.body(), assignment,
                             tuple(int(x) for x in left[k]), tuple(int(x) for x in right[k]),
                             {v: lab(i) for v, i in assignment.items()},
                             _vec_str(left[k], carriers), _vec_str(right[k], carriers))
    return True


def _vec_str(vec, carriers=None) -> str:
    src, tgt = carriers if carriers else (range(len(vec)), range(max(len(vec), int(max(vec)) + 1)))
    return "{" + ", ".join(f"{src[i]}->{tgt[int(v)]}" for i, v in enumerate(vec) if v != UNDEF) + "}"
