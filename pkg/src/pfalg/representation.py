"""Concrete representations of abstract algebras by partial functions.

For each filter ``F`` of a separating family, the base block is
``(F ∪ {1}) / ε_F`` with the adjoined identity ``1`` in a class of its own.
An element ``a`` acts on a block by ``[x] ↦ [x·a]`` whenever ``x·a ∈ F``
(with ``1·a = a``).  The representation is the disjoint union of the blocks.
Algebras without composition are first given an all-zero composition by
``lift_to_stack``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import FinAlgebra, lift_to_stack
from .errors import (AxiomFailure, InternalContradiction, NotApplicable, ParseError,
                     UnsupportedSignature)
from .filters import FilterFamily, eps_congruence, separating_family
from .pfun import BATCH_OPS, UNDEF, FinSet, PFun, format_pfuns, parse_pfuns
from .signature import CONSTANTS, make_signature, ordered
from .syntax import check_lawset, parse_law

IDENTITY = "*"


@dataclass(frozen=True)
class BasePoint:
    filter_index: int
    members: tuple          # element indices in the ε_F class
    identity: bool = False  # the class of the adjoined identity
    name: str = ""


@dataclass
class Representation:
    host: FinAlgebra            # the algebra actually represented (with composition)
    family: FilterFamily
    base: FinSet
    points: tuple               # BasePoint per base index
    images: np.ndarray          # (host.size, |base|) target indices, -1 undefined
    source: FinAlgebra | None = None   # the algebra before lifting, if lifted
    signature: frozenset = frozenset()

    def image(self, a: int) -> PFun:
        return PFun(self.base, self.base, tuple(int(v) for v in self.images[a]))

    def functions(self) -> dict:
        return {self.host.labels[a]: self.image(a) for a in range(self.host.size)}

    @property
    def lifted(self) -> bool:
        return self.source is not None


def _point_name(i: int, labels) -> str:
    return f"F{i}:[{'|'.join(labels)}]"


def identity_class(alg: FinAlgebra, F) -> list[int]:
    """Members of F related to the adjoined identity.

    Without a domain map the identity sits alone.  With one, ``e∘1`` is
    read as ``D(e)``, so ``y`` joins the identity when ``D(e)·y = D(e)``
    for some ``e`` in F; otherwise ``φ_D(a)`` would move the identity
    point and fail to be an identity on its domain.
    """
    if "dom" not in alg.tables:
        return []
    d = alg.tables["dom"]
    cmp = alg.tables["cmp"]
    projections = {int(d[e]) for e in F.members}
    return [y for y in F.sorted_members if any(cmp[p, y] == p for p in projections)]


def build_representation(alg: FinAlgebra, family: FilterFamily) -> Representation:
    """Build the map a ↦ φ_a over the disjoint union of the filter blocks."""
    if "cmp" not in alg.tables:
        raise NotApplicable("the host needs a composition table; lift it first")
    if family.host is not alg and family.host != alg:
        raise NotApplicable("the family belongs to a different algebra")
    n = alg.size
    cmp = alg.tables["cmp"]
    points: list[BasePoint] = []
    blocks = []  # per filter: (first point, last point + 1, class-of-element array, member mask)
    for i, F in enumerate(family.filters):
        eps = eps_congruence(alg, F)
        offset = len(points)
        cls = np.full(n, -1, dtype=np.int64)
        one = identity_class(alg, F)
        for m in one:
            cls[m] = offset
        points.append(BasePoint(i, tuple(one), True,
                                _point_name(i, [IDENTITY] + sorted(alg.labels[m] for m in one))))
        for blk in eps.blocks:
            if blk[0] not in F or cls[blk[0]] >= 0:
                continue
            for m in blk:
                cls[m] = len(points)
            points.append(BasePoint(i, tuple(blk), False,
                                    _point_name(i, sorted(alg.labels[m] for m in blk))))
        blocks.append((offset, len(points), cls, F.mask()))

    images = np.full((n, len(points)), UNDEF, dtype=np.int64)
    for start, stop, cls, inside in blocks:
        for a in range(n):
            for p in range(start, stop):
                pt = points[p]
                products = [int(cmp[x, a]) for x in pt.members] + ([a] if pt.identity else [])
                targets = {int(cls[y]) if inside[y] else UNDEF for y in products}
                if len(targets) != 1:
                    raise InternalContradiction(
                        f"φ_{alg.labels[a]} is not well defined on {pt.name}",
                        (alg.labels[a], pt.name))
                images[a, p] = targets.pop()
    base = FinSet("X", tuple(pt.name for pt in points)) if points else FinSet("X", ("F:[]",))
    if not points:
        images = np.full((n, 1), UNDEF, dtype=np.int64)
    return Representation(alg, family, base, tuple(points), images, signature=alg.signature)


# -- verification --------------------------------------------------------------

@dataclass
class Check:
    name: str
    ok: bool
    witness: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.ok else 'FAIL'} {self.name}" + (f": {self.witness}" if self.witness else "")


@dataclass
class RepresentationReport:
    checks: list = field(default_factory=list)

    @property
    def all_pass(self) -> bool:
        return all(c.ok for c in self.checks)

    @property
    def failures(self) -> list:
        return [c for c in self.checks if not c.ok]

    def lines(self) -> list[str]:
        return [c.line() for c in self.checks]

    def as_dict(self):
        return [{"check": c.name, "ok": c.ok, "witness": c.witness} for c in self.checks]


def _verified_symbols(alg: FinAlgebra) -> list[str]:
    syms = set(alg.tables) | {"res"}
    return [s for s in ordered(syms) if s not in CONSTANTS]


def check_images(alg: FinAlgebra, images: np.ndarray, symbols=None) -> RepresentationReport:
    """Check that rows of ``images`` form an embedding of ``alg``."""
    n = alg.size
    lab = alg.labels
    report = RepresentationReport()
    _, first, inverse = np.unique(images, axis=0, return_index=True, return_inverse=True)
    inverse = np.asarray(inverse).reshape(-1)
    clash = [a for a in range(n) if first[inverse[a]] != a]
    report.checks.append(Check("injective", not clash,
                               f"{lab[first[inverse[clash[0]]]]} and {lab[clash[0]]} share an image"
                               if clash else ""))
    # s <= t exactly when φ_s ⊆ φ_t
    sub = np.all((images[:, None, :] < 0) | (images[:, None, :] == images[None, :, :]), axis=-1)
    le = alg.op("res") == np.arange(n)[:, None]
    bad = np.argwhere(sub != le)
    report.checks.append(Check("order", not len(bad),
                               f"{lab[bad[0][0]]} <= {lab[bad[0][1]]} is {bool(le[tuple(bad[0])])} "
                               f"but inclusion is {bool(sub[tuple(bad[0])])}" if len(bad) else ""))
    for sym in symbols if symbols is not None else _verified_symbols(alg):
        table = alg.op(sym)
        if sym == "dom":
            expect = BATCH_OPS["dom"](images)
            got = images[table]
            bad = np.argwhere(np.any(expect != got, axis=-1))
            wit = f"at {lab[bad[0][0]]}" if len(bad) else ""
        elif sym in BATCH_OPS and table.ndim == 2:
            expect = BATCH_OPS[sym](images[:, None, :], images[None, :, :])
            got = images[table]
            bad = np.argwhere(np.any(expect != got, axis=-1))
            wit = f"at ({lab[bad[0][0]]}, {lab[bad[0][1]]})" if len(bad) else ""
        else:
            raise UnsupportedSignature(f"cannot verify {sym!r}")
        report.checks.append(Check(sym, not len(bad), wit))
    if alg.zero is not None:
        empty = bool(np.all(images[alg.zero] == UNDEF))
        report.checks.append(Check("zero", empty, "" if empty else f"{lab[alg.zero]} has a nonempty image"))
    return report


def verify_representation(alg: FinAlgebra, rep) -> RepresentationReport:
    """Injectivity, order reflection, every operation, and zero ↦ empty."""
    if not isinstance(rep, Representation):
        raise NotApplicable("not a representation built by build_representation")
    if alg is not rep.host and alg is not rep.source and alg != rep.host and alg != rep.source:
        raise NotApplicable("representation was built over a different algebra")
    return check_images(rep.host, rep.images)


# -- choosing the filter family ------------------------------------------------

_COMPOSITION_FREE = {
    frozenset(): ("rnb", "stack1", "all"),
    frozenset({"cap"}): ("rnb-cap", "stack1-cap", "all"),
    frozenset({"cap", "ovr"}): ("rnb-cap-over", "stack1-cap-over", "prime_override"),
    frozenset({"cap", "upd"}): ("rnb-cap-update", "stack1-cap-update", "weakly_prime"),
}
_MINUS_SUFFIX = {
    frozenset(): "", frozenset({"cap"}): "-cap",
    frozenset({"ovr"}): "-override", frozenset({"ovr", "cap"}): "-override-cap",
    frozenset({"upd"}): "-update", frozenset({"upd", "cap"}): "-update-cap",
}
DOMAIN_LINK = "res(x,y) = cmp(dom(x),y)"

# Every signature the representation covers: each operation set without
# composition, with composition, and with composition and D.
_BASE_ROWS = ("res", "res,cap", "res,cap,ovr", "res,cap,upd", "mns", "mns,ovr", "mns,upd",
              "mns,cap", "mns,ovr,cap", "mns,upd,cap")
SUPPORTED_ROWS = (_BASE_ROWS + tuple("cmp," + r for r in _BASE_ROWS)
                  + tuple(",".join(["cmp", "dom"] + [o for o in r.split(",") if o != "res"])
                          for r in _BASE_ROWS))


def axioms_for(sig) -> tuple[list, str, str]:
    """(laws, kind, description) for a supported signature.

    Composition switches to the 1-stack version of each axiom set; the
    domain map adds the left restriction semigroup laws with restriction
    read as ``D(s)t``.
    """
    from .catalog import load_lawset

    sig = make_signature(sig) if isinstance(sig, str) else frozenset(sig)
    if sig & {"K", "dif", "one"}:
        raise UnsupportedSignature(f"no representation for {', '.join(ordered(sig & {'K', 'dif', 'one'}))}")
    has_dom = "dom" in sig
    comp = "cmp" in sig or has_dom
    rest = sig - {"cmp", "dom", "res", "zero"}
    if "mns" in rest:
        other = rest - {"mns"}
        if other not in _MINUS_SUFFIX:
            raise UnsupportedSignature(f"no axiom set for minus with {ordered(other)}")
        head = "minus-semigroup" if comp else ("minus-algebra" if not other else "minus")
        name, kind = head + _MINUS_SUFFIX[other], "prime_minus"
    elif rest in _COMPOSITION_FREE:
        free, stack, kind = _COMPOSITION_FREE[rest]
        name = stack if comp else free
    else:
        raise UnsupportedSignature(
            f"signature {', '.join(ordered(sig))} is not covered by the representation")
    laws = list(load_lawset(name).sound_laws)
    label = name
    if has_dom:
        seen = {l.body() for l in laws}
        laws += [l for l in load_lawset("lrs").sound_laws + load_lawset("cmp-assoc").sound_laws
                 if l.body() not in seen]
        laws.append(parse_law(DOMAIN_LINK, name="domain-restriction"))
        label = f"lrs + {name}"
    return laws, kind, label


def choose_family(alg: FinAlgebra, sig) -> FilterFamily:
    """Check the axioms for ``sig`` on ``alg`` and return the matching family."""
    sig = make_signature(sig) if isinstance(sig, str) else frozenset(sig)
    if "cmp" in sig and "cmp" not in alg.tables and "dom" not in sig:
        sig = sig - {"cmp"}  # composition will come from the zero lift
    laws, kind, _ = axioms_for(sig)
    report = check_lawset(alg, laws)
    if not report.all_pass:
        raise AxiomFailure(report.failures[0][1])
    return separating_family(alg, kind)


# -- orchestration -------------------------------------------------------------

def represent(alg: FinAlgebra, sig=None) -> tuple[Representation, RepresentationReport]:
    """Restrict to ``sig``, lift if composition is missing, build and verify."""
    sig = alg.signature if sig is None else (make_signature(sig) if isinstance(sig, str) else frozenset(sig))
    ops = {s for s in sig if s not in CONSTANTS}
    if not ops & {"mns", "dom"}:
        ops.add("res")
    if "cmp" in ops and "cmp" not in alg.tables and "dom" not in ops:
        ops.discard("cmp")
    algebra = FinAlgebra(alg.size, {s: alg.op(s) for s in ordered(ops)}, alg.labels, alg.zero)
    source = None
    if "cmp" not in algebra.tables and "dom" not in algebra.tables:
        choose_family(algebra, sig)
        source = algebra
        host = lift_to_stack(algebra)
        sig = sig | {"cmp"}
    else:
        host = algebra
    family = choose_family(host, sig)
    rep = build_representation(host, family)
    rep.source = source
    rep.signature = frozenset(sig)
    return rep, verify_representation(host, rep)


# -- export ----------------------------------------------------------------------

def export_representation(rep: Representation) -> str:
    """The images in pfun text, preceded by a ``#`` manifest of the base."""
    host = rep.host
    lines = [f"# representation of {host.size} elements, family {rep.family.kind}",
             f"# signature: {','.join(s for s in ordered(rep.signature) if s not in CONSTANTS)}"]
    if rep.lifted:
        lines.append(f"# lifted: adjoined composition, zero {host.labels[host.zero]}")
    for i, F in enumerate(rep.family.filters):
        lines.append(f"# filter F{i}: {F}")
    for pt in rep.points:
        what = " ".join((["identity"] if pt.identity else ["class"]) + [host.labels[m] for m in pt.members])
        lines.append(f"# point {pt.name}: {what}")
    return "\n".join(lines) + "\n" + format_pfuns(rep.functions())


def verify_export(text: str, rep: Representation) -> RepresentationReport:
    """Re-read exported text, check it matches ``rep`` byte for byte, and re-verify it."""
    report = RepresentationReport()
    same = text == export_representation(rep)
    report.checks.append(Check("bit-exact", same, "" if same else "export differs from a fresh build"))
    try:
        funcs = parse_pfuns(text)
    except ParseError as exc:
        report.checks.append(Check("parse", False, str(exc)))
        return report
    labels = list(funcs)
    if labels != list(rep.host.labels):
        report.checks.append(Check("labels", False, "exported labels differ from the algebra"))
        return report
    images = np.array([funcs[l].values for l in labels], dtype=np.int64)
    points = next(iter(funcs.values())).source.labels if funcs else ()
    report.checks.append(Check("base", tuple(points) == rep.base.labels,
                               "" if tuple(points) == rep.base.labels else "base points differ"))
    report.checks.extend(Check("export " + c.name, c.ok, c.witness)
                         for c in check_images(rep.host, images).checks)
    return report
