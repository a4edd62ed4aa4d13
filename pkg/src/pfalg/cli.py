"""Command-line front end.

Exit codes: 0 when every checked property holds, 1 when one fails (the
witness is printed), 2 for usage or input errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import catalog
from .algebra import format_algebra, parse_algebra
from .catalog import (DEFAULT_UNIVERSES, UniverseSpec, example_names, lawset_names, load_example,
                      load_lawset, resolve_lawset, soundness_gate)
from .errors import PfalgError, UnknownName
from .pfun import format_pfuns, generate_subalgebra, parse_pfuns
from .representation import export_representation, represent, verify_export
from .search import irredundance_certificates, search_model
from .signature import format_signature, make_signature
from .syntax import check_lawset, parse_law

OK, FAILED, USAGE = 0, 1, 2


class _Usage(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _Usage(f"{self.prog}: error: {message}")


# -- input helpers ---------------------------------------------------------------

def _laws(spec: str):
    """A catalog law set, a law file, or a single law in text form."""
    try:
        return resolve_lawset(spec)
    except UnknownName:
        if "=" in spec:
            law = parse_law(spec, name="law")
            return catalog.LawSetEntry("law", frozenset(law.symbols), [law])
        raise


def _algebra(spec: str):
    """An algebra file, or an example name optionally followed by ``/extra``."""
    name, _, extra = spec.partition("/")
    if name in example_names():
        entry = load_example(name)
        if not extra:
            return entry.algebra
        if extra not in entry.extras or not hasattr(entry.extras[extra], "tables"):
            raise UnknownName(f"example {name} has no algebra {extra!r}")
        return entry.extras[extra]
    path = Path(spec)
    if not path.is_file():
        raise UnknownName(f"no algebra file or example named {spec!r}")
    return parse_algebra(path.read_text(encoding="utf-8"))


def _functions(spec: str) -> dict:
    if spec in example_names():
        return catalog.example_functions(spec)
    path = Path(spec)
    if not path.is_file():
        raise UnknownName(f"no function file or example named {spec!r}")
    return parse_pfuns(path.read_text(encoding="utf-8"))


def _universe(text: str, args) -> UniverseSpec:
    mode = "sampled" if args.sampled else "exhaustive"
    try:
        if "x" in text:
            a, b = (int(v) for v in text.split("x"))
            spec = UniverseSpec(a, b, None, mode, args.count, args.seed)
        else:
            spec = UniverseSpec(int(text), None, True, mode, args.count, args.seed)
    except ValueError:
        raise _Usage(f"bad universe {text!r}; expected N or NxM") from None
    if spec.size < 1 or (spec.target_size is not None and spec.target_size < 1):
        raise _Usage("universe carriers must be non-empty")
    return spec


# -- commands --------------------------------------------------------------------

def cmd_check(args):
    entry = _laws(args.laws)
    laws = entry.laws
    if args.algebra:
        alg = _algebra(args.algebra)
        if args.reduct:
            alg = alg.reduct(make_signature(args.reduct))
        report = check_lawset(alg, laws)
        data = {"command": "check", "laws": entry.name, "algebra": args.algebra,
                "size": alg.size, "results": report.as_dict(), "all_pass": report.all_pass}
        lines = [f"check {entry.name} on {args.algebra} ({alg.size} elements)"] + report.lines()
        lines.append("all laws hold" if report.all_pass else f"{len(report.failures)} law(s) fail")
        return (OK if report.all_pass else FAILED), lines, data
    universes = (_universe(args.universe, args),) if args.universe else DEFAULT_UNIVERSES
    verdicts = soundness_gate(laws, universes)
    expected = set(entry.expected_quarantine)
    lines, results, unexpected = [f"soundness gate for {entry.name}"], [], 0
    for law in laws:
        v = verdicts[law.name]
        if v is True:
            lines.append(f"PASS {law.name}: {law.body()}")
        else:
            tag = "QUARANTINED" if law.name in expected else "FAIL"
            unexpected += law.name not in expected
            lines.append(f"{tag} {v}")
        results.append({"law": law.name, "text": law.body(), "holds": v is True,
                        "expected_failure": law.name in expected,
                        "violation": None if v is True else v.as_dict()})
    lines.append("sound" if not unexpected else f"{unexpected} unexpected failure(s)")
    data = {"command": "check", "laws": entry.name,
            "universes": [u.__dict__ for u in universes], "results": results,
            "unexpected_failures": unexpected}
    return (OK if not unexpected else FAILED), lines, data


def cmd_closure(args):
    funcs = _functions(args.functions)
    sig = make_signature(args.sig)
    alg, elements = generate_subalgebra(funcs, sig, cap=args.cap)
    named = {alg.labels[i]: f for i, f in enumerate(elements)}
    text = format_algebra(alg, [f"closure of {args.functions} under {format_signature(sig)}"])
    lines = text.rstrip("\n").split("\n") + ["# elements"] + format_pfuns(named).rstrip("\n").split("\n")
    data = {"command": "closure", "signature": format_signature(sig), "size": alg.size,
            "labels": list(alg.labels), "algebra": text, "functions": format_pfuns(named)}
    return OK, lines, data


def cmd_represent(args):
    alg = _algebra(args.algebra)
    rep, report = represent(alg, args.sig)
    text = export_representation(rep)
    checks = list(report.checks)
    if args.export:
        Path(args.export).write_text(text, encoding="utf-8")
    if args.verify is not None:
        source = text if args.verify == "-" else Path(args.verify).read_text(encoding="utf-8")
        checks += [c for c in verify_export(source, rep).checks]
    ok = all(c.ok for c in checks)
    lines = [f"family {rep.family.kind}: {len(rep.family)} filter(s), {rep.base.size} base point(s)"]
    lines += rep.family.lines()
    lines += text.rstrip("\n").split("\n")
    lines += [c.line() for c in checks]
    lines.append("embedding verified" if ok else "representation check failed")
    data = {"command": "represent", "algebra": args.algebra, "kind": rep.family.kind,
            "filters": [str(F) for F in rep.family], "base": list(rep.base.labels),
            "export": text, "checks": [{"check": c.name, "ok": c.ok, "witness": c.witness} for c in checks],
            "ok": ok}
    return (OK if ok else FAILED), lines, data


def _negated(entry, spec):
    for law in entry.laws:
        if law.name == spec or law.name.endswith("." + spec):
            return law, [l for l in entry.laws if l is not law]
    return parse_law(spec, name="negated"), list(entry.laws)


def cmd_search(args):
    if args.size < 1:
        raise _Usage("--size must be at least 1")
    entry = _laws(args.laws)
    negated, laws = (None, list(entry.laws)) if args.negate is None else _negated(entry, args.negate)
    sig = make_signature(args.sig) if args.sig else (entry.signature | {s for l in laws for s in l.symbols})
    if negated is not None:
        sig = sig | negated.symbols
    res = search_model(sig, laws, args.size, negated, timeout=args.timeout, lnh=args.lnh)
    lines = [f"search {entry.name} size {args.size}"
             + (f" negating {negated.name}: {negated.body()}" if negated else ""),
             f"outcome: {res.outcome} after {res.nodes} node(s)"]
    if res.model is not None:
        header = [f"model of {entry.name}"]
        if res.violation is not None:
            header.append(f"violation: {res.violation}")
        lines += format_algebra(res.model, header).rstrip("\n").split("\n")
        if not check_lawset(res.model, laws).all_pass:
            lines.append("re-verification FAILED")
            return FAILED, lines, {"command": "search", **res.as_dict(), "verified": False}
        lines.append("re-verified")
    data = {"command": "search", "laws": entry.name, **res.as_dict()}
    return (FAILED if res.outcome == "timeout" else OK), lines, data


def cmd_irredundance(args):
    if args.max_size < 1:
        raise _Usage("--max-size must be at least 1")
    entry = _laws(args.laws)
    laws = entry.sound_laws if entry.verdicts else entry.laws
    sig = entry.signature | {s for l in laws for s in l.symbols}
    certs = irredundance_certificates(laws, args.max_size, sig, timeout=args.timeout, lnh=args.lnh)
    lines = [f"irredundance of {entry.name} up to size {args.max_size}"]
    for c in certs:
        lines.append(("PASS " if c.outcome == "found" and c.verified else "NONE ") + c.line())
    if args.write_dir:
        out = Path(args.write_dir)
        out.mkdir(parents=True, exist_ok=True)
        for c in certs:
            if c.model is not None:
                (out / f"{c.law.name}.alg").write_text(c.serialise(), encoding="utf-8")
    ok = all(c.outcome == "found" and c.verified for c in certs)
    lines.append("irredundant (all certificates verified)" if ok else "some laws lack a certificate")
    data = {"command": "irredundance", "laws": entry.name, "max_size": args.max_size,
            "certificates": [c.as_dict() for c in certs], "all_found": ok}
    return (OK if ok else FAILED), lines, data


def cmd_reproduce(args):
    names = example_names() if args.name == "all" else [args.name]
    lines, out, ok = [], [], True
    for name in names:
        entry = load_example(name, strict=False)
        lines.append(f"== {name}: {entry.description}")
        lines += [f.line() for f in entry.facts]
        ok &= entry.all_pass
        out.append({"name": name, "description": entry.description, "size": entry.algebra.size,
                    "facts": [{"name": f.name, "ok": bool(f.ok), "detail": f.detail} for f in entry.facts],
                    "all_pass": entry.all_pass})
    lines.append("all expected facts confirmed" if ok else "some expected facts FAILED")
    return (OK if ok else FAILED), lines, {"command": "reproduce", "examples": out, "all_pass": ok}


def cmd_catalog(args):
    if getattr(args, "action", "list") == "show":
        entry = load_lawset(args.name)
        lines = [f"{entry.name}: {entry.description}", f"signature: {format_signature(entry.signature)}"]
        for law in entry.laws:
            v = entry.verdicts.get(law.name, True)
            lines.append(f"{'sound' if v is True else 'quarantined'} {law.name}: {law.body()}"
                         + ("" if v is True else f"  [{v}]"))
        data = {"command": "catalog show", "name": entry.name, "description": entry.description,
                "signature": format_signature(entry.signature),
                "laws": [{"name": l.name, "text": l.body(), "sound": entry.verdicts.get(l.name, True) is True}
                         for l in entry.laws]}
        return OK, lines, data
    lines, sets, bad = ["law sets:"], [], 0
    for name in lawset_names():
        entry = load_lawset(name)
        q = sorted(entry.quarantined)
        unexpected = [n for n in q if n not in entry.expected_quarantine]
        bad += len(unexpected)
        status = entry.status + (f" ({', '.join(q)})" if q else "")
        lines.append(f"  {name} [{format_signature(entry.signature)}] {len(entry.laws)} law(s): {status}")
        sets.append({"name": name, "signature": format_signature(entry.signature),
                     "laws": len(entry.laws), "status": entry.status, "quarantined": q,
                     "description": entry.description})
    lines.append("examples:")
    lines += [f"  {n}" for n in example_names()]
    data = {"command": "catalog list", "lawsets": sets, "examples": example_names()}
    return (OK if not bad else FAILED), lines, data


# -- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    p = _Parser(prog="pfalg", description="Algebras of partial functions.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("check", parents=[common], help="check laws on an algebra or on concrete functions")
    c.add_argument("--laws", required=True, help="catalog name, law file, or a single law")
    c.add_argument("--algebra", help="algebra file or example[/extra]")
    c.add_argument("--reduct", help="restrict the algebra to these symbols first")
    c.add_argument("--universe", help="N (endo) or NxM carriers for the soundness gate")
    mode = c.add_mutually_exclusive_group()
    mode.add_argument("--exhaustive", action="store_true", help="check every assignment (default)")
    mode.add_argument("--sampled", action="store_true", help="check random assignments")
    c.add_argument("--count", type=int, default=10000)
    c.add_argument("--seed", type=int, default=0)
    c.set_defaults(func=cmd_check)

    c = sub.add_parser("closure", parents=[common], help="generate the subalgebra of some functions")
    c.add_argument("--functions", required=True, help="pfun file or example name")
    c.add_argument("--sig", required=True)
    c.add_argument("--cap", type=int, default=4096)
    c.set_defaults(func=cmd_closure)

    c = sub.add_parser("represent", parents=[common], help="represent an algebra by partial functions")
    c.add_argument("--algebra", required=True)
    c.add_argument("--sig", required=True)
    c.add_argument("--export", help="write the representation here")
    c.add_argument("--verify", nargs="?", const="-", help="re-check an export (default: a fresh one)")
    c.set_defaults(func=cmd_represent)

    c = sub.add_parser("search", parents=[common], help="find a finite model")
    c.add_argument("--laws", required=True)
    c.add_argument("--size", type=int, required=True)
    c.add_argument("--negate", help="law text, or the name of a law in --laws to drop and negate")
    c.add_argument("--sig")
    c.add_argument("--timeout", type=float)
    c.add_argument("--lnh", action="store_true", help="least-number heuristic")
    c.set_defaults(func=cmd_search)

    c = sub.add_parser("irredundance", parents=[common], help="counter-models for each law of a set")
    c.add_argument("--laws", required=True)
    c.add_argument("--max-size", type=int, required=True)
    c.add_argument("--timeout", type=float)
    c.add_argument("--lnh", action="store_true")
    c.add_argument("--write-dir", help="save certificates in algebra format")
    c.set_defaults(func=cmd_irredundance)

    c = sub.add_parser("reproduce", parents=[common], help="re-verify a worked example")
    c.add_argument("name", choices=example_names() + ["all"])
    c.set_defaults(func=cmd_reproduce)

    c = sub.add_parser("catalog", parents=[common], help="list or show catalog entries")
    csub = c.add_subparsers(dest="action", required=True, parser_class=_Parser)
    csub.add_parser("list", parents=[common])
    show = csub.add_parser("show", parents=[common])
    show.add_argument("name")
    c.set_defaults(func=cmd_catalog)

    c = sub.add_parser("catalog-list", parents=[common], help="same as 'catalog list'")
    c.set_defaults(func=cmd_catalog, action="list")
    return p


def run(argv=None) -> tuple[int, str]:
    """Run a command line; returns (exit code, output text)."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        code, lines, data = args.func(args)
    except _Usage as exc:
        return USAGE, str(exc) + "\n"
    except SystemExit as exc:  # --help
        return int(exc.code or 0), ""
    except PfalgError as exc:
        return USAGE, f"error: {exc}\n"
    except OSError as exc:
        return USAGE, f"error: {exc}\n"
    if args.json:
        return code, json.dumps({"exit": code, **data}, indent=2, ensure_ascii=False) + "\n"
    return code, "\n".join(lines) + "\n"


def main(argv=None) -> int:
    code, text = run(argv)
    stream = sys.stderr if code == USAGE else sys.stdout
    stream.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
