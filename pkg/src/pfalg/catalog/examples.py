"""The three worked examples and the facts each must reproduce."""

from __future__ import annotations

import numpy as np

from ..algebra import (adjoin_meet, generated_congruence, is_congruence, lift_to_stack,
                       natural_le, quotient)
from ..errors import PfalgError
from ..pfun import generate_subalgebra
from ..signature import make_signature
from ..syntax import check_lawset, eval_term, holds_at, law_holds, parse_term
from . import ExampleEntry, Fact, example, example_functions, load_lawset, read_data


def _idx(alg, *labels):
    return [alg.index(l) for l in labels]


def _violation_fact(name, alg, law, expected: dict):
    """The law fails at ``expected``; the detail names the first failing assignment."""
    where = {v: alg.index(lab) for v, lab in expected.items()}
    fails_there = not holds_at(alg, law, where)
    first = law_holds(alg, law)
    detail = f"fails at ({', '.join(f'{k}={v}' for k, v in expected.items())})"
    if first is not True:
        detail += f"; first violation {first}"
    return Fact(name, fails_there and first is not True, detail)


def parse_printed_tables(text: str):
    """Label-valued tables: ``labels:`` header then ``table sym:`` blocks."""
    labels, tables, current = None, {}, None
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("labels:"):
            labels = line.split(":", 1)[1].split()
        elif line.startswith("table"):
            current = line[len("table"):].strip().rstrip(":").strip()
            tables[current] = []
        else:
            tables[current].append(line.split())
    return labels, tables


def printed_table_diff(alg, text: str) -> list[tuple]:
    """Cells where a printed table disagrees with ``alg``: (sym, row, col, printed, computed)."""
    labels, tables = parse_printed_tables(text)
    out = []
    for sym, rows in tables.items():
        t = alg.tables[sym]
        for i, row in enumerate(rows):
            for j, printed in enumerate(row):
                computed = alg.labels[t[alg.index(labels[i]), alg.index(labels[j])]]
                if printed != computed:
                    out.append((sym, labels[i], labels[j], printed, computed))
    return out


@example("properqe")
def properqe() -> ExampleEntry:
    funcs = example_functions("properqe")
    sig = make_signature("mns")
    alg, elements = generate_subalgebra(funcs, sig)
    facts = [Fact("closure under minus has 7 elements", alg.size == 7, f"labels {' '.join(alg.labels)}"),
             Fact("closure adds only the empty function",
                  alg.labels[6:] == ("0",) and elements[6].domain == frozenset())]
    a, b, c, d, e, f = _idx(alg, *"abcdef")
    res = alg.op("res")
    mns = alg.tables["mns"]
    facts.append(Fact("c∘a = f and c∘b = e (recomputed; the printed names are swapped)",
                      res[c, a] == f and res[c, b] == e,
                      f"c∘a = {alg.labels[res[c, a]]}, c∘b = {alg.labels[res[c, b]]}"))
    facts.append(Fact("a - c = d", mns[a, c] == d))
    facts.append(Fact("d∘a = d∘b = d", res[d, a] == d and res[d, b] == d))
    facts.append(Fact("satisfies the minus-algebra laws",
                      check_lawset(alg, load_lawset("minus-algebra").laws).all_pass))
    theta = generated_congruence(alg, [(e, f)])
    facts.append(Fact("θ = Cg(e,f) has the single nontrivial block {e,f}",
                      theta.nontrivial_blocks == ((e, f),)))
    facts.append(Fact("θ is a congruence for minus", is_congruence(alg, theta)))
    lifted = lift_to_stack(alg)
    facts.append(Fact("with st = 0, θ stays a congruence", is_congruence(lifted, theta)))
    q = quotient(alg, theta)
    law = load_lawset("leftunionminus").law("leftunionminus")
    facts.append(_violation_fact("quotient violates leftunionminus", q, law,
                                 {"x": "a", "y": "d", "s": "a", "t": "b"}))
    # The printed witness (c,d,a,b) puts x-y = a-d = c in the x slot; there
    # the conclusion c∘a = f θ e = c∘b holds.
    printed = dict(zip("xyst", _idx(q, "c", "d", "a", "b")))
    facts.append(Fact("printed assignment (c,d,a,b) satisfies leftunionminus in the quotient",
                      holds_at(q, law, printed), "the violation uses x = a, where a - d = c"))
    return ExampleEntry("properqe", "minus-algebra with a non-minus-algebra quotient",
                        funcs, sig, alg, elements, facts,
                        {"theta": theta, "quotient": q, "law": law})


@example("droi")
def droi() -> ExampleEntry:
    funcs = example_functions("droi")
    sig = make_signature("res,ovr")
    alg, elements = generate_subalgebra(funcs, sig)
    facts = [Fact("closed under restriction and override (5 elements)",
                  alg.size == 5 and alg.labels == tuple(funcs))]
    facts.append(Fact("satisfies the skew lattice laws",
                      check_lawset(alg, load_lawset("skew-rhsd").laws).all_pass))
    try:
        met = adjoin_meet(alg)
        facts.append(Fact("every pair has a meet under the natural order", True))
    except PfalgError as exc:
        return ExampleEntry("droi", "", funcs, sig, alg, elements,
                            facts + [Fact("every pair has a meet", False, str(exc))])
    env = dict(zip(met.labels, range(met.size)))
    lhs = eval_term(met, parse_term("ovr(cap(ovr(x,y),y),x)"), {"x": env["e"], "y": env["i"]})
    rhs = eval_term(met, parse_term("ovr(x,y)"), {"x": env["e"], "y": env["i"]})
    facts.append(Fact("((e⊔i)∩i)⊔e = e", met.labels[lhs] == "e", f"got {met.labels[lhs]}"))
    facts.append(Fact("e⊔i = 1", met.labels[rhs] == "1", f"got {met.labels[rhs]}"))
    law = load_lawset("cap-over-core").laws[1]
    facts.append(_violation_fact("absorption law fails", met, law, {"s": "e", "t": "i"}))
    return ExampleEntry("droi", "meets exist but override is not captured", funcs, sig,
                        alg, elements, facts, {"with_meet": met, "law": law})


PRINTED_CELLS = {("res", "d", "1"), ("upd", "d", "1"), ("upd", "d", "c")}


@example("updatecapqv")
def updatecapqv() -> ExampleEntry:
    funcs = example_functions("updatecapqv")
    sig = make_signature("cmp,res,upd,cap")
    alg, elements = generate_subalgebra(funcs, sig)
    facts = [Fact("closure has the 6 given elements", alg.size == 6 and alg.labels == tuple(funcs))]
    facts.append(Fact("all composites are 0", bool(np.all(alg.tables["cmp"] == alg.zero))))
    diff = printed_table_diff(alg, read_data("updatecapqv.printed"))
    cells = {(s, r, c) for s, r, c, _, _ in diff}
    facts.append(Fact("printed tables differ only in the 'a' cells, which are 1",
                      cells == PRINTED_CELLS and all(p == "a" and v == "1" for *_, p, v in diff),
                      "; ".join(f"{s}[{r}][{c}] printed {p} computed {v}" for s, r, c, p, v in diff)))
    one, b, c, d, e, zero = _idx(alg, "1", "b", "c", "d", "e", "0")
    facts.append(Fact("e ≤ 1 and not 1 ≤ e", natural_le(alg, e, one) and not natural_le(alg, one, e)))
    facts.append(Fact("satisfies the 1-stack with intersection and update laws",
                      check_lawset(alg, load_lawset("stack1-cap-update").laws).all_pass))
    theta = generated_congruence(alg, [(e, zero)])
    facts.append(Fact("θ = Cg(e,0) has the single nontrivial block {e,0}",
                      theta.nontrivial_blocks == ((e, zero),)))
    for sym in ("res", "upd", "cap", "cmp"):
        facts.append(Fact(f"θ is a congruence for {sym}", is_congruence(alg, theta, [sym])))
    q = quotient(alg, theta)
    law = load_lawset("cap-update-core").law("updquasi")
    facts.append(_violation_fact("quotient violates the update quasiequation", q, law,
                                 {"x": "1", "y": "b", "a": "1", "b": "c"}))
    return ExampleEntry("updatecapqv", "intersection and update: properly quasiequational",
                        funcs, sig, alg, elements, facts,
                        {"theta": theta, "quotient": q, "law": law, "diff": diff})
