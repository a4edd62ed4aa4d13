import itertools

import pytest
from hypothesis import given, settings, strategies as st

from pfalg.catalog import example_functions
from pfalg.errors import CarrierMismatch, ParseError, SizeCapExceeded
from pfalg.pfun import (FinSet, PFun, all_pfuns, apply_op, comparison, format_pfuns,
                        generate_subalgebra, parse_pfuns)
from pfalg.signature import make_signature

X = FinSet.of("X", "pq")
Y = FinSet.of("Y", "uv")
T3 = FinSet.of("T", "abc")


# Set-theoretic oracle: a function is its set of (point, value) pairs.

def graph(f):
    return dict(f.pairs())


def o_res(f, g):
    return {p: q for p, q in g.items() if p in f}


def o_mns(f, g):
    return {p: q for p, q in f.items() if p not in g}


def o_ovr(f, g):
    return {**g, **f}


def o_upd(f, g):
    return {p: g.get(p, q) for p, q in f.items()}


def o_cap(f, g):
    return {p: q for p, q in f.items() if g.get(p) == q}


def o_dif(f, g):
    return {p: q for p, q in f.items() if g.get(p) != q}


def o_cmp(f, g):
    return {p: g[q] for p, q in f.items() if q in g}


ORACLE = {"res": o_res, "mns": o_mns, "ovr": o_ovr, "upd": o_upd,
          "cap": o_cap, "dif": o_dif}


@pytest.mark.parametrize("sym", sorted(ORACLE))
def test_binary_ops_match_oracle_on_all_pairs(sym):
    for f, g in itertools.product(all_pfuns(X, Y), repeat=2):
        assert graph(apply_op(sym, [f, g])) == ORACLE[sym](graph(f), graph(g))


def test_compose_and_domain_match_oracle():
    funcs = all_pfuns(T3, T3)
    assert len(funcs) == 64
    for f, g in itertools.product(funcs, repeat=2):
        assert graph(f.compose(g)) == o_cmp(graph(f), graph(g))
    for f in funcs:
        assert graph(f.domain_map()) == {p: p for p in graph(f)}


def test_comparison_matches_definition():
    funcs = all_pfuns(X, Y)
    for f, g, h, k in itertools.product(funcs, repeat=4):
        out = graph(comparison(f, g, h, k))
        gf, gg = graph(f), graph(g)
        want = {}
        for p in range(X.size):
            pick = h if gf.get(p) == gg.get(p) else k
            if p in graph(pick):
                want[p] = graph(pick)[p]
        assert out == want


def test_all_pfuns_counts():
    assert len(all_pfuns(X, Y)) == 9
    assert len(all_pfuns(T3, T3)) == 64
    assert all_pfuns(X, Y)[0] == PFun.empty(X, Y)


def test_worked_values():
    pq = example_functions("properqe")
    a, b, c, d = pq["a"], pq["b"], pq["c"], pq["d"]
    assert c.restrict(a).graph == {"2": "2", "3": "2"}
    assert a.minus(c) == d
    assert a.intersect(b) == d
    assert a.difference(b).graph == {"2": "2", "3": "2"}
    assert a.compose(a) == a
    for f in pq.values():
        assert f.minus(f) == PFun.empty(f.source, f.target)

    dr = example_functions("droi")
    e, i, one = dr["e"], dr["i"], dr["1"]
    assert e.override(i) == one
    assert i.domain_map().compose(i) == i
    # the comparison picks e wherever e and i disagree, including where e is undefined
    assert comparison(e, i, i, e) == e

    uq = example_functions("updatecapqv")
    assert uq["b"].restrict(uq["1"]) == uq["c"]
    assert uq["1"].update(uq["b"]) == uq["d"]
    assert uq["e"].update(uq["b"]) == uq["e"]
    assert uq["1"].intersect(uq["d"]) == uq["e"]
    zero = uq["0"]
    assert comparison(uq["b"], zero, zero, uq["1"]) == uq["c"]


def test_empty_function_edge_cases():
    f = PFun.from_graph(X, Y, {"p": "v"})
    z = PFun.empty(X, Y)
    assert z.restrict(f) == z
    assert PFun.empty(X, X).domain_map() == PFun.empty(X, X)
    assert PFun.from_graph(X, X, {"p": "q"}).domain_map().graph == {"p": "p"}


def test_carrier_mismatch():
    f = PFun.empty(X, Y)
    g = PFun.empty(X, X)
    with pytest.raises(CarrierMismatch):
        f.restrict(g)
    with pytest.raises(CarrierMismatch):
        f.domain_map()
    with pytest.raises(CarrierMismatch):
        generate_subalgebra([f, g], make_signature("res"))


def test_compose_disjoint_carriers_is_empty():
    uq = example_functions("updatecapqv")
    for f, g in itertools.product(uq.values(), repeat=2):
        assert f.compose(g) == PFun.empty(f.source, f.target)


def test_closure_examples():
    alg, elements = generate_subalgebra(example_functions("properqe"), make_signature("mns"))
    assert alg.size == 7
    assert alg.labels == tuple("abcdef") + ("0",)

    dr = example_functions("droi")
    alg, _ = generate_subalgebra(dr, make_signature("res,ovr"))
    assert alg.labels == tuple(dr)

    idem = PFun.from_graph(T3, T3, {"a": "a", "b": "a"})
    alg, _ = generate_subalgebra([idem], make_signature("cmp"))
    assert alg.size == 1


def test_closure_is_fixpoint_and_tables_match():
    sig = make_signature("res,mns,ovr,upd,cap")
    gens = [PFun.from_graph(X, Y, {"p": "u"}), PFun.from_graph(X, Y, {"q": "v", "p": "v"})]
    alg, elements = generate_subalgebra(gens, sig)
    members = set(elements)
    for sym, table in alg.tables.items():
        for i, j in itertools.product(range(alg.size), repeat=2):
            value = apply_op(sym, [elements[i], elements[j]])
            assert value in members
            assert elements[table[i, j]] == value


def test_closure_cap():
    gens = all_pfuns(T3, T3)[:10]
    with pytest.raises(SizeCapExceeded):
        generate_subalgebra(gens, make_signature("cmp,ovr"), cap=5)


def test_text_round_trip():
    funcs = example_functions("properqe")
    text = format_pfuns(funcs)
    assert parse_pfuns(text) == funcs
    assert format_pfuns(parse_pfuns(text)) == text
    empty = {"z": PFun.empty(X, Y)}
    assert "z: -" in format_pfuns(empty)
    assert parse_pfuns(format_pfuns(empty))["z"].graph == {}


def test_parse_errors():
    with pytest.raises(ParseError):
        parse_pfuns("f: p->u\n")
    with pytest.raises(ParseError):
        parse_pfuns("source: p q\ntarget: u v\nno colon here\n")


pfun_xy = st.tuples(*[st.integers(-1, 1)] * 2).map(lambda v: PFun(X, Y, v))
pfun_t = st.tuples(*[st.integers(-1, 2)] * 3).map(lambda v: PFun(T3, T3, v))


@settings(max_examples=200, deadline=None)
@given(pfun_t, pfun_t, pfun_t)
def test_compose_associative(f, g, h):
    assert f.compose(g).compose(h) == f.compose(g.compose(h))


@settings(max_examples=200, deadline=None)
@given(pfun_t, pfun_t, pfun_t)
def test_interdefinability_pointwise(f, g, h):
    assert f.restrict(g) == g.minus(g.minus(f))
    assert f.update(g) == f.restrict(g.override(f))
    assert f.restrict(g) == f.update(g).intersect(g)
    assert f.minus(g) == f.difference(g.restrict(f))
    assert f.difference(g) == f.minus(f.intersect(g))
    assert f.intersect(g) == f.difference(f.difference(g))
    assert f.override(g.override(h)) == f.override(g).override(h)
    assert f.restrict(g) == f.domain_map().compose(g)


@settings(max_examples=200, deadline=None)
@given(pfun_xy, pfun_xy)
def test_comparison_identities(f, g):
    zero = PFun.empty(X, Y)
    assert f.intersect(g) == comparison(f, g, f, zero)
    assert f.restrict(g) == comparison(f, zero, zero, g)
    assert g.minus(f) == comparison(f, zero, g, zero)


def test_general_comparison_expansion_fails():
    # where f and g agree, h is undefined and k is defined, the expansion
    # falls through to k while the comparison is undefined
    f = g = k = PFun(X, Y, (0, 0))
    h = PFun(X, Y, (0, -1))
    expansion = f.intersect(g).restrict(h).override(h.minus(f).minus(g)).override(k)
    assert comparison(f, g, h, k) == h
    assert expansion == k
