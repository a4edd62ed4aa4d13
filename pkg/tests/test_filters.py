import itertools

import numpy as np
import pytest

from pfalg.algebra import FinAlgebra, is_congruence, natural_le
from pfalg.catalog import load_example
from pfalg.errors import InternalContradiction, NotApplicable
from pfalg.filters import (Filter, all_filters, eps_congruence, eps_relation, extend_filter,
                           filter_property_failures, is_filter, is_prime_minus,
                           is_prime_override, is_separating_for, is_weakly_prime,
                           matching_predicate, maximal_separating_filter, principal_filter,
                           separating_family, weakly_prime_not_prime)
from pfalg.pfun import random_subalgebras
from pfalg.representation import represent
from pfalg.search import weakly_prime_search


def brute_filters(alg):
    """Every nonempty subset closed under ∘ and up-closed under ≲."""
    r = alg.op("res")
    n = alg.size
    out = []
    for mask in range(1, 1 << n):
        s = {i for i in range(n) if mask >> i & 1}
        closed = all(r[a, b] in s for a in s for b in s)
        upward = all(b in s for a in s for b in range(n) if r[b, a] == a)
        if closed and upward:
            out.append(frozenset(s))
    return out


def small_hosts():
    yield load_example("properqe").algebra
    yield load_example("droi").algebra
    yield load_example("updatecapqv").algebra
    for sig in ({"res"}, {"res", "cap"}, {"mns"}, {"res", "cap", "ovr"}):
        for alg, _ in random_subalgebras(sig, 8, seed=1, source_size=3):
            if alg.size <= 12:
                yield alg


@pytest.mark.parametrize("alg", list(small_hosts()), ids=lambda a: f"n{a.size}")
def test_filters_match_brute_force(alg):
    brute = brute_filters(alg)
    assert {F.members for F in all_filters(alg)} == set(brute)
    for s in brute:
        assert is_filter(alg, s)
    for a in range(alg.size):
        assert principal_filter(alg, a).members == min((s for s in brute if a in s), key=len)
    for F in all_filters(alg):
        for a in range(alg.size):
            if a in F:
                continue
            ext = extend_filter(alg, F, a)
            containing = [s for s in brute if a in s and F.members <= s]
            assert ext.members in containing
            assert all(ext.members <= s for s in containing)


@pytest.mark.parametrize("alg", list(small_hosts()), ids=lambda a: f"n{a.size}")
def test_maximal_separating_is_maximal_among_all_filters(alg):
    r = alg.op("res")
    brute = brute_filters(alg)
    for a, b in itertools.product(range(alg.size), repeat=2):
        if r[a, b] == a:
            continue
        M = maximal_separating_filter(alg, a, b)
        assert principal_filter(alg, a).members <= M.members
        assert is_separating_for(alg, M, a, b)
        for s in brute:
            if M.members < s:
                assert not is_separating_for(alg, Filter(alg, s), a, b)


def test_eps_relation_by_definition():
    alg = load_example("updatecapqv").algebra
    r = alg.op("res")
    for F in all_filters(alg):
        R = eps_relation(alg, F)
        for x, y in itertools.product(range(alg.size), repeat=2):
            assert R[x, y] == any(r[e, x] == r[e, y] for e in F.members)
        assert is_congruence(alg, eps_congruence(alg, F), ["res"])


def test_worked_filters_in_updatecapqv():
    alg = load_example("updatecapqv").algebra
    one, d, e = alg.index("1"), alg.index("d"), alg.index("e")
    F = principal_filter(alg, one)
    assert F.labels() == ["1", "d"]
    assert eps_congruence(alg, F).nontrivial_blocks == ()
    ext = extend_filter(alg, F, e)
    assert {one, d, e} <= ext.members
    with pytest.raises(NotApplicable):
        extend_filter(alg, F, one)
    zero = alg.index("0")
    assert principal_filter(alg, zero).members == frozenset(range(alg.size))
    assert not principal_filter(alg, zero).is_proper


def test_primeness_examples_in_properqe():
    alg = load_example("properqe").algebra
    a, c, d = alg.index("a"), alg.index("c"), alg.index("d")
    F = principal_filter(alg, a)
    assert c not in F and d not in F
    assert alg.tables["mns"][a, c] == d
    assert not is_prime_minus(alg, F)
    whole = Filter(alg, frozenset(range(alg.size)))
    assert is_prime_minus(alg, whole)


def test_whole_carrier_is_prime_in_every_sense():
    for alg, _ in random_subalgebras({"res", "cap", "ovr", "upd", "mns"}, 5, seed=2):
        whole = Filter(alg, frozenset(range(alg.size)))
        assert is_prime_minus(alg, whole)
        assert is_prime_override(alg, whole)
        assert is_weakly_prime(alg, whole)


def test_separation_preconditions():
    alg = load_example("droi").algebra
    e, one = alg.index("e"), alg.index("1")
    assert natural_le(alg, e, one)
    with pytest.raises(NotApplicable):
        is_separating_for(alg, principal_filter(alg, e), e, one)
    # a filter that omits a never separates a from anything
    F = principal_filter(alg, one)
    assert e not in F
    assert not is_separating_for(alg, F, e, alg.index("f"))


def test_families_separate():
    pq = load_example("properqe").algebra
    assert separating_family(pq, "prime_minus").kind == "prime_minus"
    uq = load_example("updatecapqv").algebra
    assert len(separating_family(uq, "weakly_prime")) > 0
    for alg, _ in random_subalgebras({"res"}, 10, seed=3):
        fam = separating_family(alg, "all")
        if alg.zero is not None:
            assert all(alg.zero not in F for F in fam)
        assert separating_family(alg, "max_separating").kind == "max_separating"


def test_non_separating_family_is_loud():
    # a two-element chain satisfying nothing helpful: 0 ≤ 1 but only the
    # improper filter is available once the zero filter is excluded
    alg = FinAlgebra(2, {"res": np.array([[0, 0], [0, 1]])}, zero=1)
    with pytest.raises(InternalContradiction):
        separating_family(alg, "all")


@pytest.mark.parametrize("name", ["properqe", "droi", "updatecapqv"])
def test_property_suite_on_examples(name):
    alg = load_example(name).algebra
    assert filter_property_failures(alg, matching_predicate(alg)) == []


def test_property_suite_flags_droi_with_meet():
    # adjoining meets to droi breaks the absorption axiom, and with it the
    # fact that prime filters are weakly prime
    met = load_example("droi").extras["with_meet"]
    failures = filter_property_failures(met)
    assert failures == ["prime but not weakly prime: {1, i}"]


@pytest.mark.parametrize("sig", [{"res"}, {"res", "cap"}, {"mns"}, {"mns", "ovr"},
                                 {"res", "cap", "ovr"}, {"res", "cap", "upd"},
                                 {"mns", "ovr", "cap"}])
def test_property_suite_on_random_algebras(sig):
    for alg, _ in random_subalgebras(sig, 20, seed=0, source_size=3):
        assert filter_property_failures(alg, matching_predicate(alg)) == []


def test_weakly_prime_filter_that_is_not_prime():
    found = weakly_prime_search(4)
    assert found is not None
    alg, F = found
    assert alg.size == 4
    assert is_weakly_prime(alg, F) and not is_prime_override(alg, F)
    assert weakly_prime_not_prime(alg) == F
    rep, report = represent(alg, "res,cap,ovr")
    assert report.all_pass
