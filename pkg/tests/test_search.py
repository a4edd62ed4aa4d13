import itertools

import numpy as np
import pytest

from pfalg.algebra import parse_algebra
from pfalg.catalog import load_example, load_lawset
from pfalg.errors import NotApplicable
from pfalg.search import (default_timeout, irredundance_certificates, iter_models,
                          quasivariety_witness, search_model, verify_certificate,
                          verify_quasi_witness)
from pfalg.syntax import check_lawset, law_holds, parse_law, parse_laws

RNB = load_lawset("rnb").laws


def brute_rnb_tables(n):
    """Every res table on n elements satisfying the two rnb laws, vectorised."""
    cells = np.array(list(itertools.product(range(n), repeat=n * n)), dtype=np.int64)
    T = cells.reshape(-1, n, n)
    idx = np.arange(len(T))[:, None]
    ok = np.all(T[:, np.arange(n), np.arange(n)] == np.arange(n), axis=1)
    for x, y, z in itertools.product(range(n), repeat=3):
        ok &= T[idx[:, 0], T[:, x, y], z] == T[idx[:, 0], T[:, y, x], z]
    return {tuple(t.ravel()) for t in T[ok]}


def canonical(table):
    n = table.shape[0]
    forms = []
    for perm in itertools.permutations(range(n)):
        p = np.array(perm)
        inv = np.argsort(p)
        forms.append(tuple(p[table[np.ix_(inv, inv)]].ravel()))
    return min(forms)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_models_match_brute_force(n):
    found = {tuple(m.tables["res"].ravel()) for m in iter_models(None, RNB, n)}
    assert found == brute_rnb_tables(n)


def brute_semigroups(n):
    cells = np.array(list(itertools.product(range(n), repeat=n * n)), dtype=np.int64)
    T = cells.reshape(-1, n, n)
    rows = np.arange(len(T))
    ok = np.ones(len(T), dtype=bool)
    for x, y, z in itertools.product(range(n), repeat=3):
        ok &= T[rows, T[:, x, y], z] == T[rows, x, T[:, y, z]]
    return T[ok]


def test_least_number_heuristic_keeps_every_isomorphism_class():
    # rnb pins the diagonal, so use bare associativity where symmetry is left to break
    assoc = load_lawset("res-assoc").laws
    brute = brute_semigroups(3)
    lnh = list(iter_models(None, assoc, 3, lnh=True))
    assert {canonical(m.tables["res"]) for m in lnh} == {canonical(t) for t in brute}
    assert len(lnh) < len(brute)
    assert len(list(iter_models(None, assoc, 3))) == len(brute)


def test_trivial_model():
    res = search_model(None, [parse_law("res(x,x) = x")], 1)
    assert res.found and res.model.size == 1


def test_negated_axiom_is_exhausted():
    idem = parse_law("res(x,x) = x")
    for k in range(1, 5):
        assert search_model(None, RNB, k, negated=idem).outcome == "exhausted"


CONSEQUENCE = parse_law("res(x,res(y,x)) = res(y,x)")
BAND = RNB + load_lawset("res-assoc").laws


@pytest.mark.parametrize("size", [2, 3])
def test_exhaustion_is_order_independent(size):
    natural = search_model(None, BAND, size, negated=CONSEQUENCE)
    reverse = search_model(None, BAND, size, negated=CONSEQUENCE, cell_order="reverse")
    assert natural.outcome == reverse.outcome == "exhausted"
    assert natural.nodes > 0


def test_search_is_deterministic():
    laws = load_lawset("capslick").laws
    a = search_model(None, laws[1:], 3, negated=laws[0])
    b = search_model(None, laws[1:], 3, negated=laws[0])
    assert a.as_dict() == b.as_dict()
    assert a.nodes == b.nodes and a.model == b.model


def test_returned_models_satisfy_the_laws():
    laws = load_lawset("rnb-cap").laws
    models = list(iter_models(None, laws, 3))
    assert models
    for m in models:
        assert check_lawset(m, laws).all_pass


def test_non_commutative_intersection():
    laws = load_lawset("capslick").laws
    comm = load_lawset("capslick").law("capslick.3")
    assert comm.body() == "cap(x,y) = cap(y,x)"
    others = [l for l in laws if l is not comm]
    res = search_model(None, others, 2, negated=comm)
    assert res.found
    assert check_lawset(res.model, others).all_pass
    assert law_holds(res.model, comm) is not True


def test_capslick_certificates():
    certs = irredundance_certificates(load_lawset("capslick").laws, 4)
    assert [c.outcome for c in certs] == ["found"] * 5
    assert all(c.verified for c in certs)
    laws = load_lawset("capslick").laws
    for c in certs:
        others = [l for l in laws if l is not c.law]
        assert verify_certificate(c.model, others, c.law) is not None
        text = c.serialise()
        assert text.startswith(f"# omitted law {c.law.name}: ")
        assert parse_algebra(text) == c.model


def test_trivial_law_has_no_certificate():
    certs = irredundance_certificates(parse_laws("x = x"), 3)
    assert certs[0].outcome == "none"
    assert [o for _, o, _ in certs[0].attempts] == ["exhausted", "exhausted"]
    assert "no counter-model" in certs[0].line()


def test_empty_lawset_and_bad_size():
    with pytest.raises(NotApplicable):
        irredundance_certificates([], 3)
    with pytest.raises(NotApplicable):
        search_model(None, RNB, 0)
    with pytest.raises(NotApplicable):
        search_model(None, RNB, 2, cell_order="random")


def test_timeout_is_reported():
    laws = load_lawset("slickskew").laws
    res = search_model(None, laws[:1] + laws[2:], 4, negated=laws[1], timeout=1e-6)
    assert res.outcome == "timeout" and not res.found


def test_timeout_environment(monkeypatch):
    monkeypatch.setenv("PFALG_TIMEOUT_SECS", "7.5")
    assert default_timeout() == 7.5
    monkeypatch.delenv("PFALG_TIMEOUT_SECS")
    assert default_timeout() == 60.0


def test_constants_are_searched():
    laws = parse_laws("mns(x,x) = zero\nmns(x,zero) = x")
    res = search_model(None, laws, 2)
    assert res.found and res.model.zero is not None
    assert check_lawset(res.model, laws).all_pass


def test_macro_symbols_are_expanded():
    # res is not in the signature, so it is read as y-(y-x)
    laws = load_lawset("minus-algebra").laws
    res = search_model({"mns", "zero"}, laws, 3)
    assert res.found and set(res.model.tables) == {"mns"}


def test_catalog_quasi_witnesses():
    pq = load_example("properqe")
    w = verify_quasi_witness(pq.algebra, pq.extras["theta"],
                             load_lawset("minus-algebra-eq").laws, pq.extras["law"])
    assert w is not None and w.quotient == pq.extras["quotient"]
    uq = load_example("updatecapqv")
    law = uq.extras["law"]
    eqs = [l for l in load_lawset("stack1-cap-update").laws if l.is_equation]
    w = verify_quasi_witness(uq.algebra, uq.extras["theta"], eqs, law)
    assert w is not None and not w.violation


def test_quasi_witness_rejects_bad_pairs():
    pq = load_example("properqe")
    theta = pq.extras["theta"]
    law = pq.extras["law"]
    # the quotient itself fails law_q, so it cannot be the big algebra
    q = pq.extras["quotient"]
    from pfalg.algebra import CongruencePartition
    assert verify_quasi_witness(q, CongruencePartition.identity(q.size), [], law) is None
    assert verify_quasi_witness(pq.algebra, CongruencePartition.identity(pq.algebra.size),
                                [], law) is None
    assert theta.nontrivial_blocks


def test_quasivariety_search():
    law = parse_law("q: res(x,y) = res(y,x) => x = y")
    w = quasivariety_witness(RNB, law, 4)
    assert w is not None
    assert check_lawset(w.algebra, RNB + [law]).all_pass
    assert law_holds(w.quotient, law) is not True
    assert verify_quasi_witness(w.algebra, w.congruence, RNB, law) is not None


def test_equations_have_no_quasi_witness():
    assert quasivariety_witness(RNB[:1], RNB[1], 3) is None
