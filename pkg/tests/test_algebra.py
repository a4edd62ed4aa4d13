import itertools
import random

import numpy as np
import pytest

from pfalg.algebra import (CongruencePartition, FinAlgebra, adjoin_meet, all_congruences,
                           format_algebra, generated_congruence, is_congruence, is_embedding,
                           lift_to_stack, natural_le, parse_algebra, proj_quasiorder, quotient,
                           sim_partition)
from pfalg.catalog import load_example, load_lawset
from pfalg.errors import NotACongruence, NotApplicable, ParseError, UnsupportedSignature
from pfalg.pfun import FinSet, PFun, all_pfuns, generate_subalgebra
from pfalg.signature import make_signature
from pfalg.syntax import check_lawset

X = FinSet.of("X", "pq")
Y = FinSet.of("Y", "uv")


def set_partitions(items):
    if not items:
        yield []
        return
    head, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[head]] + part
        for i in range(len(part)):
            yield part[:i] + [[head] + part[i]] + part[i + 1:]


def brute_congruences(alg):
    out = set()
    for blocks in set_partitions(list(range(alg.size))):
        part = CongruencePartition.from_blocks(alg.size, blocks)
        block = part.block_of
        ok = all(block[t[a, b]] == block[t[c, d]]
                 for t in alg.tables.values()
                 for a, b, c, d in itertools.product(range(alg.size), repeat=4)
                 if block[a] == block[c] and block[b] == block[d])
        if ok:
            out.add(part)
    return out


def random_subalgebras(sig, count, seed=0, max_size=7):
    rng = random.Random(seed)
    funcs = all_pfuns(X, Y)
    found = 0
    while found < count:
        gens = rng.sample(funcs, rng.randint(1, 3))
        alg, _ = generate_subalgebra(gens, make_signature(sig))
        if alg.size <= max_size:
            found += 1
            yield alg


@pytest.mark.parametrize("sig", ["res", "res,cap", "mns", "res,ovr"])
def test_congruences_match_brute_force(sig):
    for alg in random_subalgebras(sig, 6, max_size=6):
        brute = brute_congruences(alg)
        assert set(all_congruences(alg)) == brute
        for a, b in itertools.combinations(range(alg.size), 2):
            least = generated_congruence(alg, [(a, b)])
            containing = [c for c in brute if c.related(a, b)]
            assert least in containing
            assert all(least.refines(c) for c in containing)


def test_partition_basics():
    p = CongruencePartition.from_blocks(4, [[1, 3]])
    assert p.blocks == ((0,), (1, 3), (2,))
    assert p.nontrivial_blocks == ((1, 3),)
    assert p.related(3, 1) and not p.related(0, 1)
    assert CongruencePartition.identity(4).refines(p)
    assert p.refines(CongruencePartition.full(4))
    assert CongruencePartition((5, 5, 2)) == CongruencePartition((0, 0, 1))
    with pytest.raises(NotApplicable):
        CongruencePartition.from_blocks(3, [[0, 1], [1, 2]])


def test_orders_on_droi():
    alg = load_example("droi").algebra
    e, i, one, zero = (alg.index(l) for l in ("e", "i", "1", "0"))
    assert natural_le(alg, e, one) and not natural_le(alg, one, e)
    assert natural_le(alg, zero, i)
    # 1 and i have the same domain, so they are ∼-equivalent
    assert proj_quasiorder(alg, one, i) and proj_quasiorder(alg, i, one)
    assert sim_partition(alg).related(one, i)
    assert not sim_partition(alg).related(one, e)


def test_quotient_satisfies_equations():
    laws = load_lawset("rnb-cap").laws
    for alg in random_subalgebras("res,cap", 5):
        for theta in all_congruences(alg):
            q = quotient(alg, theta)
            assert q.size == len(theta.blocks)
            assert check_lawset(q, laws).all_pass


def test_quotient_rejects_non_congruence():
    alg = load_example("properqe").algebra
    a, b = alg.index("a"), alg.index("b")
    bad = CongruencePartition.from_blocks(alg.size, [[a, b]])
    assert not is_congruence(alg, bad)
    with pytest.raises(NotACongruence):
        quotient(alg, bad)
    with pytest.raises(NotApplicable):
        is_congruence(alg, CongruencePartition.identity(3))


def test_embedding_of_subalgebra():
    sig = make_signature("res,ovr")
    big, elements = generate_subalgebra(all_pfuns(X, Y), sig)
    small, parts = generate_subalgebra([PFun(X, Y, (0, -1)), PFun(X, Y, (1, 1))], sig)
    mapping = [elements.index(f) for f in parts]
    assert is_embedding(mapping, small, big)
    assert not is_embedding([mapping[0]] * small.size, small, big)
    with pytest.raises(UnsupportedSignature):
        is_embedding(mapping, small, big.reduct(["res"]))


def test_lift_adjoins_zero_and_satisfies_stack_laws():
    stack = load_lawset("stack1").laws
    for alg in random_subalgebras("res", 5):
        lifted = lift_to_stack(alg)
        assert lifted.size == alg.size + 1
        assert lifted.zero == alg.size
        assert check_lawset(lifted, stack).all_pass
        assert is_embedding(list(range(alg.size)), alg.reduct(["res"], keep_constants=False),
                            lifted.reduct(["res"], keep_constants=False))


def test_lift_of_minus_algebra_reuses_zero():
    alg = load_example("properqe").algebra
    lifted = lift_to_stack(alg)
    assert lifted.size == alg.size
    assert lifted.zero == alg.index("0")
    assert np.all(lifted.tables["cmp"] == lifted.zero)
    assert check_lawset(lifted, load_lawset("minus-semigroup").laws).all_pass


def test_lift_refuses_composition():
    alg = load_example("updatecapqv").algebra
    with pytest.raises(NotApplicable):
        lift_to_stack(alg)


def test_adjoin_meet_is_greatest_lower_bound():
    alg = load_example("droi").algebra
    met = adjoin_meet(alg)
    cap = met.tables["cap"]
    for a, b in itertools.product(range(alg.size), repeat=2):
        m = cap[a, b]
        assert natural_le(alg, m, a) and natural_le(alg, m, b)
        for c in range(alg.size):
            if natural_le(alg, c, a) and natural_le(alg, c, b):
                assert natural_le(alg, c, m)


def test_algebra_text_round_trip():
    alg = load_example("updatecapqv").algebra
    text = format_algebra(alg, ["header line"])
    back = parse_algebra(text)
    assert back == alg
    assert format_algebra(back, ["header line"]) == text


def test_algebra_parse_errors():
    with pytest.raises(ParseError):
        parse_algebra("size 2\nlabels: a b\ntable res:\n0 1\n")


def test_algebra_validation():
    with pytest.raises(ValueError):
        FinAlgebra(2, {"res": np.array([[0, 2], [0, 1]])})
    with pytest.raises(ValueError):
        FinAlgebra(2, {"res": np.zeros((3, 3), dtype=int)})
    alg = FinAlgebra(2, {"res": np.array([[0, 1], [0, 1]])})
    with pytest.raises(ValueError):
        alg.tables["res"][0, 0] = 1
