import random
from fractions import Fraction

import pytest

from superquant import clifford_fine as cf
from superquant import starproduct as st
from superquant.grassmann import members_of
from superquant.scalars import exact

from oracles import clifford_word_product, mask


@pytest.mark.parametrize("n", range(6))
def test_clifford_multiplier_is_word_rewriting_with_unit_squares(n):
    s = cf.sigma_clifford(n)
    for a in range(1 << n):
        for b in range(1 << n):
            coef, word = clifford_word_product(members_of(a), members_of(b), 1)
            assert mask(word) == a ^ b
            assert s(a, b) == coef


def test_small_tables():
    s = cf.sigma_clifford(2)
    assert s(1, 2) == 1 and s(2, 1) == -1 and s(3, 3) == -1
    assert cf.sigma_clifford(0).sigma == {(0, 0): 1}
    assert len(cf.sigma_clifford(3).sigma) == 64


@pytest.mark.parametrize("n", range(5))
def test_both_orderings_are_cocycles_and_cohomologous(n):
    d, a = cf.sigma_clifford(n), cf.sigma_clifford(n, "ascending")
    assert cf.is_factor_set(d) == (True, None)
    assert cf.is_factor_set(a) == (True, None)
    rho = cf.search_equivalence(d, a)
    assert rho is not None
    assert cf.check_equivalence(d, a, rho.__getitem__)[0]


def test_unknown_ordering_rejected():
    with pytest.raises(ValueError):
        cf.sigma_clifford(2, "sideways")


def test_perturbed_table_yields_witness():
    table = dict(cf.sigma_clifford(2).sigma)
    table[(1, 2)] = -table[(1, 2)]
    ok, witness = cf.is_factor_set(cf.FactorSet(2, table))
    assert not ok
    a, b, c = witness
    s = cf.FactorSet(2, table)
    assert s(a, b ^ c) * s(b, c) != s(a, b) * s(a ^ b, c)


def test_zero_entry_is_not_a_factor_set():
    table = dict(cf.constant_factor_set(1).sigma)
    table[(1, 0)] = 0
    assert not cf.is_factor_set(cf.FactorSet(1, table))[0]


@pytest.mark.parametrize("k", [1, 2, 3])
def test_symmetric_coboundaries_are_trivial(k):
    rng = random.Random(k)
    rho = {a: complex(rng.choice([1, -1, 2, 1j, 0.5 - 1j])) for a in range(1 << k)}
    rho[0] = 1
    sym = cf.FactorSet(k, {(a, b): cf.coboundary_ratio(rho.__getitem__, a, b)
                           for a in range(1 << k) for b in range(1 << k)})
    assert sym.is_symmetric(1e-12)
    assert cf.is_factor_set(sym, 1e-12)[0]
    found = cf.search_equivalence(cf.constant_factor_set(k), sym)
    assert found is not None


@pytest.mark.parametrize("n", [2, 3, 4])
def test_clifford_multiplier_is_not_trivial(n):
    s = cf.sigma_clifford(n)
    assert not s.is_symmetric()
    assert cf.search_equivalence(cf.constant_factor_set(n), s) is None


def test_equivalence_rejects_size_mismatch():
    assert cf.search_equivalence(cf.sigma_clifford(1), cf.sigma_clifford(2)) is None
    assert cf.check_equivalence(cf.sigma_clifford(1), cf.sigma_clifford(2), lambda a: 1) == (False, None)


PARAMS = [(1, 1), (2, Fraction(1, 3)), (Fraction(1, 2), (1, 1)), (3, (0, -2))]


@pytest.mark.parametrize("a0,alpha", PARAMS)
@pytest.mark.parametrize("n", range(1, 5))
@pytest.mark.parametrize("branch", [0, 1])
def test_star_structure_constants_are_cohomologous_to_clifford(a0, alpha, n, branch):
    p = st.DeformParams.exact(a0, alpha)
    rep = cf.factor_set_from_star(st.lambda_closedform(n, p), p, branch)
    assert rep.ok, rep.witness


@pytest.mark.parametrize("n", range(1, 6))
def test_rescaled_generators_satisfy_clifford_relations(n):
    p = st.DeformParams.exact(2, Fraction(1, 3))
    out, bad = cf.clifford_relations(n, p)
    assert bad == []
    for i in range(n):
        assert out[(i, i)] == (exact(1), 0)


def test_factor_set_from_lambda_roundtrip():
    p = st.DeformParams.exact(1, 1)
    lam = st.lambda_closedform(3, p)
    s = cf.factor_set_from_lambda(lam)
    assert s.k == 3 and s(1, 1) == lam.coeff(1, 1)
