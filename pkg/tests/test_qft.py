import json
import random

import pytest
import sympy as sp

from superquant import qft as q
from superquant.starproduct import moyal_poly, tilde_coordinate

X1, X2 = sp.symbols("x1 x2")
GENS = (X1, X2)
THETA = sp.Rational(1, 3)
VALUES = {q.a: 2, q.b: 3, q.theta: THETA, q.alpha: sp.Rational(1, 2), q.M: 1, q.lam: 1}
# a cubic test field keeps every Moyal expansion finite and exact
FIELD = sp.Poly(X1 ** 2 * X2 + X2 ** 3 - X1 + 2, *GENS)


def atom_poly(atom):
    """x~^X d^D phi as a polynomial (pointwise factors)."""
    out = FIELD if atom.base == "phi" else sp.Poly(1, *GENS)
    for mu in atom.D:
        out = out.diff(GENS[mu - 1])
    for mu in atom.X:
        out = out * tilde_coordinate(mu - 1, GENS, THETA)
    return out


def evaluate(e, odd=0):
    """Star-evaluate one xi-component of a formal expression by chained Moyal products."""
    total = sp.Poly(0, *GENS)
    for (word, o), c in e.terms.items():
        if o != odd:
            continue
        acc = sp.Poly(1, *GENS)
        for atom in word:
            acc = moyal_poly(acc, atom_poly(atom), THETA)
        total = total + acc * sp.nsimplify(sp.sympify(c).subs(VALUES))
    return sp.expand(total.as_expr())


# ---------------------------------------------------------------- the linear-symbol rule

@pytest.mark.parametrize("mu", [1, 2])
def test_tilde_commutator_is_twice_i_derivative(mu):
    xt = tilde_coordinate(mu - 1, GENS, THETA)
    lhs = moyal_poly(xt, FIELD, THETA) - moyal_poly(FIELD, xt, THETA)
    assert sp.expand((lhs - 2 * sp.I * FIELD.diff(GENS[mu - 1])).as_expr()) == 0


def test_tilde_symbols_commutator_constant():
    x1, x2 = (tilde_coordinate(mu - 1, GENS, THETA) for mu in (1, 2))
    c = (moyal_poly(x1, x2, THETA) - moyal_poly(x2, x1, THETA)).as_expr()
    assert sp.simplify(c - 4 * sp.I / THETA) == 0


@pytest.mark.parametrize("seed", range(12))
def test_rewriting_preserves_star_value(seed):
    rng = random.Random(seed)
    e = q.random_expr(rng, n_terms=3, max_len=3)
    nf = q.rewrite_linear_star(e)
    for odd in (0, 1):
        assert sp.expand(evaluate(e, odd) - evaluate(nf, odd)) == 0


@pytest.mark.parametrize("seed", range(40))
def test_rewriting_is_confluent(seed):
    e = q.random_expr(random.Random(seed), n_terms=4, max_len=5)
    first = q.rewrite_linear_star(e, random.Random(1000 + seed))
    second = q.rewrite_linear_star(e, random.Random(2000 + seed))
    assert (first - second).is_zero()
    for (word, _), _c in first.terms.items():
        assert q.redexes(word) == []


@pytest.mark.parametrize("atom", [q.PHI, q.xphi(1), q.xphi(2), q.dphi(1), q.xt(1), q.xt(2),
                                  q.Atom("phi", (1, 2), (1,))])
@pytest.mark.parametrize("mu", [1, 2])
def test_derivative_matches_polynomial_derivative(atom, mu):
    want = atom_poly(atom).diff(GENS[mu - 1])
    got = sum((atom_poly(t) * sp.sympify(c).subs(q.theta, THETA) for c, t in q.derivative(atom, mu)),
              sp.Poly(0, *GENS))
    assert sp.expand((got - want).as_expr()) == 0


def test_bad_index_rejected():
    with pytest.raises(ValueError):
        q.FormalExpr.word(q.xt(3))
    with pytest.raises(ValueError):
        q.bracket_lhs(0)


# ---------------------------------------------------------------- exact identities

@pytest.mark.parametrize("mu", [1, 2])
def test_bracket_identity_graded(mu):
    rep = q.verify_bracket_identity(mu, graded=True)
    assert rep.ok, rep.diff


@pytest.mark.parametrize("mu", [1, 2])
def test_bracket_identity_needs_graded_commutator(mu):
    assert not q.verify_bracket_identity(mu, graded=False).ok


@pytest.mark.parametrize("mu", [1, 2])
def test_bracket_lhs_agrees_with_moyal_evaluation(mu):
    lhs, rhs = q.bracket_lhs(mu), q.bracket_rhs(mu)
    for odd in (0, 1):
        assert sp.expand(evaluate(lhs, odd) - evaluate(rhs, odd)) == 0


@pytest.mark.parametrize("subs", [{q.b: 0}, {q.a: 0}, {q.alpha: 1}])
def test_specialised_bracket_and_square(subs):
    assert q.verify_bracket_identity(1, specialize=subs).ok
    assert q.verify_square_identity(specialize=subs).ok


def test_bracket_without_odd_part_is_plain_derivative():
    lhs = q.bracket_lhs(2).subs({q.b: 0})
    assert (lhs - q.FormalExpr.word(q.dphi(2), coeff=q.a ** 2)).is_zero()


def test_square_identity():
    rep = q.verify_square_identity()
    assert rep.ok, rep.diff


def test_odd_table_square():
    c = q.odd_table().coeff(1, 1)
    assert sp.simplify(c - sp.I * q.alpha * q.theta / (1 + q.alpha) ** 2) == 0


def test_action_identity_graded_body():
    rep = q.verify_action_identity()
    assert rep.ok, rep.diff
    assert set(rep.notes["parameters"]) == {"overall", "harmonic Omega^2", "mass M^2 ->", "coupling lambda ->"}


@pytest.mark.parametrize("graded,reading", [(True, "full"), (False, "body"), (False, "full")])
def test_other_readings_do_not_give_the_harmonic_action(graded, reading):
    assert not q.verify_action_identity(graded, reading).ok


def test_action_needs_integration_by_parts():
    rep = q.verify_action_identity(axiom=False)
    assert not rep.ok
    assert "d1 phi" in rep.diff and "x~1 phi" in rep.diff


def test_action_specialised_to_plain_phi4():
    # with no odd component the action is the undeformed phi^4 action scaled by a^4
    assert q.verify_action_identity(specialize={q.b: 0}).ok
    coeffs = {k: sp.simplify(v.subs(q.b, 0)) for k, v in q.action_coefficients().items()}
    assert coeffs[(q.xphi(1), q.xphi(1))] == 0


def test_modulus_reading_validated():
    with pytest.raises(ValueError):
        q.modulus_squared(q.field_eta(q.PHI), reading="half")


def test_conj_reverses_words():
    e = q.FormalExpr.word(q.PHI, q.dphi(1), coeff=1 + 2 * sp.I)
    out = q.conj(e)
    assert out.terms == {((q.dphi(1), q.PHI), 0): 1 - 2 * sp.I}


def test_report_json():
    rep = q.verify_square_identity()
    data = json.loads(rep.to_json())
    assert data["status"] == "pass" and data["diff"] == "0"
    assert set(data) == {"identity", "status", "lhs_normal_form", "rhs_normal_form", "diff"}


# ---------------------------------------------------------------- numeric route

def test_numeric_crosscheck():
    rep = q.numeric_crosscheck()
    assert rep.ok and rep.deviation < 1e-4
    assert abs(rep.symbolic - rep.rhs) / abs(rep.rhs) < 1e-6


def test_numeric_crosscheck_other_parameters():
    rep = q.numeric_crosscheck(N=128, L=10, a_val=0.7, b_val=1.3, alpha_val=2.0, theta_val=0.8, lam_val=0.25)
    assert rep.deviation < 1e-4


def test_numeric_plain_commutator_disagrees():
    rep = q.numeric_crosscheck(graded=False)
    assert rep.deviation > 1e-2


def test_by_parts_residual():
    assert q.by_parts_residual() < 1e-8
    assert q.by_parts_residual(N=64, L=8, theta_val=0.5) < 1e-8
