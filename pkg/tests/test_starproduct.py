import math
import random
import warnings
from fractions import Fraction

import numpy as np
import pytest
import sympy as sp

from superquant import starproduct as st
from superquant.grassmann import eps, members_of
from superquant.scalars import exact, to_complex

from oracles import clifford_word_product, mask, moyal_quadrature, plane_wave_phase_regularised

X1, X2 = sp.symbols("x1 x2", real=True)

PARAMS = [(1, 1), (2, Fraction(1, 3)), (Fraction(1, 2), (1, 1)), (3, (0, -2)), (1, (Fraction(-1, 2), 1))]


def gauss(cx=0.0, cy=0.0, s=1.0, poly=None):
    def f(x, y):
        base = np.exp(-((x - cx) ** 2 + (y - cy) ** 2) / s)
        return base * poly(x, y) if poly else base
    return f


# ---------------------------------------------------------------- parameters

def test_parameter_validation():
    with pytest.raises(ValueError):
        st.DeformParams(0.0, 1.0)
    with pytest.raises(ValueError):
        st.DeformParams(1.0, -1.0)
    with pytest.raises(ValueError):
        st.DeformParams(1.0, 0.0)
    with pytest.raises(ValueError):
        st.DeformParams(1.0, 1.0, m=3)


@pytest.mark.parametrize("a0,alpha", PARAMS)
@pytest.mark.parametrize("n", range(4))
def test_odd_normalisation_is_kappa_without_moyal_factor(a0, alpha, n):
    p = st.DeformParams.exact(a0, alpha).float_copy()
    theta = 1.0 / p.a0
    assert abs(p.kappa(n) - p.kappa_odd(n) / (math.pi * theta) ** 2) < 1e-12 * max(1.0, abs(p.kappa(n)))


def test_r_relation():
    p = st.DeformParams(1.5, 0.7 + 0.2j)
    for n in range(4):
        assert abs(p.r(n) - p.gamma(n) ** 2 * to_complex(p.r1(n)) * (0.7 + 0.2j) ** n) < 1e-14


# ---------------------------------------------------------------- structure constants

@pytest.mark.parametrize("a0,alpha", PARAMS)
@pytest.mark.parametrize("n", range(5))
def test_closed_form_equals_bruteforce_exactly(a0, alpha, n):
    p = st.DeformParams.exact(a0, alpha)
    assert dict(st.lambda_bruteforce(n, p).table) == dict(st.lambda_closedform(n, p).table)


@pytest.mark.parametrize("a0,alpha", PARAMS)
@pytest.mark.parametrize("n", range(5))
def test_lambda_is_clifford_word_rewriting(a0, alpha, n):
    p = st.DeformParams.exact(a0, alpha)
    q = exact((0, 1)) * p.alpha / (p.a0 * (1 + p.alpha) * (1 + p.alpha))
    lam = st.lambda_closedform(n, p)
    for I in range(1 << n):
        for J in range(1 << n):
            coef, word = clifford_word_product(members_of(I), members_of(J), q)
            assert mask(word) == I ^ J
            assert lam.coeff(I, J) == exact(coef) * exact(1)


@pytest.mark.parametrize("n", range(4))
def test_closed_form_agrees_with_theta_polynomial(n):
    p = st.DeformParams.exact(2, Fraction(1, 3))
    assert st.lambda_closedform(n, p).table == st.lambda_in_theta(n, exact(Fraction(1, 2)), exact(Fraction(1, 3))).table


def test_table_n1_example():
    lam = st.lambda_closedform(1, st.DeformParams.exact(1, 1))
    assert lam.coeff(1, 1) == exact((0, Fraction(1, 4)))
    assert lam.coeff(0, 1) == exact(1) and lam.coeff(1, 0) == exact(1) and lam.coeff(0, 0) == exact(1)


def test_table_n2_example():
    q = exact((0, Fraction(1, 4)))
    lam = st.lambda_closedform(2, st.DeformParams.exact(1, 1))
    want = {(1, 1): q, (1, 2): exact(1), (2, 1): exact(-1), (1, 3): q, (3, 1): -q,
            (2, 3): -q, (3, 2): q, (3, 3): exact(Fraction(1, 16))}
    for k, v in want.items():
        assert lam.coeff(*k) == v


def test_undeformed_limit():
    """theta = 0 (or alpha -> 0) leaves the Grassmann product."""
    for n in range(4):
        lam = st.lambda_in_theta(n, exact(0), exact(1))
        for I in range(1 << n):
            for J in range(1 << n):
                assert lam.coeff(I, J) == exact(eps(I, J))
    small = st.lambda_in_theta(3, 1.0, 1e-12)
    for (I, J), v in small.table.items():
        assert abs(v - eps(I, J)) < 1e-11


def test_symbolic_theta_polynomial():
    th = sp.Symbol("theta")
    lam = st.lambda_in_theta(2, th, sp.Integer(1))
    assert sp.simplify(lam.coeff(3, 3) - th ** 2 / 16) == 0


@pytest.mark.parametrize("n", range(1, 6))
def test_normalised_generators_square_to_one(n):
    lam = st.normalized_lambda(n)
    for k in range(n):
        assert lam.coeff(1 << k, 1 << k) == 1
        for l in range(k + 1, n):
            assert lam.coeff(1 << k, 1 << l) == -lam.coeff(1 << l, 1 << k)


def test_clifford_scale_squared_normalises():
    p = st.DeformParams.exact(2, Fraction(1, 3))
    q = st.lambda_closedform(1, p).coeff(1, 1)
    assert q * st.clifford_scale_squared(p) == exact(1)
    s = st.clifford_scale(p.float_copy())
    assert abs(s * s * to_complex(q) - 1) < 1e-14
    assert st.clifford_scale(p.float_copy(), 1) == -s


# ---------------------------------------------------------------- even Moyal product

def test_canonical_commutator():
    th = sp.Rational(1, 3)
    x, p = sp.Poly(X1, X1, X2), sp.Poly(X2, X1, X2)
    assert (st.moyal_poly(x, p, th) - st.moyal_poly(p, x, th)).as_expr() == sp.I * th
    assert (st.moyal_poly(x, p, th)).as_expr() == X1 * X2 + sp.I * th / 2


def test_second_order_terms():
    th = sp.Symbol("theta", positive=True)
    f, g = sp.Poly(X1 ** 2, X1, X2), sp.Poly(X2 ** 2, X1, X2)
    got = st.moyal_poly(f, g, th).as_expr()
    assert sp.expand(got - (X1 ** 2 * X2 ** 2 + 2 * sp.I * th * X1 * X2 - th ** 2 / 2)) == 0
    comm = (st.moyal_poly(f, g, th) - st.moyal_poly(g, f, th)).as_expr()
    assert sp.expand(comm - 4 * sp.I * th * X1 * X2) == 0


def test_polynomial_associativity_random():
    rng = random.Random(4)
    th = sp.Rational(2, 3)

    def rnd():
        return sp.Poly(sum(rng.randint(-3, 3) * X1 ** i * X2 ** j for i in range(4) for j in range(4 - i)), X1, X2)

    for _ in range(4):
        f, g, h = rnd(), rnd(), rnd()
        lhs = st.moyal_poly(st.moyal_poly(f, g, th), h, th)
        rhs = st.moyal_poly(f, st.moyal_poly(g, h, th), th)
        assert (lhs - rhs).is_zero


def test_moyal_poly_rejects_bad_input():
    with pytest.raises(TypeError):
        st.moyal_poly(X1, X2, 1)
    with pytest.raises(ValueError):
        st.moyal_poly(sp.Poly(X1, X1, X2), sp.Poly(X2, X1, X2), 1, poisson=np.zeros((3, 3)))


def test_tilde_coordinates_generate_inner_derivations():
    th = sp.Rational(1, 2)
    gens = (X1, X2)
    for mu in range(2):
        xt = st.tilde_coordinate(mu, gens, th)
        for nu, g in enumerate(gens):
            P = sp.Poly(g, *gens)
            br = (st.moyal_poly(xt, P, th) - st.moyal_poly(P, xt, th)) * (-sp.I / 2)
            assert sp.simplify(br.as_expr() - (1 if mu == nu else 0)) == 0


@pytest.mark.parametrize("k,kp,theta", [((1.0, 0.0), (0.0, 1.0), 1.0), ((0.7, -0.4), (0.3, 0.9), 0.5),
                                        ((-1.2, 0.5), (0.8, 0.2), 2.0)])
def test_plane_wave_phase_against_oscillatory_integral(k, kp, theta):
    want = plane_wave_phase_regularised(k, kp, theta)
    got = st.moyal_mode_phase(k, kp, theta)
    assert abs(got - want) < 1e-5


def test_torus_mode_product_commutation_phase():
    th = Fraction(1, 3)
    vu, _ = st.torus_mode_product((0, 1), (1, 0), th)
    uv, _ = st.torus_mode_product((1, 0), (0, 1), th)
    assert abs(vu / uv - np.exp(2j * np.pi / 3)) < 1e-14


@pytest.mark.parametrize("theta", [0.5, 1.0])
def test_grid_product_matches_quadrature(theta):
    lat = st.Lattice.centered(64, 8.0)
    X, Y = lat.mesh()
    f = gauss(0.3, -0.2, 1.0)
    g = gauss(-0.4, 0.1, 0.7, poly=lambda x, y: 1 + x - 0.5 * y * y)
    grid = st.moyal_grid(f(X, Y), g(X, Y), lat, theta)
    for idx in [(32, 32), (28, 35), (36, 30), (30, 30)]:
        x = np.array([X[idx], Y[idx]])
        want = moyal_quadrature(f, g, x, theta, half=7.0, step=0.1)
        assert abs(grid[idx] - want) < 1e-6


def test_grid_product_matches_gaussian_closed_form():
    lat = st.Lattice.centered(64, 8.0)
    X, Y = lat.mesh()
    r2 = X ** 2 + Y ** 2
    got = st.moyal_grid(np.exp(-r2), np.exp(-2 * r2), lat, 0.8)
    assert np.max(np.abs(got - st.gaussian_star_gaussian(1.0, 2.0, 0.8, r2))) < 1e-12


def test_grid_product_warns_on_truncation():
    lat = st.Lattice.centered(16, 2.0)
    X, Y = lat.mesh()
    f = np.exp(-(X ** 2 + Y ** 2) / 4)
    with pytest.warns(UserWarning, match="not decaying"):
        st.moyal_grid(f, f, lat, 1.0)


def test_grid_product_requires_two_dimensions():
    lat = st.Lattice.centered(8, 4.0, m=4)
    with pytest.raises(NotImplementedError):
        st.moyal_grid(np.zeros(lat.shape), np.zeros(lat.shape), lat, 1.0)


def test_grid_associativity():
    lat = st.Lattice.centered(64, 8.0)
    X, Y = lat.mesh()
    f, g, h = gauss(0.2, 0.1)(X, Y), gauss(-0.3, 0.4, 0.8)(X, Y), gauss(0.0, -0.5, 1.2)(X, Y) * (1 + X)
    th = 1.0
    lhs = st.moyal_grid(st.moyal_grid(f, g, lat, th), h, lat, th)
    rhs = st.moyal_grid(f, st.moyal_grid(g, h, lat, th), lat, th)
    assert np.max(np.abs(lhs - rhs)) < 1e-5


# ---------------------------------------------------------------- super product

def random_poly_super(rng, n, parity=None):
    comps = {}
    for I in range(1 << n):
        if parity is not None and bin(I).count("1") % 2 != parity:
            continue
        comps[I] = sum((rng.randint(-2, 2) + sp.I * rng.randint(-2, 2)) * X1 ** i * X2 ** j
                       for i in range(2) for j in range(2 - i))
    return st.poly_superfunction(n, (X1, X2), comps)


def same(f, g):
    return all(sp.expand((f.component(I) - g.component(I)).as_expr()) == 0 for I in range(1 << f.n))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_super_product_associative(n):
    rng = random.Random(n)
    p = st.DeformParams.exact(2, Fraction(1, 3))
    for _ in range(2):
        f, g, h = (random_poly_super(rng, n) for _ in range(3))
        assert same(st.super_star(st.super_star(f, g, p), h, p), st.super_star(f, st.super_star(g, h, p), p))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_complex_conjugation_reverses_with_graded_sign(n):
    rng = random.Random(10 + n)
    p = st.DeformParams.exact(1, 1)
    for pf in (0, 1):
        for pg in (0, 1):
            f, g = random_poly_super(rng, n, pf), random_poly_super(rng, n, pg)
            lhs = st.super_star(f, g, p).conj()
            rhs = st.super_star(g.conj(), f.conj(), p).scale((-1) ** (pf * pg))
            assert same(lhs, rhs)


def test_conjugation_with_complex_alpha_swaps_to_conjugate_parameter():
    rng = random.Random(77)
    p = st.DeformParams.exact(2, (1, 1))
    pc = st.DeformParams.exact(2, (1, -1))
    f, g = random_poly_super(rng, 2, 1), random_poly_super(rng, 2, 1)
    lhs = st.super_star(f, g, p).conj()
    assert same(lhs, st.super_star(g.conj(), f.conj(), pc).scale(-1))
    assert not same(lhs, st.super_star(g.conj(), f.conj(), p).scale(-1))


def test_super_product_unit_and_generators():
    p = st.DeformParams.exact(1, 1)
    one = st.poly_superfunction(2, (X1, X2), {0: 1})
    xi1 = st.poly_superfunction(2, (X1, X2), {1: 1})
    xi2 = st.poly_superfunction(2, (X1, X2), {2: 1})
    f = random_poly_super(random.Random(0), 2)
    assert same(st.super_star(one, f, p), f) and same(st.super_star(f, one, p), f)
    anti = st.super_star(xi1, xi2, p) + st.super_star(xi2, xi1, p)
    assert all(anti.component(I).is_zero for I in anti.components)
    sq = st.super_star(xi1, xi1, p)
    assert sp.simplify(sq.component(0).as_expr() - sp.I / 4) == 0


def test_undeformed_product_is_supercommutative():
    rng = random.Random(3)
    f, g = random_poly_super(rng, 2, 1), random_poly_super(rng, 2, 1)
    assert same(f.undeformed(g), g.undeformed(f).scale(-1))


def test_backend_mismatch_raises():
    p = st.DeformParams.exact(1, 1)
    f = st.poly_superfunction(1, (X1, X2), {0: 1})
    g = st.poly_superfunction(2, (X1, X2), {0: 1})
    with pytest.raises(ValueError):
        st.super_star(f, g, p)


# ---------------------------------------------------------------- traces and grids

def test_twisted_trace_of_unit_mass_gaussian():
    lat = st.Lattice.centered(64, 8.0)
    X, Y = lat.mesh()
    f = st.grid_superfunction(1, lat, {0: np.exp(-(X ** 2 + Y ** 2)) / np.pi, 1: np.exp(-(X ** 2 + Y ** 2))})
    assert abs(st.twisted_trace(f) - 1) < 1e-12
    assert abs(st.supertrace_fn(f) - np.pi) < 1e-12


def test_trace_of_product_equals_trace_of_undeformed_product():
    lat = st.Lattice.centered(64, 8.0)
    X, Y = lat.mesh()
    p = st.DeformParams(1.0, 0.6 + 0.3j)
    rng = np.random.default_rng(9)
    comps = lambda: {I: (rng.normal() + 1j * rng.normal()) * gauss(*rng.uniform(-0.5, 0.5, 2))(X, Y)  # noqa: E731
                     for I in range(4)}
    f, g = st.grid_superfunction(2, lat, comps()), st.grid_superfunction(2, lat, comps())
    a = st.supertrace_fn(st.super_star(f, g, p))
    b = st.supertrace_fn(f.undeformed(g))
    assert abs(a - b) < 1e-10 * abs(b)


def test_integration_refuses_non_grid():
    f = st.poly_superfunction(0, (X1, X2), {0: 1})
    with pytest.raises(ValueError):
        st.twisted_trace(f)


def test_integration_warns_when_not_decaying():
    lat = st.Lattice.centered(8, 1.0)
    f = st.grid_superfunction(0, lat, {0: np.ones(lat.shape)})
    with pytest.warns(UserWarning):
        st.twisted_trace(f)


def test_lattice_geometry():
    lat = st.Lattice.centered(8, 2.0)
    ax = lat.axis(0)
    assert np.allclose(ax, -2.0 + 0.25 + 0.5 * np.arange(8))
    assert abs(ax.mean()) < 1e-15
    assert lat.cell == 0.25


def test_grid_superfunction_round_trip(tmp_path):
    lat = st.Lattice.centered(16, 4.0)
    X, Y = lat.mesh()
    f = st.grid_superfunction(2, lat, {0: np.exp(-X ** 2 - Y ** 2), 3: (1 + 2j) * X * np.exp(-X ** 2 - Y ** 2)})
    path = tmp_path / "f.bin"
    st.save_grid_superfunction(f, path, {"a0": 1.0})
    g, meta = st.load_grid_superfunction(path)
    assert meta == {"a0": 1.0}
    assert g.n == 2 and g.meta == lat
    assert set(g.components) == {0, 3}
    for I in (0, 3):
        assert np.array_equal(g.component(I), f.component(I))
    raw = path.read_bytes()
    assert len(raw) == 8 * 4 + 8 * 4 + 4 * 16 * 16 * 16


def test_load_rejects_foreign_file(tmp_path):
    lat = st.Lattice.centered(4, 1.0)
    st.write_grid_blocks(tmp_path / "x.bin", 1, lat, [np.zeros((4, 4))], {"kind": "other"})
    with pytest.raises(ValueError):
        st.load_grid_superfunction(tmp_path / "x.bin")


def test_no_warning_on_well_resolved_product():
    lat = st.Lattice.centered(64, 8.0)
    X, Y = lat.mesh()
    f = np.exp(-(X ** 2 + Y ** 2))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        st.moyal_grid(f, f, lat, 1.0)
