"""Verification suites shared by the command line driver.

Each suite is a function of a ``RunConfig`` returning a list of ``CheckRecord``.
Records are deterministic apart from their ``runtime`` field: every random
draw is seeded and every measured value is rounded to a fixed number of
significant digits before it is reported.
"""

from __future__ import annotations

import math
import random
import time
import warnings
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from itertools import product
from typing import Callable

import numpy as np
import sympy as sp

from . import clifford_fine as cf
from . import grassmann as gr
from . import hilbert_super as hs
from . import qft
from . import quantization as qz
from . import starproduct as st
from . import supersymplectic as ss
from . import supertorus as tor
from .scalars import exact, is_exact, to_complex

SUITES = ("grassmann", "symplectic", "hilbert", "star", "quantization", "clifford", "torus", "qft")

# default tolerance per check family; overridable with --tol-<name>
TOLERANCES = {
    "exact": 1e-12,
    "structural": 1e-12,
    "trace": 1e-6,
    "homomorphism": 1e-3,
    "adjoint": 1e-10,
    "operator": 1e-8,
    "resolution": 1e-3,
    "berezin": 1e-3,
    "qft-numeric": 1e-4,
    "by-parts": 1e-8,
    "associativity": 1e-5,
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    suite: str = "all"
    m: int = 2
    n: int = 1
    a0: float = 1.0
    alpha: complex = 1.0 + 0j
    grid: int = 64
    extent: float = 8.0
    tolerances: dict = field(default_factory=dict)
    json_path: str | None = None
    exact: bool = True
    parallel: bool = False

    def validate(self) -> "RunConfig":
        if self.suite != "all" and self.suite not in SUITES:
            raise ConfigError(f"unknown suite {self.suite!r}")
        if self.n < 0:
            raise ConfigError("n must be non-negative")
        if self.m < 0 or self.m % 2:
            raise ConfigError("m must be even")
        if self.grid < 2 or self.grid & (self.grid - 1):
            raise ConfigError("grid size must be a power of two")
        if self.extent <= 0:
            raise ConfigError("extent must be positive")
        if self.a0 == 0:
            raise ConfigError("a0 must be nonzero")
        if self.alpha == 0 or self.alpha == -1:
            raise ConfigError("alpha must avoid 0 and -1")
        for k, v in self.tolerances.items():
            if k not in TOLERANCES:
                raise ConfigError(f"unknown tolerance {k!r}")
            if not v > 0:
                raise ConfigError(f"tolerance {k} must be positive")
        return self

    def tol(self, name: str) -> float:
        return self.tolerances.get(name, TOLERANCES[name])

    def deform_params(self) -> st.DeformParams:
        if self.exact:
            re = Fraction(str(self.alpha.real))
            im = Fraction(str(self.alpha.imag))
            return st.DeformParams(exact(Fraction(str(self.a0))), exact((re, im)), self.m)
        return st.DeformParams(float(self.a0), complex(self.alpha), self.m)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["alpha"] = [self.alpha.real, self.alpha.imag]
        d.pop("parallel")
        return d


@dataclass
class CheckRecord:
    name: str
    anchor: str
    status: str
    measured: object
    expected: object
    tolerance: float
    runtime: float
    diagnostic: str | None = None

    @property
    def passed(self) -> bool:
        return self.status == "pass"


def _clean(v):
    """JSON-friendly, rounded form of a measured value."""
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if is_exact(v):
        return [str(v.x), str(v.y)]
    if isinstance(v, (float, np.floating)):
        return float(f"{float(v):.10g}")
    if isinstance(v, (complex, np.complexfloating)):
        return [float(f"{v.real:.10g}"), float(f"{v.imag:.10g}")]
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    return str(v)


def run_check(name: str, anchor: str, tol: float, fn: Callable[[], tuple]) -> CheckRecord:
    """fn returns (passed, measured, expected) or (passed, measured, expected, diagnostic)."""
    t0 = time.perf_counter()
    caught: list = []
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            out = fn()
        passed, measured, expected = out[:3]
        diag = out[3] if len(out) > 3 else None
        msgs = sorted({str(w.message) for w in caught})
        if msgs:
            diag = "; ".join(([diag] if diag else []) + msgs)
        status = "pass" if passed else "fail"
    except Exception as exc:  # a crashing check is a failing check
        status, measured, expected, diag = "error", None, None, f"{type(exc).__name__}: {exc}"
    return CheckRecord(name, anchor, status, _clean(measured), _clean(expected), tol,
                       round(time.perf_counter() - t0, 4), diag)


def _within(measured: float, tol: float) -> bool:
    return bool(np.isfinite(measured)) and measured <= tol


# ---------------------------------------------------------------- grassmann

def suite_grassmann(cfg: RunConfig) -> list[CheckRecord]:
    top_n = max(4, cfg.n)

    def eps_axioms():
        bad = 0
        for n in range(top_n + 1):
            full = gr.full_mask(n)
            for I, J, K in product(range(1 << n), repeat=3):
                if I & J or J & K or I & K:
                    continue
                bad += gr.eps(I, J | K) != gr.eps(I, J) * gr.eps(I, K)
                bad += gr.eps(I, J) != (-1) ** (gr.size(I) * gr.size(J)) * gr.eps(J, I)
            bad += any(gr.eps(I, I) for I in range(1, full + 1))
        return bad == 0, bad, 0

    def associativity():
        bad = 0
        for n in range(top_n + 1):
            basis = [gr.GrassmannElement.basis(n, I, exact(1)) for I in range(1 << n)]
            for a, b, c in product(basis, repeat=3):
                bad += (a * b) * c != a * (b * c)
        return bad == 0, bad, 0

    def hodge_table():
        bad = 0
        for n in range(top_n + 1):
            for I in range(1 << n):
                C = gr.complement(I, n)
                e = gr.GrassmannElement.basis(n, I, exact(1))
                want = gr.GrassmannElement.basis(n, I, exact(gr.eps(I, C) * gr.eps(C, I)))
                bad += gr.hodge(gr.hodge(e)) != want
        return bad == 0, bad, 0

    def pairing_relation():
        rng = random.Random(7)
        bad = 0
        for n in range(top_n + 1):
            for _ in range(20):
                a = gr.GrassmannElement(n, {I: exact((rng.randint(-3, 3), rng.randint(-3, 3))) for I in range(1 << n)})
                b = gr.GrassmannElement(n, {I: exact((rng.randint(-3, 3), rng.randint(-3, 3))) for I in range(1 << n)})
                bad += gr.pos_scal(a, b) != gr.super_scal(a, gr.hodge(b))
        return bad == 0, bad, 0

    def fourier_unit():
        params = cfg.deform_params()
        worst = 0.0
        for n in range(top_n + 1):
            one = gr.GrassmannElement.scalar(n, params.a0 / params.a0)
            got = gr.odd_fourier(one, params.alpha, params.a0)
            r1 = (1j * cfg.a0) ** n * (-1) ** (n * (n + 1) // 2)
            want = r1 * complex(cfg.alpha) ** n
            worst = max(worst, abs(to_complex(got[gr.full_mask(n)]) - want), float(len(got) != 1))
        return worst <= cfg.tol("exact"), worst, 0.0

    a = "supersymmetric exterior calculus"
    return [
        run_check("eps_axioms", f"{a}: eps(I,J u K)=eps(I,J)eps(I,K), graded symmetry, n<={top_n}", 0.0, eps_axioms),
        run_check("product_associativity", f"{a}: (ab)c = a(bc) on basis triples, n<={top_n}", 0.0, associativity),
        run_check("hodge_square", f"{a}: **theta^I = eps(I,I^c)eps(I^c,I) theta^I", 0.0, hodge_table),
        run_check("positive_vs_super_pairing", f"{a}: (a,b) = <a,*b>", 0.0, pairing_relation),
        run_check("odd_fourier_of_one", f"{a}: F_alpha(1) = r1 alpha^n xi^top", cfg.tol("exact"), fourier_unit),
    ]


# ---------------------------------------------------------------- supersymplectic

def suite_symplectic(cfg: RunConfig) -> list[CheckRecord]:
    def exact_forms():
        forms = [
            ([[0, 1], [-1, 0]], [[2]]),
            ([[0, 3], [-3, 0]], [[2, 0], [0, -2]]),
            ([[0, 1, 2, 0], [-1, 0, 0, 5], [-2, 0, 0, 1], [0, -5, -1, 0]], [[1, 2], [2, 1]]),
        ]
        bad = 0
        for E, O in forms:
            f = ss.GradedForm.from_blocks([[Fraction(v) for v in r] for r in E], [[Fraction(v) for v in r] for r in O])
            res = ss.basis_residual(f, ss.darboux_basis(f))
            bad += any(v != 0 for v in res)
        return bad == 0, bad, 0

    def float_forms():
        rng = np.random.default_rng(11)
        worst = 0.0
        for _ in range(20):
            A = rng.normal(size=(4, 4))
            S = rng.normal(size=(3, 3))
            f = ss.GradedForm.from_blocks(A - A.T, S + S.T, exact=False)
            worst = max(worst, ss.basis_residual(f, ss.darboux_basis(f)))
        return worst <= cfg.tol("structural"), worst, 0.0

    def signature_invariance():
        rng = np.random.default_rng(12)
        O = np.diag([2.0, 2.0, -2.0])
        E = np.array([[0.0, 1.0], [-1.0, 0.0]])
        sigs = set()
        for _ in range(100):
            P = rng.normal(size=(3, 3)) + 3 * np.eye(3)
            f = ss.GradedForm.from_blocks(E, P.T @ O @ P, exact=False)
            sigs.add(ss.darboux_basis(f).signature)
        return sigs == {(2, 1)}, sorted(sigs), [(2, 1)]

    def group_laws():
        form = ss.GradedForm.from_blocks([[0, 1], [-1, 0]], [[2]])
        rng = random.Random(13)

        def rand_el():
            N = ss.DEFAULT_SOURCES
            x = tuple(ss.supernumber(rng.randint(-3, 3), {0b0011: rng.randint(-2, 2)}, N) for _ in range(2))
            xi = (ss.supernumber(0, None, N) + gr.GrassmannElement(N, {0b0001: exact(rng.randint(-2, 2)),
                                                                      0b0100: exact(rng.randint(-2, 2))}),)
            a = ss.supernumber(rng.randint(-3, 3), {0b0110: rng.randint(-2, 2)}, N)
            return ss.HeisenbergElement(x, xi, a)

        bad = 0
        for _ in range(30):
            g, h, k = rand_el(), rand_el(), rand_el()
            bad += ss.heis_mul(ss.heis_mul(g, h, form), k, form) != ss.heis_mul(g, ss.heis_mul(h, k, form), form)
            bad += ss.heis_mul(g, g.inverse(), form) != ss.HeisenbergElement.identity(2, 1)
            zeta = ((ss.supernumber(1), ss.supernumber(2)), (ss.supernumber(0),), ss.supernumber(3))
            gh = ss.heis_mul(g, h, form)
            bad += ss.coadjoint(gh, zeta) != ss.coadjoint(g, ss.coadjoint(h, zeta))
        return bad == 0, bad, 0

    a = "even supersymplectic forms"
    return [
        run_check("darboux_exact", f"{a}: B^T W B = canonical block (rational)", 0.0, exact_forms),
        run_check("darboux_float", f"{a}: ||B^T W B - canonical|| (floating)", cfg.tol("structural"), float_forms),
        run_check("signature_invariance", f"{a}: odd signature under 100 congruences", 0.0, signature_invariance),
        run_check("heisenberg_group_laws", f"{a}: associativity, inverses, coadjoint action", 0.0, group_laws),
    ]


# ---------------------------------------------------------------- hilbert_super

def _random_homogeneous(H: hs.HilbertSuper, degree: int, rng) -> np.ndarray:
    T = rng.normal(size=(H.dim, H.dim)) + 1j * rng.normal(size=(H.dim, H.dim))
    same = (H.grading[:, None] + H.grading[None, :]) % 2 == 0
    return np.where(same if degree == 0 else ~same, T, 0)


def suite_hilbert(cfg: RunConfig) -> list[CheckRecord]:
    spaces = [hs.exterior_space(k) for k in range(1, 4)]
    spaces.append(hs.tensor_superspace(hs.exterior_space(1), hs.exterior_space(1)))
    spaces.append(hs.tensor_superspace(hs.exterior_space(2), hs.exterior_space(1)))

    def defj():
        worst = max(H.defj_residual() for H in spaces)
        return worst <= cfg.tol("structural"), worst, 0.0

    def pairing():
        rng = np.random.default_rng(21)
        worst = 0.0
        for i in range(100):
            H = spaces[i % len(spaces)]
            deg = i % 2
            T = _random_homogeneous(H, deg, rng)
            worst = max(worst, hs.adjoint_defect(H, T, deg, hs.superadjoint(H, T, deg), rng, trials=4))
        return worst <= cfg.tol("structural"), worst, 0.0

    def norms():
        rng = np.random.default_rng(22)
        worst = 0.0
        for i in range(100):
            H = spaces[i % len(spaces)]
            T = _random_homogeneous(H, i % 2, rng)
            nT = H.opnorm(T)
            worst = max(worst, abs(H.opnorm(hs.superadjoint(H, T, i % 2)) - nT) / nT,
                        abs(H.opnorm(H.hilbert_adjoint(T)) - nT) / nT)
        return worst <= cfg.tol("structural"), worst, 0.0

    def cstar():
        count = 0
        for k in range(1, 4):
            H = hs.exterior_space(k)
            gens = [(hs.left_mult(k, I), gr.parity(I), hs.left_mult(k, I)) for I in range(1 << k)]
            rep = hs.cstar_super_check(H, gens)
            count += len(rep.violations)
        return count == 0, count, 0

    a = "Hilbert superspaces"
    return [
        run_check("defj_invariants", f"{a}: J^2, J*, unitarity, degree of J", cfg.tol("structural"), defj),
        run_check("superadjoint_pairing", f"{a}: <T^dag x, y> = (-1)^(|T||x|) <x, T y>, 100 operators",
                  cfg.tol("structural"), pairing),
        run_check("superadjoint_norm", f"{a}: ||T^dag|| = ||T*|| = ||T||, 100 operators", cfg.tol("structural"), norms),
        run_check("exterior_cstar_axioms", f"{a}: superinvolution axioms for left multiplications", 0.0, cstar),
    ]


# ---------------------------------------------------------------- starproduct

def _gaussian_components(lat: st.Lattice, n: int, seed: int) -> dict:
    rng = np.random.default_rng(seed)
    X, Y = lat.mesh()
    comps = {}
    for I in range(1 << n):
        c = rng.normal(size=2) @ [1, 1j]
        cx, cy = rng.uniform(-1, 1, size=2)
        comps[I] = c * np.exp(-((X - cx) ** 2 + (Y - cy) ** 2) / rng.uniform(0.8, 1.6))
    return comps


def suite_star(cfg: RunConfig) -> list[CheckRecord]:
    params = cfg.deform_params()
    n = cfg.n
    tol_x = cfg.tol("exact")

    def crosscheck():
        if params.is_exact:
            ok = all(lambda_eq(k) for k in range(n + 1))
            return ok, 0.0 if ok else 1.0, 0.0
        worst = max(st.lambda_bruteforce(k, params).max_abs_diff(st.lambda_closedform(k, params)) for k in range(n + 1))
        return worst <= tol_x, worst, 0.0

    def lambda_eq(k):
        return dict(st.lambda_bruteforce(k, params).table) == dict(st.lambda_closedform(k, params).table)

    def table_one():
        lam = st.lambda_closedform(1, params)
        want = 1j * complex(cfg.alpha) / (cfg.a0 * (1 + complex(cfg.alpha)) ** 2)
        got = {k: to_complex(v) for k, v in lam.table.items()}
        expect = {(0, 0): 1, (0, 1): 1, (1, 0): 1, (1, 1): want}
        worst = max(abs(got[k] - v) for k, v in expect.items())
        return worst <= tol_x, got[(1, 1)], want

    def table_two():
        lam = st.lambda_closedform(2, params)
        q = 1j * complex(cfg.alpha) / (cfg.a0 * (1 + complex(cfg.alpha)) ** 2)
        expect = {(0b01, 0b10): 1, (0b10, 0b01): -1, (0b01, 0b01): q, (0b10, 0b10): q,
                  (0b11, 0b11): -q * q, (0b01, 0b11): q, (0b11, 0b01): -q, (0b00, 0b11): 1}
        worst = max(abs(to_complex(lam.coeff(*k)) - v) for k, v in expect.items())
        return worst <= tol_x, worst, 0.0

    def clifford():
        bad = []
        for k in range(1, 6):
            _, b = cf.clifford_relations(k, params)
            bad += b
        return not bad, len(bad), 0

    def moyal_commutator():
        x1, x2 = sp.symbols("x1 x2")
        th = sp.Rational(1) if params.is_exact else params.theta
        P1, P2 = sp.Poly(x1, x1, x2), sp.Poly(x2, x1, x2)
        c = st.moyal_poly(P1, P2, th) - st.moyal_poly(P2, P1, th)
        got = c.as_expr()
        inner = []
        for mu in (1, 2):
            xt = st.tilde_coordinate(mu - 1, (x1, x2), th)
            for nu, P in ((1, P1), (2, P2)):
                br = (st.moyal_poly(xt, P, th) - st.moyal_poly(P, xt, th)) * (-sp.I / 2)
                inner.append(sp.simplify(br.as_expr() - (1 if mu == nu else 0)))
        ok = sp.simplify(got - sp.I * th) == 0 and all(v == 0 for v in inner)
        return ok, str(got), str(sp.I * th)

    def poly_associativity():
        x1, x2 = sp.symbols("x1 x2")
        rng = random.Random(31)
        bad = 0
        for k in (1, 2):
            for _ in range(3):
                fs = []
                for _ in range(3):
                    comps = {I: sum(rng.randint(-2, 2) * x1 ** i * x2 ** j for i in range(3) for j in range(3 - i))
                             for I in range(1 << k)}
                    fs.append(st.poly_superfunction(k, (x1, x2), comps))
                f, g, h = fs
                lhs = st.super_star(st.super_star(f, g, params), h, params)
                rhs = st.super_star(f, st.super_star(g, h, params), params)
                bad += any((lhs.component(I) - rhs.component(I)).as_expr().expand() != 0 for I in range(1 << k))
        return bad == 0, bad, 0

    lat = st.Lattice.centered(cfg.grid, cfg.extent)
    fp = params.float_copy()

    def tracial():
        f = st.grid_superfunction(2, lat, _gaussian_components(lat, 2, 41))
        g = st.grid_superfunction(2, lat, _gaussian_components(lat, 2, 42))
        a = st.supertrace_fn(st.super_star(f, g, fp))
        b = st.supertrace_fn(f.undeformed(g))
        rel = abs(a - b) / abs(b)
        return rel <= cfg.tol("trace"), rel, 0.0

    def cyclic():
        f = st.grid_superfunction(2, lat, _gaussian_components(lat, 2, 43))
        g = st.grid_superfunction(2, lat, _gaussian_components(lat, 2, 44))
        d = abs(st.twisted_trace(st.super_star(f, g, fp)) - st.twisted_trace(st.super_star(g, f, fp)))
        return d <= cfg.tol("trace"), d, 0.0

    a = "graded deformed product"
    return [
        run_check("lambda_crosscheck", f"{a}: closed-form Lambda = brute-force Berezin integral, n<={n}", tol_x, crosscheck),
        run_check("table_n1", f"{a}: n=1 table, Lambda(xi,xi) = i alpha/(a0(1+alpha)^2)", tol_x, table_one),
        run_check("table_n2", f"{a}: n=2 table, f1*g2 - f2*g1 and powers of the square", tol_x, table_two),
        run_check("clifford_normalized", f"{a}: rescaled generators satisfy Cl(n,C), n<=5", 0.0, clifford),
        run_check("moyal_inner_derivation", f"{a}: [x1,x2] = i theta, [-(i/2)x~_mu, x^nu] = delta", 0.0,
                  moyal_commutator),
        run_check("polynomial_associativity", f"{a}: (f*g)*h = f*(g*h), degree<=2, n<=2", 0.0, poly_associativity),
        run_check("tracial_identity", f"{a}: |int f*g - int fg| / |int fg|, n=2", cfg.tol("trace"), tracial),
        run_check("twisted_trace_cyclic", f"{a}: |tr(f*g) - tr(g*f)|, n=2", cfg.tol("trace"), cyclic),
    ]


# ---------------------------------------------------------------- quantization

def _symbol_pair(model: qz.GridModel):
    X, W = model.mesh()
    fc = {0: np.exp(-(X ** 2 + W ** 2)), }
    gc = {0: np.exp(-((X + 0.4) ** 2 + (W - 0.2) ** 2) / 0.8)}
    if model.n:
        top = gr.full_mask(model.n)
        fc[1] = 0.5 * np.exp(-((X - 0.5) ** 2 + (W + 0.3) ** 2))
        gc[top] = (0.3 + 0.2j) * np.exp(-(X ** 2 + (W - 0.5) ** 2))
    return model.superfunction(fc), model.superfunction(gc)


def _truncation_diagnostic(model: qz.GridModel, *fns) -> str | None:
    tails = [st.boundary_mass(v) for f in fns for v in f.components.values() if np.any(v)]
    tail = max(tails, default=0.0)
    if tail > 1e-8:
        return (f"truncation: symbol tail {tail:.2e} at the boundary of the grid "
                f"(N={model.N}, L={model.L}); enlarge --grid/--extent")
    return None


def suite_quantization(cfg: RunConfig) -> list[CheckRecord]:
    if cfg.m != 2:
        return [CheckRecord("grid_model", "grid model has one position and one momentum axis", "error",
                            None, None, 0.0, 0.0, f"m={cfg.m} is not supported by the grid model (m=2 only)")]
    model = qz.GridModel(n=cfg.n, N=cfg.grid, L=cfg.extent, a0=cfg.a0, alpha=cfg.alpha)
    tol_op = cfg.tol("operator")
    phi = np.exp(-model.x ** 2 / 2)
    x_pt, w_pt = model.h * (model.N // 8), model.hw * 3

    def sigma_square():
        S = qz.sigma_op(model)
        d = qz.relative_error(S @ S, model.r * np.eye(model.dim))
        return d <= tol_op, d, 0.0

    # the superadjoint conjugates the deformation parameter; for real alpha it is the same model
    conj_model = qz.GridModel(n=cfg.n, N=cfg.grid, L=cfg.extent, a0=cfg.a0, alpha=complex(cfg.alpha).conjugate())

    def sigma_adjoint():
        S = qz.sigma_op(model)
        d = qz.relative_error(qz.superadjoint_op(model, S, model.n % 2), qz.sigma_op(conj_model))
        return d <= cfg.tol("adjoint"), d, 0.0

    def omega_square():
        O = qz.omega_point(model, x_pt, w_pt)
        d = qz.relative_error(O @ O, model.r * np.eye(model.dim))
        return d <= tol_op, d, 0.0

    def symmetric_law():
        y, v = -model.h * (model.N // 16), model.hw * 2
        A, B = qz.omega_point(model, x_pt, w_pt), qz.omega_point(model, y, v)
        C = qz.omega_point(model, *qz.reflect_point(x_pt, w_pt, y, v))
        d = qz.relative_error(A @ B @ A, model.r * C)
        return d <= tol_op, d, 0.0

    def k_class():
        xc, wc = model.h * 2, model.hw_coherent
        d = max(qz.relative_error(qz.omega_point_group(model, xc, wc, a), qz.omega_point_group(model, xc, wc, 0.0))
                for a in (0.3, 1.7))
        return d <= tol_op, d, 0.0

    def unitarity():
        rng = np.random.default_rng(51)
        H = model.space
        worst = 0.0
        for _ in range(100):
            s = int(rng.integers(-model.N // 4, model.N // 4))
            k = int(rng.integers(-model.N // 4, model.N // 4))
            U = qz.induced_rep(model, s * model.h, k * model.hw_coherent, float(rng.normal()))
            x = rng.normal(size=model.dim) + 1j * rng.normal(size=model.dim)
            y = rng.normal(size=model.dim) + 1j * rng.normal(size=model.dim)
            p0 = hs.super_pairing(H, x, y)
            worst = max(worst, abs(hs.super_pairing(H, U @ x, U @ y) - p0) / max(1.0, abs(p0)))
        return worst <= cfg.tol("adjoint"), worst, 0.0

    f, g = _symbol_pair(model)
    diag = _truncation_diagnostic(model, f, g)

    def homomorphism():
        fg = st.super_star(f, g, model.params)
        Of, Og = qz.omega_fn(model, f, check_decay=False), qz.omega_fn(model, g, check_decay=False)
        d = qz.relative_error(qz.omega_fn(model, fg, check_decay=False), Of @ Og)
        return d <= cfg.tol("homomorphism"), d, 0.0, diag

    def involution():
        Of = qz.omega_fn(model, f, check_decay=False)
        fbar = conj_model.superfunction({I: np.conj(v) for I, v in f.components.items()})
        d = qz.relative_error(qz.omega_fn(conj_model, fbar, check_decay=False), qz.superadjoint_op(model, Of))
        return d <= cfg.tol("adjoint"), d, 0.0, diag

    def unit():
        defects = [qz.unit_defect(qz.GridModel(n=cfg.n, N=cfg.grid, L=L, a0=cfg.a0, alpha=cfg.alpha))
                   for L in (6.0, 8.0, 10.0)]
        ok = defects[0] > defects[1] > defects[2] and defects[-1] <= cfg.tol("homomorphism")
        return ok, defects, "strictly decreasing in L", _truncation_diagnostic(model, qz.truncated_unit(model))

    def unit_at_config():
        d = qz.unit_defect(model)
        diagnostic = None
        if d > cfg.tol("homomorphism"):
            diagnostic = (f"truncation: Omega(1) misses the identity by {d:.2e} on N={model.N}, L={model.L}; "
                          "enlarge --grid/--extent")
        return d <= cfg.tol("homomorphism"), d, 0.0, diagnostic

    def resolution():
        top = gr.full_mask(model.n)
        _, _, C, dev = qz.resolution_check(model, phi, model.state({top: phi}))
        want = model.resolution_constant()
        err = max(dev, abs(C - want) / abs(want))
        d = None if err <= cfg.tol("resolution") else _truncation_diagnostic(
            model, model.superfunction({0: np.outer(phi, np.ones(model.N))}))
        return err <= cfg.tol("resolution"), C, want, d

    def trace_independence():
        X, W = model.mesh()
        T = qz.omega_fn(model, model.superfunction({gr.full_mask(model.n): np.exp(-(X ** 2 + W ** 2))}),
                        check_decay=False)
        t1 = qz.supertrace_op(model, T, phi)
        t2 = qz.supertrace_op(model, T, np.exp(-(model.x - 0.5) ** 2) * (1 + 0.3 * model.x))
        t3 = qz.kernel_supertrace(model, T)
        d = max(abs(t1 - t2), abs(t1 - t3)) / max(abs(t3), 1e-300)
        return d <= cfg.tol("resolution"), t1, t3

    def berezin():
        X, W = model.mesh()
        fe = model.superfunction({0: np.exp(-(X ** 2 + W ** 2) / 2)})
        worst = 0.0
        got = []
        for beta in (0.0, complex(cfg.alpha) / 2):
            val = qz.berezin_transform(model, fe, 0.0, 0.0, beta) / qz.berezin_prefactor(model, beta, 0)
            got.append(val)
            worst = max(worst, abs(val - 1.0))
        return worst <= cfg.tol("berezin"), got, [1.0, 1.0], _truncation_diagnostic(model, fe)

    a = "grid quantization map"
    return [
        run_check("sigma_square", f"{a}: Sigma^2 = r id", tol_op, sigma_square),
        run_check("sigma_superadjoint", f"{a}: Sigma_alpha^dag = Sigma_conj(alpha) (superadjoint on the grid space)",
                  cfg.tol("adjoint"), sigma_adjoint),
        run_check("omega_point_square", f"{a}: Omega(z)^2 = r id", tol_op, omega_square),
        run_check("symmetric_space_law", f"{a}: Omega(z)Omega(z')Omega(z) = r Omega(2z - z')", tol_op, symmetric_law),
        run_check("central_invariance", f"{a}: Omega(g) independent of the central coordinate", tol_op, k_class),
        run_check("induced_rep_unitary", f"{a}: <U x, U y> = <x, y>, 100 group elements", cfg.tol("adjoint"), unitarity),
        run_check("homomorphism", f"{a}: Omega(f*g) = Omega(f)Omega(g)", cfg.tol("homomorphism"), homomorphism),
        run_check("involution", f"{a}: Omega_conj(alpha)(conj f) = Omega_alpha(f)^dag", cfg.tol("adjoint"), involution),
        run_check("unit_monotone", f"{a}: Omega(1) -> id as L = 6, 8, 10", cfg.tol("homomorphism"), unit),
        run_check("unit_at_grid", f"{a}: ||Omega(1) phi - phi|| on the configured grid", cfg.tol("homomorphism"),
                  unit_at_config),
        run_check("resolution_of_identity", f"{a}: sum_z <phi_z,psi> phi_z = C ||phi||^2 psi, C = r0 r1 2^(m/2) (-1)^n",
                  cfg.tol("resolution"), resolution),
        run_check("supertrace_reference_independence", f"{a}: tr(T) independent of the reference state, = C int K(q,q)",
                  cfg.tol("resolution"), trace_independence),
        run_check("berezin_transform", f"{a}: tr(Omega(f)Omega(z1)F_beta) = r1((alpha-beta)/(1+alpha))^n f(z1)",
                  cfg.tol("berezin"), berezin),
    ]


# ---------------------------------------------------------------- clifford_fine

def suite_clifford(cfg: RunConfig) -> list[CheckRecord]:
    params = cfg.deform_params()

    def cocycles():
        bad = sum(not cf.is_factor_set(cf.sigma_clifford(k))[0] for k in range(5))
        return bad == 0, bad, 0

    def perturbed():
        s = cf.sigma_clifford(2)
        table = dict(s.sigma)
        table[(1, 2)] = -table[(1, 2)]
        ok, witness = cf.is_factor_set(cf.FactorSet(2, table))
        return (not ok) and witness is not None, witness, "violating triple"

    def symmetric_trivial():
        bad = 0
        rng = random.Random(61)
        for k in range(1, 4):
            rho = {a: complex(rng.choice([1, -1, 2, 1j])) for a in range(1 << k)}
            rho[0] = 1
            const = cf.constant_factor_set(k)
            sym = cf.FactorSet(k, {(a, b): cf.coboundary_ratio(rho.__getitem__, a, b)
                                   for a in range(1 << k) for b in range(1 << k)})
            bad += cf.search_equivalence(const, sym) is None
        bad += cf.search_equivalence(cf.constant_factor_set(2), cf.sigma_clifford(2)) is not None
        return bad == 0, bad, 0

    def star_equivalence():
        verdicts = {}
        for k in range(1, 5):
            lam = st.lambda_closedform(k, params)
            for branch in (0, 1):
                verdicts[f"n={k},branch={branch}"] = cf.factor_set_from_star(lam, params, branch).ok
        return all(verdicts.values()), sum(verdicts.values()), len(verdicts)

    a = "Clifford factor sets"
    return [
        run_check("clifford_cocycle", f"{a}: sigma_Cl(n) is a factor set, n<=4", 0.0, cocycles),
        run_check("perturbed_cocycle", f"{a}: negated entry is detected with a witness", 0.0, perturbed),
        run_check("symmetric_is_trivial", f"{a}: symmetric factor sets are coboundaries, sigma_Cl(2) is not", 0.0,
                  symmetric_trivial),
        run_check("star_equivalent_to_clifford", f"{a}: Lambda ~ sigma_Cl via rho(I), both root branches, n<=4",
                  cfg.tol("exact"), star_equivalence),
    ]


# ---------------------------------------------------------------- supertorus

def suite_torus(cfg: RunConfig) -> list[CheckRecord]:
    golden = Fraction(987, 1597)
    thetas = [Fraction(0), Fraction(1, 4), Fraction(1, 3), golden]

    def commutation():
        worst = 0.0
        exps = []
        for th in thetas:
            e, ratio = tor.commutation_factor(th)
            exps.append(str(e))
            worst = max(worst, abs(ratio - np.exp(2j * np.pi * float(th))))
            if e != 2 * th:
                return False, exps, [str(2 * t) for t in thetas]
        return worst <= cfg.tol("exact"), exps, [str(2 * t) for t in thetas], f"phase deviation {worst:.2e}"

    def relations():
        p = tor.TorusParams(Fraction(1, 3))
        U, V, odd = tor.generators(2, p)
        one = tor.TorusElement.unit(2, p)
        xi, eta = odd
        bad = 0
        bad += tor.torus_star(xi, xi).coeffs != one.coeffs
        bad += tor.torus_star(eta, eta).coeffs != one.coeffs
        bad += tor.torus_star(xi, eta).coeffs != (-tor.torus_star(eta, xi)).coeffs
        for e in (U, V):
            for o in odd:
                bad += tor.torus_star(e, o).coeffs != tor.torus_star(o, e).coeffs
        return bad == 0, bad, 0

    def degeneration():
        rng = random.Random(71)
        p = tor.TorusParams(0, alpha=1.0, basis="raw")
        bad = 0
        for _ in range(50):
            f = tor.TorusElement(2, p, {(rng.randint(-2, 2), rng.randint(-2, 2), rng.randint(0, 3)): rng.randint(-3, 3)
                                        for _ in range(3)})
            g = tor.TorusElement(2, p, {(rng.randint(-2, 2), rng.randint(-2, 2), rng.randint(0, 3)): rng.randint(-3, 3)
                                        for _ in range(3)})
            bad += tor.torus_star(f, g).coeffs != tor.undeformed_product(f, g).coeffs
        return bad == 0, bad, 0

    def sup_norms():
        p = tor.TorusParams(Fraction(1, 3))
        U, V, odd = tor.generators(2, p)
        got = [tor.sup_norm(U), tor.sup_norm(U + V),
               tor.sup_norm(tor.torus_star(U, odd[0]) + tor.torus_star(V, odd[1]))]
        worst = max(abs(x - y) for x, y in zip(got, [1, 2, 2]))
        return worst <= cfg.tol("structural"), got, [1, 2, 2]

    a = "quantum supertorus"
    return [
        run_check("commutation_factor", f"{a}: V*U = e^(2 pi i theta) U*V, four theta values", cfg.tol("exact"),
                  commutation),
        run_check("odd_relations", f"{a}: xi*xi = 1, xi*eta = -eta*xi, even-odd commute", 0.0, relations),
        run_check("theta_zero", f"{a}: theta = 0 gives the supercommutative product", 0.0, degeneration),
        run_check("sup_norm", f"{a}: sup norm of modes, U+V, U xi + V eta", cfg.tol("structural"), sup_norms),
    ]


# ---------------------------------------------------------------- qft

def suite_qft(cfg: RunConfig) -> list[CheckRecord]:
    def bracket():
        reps = [qft.verify_bracket_identity(mu) for mu in (1, 2)]
        return all(r.ok for r in reps), [r.status for r in reps], ["pass", "pass"], \
            "; ".join(r.diff for r in reps if not r.ok) or None

    def square():
        r = qft.verify_square_identity()
        return r.ok, r.status, "pass", None if r.ok else r.diff

    def action():
        r = qft.verify_action_identity()
        return r.ok, r.status, "pass", None if r.ok else r.diff

    def confluence():
        rng = random.Random(81)
        bad = 0
        for _ in range(200):
            e = qft.random_expr(rng)
            ref = qft.rewrite_linear_star(e)
            bad += not (qft.rewrite_linear_star(e, random.Random(rng.random())) - ref).is_zero()
        return bad == 0, bad, 0

    def numeric():
        rep = qft.numeric_crosscheck()
        return rep.deviation <= cfg.tol("qft-numeric"), rep.deviation, 0.0

    def by_parts():
        r = qft.by_parts_residual()
        return r <= cfg.tol("by-parts"), r, 0.0

    a = "phi^4 on the deformed superplane"
    return [
        run_check("bracket_identity", f"{a}: [-(i/2)x~ eta, phi eta] = a^2 d phi + 2ab d phi xi + c x~ phi", 0.0,
                  bracket),
        run_check("square_identity", f"{a}: (phi eta)*(phi eta) = (a^2 + 2ab xi + q) phi*phi", 0.0, square),
        run_check("action_identity", f"{a}: super action = a^4 x harmonic action", 0.0, action),
        run_check("rewrite_confluence", f"{a}: normal forms independent of rule order, 200 expressions", 0.0,
                  confluence),
        run_check("numeric_crosscheck", f"{a}: grid evaluation of both sides", cfg.tol("qft-numeric"), numeric),
        run_check("by_parts_axiom", f"{a}: int phi x~_mu d_mu phi = 0 on a Gaussian", cfg.tol("by-parts"), by_parts),
    ]


SUITE_FUNCTIONS = {
    "grassmann": suite_grassmann,
    "symplectic": suite_symplectic,
    "hilbert": suite_hilbert,
    "star": suite_star,
    "quantization": suite_quantization,
    "clifford": suite_clifford,
    "torus": suite_torus,
    "qft": suite_qft,
}


def run_one(name: str, cfg: RunConfig) -> list[CheckRecord]:
    return [_prefixed(name, r) for r in SUITE_FUNCTIONS[name](cfg)]


def _prefixed(suite: str, rec: CheckRecord) -> CheckRecord:
    rec.name = f"{suite}.{rec.name}"
    return rec


def run_suite(cfg: RunConfig) -> list[CheckRecord]:
    cfg.validate()
    names = list(SUITES) if cfg.suite == "all" else [cfg.suite]
    if cfg.parallel and len(names) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=min(len(names), 4)) as pool:
            results = list(pool.map(run_one, names, [cfg] * len(names)))
    else:
        results = [run_one(nm, cfg) for nm in names]
    return [r for batch in results for r in batch]


def report_dict(cfg: RunConfig, records: list[CheckRecord]) -> dict:
    return {
        "config": cfg.as_dict(),
        "status": "pass" if all(r.passed for r in records) else "fail",
        "checks": [asdict(r) for r in records],
    }
