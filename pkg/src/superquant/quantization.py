"""Grid realisation of the induced representation and the quantization map.

Model: one even axis x (Q) and its dual w (W), n odd generators, so M has
coordinates (x, xi, w).  States live on an N-point x-lattice tensored with
Lambda R^n; vector index j * 2^n + mask.

Lattices
  states:      x_j = (j - N/2) h, h = 2L/N, periodic, so x -> -x is j -> -j mod N
  symbols:     the same x_j, and w_l = (l - N/2) hw with hw = pi / (a0 N h)
  coherent z:  x on integer multiples of h, w step 2 pi / (a0 N h)

With these choices the w-sums in the quantization formula and in the
coherent-state integrals are exact discrete Fourier sums, and periodic wrap
of the shifts is phase neutral.

Omega(f) and Omega(z) for z on the lattice never mix even and odd x-indices,
so the grid carries two copies of the representation (one per parity class).
Operator traces of such operators count both copies; ``LATTICE_MULTIPLICITY``
removes that double count where a continuum trace is wanted.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .grassmann import (
    GrassmannElement,
    berezin_bank,
    eps,
    exp_nilpotent,
    full_mask,
    odd_fourier_matrix,
    size,
)
from .hilbert_super import HilbertSuper, exterior_space, superadjoint, tensor_superspace, trivial_even_space
from .starproduct import DeformParams, Lattice, SuperFunction, boundary_mass, write_grid_blocks, read_grid_blocks
from .scalars import to_complex

LATTICE_MULTIPLICITY = 2


@dataclass(frozen=True)
class GridModel:
    n: int = 1
    N: int = 64
    L: float = 8.0
    a0: float = 1.0
    alpha: complex = 1.0
    m: int = 2

    def __post_init__(self):
        if self.m != 2:
            raise NotImplementedError("the grid model has one position and one momentum axis (m = 2)")
        if self.N < 2 or self.N & (self.N - 1):
            raise ValueError("N must be a power of two")
        if self.L <= 0 or self.n < 0:
            raise ValueError("invalid extent or odd dimension")
        DeformParams(float(self.a0), complex(self.alpha), self.m)

    # parameters
    @cached_property
    def params(self) -> DeformParams:
        return DeformParams(float(self.a0), complex(self.alpha), self.m)

    @property
    def gamma(self) -> complex:
        return self.params.gamma(self.n)

    @property
    def r(self) -> complex:
        return self.params.r(self.n)

    @property
    def r1(self) -> complex:
        return to_complex(self.params.r1(self.n))

    def resolution_constant(self) -> complex:
        """C = r0 r1 2^{m/2} (-1)^n."""
        return self.params.r0() * self.r1 * 2 ** (self.m / 2) * (-1) ** self.n

    # lattices
    @property
    def h(self) -> float:
        return 2.0 * self.L / self.N

    @cached_property
    def x(self) -> np.ndarray:
        return (np.arange(self.N) - self.N // 2) * self.h

    @property
    def hw(self) -> float:
        return math.pi / (self.a0 * self.N * self.h)

    @cached_property
    def w(self) -> np.ndarray:
        return (np.arange(self.N) - self.N // 2) * self.hw

    @property
    def hw_coherent(self) -> float:
        return 2 * math.pi / (self.a0 * self.N * self.h)

    @cached_property
    def w_coherent(self) -> np.ndarray:
        return (np.arange(self.N) - self.N // 2) * self.hw_coherent

    @cached_property
    def symbol_lattice(self) -> Lattice:
        return Lattice((self.N, self.N), (self.h, self.hw), (float(self.x[0]), float(self.w[0])))

    @property
    def symbol_poisson(self) -> np.ndarray:
        """Phase matrix of the Moyal product in the (x, w) axis order."""
        return np.array([[0, -1], [1, 0]])

    @property
    def odd_dim(self) -> int:
        return 1 << self.n

    @property
    def dim(self) -> int:
        return self.N * self.odd_dim

    @cached_property
    def space(self) -> HilbertSuper:
        return tensor_superspace(trivial_even_space(self.N, np.full(self.N, self.h)), exterior_space(self.n))

    # helpers
    def state(self, comps: dict) -> np.ndarray:
        """Vector from {mask: samples on the x-lattice}."""
        v = np.zeros((self.N, self.odd_dim), dtype=complex)
        for I, s in comps.items():
            v[:, I] = s
        return v.ravel()

    def components(self, vec: np.ndarray) -> np.ndarray:
        return np.asarray(vec).reshape(self.N, self.odd_dim)

    def norm2(self, vec) -> float:
        return float(self.h * np.sum(np.abs(vec) ** 2))

    def superfunction(self, comps: dict) -> SuperFunction:
        return SuperFunction(self.n, "grid", {I: np.asarray(v, dtype=complex) for I, v in comps.items()},
                             self.symbol_lattice, self.symbol_poisson)

    def mesh(self):
        return np.meshgrid(self.x, self.w, indexing="ij")

    def odd_operator(self, block: np.ndarray) -> np.ndarray:
        return np.kron(np.eye(self.N), block)

    def snap(self, x: float) -> int:
        s = int(round(x / self.h))
        if abs(s * self.h) > self.L + 1e-12:
            raise ValueError(f"shift {x} exceeds the extent {self.L}")
        return s


# ---------------------------------------------------------------- group action and Sigma

def odd_fourier_block(model: GridModel, beta) -> np.ndarray:
    M = odd_fourier_matrix(model.n, complex(beta), float(model.a0))
    return np.array([[to_complex(v) for v in row] for row in M], dtype=complex)


def odd_fourier_op(model: GridModel, beta) -> np.ndarray:
    return model.odd_operator(odd_fourier_block(model, beta))


def induced_rep(model: GridModel, x: float = 0.0, w: float = 0.0, a: float = 0.0) -> np.ndarray:
    """(U(g) phi)(x0) = e^{i a0 (a + (x - x0) w)} phi(x0 - x), x snapped to a multiple of h.

    Group elements are body valued, so the odd coordinates vanish and U acts
    trivially on the Grassmann factor.  Periodic wrap is phase neutral only for
    w on the coherent lattice (multiples of 2 pi / (a0 N h)).
    """
    _check_on_lattice(w, model.hw_coherent, "w")
    s = model.snap(x)
    xs = s * model.h
    N = model.N
    phase = np.exp(1j * model.a0 * (a + (xs - model.x) * w))
    P = np.zeros((N, N), dtype=complex)
    P[np.arange(N), (np.arange(N) - s) % N] = phase
    return np.kron(P, np.eye(model.odd_dim))


def _check_on_lattice(v: float, step: float, name: str):
    k = v / step
    if abs(k - round(k)) > 1e-9:
        warnings.warn(f"{name} = {v} is off the lattice of step {step:.6g}; wrapped entries pick up a phase")


def group_inverse(x: float, w: float, a: float = 0.0) -> tuple[float, float, float]:
    """Inverse of q.b (q = x, b = (w, a)) written again as q'.b'."""
    return -x, -w, -a - x * w


def sigma_op(model: GridModel) -> np.ndarray:
    """(Sigma phi)(x0, xi0) = gamma int dxi1 e^{-(i a0 alpha/2) w1(xi1, xi0)} phi(-x0, xi1)."""
    N = model.N
    flip = np.zeros((N, N))
    flip[np.arange(N), (N - np.arange(N)) % N] = 1
    return model.gamma * np.kron(flip, odd_fourier_block(model, model.alpha))


def omega_point_group(model: GridModel, x: float, w: float, a: float = 0.0) -> np.ndarray:
    """Omega(z) = U(z) Sigma U(z^{-1})."""
    xi, wi, ai = group_inverse(x, w, a)
    return induced_rep(model, x, w, a) @ sigma_op(model) @ induced_rep(model, xi, wi, ai)


def omega_point(model: GridModel, x: float, w: float) -> np.ndarray:
    """Explicit form: gamma e^{2 i a0 (x - x0) w} (F_alpha phi)(2x - x0) for body-valued z.

    x may be any multiple of h/2; centres on the lattice itself preserve the
    parity class of the x-index, as Omega(f) does.
    """
    _check_on_lattice(w, model.hw, "w")
    t = int(round(2 * x / model.h))
    if abs(t * model.h / 2) > model.L + 1e-12:
        raise ValueError(f"point {x} lies outside the extent {model.L}")
    xs = t * model.h / 2
    N = model.N
    j = np.arange(N)
    src = (t - j) % N
    P = np.zeros((N, N), dtype=complex)
    P[j, src] = np.exp(2j * model.a0 * (xs - model.x) * w)
    return model.gamma * np.kron(P, odd_fourier_block(model, model.alpha))


def reflect_point(x: float, w: float, y: float, v: float) -> tuple[float, float]:
    """s_z(z') = z sigma(z^{-1} z') on M: the point reflection 2z - z'."""
    return 2 * x - y, 2 * w - v


# ---------------------------------------------------------------- Omega(f)

def odd_kernel(model: GridModel) -> dict[tuple[int, int], GrassmannElement]:
    """G_{I,J}(xi0) = int dxi [xi^I int dxi1 e^{i a0 (xi.xi0 - alpha xi1.xi0 - (alpha+1) xi.xi1)} (xi + xi1)^J].

    Banks: xi0 -> generators 1..n, xi -> n+1..2n, xi1 -> 2n+1..3n.
    """
    n = model.n
    a0 = complex(model.a0)
    al = complex(model.alpha)
    N3 = 3 * n
    top = full_mask(n)
    bank_xi, bank_xi1 = top << n, top << (2 * n)

    def gen(bank: int, k: int) -> GrassmannElement:
        return GrassmannElement.generator(N3, bank * n + k + 1, 1.0 + 0j)

    X = GrassmannElement(N3)
    for k in range(n):
        X = X + (gen(1, k) * gen(0, k)).scale(1j * a0)
        X = X + (gen(2, k) * gen(0, k)).scale(-1j * a0 * al)
        X = X + (gen(1, k) * gen(2, k)).scale(-1j * a0 * (al + 1))
    E = exp_nilpotent(X)
    out = {}
    for J in range(1 << n):
        shifted = GrassmannElement.scalar(N3, 1.0 + 0j)
        for k in range(n):
            if (J >> k) & 1:
                shifted = shifted * (gen(1, k) + gen(2, k))
        inner = berezin_bank(E * shifted, bank_xi1)
        for I in range(1 << n):
            lhs = GrassmannElement.basis(N3, I << n, 1.0 + 0j)
            G = berezin_bank(lhs * inner, bank_xi)
            out[(I, J)] = G
    return out


def even_kernel(model: GridModel, samples: np.ndarray) -> np.ndarray:
    """A[j0, j] with (A phi)(x0) = sum_x h sum_w hw f(x, w) e^{2 i a0 (x - x0) w} phi(2x - x0).

    The w-sum is a DFT: 2 a0 (x_k - x_j) w_l = 2 pi (k - j)(l - N/2)/N.
    """
    N = model.N
    f = np.asarray(samples, dtype=complex)
    # B[k, d] = hw sum_l f[k, l] e^{2 pi i d (l - N/2) / N}, d = k - j mod N
    d = np.arange(N)
    B = model.hw * N * np.fft.ifft(f, axis=1) * np.exp(-1j * np.pi * d)[None, :]
    A = np.zeros((N, N), dtype=complex)
    j0 = np.arange(N)
    for k in range(N):
        src = (2 * k - j0) % N
        A[j0, src] += model.h * B[k, (k - j0) % N]
    return A


def omega_fn(model: GridModel, f: SuperFunction, check_decay: bool = True) -> np.ndarray:
    """Omega(f) = gamma sum_{I,J} A_{f_I} (x) [xi0^J -> G_{I,J}]."""
    if f.kind != "grid" or f.meta != model.symbol_lattice:
        raise ValueError("symbol must live on the model's symbol lattice")
    if check_decay:
        for I, v in f.components.items():
            if np.any(v):
                tail = boundary_mass(v)
                if tail > 1e-8:
                    warnings.warn(f"symbol component {I} not decaying (tail {tail:.2e})")
    G = odd_kernel(model)
    D = model.odd_dim
    out = np.zeros((model.dim, model.dim), dtype=complex)
    for I, samples in f.components.items():
        if not np.any(samples):
            continue
        A = even_kernel(model, samples)
        block = np.zeros((D, D), dtype=complex)
        for J in range(D):
            for K, c in G[(I, J)].items():
                block[K, J] += c
        out += np.kron(A, block)
    return model.gamma * out


# ---------------------------------------------------------------- coherent states, trace

def odd_phase_coefficients(model: GridModel) -> np.ndarray:
    """a_J with e^{i a0 xi.xi0} = sum_J a_J xi^J xi0^J."""
    n = model.n
    out = np.zeros(1 << n, dtype=complex)
    for J in range(1 << n):
        d = size(J)
        out[J] = (1j * model.a0) ** d * (-1) ** (d * (d - 1) // 2)
    return out


def coherent_even(model: GridModel, phi: np.ndarray) -> np.ndarray:
    """Columns u_z(x0) = e^{i a0 (x - x0) w} phi(x0 - x) for every coherent lattice point z."""
    N = model.N
    cols = np.empty((N, N * N), dtype=complex)
    j = np.arange(N)
    for s in range(N):
        xs = (s - N // 2) * model.h
        shifted = phi[(j - (s - N // 2)) % N]
        phase = np.exp(1j * model.a0 * np.outer(xs - model.x, model.w_coherent))
        cols[:, s * N:(s + 1) * N] = phase * shifted[:, None]
    return cols


def resolution_check(model: GridModel, phi: np.ndarray, psi: np.ndarray):
    """sum_z <phi_z, psi> phi_z against C ||phi||^2 psi.

    phi_z = sum_J xi^J v_J with v_J = a_J xi0^J (x) u_z; after the Berezin
    integral over xi the left side is sum_J (-1)^{|J| n} eps(J, J^c) <v_J, psi> v_{J^c}.
    Returns (lhs, rhs, measured C, relative deviation).
    """
    nrm = model.norm2(phi)
    if nrm == 0:
        raise ValueError("reference function has zero norm")
    n, D = model.n, model.odd_dim
    a = odd_phase_coefficients(model)
    U = coherent_even(model, np.asarray(phi, dtype=complex))
    psi_c = model.components(psi)
    top = full_mask(n)
    lhs = np.zeros((model.N, D), dtype=complex)
    weight = model.h * model.hw_coherent
    for J in range(D):
        K = top ^ J
        sgn = (-1) ** (size(J) * n) * eps(J, K)
        # <xi0^J (x) u, psi> = eps(J, K) h sum conj(u) psi_K  (Hodge maps J to K)
        pair = eps(J, K) * model.h * (np.conj(U).T @ psi_c[:, K]) * np.conj(a[J])
        lhs[:, K] += sgn * weight * a[K] * (U @ pair)
    C = model.resolution_constant()
    rhs = C * nrm * psi_c
    measured = np.vdot(rhs.ravel(), lhs.ravel()) / np.vdot(rhs.ravel(), rhs.ravel()) * C
    dev = float(np.linalg.norm(lhs - rhs) / np.linalg.norm(rhs))
    return lhs.ravel(), rhs.ravel(), complex(measured), dev


def supertrace_op(model: GridModel, T: np.ndarray, phi: np.ndarray, degree: int = 0) -> complex:
    """tr(T) = ||phi||^-2 sum_z <phi_z, T phi_z> with the xi-Berezin integral taken exactly.

    Term (J, K = J^c) carries eps(J, K) (-1)^{|T||K| + |J||K| + n n}.
    """
    nrm = model.norm2(phi)
    if nrm == 0:
        raise ValueError("reference function has zero norm")
    n, D, N = model.n, model.odd_dim, model.N
    a = odd_phase_coefficients(model)
    U = coherent_even(model, np.asarray(phi, dtype=complex))
    T4 = T.reshape(N, D, N, D)
    top = full_mask(n)
    total = 0j
    weight = model.h * model.hw_coherent
    for J in range(D):
        K = top ^ J
        sgn = (-1) ** (degree * size(K) + size(J) * size(K) + n * n) * eps(J, K)
        block = T4[:, K, :, K]
        # <v_J, T v_K> = conj(a_J) a_K eps(J, K) h u^H T_KK u
        quad = np.sum(np.conj(U) * (block @ U))
        total += sgn * np.conj(a[J]) * a[K] * eps(J, K) * model.h * quad
    return complex(weight * total / nrm)


def kernel_supertrace(model: GridModel, T: np.ndarray) -> complex:
    """C int dq K(q, q): the diagonal of the integral kernel, Berezin-integrated."""
    D, N = model.odd_dim, model.N
    T4 = T.reshape(N, D, N, D)
    s = sum((-1) ** size(A) * np.trace(T4[:, A, :, A]) for A in range(D))
    return complex(model.resolution_constant() * s)


def berezin_transform(model: GridModel, f: SuperFunction, x1: float, w1: float, beta,
                      phi: np.ndarray | None = None, degree: int = 0) -> complex:
    """tr(Omega(f) Omega(z1) F_beta) for a body point z1, per copy of the representation."""
    if abs(complex(beta) - complex(model.alpha)) == 0:
        warnings.warn("beta = alpha: the Berezin transform vanishes identically")
        return 0j
    if phi is None:
        phi = np.exp(-model.x ** 2 / 2)
    T = omega_fn(model, f) @ omega_point(model, x1, w1) @ odd_fourier_op(model, beta)
    return supertrace_op(model, T, phi, degree) / LATTICE_MULTIPLICITY


def berezin_prefactor(model: GridModel, beta, degree: int = 0) -> complex:
    al = complex(model.alpha)
    return model.r1 * ((al - complex(beta)) / (1 + al)) ** model.n * (-1) ** (model.n * degree)


# ---------------------------------------------------------------- checks

def relative_error(A: np.ndarray, B: np.ndarray) -> float:
    return float(np.linalg.norm(A - B, 2) / max(np.linalg.norm(B, 2), 1e-300))


def superadjoint_op(model: GridModel, T: np.ndarray, degree: int | None = None) -> np.ndarray:
    return superadjoint(model.space, T, degree)


def truncated_unit(model: GridModel, width: float = 0.6, power: int = 8) -> SuperFunction:
    """Unit symbol cut off smoothly in x at |x| ~ width L (the finite domain).

    The w-range is the Nyquist band of the x-lattice, not a truncation of the
    domain, so the symbol is left constant along w.
    """
    X, _ = model.mesh()
    return model.superfunction({0: np.exp(-(X / (width * model.L)) ** power).astype(complex)})


def unit_defect(model: GridModel, probe: np.ndarray | None = None) -> float:
    """||Omega(1_L) phi - phi|| / ||phi|| for the truncated unit and a fixed Gaussian probe."""
    if probe is None:
        probe = np.exp(-(model.x - 0.5) ** 2)
    v = model.state({0: probe})
    out = omega_fn(model, truncated_unit(model), check_decay=False) @ v
    return math.sqrt(model.norm2(out - v) / model.norm2(v))


# ---------------------------------------------------------------- dumps

def model_params(model: GridModel) -> dict:
    al = complex(model.alpha)
    return {"m": model.m, "n": model.n, "N": model.N, "L": model.L, "a0": model.a0,
            "alpha": [al.real, al.imag]}


def save_operator(T: np.ndarray, model: GridModel, path, degree: int | None = None) -> None:
    """Same header as grid functions (x-lattice and n), then the matrix row-major."""
    lat = Lattice((model.N,), (model.h,), (float(model.x[0]),))
    side = {"kind": "operator", "block_shape": list(T.shape), "degree": degree,
            "params": model_params(model), "index": "j * 2^n + subset-mask"}
    write_grid_blocks(path, model.n, lat, [T], side)


def load_operator(path) -> tuple[np.ndarray, GridModel, int | None]:
    n, _, blocks, side = read_grid_blocks(path)
    if side.get("kind") != "operator" or len(blocks) != 1:
        raise ValueError("file does not hold an operator")
    p = side["params"]
    model = GridModel(n=p["n"], N=p["N"], L=p["L"], a0=p["a0"], alpha=complex(*p["alpha"]), m=p["m"])
    return blocks[0], model, side.get("degree")
