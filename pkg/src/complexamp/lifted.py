"""Augmented real matrix AMP and its collapse onto complex AMP.

Every complex n x N matrix A is lifted to a real 2n x N matrix W whose rows
interleave Re and Im of the rows of A. With rho = [1, i]^T and
R = I_n (x) rho^T we have R W = A. Real iterates H (N x 2p) and E (2n x 2p)
collapse to complex ones via U = H R_L and V = R_R E R_L, R_L = I_p (x) rho.
The vector case is p = 1.

This module is a verification engine: Jacobian averages of the real system
are taken by central finite differences, so it is only meant for small sizes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .amp import IndexedFunction, run_centered_amp
from .core import DivergenceError, DomainError

RHO = np.array([1.0, 1.0j])

RealFunction = Callable[[int, np.ndarray], np.ndarray]
ComplexFunction = Callable[[int, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class LiftedSystem:
    W: np.ndarray
    R: np.ndarray
    rho: np.ndarray = field(default_factory=lambda: RHO.copy())

    @property
    def m(self) -> int:
        return self.W.shape[0]

    @property
    def n(self) -> int:
        return self.W.shape[0] // 2

    @property
    def N(self) -> int:
        return self.W.shape[1]


@dataclass
class RealMatIterates:
    H_seq: list[np.ndarray] = field(default_factory=list)
    E_seq: list[np.ndarray] = field(default_factory=list)
    M_seq: list[np.ndarray] = field(default_factory=list)
    Q_seq: list[np.ndarray] = field(default_factory=list)
    B_seq: list[np.ndarray] = field(default_factory=list)
    C_seq: list[np.ndarray] = field(default_factory=list)


@dataclass(frozen=True)
class MatrixAmpState:
    U: np.ndarray
    V: np.ndarray
    F: np.ndarray
    G_mat: np.ndarray
    K: np.ndarray
    L: np.ndarray


@dataclass
class MatrixAmpOrbit:
    states: list[MatrixAmpState]
    U_seq: list[np.ndarray]   # U^0 .. U^T


@dataclass(frozen=True)
class Check:
    name: str
    deviation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.deviation <= self.tolerance)

    def line(self) -> str:
        return f"{self.name} {self.deviation:.6e} {self.tolerance:.1e} {'pass' if self.passed else 'fail'}"


# ---------------------------------------------------------------- encodings

def lift_matrix(A: np.ndarray) -> LiftedSystem:
    A = np.asarray(A, dtype=complex)
    n, N = A.shape
    W = np.empty((2 * n, N))
    W[0::2] = A.real
    W[1::2] = A.imag
    return LiftedSystem(W=W, R=np.kron(np.eye(n), RHO[None, :]))


def matrix_collapse_operators(n: int, p: int) -> tuple[np.ndarray, np.ndarray]:
    if n < 1 or p < 1:
        raise DomainError("n and p must be positive")
    return np.kron(np.eye(n), RHO[None, :]), np.kron(np.eye(p), RHO[:, None])


def lift_features(X: np.ndarray) -> np.ndarray:
    """[Re X_1, Im X_1, ..., Re X_p, Im X_p] for X of shape (N, p) or (N,)."""
    X = np.asarray(X, dtype=complex)
    if X.ndim == 1:
        X = X[:, None]
    S = np.empty((X.shape[0], 2 * X.shape[1]))
    S[:, 0::2] = X.real
    S[:, 1::2] = X.imag
    return S


def collapse_H(H: np.ndarray) -> np.ndarray:
    """H R_L, shape (N, p)."""
    return H[:, 0::2] + 1j * H[:, 1::2]


def collapse_E(E: np.ndarray) -> np.ndarray:
    """R_R E R_L: entry (i, j) is rho^T E^{i,j} rho for the 2x2 block E^{i,j}."""
    e11, e12 = E[0::2, 0::2], E[0::2, 1::2]
    e21, e22 = E[1::2, 0::2], E[1::2, 1::2]
    return (e11 - e22) + 1j * (e12 + e21)


def encode_Q(Gc: np.ndarray) -> np.ndarray:
    """Admissible blocks [[a, b], [b, -a]] with a + ib = Gc[i, j]."""
    Gc = np.asarray(Gc)
    if Gc.ndim == 1:
        Gc = Gc[:, None]
    n, p = Gc.shape
    Q = np.empty((2 * n, 2 * p))
    Q[0::2, 0::2] = Gc.real
    Q[0::2, 1::2] = Gc.imag
    Q[1::2, 0::2] = Gc.imag
    Q[1::2, 1::2] = -Gc.real
    return Q


def build_admissible_pair(f_c: ComplexFunction, g_c: ComplexFunction) -> tuple[RealFunction, RealFunction]:
    """Real encodings of complex families ``f_c(k, u)`` and ``g_c(k, v)``.

    Vector functions (1-D in, 1-D out) give p = 1 encodings; matrix functions
    act on (rows, p) arrays.
    """

    def f_real(k, H):
        U = collapse_H(H)
        F = f_c(k, U[:, 0]) if U.shape[1] == 1 else f_c(k, U)
        return lift_features(F)

    def g_real(k, E):
        V = collapse_E(E)
        Gc = g_c(k, V[:, 0]) if V.shape[1] == 1 else g_c(k, V)
        return encode_Q(Gc)

    return f_real, g_real


# ---------------------------------------------------------------- real matrix AMP

def _steps(x: float, h: float) -> tuple[float, float]:
    """Forward/backward steps actually representable around x."""
    step = h * (1.0 + abs(x))
    return (x + step) - x, x - (x - step)


def row_jacobian_average(func: Callable[[np.ndarray], np.ndarray], X: np.ndarray,
                         m: int, h: float = 1e-6) -> np.ndarray:
    """J[a, b] = (1/m) sum_j d func(X)[j, a] / d X[j, b] by central differences."""
    rows, w = X.shape
    J = np.zeros((w, w))
    for j in range(rows):
        for b in range(w):
            hp, hm = _steps(X[j, b], h)
            Xp = X.copy()
            Xp[j, b] += hp
            Xm = X.copy()
            Xm[j, b] -= hm
            J[:, b] += (func(Xp)[j] - func(Xm)[j]) / (hp + hm)
    return J / m


def run_lifted_amp(sys: LiftedSystem, f_real: RealFunction, g_real: RealFunction,
                   H0: np.ndarray, T: int, h: float = 1e-6,
                   f_jac: Callable | None = None, g_jac: Callable | None = None) -> RealMatIterates:
    """Iterate
        E^k     = W M^k - Q^{k-1} B^T,     Q^k = g^k(E^k)
        H^{k+1} = W^T Q^k - M^k C^T,       M^k = f^k(H^k)
    with B, C the row-wise Jacobian averages normalised by m = 2n, Q^{-1} = 0.
    ``f_jac(k, H)`` / ``g_jac(k, E)`` may supply B, C exactly instead of by
    finite differences.
    """
    W, m = sys.W, sys.m
    H = np.asarray(H0, dtype=float)
    out = RealMatIterates(H_seq=[H])
    Q_prev = np.zeros((m, H.shape[1]))
    for k in range(T):
        M = f_real(k, H)
        B = f_jac(k, H) if f_jac else row_jacobian_average(lambda X: f_real(k, X), H, m, h)
        E = W @ M - Q_prev @ B.T
        Q = g_real(k, E)
        C = g_jac(k, E) if g_jac else row_jacobian_average(lambda X: g_real(k, X), E, m, h)
        H = W.T @ Q - M @ C.T
        if not (np.all(np.isfinite(E)) and np.all(np.isfinite(H))):
            raise DivergenceError(f"non-finite lifted iterate at step {k}", iteration=k)
        out.M_seq.append(M)
        out.B_seq.append(B)
        out.E_seq.append(E)
        out.Q_seq.append(Q)
        out.C_seq.append(C)
        out.H_seq.append(H)
        Q_prev = Q
    return out


# ---------------------------------------------------------------- vector checks

def _wirtinger_scalar(phi: Callable[[complex], complex], z: complex, h: float) -> complex:
    xr, xi = z.real, z.imag
    hp, hm = _steps(xr, h)
    d_re = (phi(complex(xr + hp, xi)) - phi(complex(xr - hm, xi))) / (hp + hm)
    hp, hm = _steps(xi, h)
    d_im = (phi(complex(xr, xi + hp)) - phi(complex(xr, xi - hm))) / (hp + hm)
    return 0.5 * (d_re - 1j * d_im)


def verify_lemma1(sys: LiftedSystem, iterates: RealMatIterates, A: np.ndarray,
                  f_c: IndexedFunction, g_c: IndexedFunction, h: float = 1e-6,
                  alg_tol: float = 1e-12, fd_tol: float = 1e-5) -> list[Check]:
    """Check the canonical-transformation identities along a lifted orbit.

    ``f_c(k, u)`` and ``g_c(k, v)`` return ``(value, mean Wirtinger derivative)``.
    Here u^k, v^k denote the collapses of the lifted iterates themselves, so
    the algebraic identities should hold to rounding. For the derivative
    identities, finite differences in the real coordinates are compared with
    complex finite differences entrywise, and their sums with the analytic
    Onsager means.
    """
    R, W = sys.R, sys.W
    rho = RHO
    names = ("i_RW", "i_Hrho", "i_REre", "i_Mrho", "ii_Qrho", "iii_Qrho", "iii_RQ",
             "iv_dH", "iv_onsager", "v_dE", "v_onsager")
    dev = dict.fromkeys(names, 0.0)
    dev["i_RW"] = float(np.max(np.abs(R @ W - A)))
    fv = lambda k, x: f_c(k, x)[0]
    gv_ = lambda k, x: g_c(k, x)[0]
    for k, E in enumerate(iterates.E_seq):
        H, M, Q = iterates.H_seq[k], iterates.M_seq[k], iterates.Q_seq[k]
        u = collapse_H(H)[:, 0]
        v = collapse_E(E)[:, 0]
        fu, fmean = f_c(k, u)
        gv, gmean = g_c(k, v)
        dev["i_Hrho"] = max(dev["i_Hrho"], np.max(np.abs(H @ rho - u)))
        dev["i_REre"] = max(dev["i_REre"], np.max(np.abs(R @ E @ rho - v)))
        dev["i_Mrho"] = max(dev["i_Mrho"], np.max(np.abs(M @ rho - fu)))
        blocks = Q.reshape(-1, 2, 2)
        dev["ii_Qrho"] = max(dev["ii_Qrho"], np.max(np.abs(blocks @ rho - gv[:, None] * rho.conj())))
        dev["iii_Qrho"] = max(dev["iii_Qrho"], np.max(np.abs(Q @ rho - R.conj().T @ gv)))
        dev["iii_RQ"] = max(dev["iii_RQ"], np.max(np.abs(R @ Q - np.outer(gv, rho.conj()))))

        # (iv): (1/2) rho^H d/dH_i applied to f_i(H rho) equals d f_i / d u_i.
        total = 0.0
        for i in range(H.shape[0]):
            grad = np.zeros(2, dtype=complex)
            for b in range(2):
                hp, hm = _steps(H[i, b], h)
                Hp = H.copy()
                Hp[i, b] += hp
                Hm = H.copy()
                Hm[i, b] -= hm
                grad[b] = (fv(k, Hp @ rho)[i] - fv(k, Hm @ rho)[i]) / (hp + hm)
            lhs = 0.5 * np.vdot(rho, grad)
            total += lhs

            def phi(z, i=i):
                uu = u.copy()
                uu[i] = z
                return fv(k, uu)[i]

            dev["iv_dH"] = max(dev["iv_dH"], abs(lhs - _wirtinger_scalar(phi, u[i], h)))
        dev["iv_onsager"] = max(dev["iv_onsager"], abs(total - len(u) * fmean))

        # (v): (1/2)[d/dE_{i,1,:}, d/dE_{i,2,:}] conj(rho) equals rho d g_i / d v_i.
        total = 0.0
        for i in range(E.shape[0] // 2):
            D = np.zeros((2, 2), dtype=complex)  # column r: gradient wrt row r of the block
            for r in range(2):
                for c in range(2):
                    row = 2 * i + r
                    hp, hm = _steps(E[row, c], h)
                    Ep = E.copy()
                    Ep[row, c] += hp
                    Em = E.copy()
                    Em[row, c] -= hm
                    D[c, r] = (gv_(k, R @ Ep @ rho)[i] - gv_(k, R @ Em @ rho)[i]) / (hp + hm)
            lhs = 0.5 * D @ rho.conj()
            total += lhs[0]

            def psi(z, i=i):
                vv = v.copy()
                vv[i] = z
                return gv_(k, vv)[i]

            dev["v_dE"] = max(dev["v_dE"], np.max(np.abs(lhs - rho * _wirtinger_scalar(psi, v[i], h))))
        dev["v_onsager"] = max(dev["v_onsager"], abs(total - len(v) * gmean))

    tol = {k: (fd_tol if k.startswith(("iv", "v_")) else alg_tol) for k in dev}
    return [Check(f"lemma1_{k}", float(d), tol[k]) for k, d in dev.items()]


@dataclass
class Prop1Result:
    deviation: float          # max_k of raw sup-norm deviation
    relative: float           # max_k of deviation / (1 + ||iterate||_inf)
    lifted: RealMatIterates
    centered: object


def verify_proposition1(A: np.ndarray, f_c: IndexedFunction, g_c: IndexedFunction,
                        u0: np.ndarray, T: int, h: float = 1e-6,
                        f_jac: Callable | None = None, g_jac: Callable | None = None) -> Prop1Result:
    """Run both orbits from matching starts and compare the collapsed lifted iterates."""
    u0 = np.asarray(u0, dtype=complex)
    sys = lift_matrix(A)
    fr, gr = build_admissible_pair(lambda k, u: f_c(k, u)[0], lambda k, v: g_c(k, v)[0])
    H0 = lift_features(u0)
    lifted = run_lifted_amp(sys, fr, gr, H0, T, h, f_jac, g_jac)
    cen = run_centered_amp(A, f_c, g_c, u0, T)
    dev = rel = 0.0
    for k in range(T + 1):
        u = cen.u_seq[k]
        d = np.max(np.abs(lifted.H_seq[k] @ RHO - u))
        dev = max(dev, d)
        rel = max(rel, d / (1.0 + np.max(np.abs(u))))
        if k < T:
            v = cen.v_seq[k]
            d = np.max(np.abs(sys.R @ lifted.E_seq[k] @ RHO - v))
            dev = max(dev, d)
            rel = max(rel, d / (1.0 + np.max(np.abs(v))))
    return Prop1Result(float(dev), float(rel), lifted, cen)


# ---------------------------------------------------------------- matrix AMP

def wirtinger_row_jacobian_average(func: Callable[[np.ndarray], np.ndarray], X: np.ndarray,
                                   scale: float, h: float = 1e-6) -> np.ndarray:
    """J[a, b] = scale * sum_d d func(X)[d, a] / d X[d, b] (Wirtinger), by central differences."""
    rows, p = X.shape
    J = np.zeros((p, p), dtype=complex)
    for d in range(rows):
        for b in range(p):
            x = X[d, b]
            hp, hm = _steps(x.real, h)
            Xp = X.copy()
            Xp[d, b] = complex(x.real + hp, x.imag)
            Xm = X.copy()
            Xm[d, b] = complex(x.real - hm, x.imag)
            d_re = (func(Xp)[d] - func(Xm)[d]) / (hp + hm)
            hp, hm = _steps(x.imag, h)
            Xp = X.copy()
            Xp[d, b] = complex(x.real, x.imag + hp)
            Xm = X.copy()
            Xm[d, b] = complex(x.real, x.imag - hm)
            d_im = (func(Xp)[d] - func(Xm)[d]) / (hp + hm)
            J[:, b] += 0.5 * (d_re - 1j * d_im)
    return scale * J


def run_complex_matrix_amp(A: np.ndarray, f_mat: ComplexFunction, g_mat: ComplexFunction,
                           U0: np.ndarray, T: int, h: float = 1e-6,
                           f_jac: Callable | None = None,
                           g_jac: Callable | None = None) -> MatrixAmpOrbit:
    """Complex matrix AMP with p x p Onsager matrices:

        V^k     = A F^k - G^{k-1} L^T,     G^k = g^k(V^k)
        U^{k+1} = A^H G^k - F^k K^T,       F^k = f^k(U^k)

    K[a, b] = (1/n) sum_{d<n} d g_{d,a} / d V_{d,b} and
    L[a, b] = (1/n) sum_{d<N} d f_{d,a} / d U_{d,b} (Wirtinger derivatives),
    i.e. each row's correction is the averaged Jacobian applied to that row.
    Optional ``f_jac(k, U)`` / ``g_jac(k, V)`` return L, K directly.
    """
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    AH = A.conj().T
    U = np.asarray(U0, dtype=complex)
    p = U.shape[1]
    G_prev = np.zeros((n, p), dtype=complex)
    orbit = MatrixAmpOrbit(states=[], U_seq=[U])
    for k in range(T):
        F = f_mat(k, U)
        L = f_jac(k, U) if f_jac else wirtinger_row_jacobian_average(lambda X: f_mat(k, X), U, 1.0 / n, h)
        V = A @ F - G_prev @ L.T
        Gm = g_mat(k, V)
        K = g_jac(k, V) if g_jac else wirtinger_row_jacobian_average(lambda X: g_mat(k, X), V, 1.0 / n, h)
        orbit.states.append(MatrixAmpState(U=U, V=V, F=F, G_mat=Gm, K=K, L=L))
        U = AH @ Gm - F @ K.T
        if not np.all(np.isfinite(U)):
            raise DivergenceError(f"non-finite matrix AMP iterate at step {k}", iteration=k)
        orbit.U_seq.append(U)
        G_prev = Gm
    return orbit


def verify_proposition2(A: np.ndarray, f_mat: ComplexFunction, g_mat: ComplexFunction,
                        U0: np.ndarray, T: int, h: float = 1e-6) -> tuple[float, float]:
    """Max deviation between collapsed lifted and complex matrix AMP orbits.

    Returns (max |H R_L - U|, max |R_R E R_L - V|) over the orbit.
    """
    sys = lift_matrix(A)
    fr, gr = build_admissible_pair(f_mat, g_mat)
    lifted = run_lifted_amp(sys, fr, gr, lift_features(U0), T, h)
    orbit = run_complex_matrix_amp(A, f_mat, g_mat, U0, T, h)
    du = max(np.max(np.abs(collapse_H(H) - U)) for H, U in zip(lifted.H_seq, orbit.U_seq))
    dv = max(np.max(np.abs(collapse_E(E) - s.V)) for E, s in zip(lifted.E_seq, orbit.states))
    return float(du), float(dv)


def check_matrix_identities(A: np.ndarray, X: np.ndarray) -> dict[str, float]:
    """Deviations of R_R W = A, S R_L = X and R_R (W S) R_L = A X."""
    n, _ = A.shape
    p = X.shape[1]
    RR, RL = matrix_collapse_operators(n, p)
    W = lift_matrix(A).W
    S = lift_features(X)
    P = W @ S
    return {
        "RR_W": float(np.max(np.abs(RR @ W - A))),
        "S_RL": float(np.max(np.abs(S @ RL - X))),
        "RR_P_RL": float(np.max(np.abs(RR @ P @ RL - A @ X))),
    }


def properness_samples(T_cov: np.ndarray, count: int, rng: np.random.Generator) -> np.ndarray:
    """Collapse Gaussian 2x2 blocks whose two rows are i.i.d. N(0, T_cov).

    Each row alone collapses to an improper variable when T_cov is not
    isotropic; the collapsed block v = rho^T E rho is proper regardless.
    """
    Lc = np.linalg.cholesky(np.asarray(T_cov, dtype=float))
    rows = rng.standard_normal((count, 2, 2)) @ Lc.T
    return collapse_E(rows.reshape(2 * count, 2))[:, 0]
