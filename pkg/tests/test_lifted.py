import numpy as np
import pytest

from complexamp.amp import centered_functions, run_centered_amp, run_recovery
from complexamp.core import ProblemConfig, generate_instance, trial_rng
from complexamp.denoisers import DenoiserSpec
from complexamp.harness import lift_verification, matrix_lift_verification
from complexamp.lifted import (RHO, build_admissible_pair, check_matrix_identities, collapse_E,
                               collapse_H, encode_Q, lift_features, lift_matrix,
                               matrix_collapse_operators, properness_samples, run_complex_matrix_amp,
                               run_lifted_amp, verify_proposition1, wirtinger_row_jacobian_average)
from complexamp.se import relation_coefficient


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def sgl_pair(seed, n=10, N=20, T=5):
    cfg = ProblemConfig(N=N, G=2, delta=n / N, rho=0.5, r_ga=0.5, snr_db=20)
    inst = generate_instance(cfg, trial_rng(seed, 0))
    spec = DenoiserSpec()
    f, g = centered_functions(inst, spec, run_recovery(inst, "AMP", spec, T).tau_hat_per_iter)
    return inst, f, g


def test_lift_scalar_example():
    sys = lift_matrix(np.array([[1 + 2j]]))
    assert np.array_equal(sys.W, [[1.0], [2.0]])
    assert np.array_equal(sys.R, [[1, 1j]])
    assert np.array_equal(sys.R @ sys.W, [[1 + 2j]])


def test_lift_random_exact():
    A = crandn(np.random.default_rng(0), 3, 5)
    sys = lift_matrix(A)
    assert np.max(np.abs(sys.R @ sys.W - A)) == 0
    assert np.array_equal(sys.W[2], A[1].real) and np.array_equal(sys.W[3], A[1].imag)


def test_identity_block_collapses_to_zero():
    assert collapse_E(np.eye(2))[0, 0] == 0
    assert RHO @ np.eye(2) @ RHO == 0


def test_admissible_pair_examples():
    ident = lambda k, x: x
    f_real, g_real = build_admissible_pair(ident, ident)
    Q = g_real(0, np.array([[1.0, 0.0], [0.0, 0.0]]))
    assert np.array_equal(Q, [[1, 0], [0, -1]])
    M = f_real(0, np.array([[3.0, 4.0]]))
    assert np.array_equal(M, [[3, 4]])


def test_admissible_block_identity():
    rng = np.random.default_rng(1)
    gc = lambda k, v: np.tanh(v) + 0.3 * np.conj(v)
    _, g_real = build_admissible_pair(lambda k, u: u, gc)
    E = rng.standard_normal((8, 2))
    Q = g_real(0, E)
    gv = gc(0, collapse_E(E)[:, 0])
    assert np.max(np.abs(Q.reshape(-1, 2, 2) @ RHO - gv[:, None] * RHO.conj())) <= 1e-14


def test_collapse_operators_base():
    RR, RL = matrix_collapse_operators(1, 1)
    assert np.array_equal(RR, [[1, 1j]])
    assert np.array_equal(RL, [[1], [1j]])


def test_matrix_identities():
    rng = np.random.default_rng(2)
    for _ in range(20):
        A, X = crandn(rng, 4, 6), crandn(rng, 6, 3)
        dev = check_matrix_identities(A, X)
        assert dev["RR_W"] == 0 and dev["S_RL"] == 0
        assert dev["RR_P_RL"] <= 1e-12


def test_lift_features_round_trip():
    X = crandn(np.random.default_rng(3), 5, 2)
    assert np.array_equal(collapse_H(lift_features(X)), X)
    # encode_Q then collapse gives (a - (-a)) + i(b + b) = 2 g
    assert np.allclose(collapse_E(encode_Q(X)), 2 * X)


def test_lifted_zero_f():
    rng = np.random.default_rng(4)
    sys = lift_matrix(crandn(rng, 3, 5))
    zero = lambda k, H: np.zeros_like(H)
    g = lambda k, E: encode_Q(collapse_E(E)[:, 0] + 1.0)
    it = run_lifted_amp(sys, zero, g, rng.standard_normal((5, 2)), 3)
    for k in range(3):
        assert not np.any(it.E_seq[k])
        assert np.allclose(it.H_seq[k + 1], sys.W.T @ it.Q_seq[k])


def test_lifted_identity_transcription():
    rng = np.random.default_rng(5)
    A = crandn(rng, 2, 2)
    ident = lambda k, x: x
    fr, gr = build_admissible_pair(ident, ident)
    H0 = rng.standard_normal((2, 2))
    it = run_lifted_amp(lift_matrix(A), fr, gr, H0, 2)

    # hand transcription: m = 4, f is the identity on H so B = (N/m) I;
    # each 2x2 block of g has identity Jacobian row by row so C = I.
    W = np.vstack([A.real[0], A.imag[0], A.real[1], A.imag[1]])
    B = (2 / 4) * np.eye(2)
    C = np.eye(2)
    H, Qp = H0, np.zeros((4, 2))
    for k in range(2):
        M = H
        E = W @ M - Qp @ B.T
        v = (E[0::2, 0] - E[1::2, 1]) + 1j * (E[0::2, 1] + E[1::2, 0])
        Q = np.zeros((4, 2))
        Q[0::2, 0], Q[0::2, 1], Q[1::2, 0], Q[1::2, 1] = v.real, v.imag, v.imag, -v.real
        H = W.T @ Q - M @ C.T
        assert np.allclose(it.E_seq[k], E, atol=1e-9)
        assert np.allclose(it.H_seq[k + 1], H, atol=1e-9)
        Qp = Q


def test_proposition1_base_case():
    inst, f, g = sgl_pair(0)
    res = verify_proposition1(inst.A, f, g, -inst.x0, 0)
    assert res.deviation == 0


def test_proposition1_small_sgl():
    inst, f, g = sgl_pair(1)
    res = verify_proposition1(inst.A, f, g, -inst.x0, 5)
    assert res.relative <= 1e-10


def test_proposition1_linear_exact_jacobians():
    rng = np.random.default_rng(6)
    n, N, c = 20, 40, 0.5
    A = crandn(rng, n, N) / np.sqrt(n)
    lin = lambda k, x: (c * x, c)
    m = 2 * n
    res = verify_proposition1(A, lin, lin, crandn(rng, N), 10,
                              f_jac=lambda k, H: c * (N / m) * np.eye(2),
                              g_jac=lambda k, E: c * np.eye(2))
    assert res.deviation <= 1e-13


def test_admissibility_along_orbit():
    inst, f, g = sgl_pair(7)
    res = verify_proposition1(inst.A, f, g, -inst.x0, 5)
    for Q in res.lifted.Q_seq:
        b = Q.reshape(-1, 2, 2)
        assert np.max(np.abs(b[:, 0, 0] + b[:, 1, 1]) + np.abs(b[:, 0, 1] - b[:, 1, 0])) <= 1e-12


@pytest.mark.parametrize("seed", range(50))
def test_lemma1_random_instances(seed):
    checks = lift_verification(seed, n=10, N=20, T=5)
    failed = [c.line() for c in checks if not c.passed]
    assert not failed


def test_check_report_format():
    line = lift_verification(0, n=10, N=20, T=2)[0].line()
    name, dev, tol, verdict = line.split()
    assert name == "lemma1_i_RW" and float(dev) == 0 and float(tol) == 1e-12 and verdict == "pass"


def test_matrix_amp_p1_matches_centered():
    inst, f, g = sgl_pair(8)
    n, N = inst.A.shape
    f_mat = lambda k, U: f(k, U[:, 0])[0][:, None]
    g_mat = lambda k, V: g(k, V[:, 0])[0][:, None]

    f_jac = lambda k, U: np.array([[f(k, U[:, 0])[1] * N / n]])
    g_jac = lambda k, V: np.array([[g(k, V[:, 0])[1]]])
    orbit = run_complex_matrix_amp(inst.A, f_mat, g_mat, -inst.x0[:, None], 5, f_jac=f_jac, g_jac=g_jac)
    cen = run_centered_amp(inst.A, f, g, -inst.x0, 5)
    for U, u in zip(orbit.U_seq, cen.u_seq):
        assert np.max(np.abs(U[:, 0] - u)) <= 1e-12
    for s, v in zip(orbit.states, cen.v_seq):
        assert np.max(np.abs(s.V[:, 0] - v)) <= 1e-12


def test_identity_jacobian_exact():
    V = crandn(np.random.default_rng(9), 6, 3)
    K = wirtinger_row_jacobian_average(lambda X: X, V, 1.0 / 6)
    assert np.allclose(K, np.eye(3), rtol=0, atol=1e-12)


def test_onsager_transpose_convention_matters():
    rng = np.random.default_rng(10)
    n, N, p = 10, 20, 2
    A = crandn(rng, n, N) / np.sqrt(n)
    Mf = crandn(rng, p, p)
    Mg = crandn(rng, p, p)
    f_mat = lambda k, U: U @ Mf
    g_mat = lambda k, V: V @ Mg
    U0 = crandn(rng, N, p)
    fr, gr = build_admissible_pair(f_mat, g_mat)
    lifted = run_lifted_amp(lift_matrix(A), fr, gr, lift_features(U0), 4)

    def deviation(Lm, Km):
        orbit = run_complex_matrix_amp(A, f_mat, g_mat, U0, 4, f_jac=lambda k, U: Lm,
                                       g_jac=lambda k, V: Km)
        return max(np.max(np.abs(collapse_H(H) - U)) / (1 + np.max(np.abs(U)))
                   for H, U in zip(lifted.H_seq, orbit.U_seq))

    # d(U Mf)_{d,a} / dU_{d,b} = Mf[b, a], so the averaged Jacobian is (N/n) Mf^T
    assert deviation((N / n) * Mf.T, Mg.T) <= 1e-9
    assert deviation((N / n) * Mf, Mg) > 1e-3


def test_matrix_lift_verification_passes():
    checks = matrix_lift_verification(0)
    assert all(c.passed for c in checks), [c.line() for c in checks]


def test_properness_of_collapsed_blocks():
    rng = np.random.default_rng(11)
    T_cov = np.array([[2.0, 0.9], [0.9, 0.7]])
    z = properness_samples(T_cov, 20_000, rng)
    sq = z * z
    se = np.std(sq) / np.sqrt(sq.size)
    assert abs(np.mean(sq)) <= 3 * se
    # a single lifted row alone is improper under the same covariance
    rows = rng.standard_normal((20_000, 2)) @ np.linalg.cholesky(T_cov).T
    assert relation_coefficient(rows @ RHO) > 0.3
