"""Complex AMP, its centered two-function form, and the ISTA baseline."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import DivergenceError, DomainError, ProblemInstance, nmse
from .denoisers import DenoiserKind, DenoiserSpec, denoise

AMP = "AMP"
ISTA = "ISTA"

# f(k, x) -> (f^k(x), <(f^k)'(x)>) where the mean derivative is Wirtinger.
IndexedFunction = Callable[[int, np.ndarray], tuple[np.ndarray, complex]]


@dataclass(frozen=True)
class AmpState:
    x: np.ndarray
    z: np.ndarray
    r_eff: np.ndarray | None = None
    tau_hat: float = 0.0
    onsager_prev: float = 0.0
    t: int = 0
    kind: DenoiserKind | None = None

    @classmethod
    def initial(cls, inst: ProblemInstance) -> "AmpState":
        return cls(x=np.zeros(inst.N, dtype=complex), z=np.zeros(inst.n, dtype=complex))


@dataclass
class Trajectory:
    nmse_per_iter: list[float] = field(default_factory=list)
    tau_hat_per_iter: list[float] = field(default_factory=list)
    final_x: np.ndarray | None = None
    diverged: bool = False
    diverged_at: int | None = None

    def __len__(self):
        return len(self.nmse_per_iter)


@dataclass
class CenteredIterates:
    u_seq: list[np.ndarray] = field(default_factory=list)
    v_seq: list[np.ndarray] = field(default_factory=list)
    b_seq: list[complex] = field(default_factory=list)
    c_seq: list[complex] = field(default_factory=list)


def _check(state: AmpState, inst: ProblemInstance):
    if state.x.shape != (inst.N,) or state.z.shape != (inst.n,):
        raise DomainError("state dimensions do not match the instance")


def _finite(t: int, *arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise DivergenceError(f"non-finite iterate at iteration {t}", iteration=t)


def amp_step(state: AmpState, inst: ProblemInstance, spec: DenoiserSpec) -> AmpState:
    """One pass of residual, effective observation and denoising."""
    _check(state, inst)
    A = inst.A
    with np.errstate(over="ignore", invalid="ignore"):
        z = inst.y - A @ state.x
        if state.onsager_prev != 0.0:
            z = z + (state.onsager_prev / inst.delta) * state.z
        r = state.x + A.conj().T @ z
        tau = float(np.linalg.norm(z) / np.sqrt(inst.n))
        _finite(state.t, z, r, tau)
        kind = spec.kind_at(state.t)
        x, ons = denoise(kind, r, inst.groups, spec.thresholds(tau))
    _finite(state.t, x)
    return AmpState(x=x, z=z, r_eff=r, tau_hat=tau, onsager_prev=ons, t=state.t + 1, kind=kind)


def ista_step_size(A: np.ndarray) -> float:
    """1/L with L = ||A||_2^2, the Lipschitz constant of the data-fit gradient."""
    return 1.0 / np.linalg.norm(A, 2) ** 2


def ista_step(state: AmpState, inst: ProblemInstance, spec: DenoiserSpec,
              step: float | None = None) -> AmpState:
    """Proximal gradient step; thresholds are scaled by the step as usual for ISTA."""
    _check(state, inst)
    if step is None:
        step = ista_step_size(inst.A)
    A = inst.A
    with np.errstate(over="ignore", invalid="ignore"):
        z = inst.y - A @ state.x
        r = state.x + step * (A.conj().T @ z)
        tau = float(np.linalg.norm(z) / np.sqrt(inst.n))
        _finite(state.t, z, r, tau)
        kind = spec.kind_at(state.t)
        x, ons = denoise(kind, r, inst.groups, spec.thresholds(tau).scaled(step))
    _finite(state.t, x)
    return AmpState(x=x, z=z, r_eff=r, tau_hat=tau, onsager_prev=0.0, t=state.t + 1, kind=kind)


def run_recovery(inst: ProblemInstance, algo: str, spec: DenoiserSpec, iters: int,
                 step: float | None = None,
                 callback: Callable[[AmpState], None] | None = None) -> Trajectory:
    """Run ``iters`` iterations from x = 0.

    ``nmse_per_iter[t]`` is the NMSE of x^{t+1} = eta^t(r^t). Divergence does
    not raise: the trajectory stops, is flagged, and keeps the last finite x.
    """
    if iters < 1:
        raise DomainError("iters must be >= 1")
    if not np.any(inst.x0):
        raise DomainError("nmse undefined for zero-norm truth")
    algo = algo.upper()
    if algo not in (AMP, ISTA):
        raise DomainError(f"unknown algorithm {algo!r}")
    if algo == ISTA and step is None:
        step = ista_step_size(inst.A)
    state = AmpState.initial(inst)
    traj = Trajectory(final_x=state.x)
    for _ in range(iters):
        try:
            if algo == AMP:
                state = amp_step(state, inst, spec)
            else:
                state = ista_step(state, inst, spec, step)
        except DivergenceError as err:
            traj.diverged = True
            traj.diverged_at = err.iteration
            break
        traj.nmse_per_iter.append(nmse(state.x, inst.x0))
        traj.tau_hat_per_iter.append(state.tau_hat)
        traj.final_x = state.x
        if callback is not None:
            callback(state)
    return traj


def run_centered_amp(A: np.ndarray, f: IndexedFunction, g: IndexedFunction,
                     u0: np.ndarray, T: int) -> CenteredIterates:
    """Iterate
        v^k     = A f^k(u^k) - b^k g^{k-1}(v^{k-1}),
        u^{k+1} = A^H g^k(v^k) - c^k f^k(u^k),
    with b^k = <(f^k)'>/delta, c^k = <(g^k)'> and g^{-1} = 0.

    Returns u^0..u^T and v^0..v^{T-1}.
    """
    n, N = A.shape
    delta = n / N
    AH = A.conj().T
    out = CenteredIterates(u_seq=[np.asarray(u0, dtype=complex)])
    g_prev = np.zeros(n, dtype=complex)
    for k in range(T):
        u = out.u_seq[-1]
        F, fd = f(k, u)
        b = fd / delta
        v = A @ F - b * g_prev
        Gv, c = g(k, v)
        u_next = AH @ Gv - c * F
        if not (np.all(np.isfinite(v)) and np.all(np.isfinite(u_next))):
            raise DivergenceError(f"non-finite centered iterate at step {k}", iteration=k)
        out.v_seq.append(v)
        out.u_seq.append(u_next)
        out.b_seq.append(b)
        out.c_seq.append(c)
        g_prev = Gv
    return out


def centered_functions(inst: ProblemInstance, spec: DenoiserSpec,
                       tau_hats: Sequence[float]) -> tuple[IndexedFunction, IndexedFunction]:
    """The substitution that turns composite AMP into the centered form.

    f^0(u) = -x0 (so that x^0 = 0), f^t(u) = eta^{t-1}(x0 - u) - x0, and
    g^t(v) = v - w. Thresholds of eta^{t-1} come from ``tau_hats[t-1]`` so the
    functions are fixed in advance.
    """
    x0, w, groups = inst.x0, inst.w, inst.groups

    def f(k, u):
        if k == 0:
            return -x0.copy(), 0.0
        tau = tau_hats[k - 1]
        est, ons = denoise(spec.kind_at(k - 1), x0 - u, groups, spec.thresholds(tau))
        return est - x0, -ons

    def g(k, v):
        return v - w, 1.0

    return f, g


def state_from_centered(inst: ProblemInstance, it: CenteredIterates):
    """Map centered iterates back: r^t = x0 - u^{t+1}, z^t = w - v^t."""
    r = [inst.x0 - u for u in it.u_seq[1:]]
    z = [inst.w - v for v in it.v_seq]
    return r, z

