"""Scalar complex state evolution, evaluated by Monte Carlo."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .core import DivergenceError, DomainError, ProblemConfig, sample_complex_gaussian, sample_signal
from .denoisers import DenoiserSpec, GroupStructure, apply_denoiser

# denoiser(t, R, tau) -> estimate, R of shape (mc, N)
SeDenoiser = Callable[[int, np.ndarray, float], np.ndarray]


@dataclass(frozen=True)
class SeConfig:
    problem: ProblemConfig
    schedule: DenoiserSpec = field(default_factory=DenoiserSpec)
    mc_samples: int = 100
    N_se: int | None = None

    def __post_init__(self):
        if self.mc_samples < 1:
            raise DomainError("mc_samples must be >= 1")

    @property
    def prior(self) -> ProblemConfig:
        """Problem used for MC draws: same ratios, dimension N_se."""
        if self.N_se is None or self.N_se == self.problem.N:
            return self.problem
        return replace(self.problem, N=self.N_se)

    @property
    def sigma_w2(self) -> float:
        return self.problem.sigma_w2

    @property
    def delta(self) -> float:
        return self.problem.n / self.problem.N


@dataclass
class SeTrajectory:
    tau_sq: list[float] = field(default_factory=list)
    nmse_pred: list[float] = field(default_factory=list)
    tau_sq_stderr: list[float] = field(default_factory=list)
    nmse_stderr: list[float] = field(default_factory=list)
    diverged_at: int | None = None


def se_tau0(cfg: SeConfig) -> float:
    """tau_0^2 = sigma_w^2 + (k/N)/delta, exact for the unit-modulus prior."""
    p = cfg.problem
    return cfg.sigma_w2 + (p.k / p.N) / cfg.delta


def _library_denoiser(cfg: SeConfig) -> SeDenoiser:
    spec = cfg.schedule
    prior = cfg.prior
    groups = GroupStructure(prior.N, prior.G)

    def eta(t, R, tau):
        return apply_denoiser(spec.kind_at(t), R, groups, spec.thresholds(tau))

    return eta


def se_step_with_error(tau_sq_t: float, t: int, cfg: SeConfig, rng: np.random.Generator,
                       denoiser: SeDenoiser | None = None) -> tuple[float, float]:
    """One SE update and the Monte Carlo standard error of the result."""
    if tau_sq_t < 0:
        raise DomainError("tau_sq must be non-negative")
    prior = cfg.prior
    eta = denoiser or _library_denoiser(cfg)
    M = cfg.mc_samples
    X = sample_signal(prior, rng, M)
    Z = sample_complex_gaussian((M, prior.N), 1.0, rng)
    tau = float(np.sqrt(tau_sq_t))
    with np.errstate(over="ignore", invalid="ignore"):
        est = eta(t, X + tau * Z, tau)
        per_draw = np.sum(np.abs(est - X) ** 2, axis=1) / prior.N
        mean = float(per_draw.mean())
    if not np.isfinite(mean):
        raise DivergenceError(f"non-finite SE mean at t={t}", iteration=t)
    with np.errstate(over="ignore", invalid="ignore"):
        stderr = float(per_draw.std(ddof=1) / np.sqrt(M)) if M > 1 else 0.0
    return cfg.sigma_w2 + mean / cfg.delta, stderr / cfg.delta


def se_step(tau_sq_t: float, t: int, cfg: SeConfig, rng: np.random.Generator,
            denoiser: SeDenoiser | None = None) -> float:
    return se_step_with_error(tau_sq_t, t, cfg, rng, denoiser)[0]


def se_predict(cfg: SeConfig, T: int, rng: np.random.Generator,
               denoiser: SeDenoiser | None = None, truncate: bool = False) -> SeTrajectory:
    """Chain T SE steps. ``nmse_pred[t]`` predicts the NMSE of x^{t+1}.

    With ``truncate`` a non-finite step ends the recursion early and sets
    ``diverged_at`` instead of raising.
    """
    if T < 1:
        raise DomainError("T must be >= 1")
    scale = cfg.delta / (cfg.problem.k / cfg.problem.N) if cfg.problem.k else np.nan
    tau_sq = se_tau0(cfg)
    out = SeTrajectory(tau_sq=[tau_sq], tau_sq_stderr=[0.0])
    for t in range(T):
        try:
            tau_sq, err = se_step_with_error(tau_sq, t, cfg, rng, denoiser)
        except DivergenceError:
            if not truncate:
                raise
            out.diverged_at = t
            break
        out.tau_sq.append(tau_sq)
        out.tau_sq_stderr.append(err)
        out.nmse_pred.append(scale * (tau_sq - cfg.sigma_w2))
        out.nmse_stderr.append(scale * err)
    return out


def relation_coefficient(samples: np.ndarray) -> float:
    """|mean(z^2)| / mean(|z|^2); zero for proper (circular) samples."""
    z = np.asarray(samples).ravel()
    if z.size < 2:
        raise DomainError("need at least two samples")
    p = np.mean(np.abs(z) ** 2)
    if p == 0:
        raise DomainError("zero second moment")
    return float(np.abs(np.mean(z * z)) / p)
