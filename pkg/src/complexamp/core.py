"""Problem definition, random instance generation and error metrics."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class ConfigurationError(ValueError):
    """Invalid problem or experiment parameters."""


class DomainError(ValueError):
    """Input outside the domain of an operation (shape mismatch, zero norm...)."""


class DivergenceError(ArithmeticError):
    """An iteration produced non-finite values."""

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


class OracleUnreliableError(ValueError):
    """Finite-difference probe lands too close to a non-smooth point."""


@dataclass(frozen=True)
class ProblemConfig:
    N: int = 1000
    G: int = 10
    delta: float = 0.6
    rho: float = 0.5
    r_ga: float = 0.6
    snr_db: float = 30.0
    seed: int = 0

    def __post_init__(self):
        if self.N < 1 or self.G < 1:
            raise ConfigurationError("N and G must be positive")
        if self.N % self.G:
            raise ConfigurationError(f"group count {self.G} does not divide N={self.N}")
        if not 0 < self.delta:
            raise ConfigurationError("delta must be positive")
        if self.n < 1:
            raise ConfigurationError("round(delta*N) must be at least 1")
        if self.rho < 0:
            raise ConfigurationError("rho must be non-negative")
        if not 0 < self.r_ga <= 1:
            raise ConfigurationError("r_ga must lie in (0, 1]")
        if self.k > 0:
            if abs(self.r_ga * self.G - self.active_groups) > 1e-9:
                raise ConfigurationError("r_ga*G must be an integer")
            if self.k % self.active_groups:
                raise ConfigurationError(
                    f"k={self.k} cannot be split evenly over {self.active_groups} active groups")
            if self.r_ea > 1:
                raise ConfigurationError(
                    f"infeasible sparsity: r_ea={self.r_ea:.4g} > 1 (need r_ga >= rho*delta)")

    @property
    def n(self) -> int:
        return int(round(self.delta * self.N))

    @property
    def k(self) -> int:
        return int(round(self.rho * self.n))

    @property
    def S(self) -> int:
        return self.N // self.G

    @property
    def active_groups(self) -> int:
        return int(round(self.r_ga * self.G))

    @property
    def r_ea(self) -> float:
        """Fraction of active elements inside an active group."""
        return self.k / (self.r_ga * self.G * self.S)

    @property
    def sigma_w2(self) -> float:
        return snr_to_noise_variance(self.snr_db, self)

    def signal_power(self) -> float:
        """E||x0||^2 / N for the unit-modulus prior."""
        return self.k / self.N


@dataclass(frozen=True)
class GroupStructure:
    """Contiguous partition of range(N) into G blocks of equal size."""

    N: int
    G: int

    def __post_init__(self):
        if self.G < 1 or self.N < 1 or self.N % self.G:
            raise ConfigurationError(f"cannot split N={self.N} into {self.G} equal groups")

    @property
    def size(self) -> int:
        return self.N // self.G

    @property
    def group_of(self) -> np.ndarray:
        return np.arange(self.N) // self.size

    @property
    def members(self) -> dict[int, list[int]]:
        S = self.size
        return {g: list(range(g * S, (g + 1) * S)) for g in range(self.G)}

    def check(self, r: np.ndarray):
        if r.shape[-1] != self.N:
            raise DomainError(f"vector length {r.shape[-1]} does not match group structure N={self.N}")


@dataclass(frozen=True)
class ProblemInstance:
    A: np.ndarray
    x0: np.ndarray
    w: np.ndarray
    y: np.ndarray
    groups: GroupStructure
    sigma_w2: float
    config: ProblemConfig | None = field(default=None, compare=False)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def N(self) -> int:
        return self.A.shape[1]

    @property
    def delta(self) -> float:
        return self.n / self.N


def snr_to_noise_variance(snr_db: float, config: ProblemConfig) -> float:
    """Noise variance for SNR = E||A x0||^2 / E||w||^2 = rho / sigma_w^2."""
    return config.rho * 10.0 ** (-snr_db / 10.0)


def sample_complex_gaussian(shape, variance: float, rng: np.random.Generator) -> np.ndarray:
    """Circularly symmetric CN(0, variance) samples."""
    if variance < 0:
        raise ConfigurationError("variance must be non-negative")
    s = np.sqrt(variance / 2.0)
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return s * (re + 1j * im)


def sample_complex_gaussian_matrix(rows: int, cols: int, variance: float,
                                   rng: np.random.Generator) -> np.ndarray:
    if rows < 1 or cols < 1:
        raise ConfigurationError(f"invalid matrix dimensions {rows}x{cols}")
    if not variance > 0:
        raise ConfigurationError("variance must be positive")
    return sample_complex_gaussian((rows, cols), variance, rng)


def sample_signal(config: ProblemConfig, rng: np.random.Generator, count: int | None = None) -> np.ndarray:
    """Draw x0 from the structured unit-modulus prior.

    r_ga*G groups are chosen uniformly, then k/(r_ga*G) positions uniformly
    within each, each carrying a uniform random phase. With ``count`` given,
    returns a (count, N) batch of independent draws.
    """
    batch = 1 if count is None else count
    X = np.zeros((batch, config.G, config.S), dtype=complex)
    if config.k > 0:
        ga = config.active_groups
        per = config.k // ga
        groups = np.argsort(rng.random((batch, config.G)), axis=1)[:, :ga]
        pos = np.argsort(rng.random((batch, ga, config.S)), axis=2)[:, :, :per]
        phase = np.exp(2j * np.pi * rng.random((batch, ga, per)))
        b = np.arange(batch)[:, None, None]
        X[b, groups[:, :, None], pos] = phase
    X = X.reshape(batch, config.N)
    return X[0] if count is None else X


def generate_instance(config: ProblemConfig, rng: np.random.Generator) -> ProblemInstance:
    n, N = config.n, config.N
    x0 = sample_signal(config, rng)
    A = sample_complex_gaussian_matrix(n, N, 1.0 / n, rng)
    s2 = config.sigma_w2
    w = sample_complex_gaussian(n, s2, rng)
    y = A @ x0 + w
    return ProblemInstance(A=A, x0=x0, w=w, y=y, groups=GroupStructure(N, config.G),
                           sigma_w2=s2, config=config)


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent stream for one trial, derived from (seed, trial)."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(trial)]))


def nmse(estimate: np.ndarray, truth: np.ndarray) -> float:
    estimate = np.asarray(estimate)
    truth = np.asarray(truth)
    if estimate.shape != truth.shape:
        raise DomainError(f"shape mismatch {estimate.shape} vs {truth.shape}")
    den = np.vdot(truth, truth).real
    if den <= 0:
        raise DomainError("nmse undefined for zero-norm truth")
    d = estimate - truth
    return float(np.vdot(d, d).real / den)


def dump_instance(inst: ProblemInstance, path, seed: int = 0):
    """Write A as "re im" lines in row-major order after an "n N seed" header."""
    path = Path(path)
    lines = [f"{inst.n} {inst.N} {seed}"]
    lines += [f"{v.real:.17g} {v.imag:.17g}" for v in inst.A.ravel()]
    path.write_text("\n".join(lines) + "\n")


def load_instance_matrix(path) -> tuple[np.ndarray, int]:
    """Inverse of :func:`dump_instance` for the matrix part."""
    with open(path) as fh:
        n, N, seed = (int(t) for t in fh.readline().split())
        data = np.loadtxt(fh, ndmin=2)
    A = (data[:, 0] + 1j * data[:, 1]).reshape(n, N)
    return A, seed
