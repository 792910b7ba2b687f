"""Complex proximal denoisers and their Onsager (mean Wirtinger derivative) terms.

All denoisers act on a full length-N vector together with its group
structure; the sparse group LASSO prox is not separable across entries.
"""

from __future__ import annotations

import enum
import os
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import ConfigurationError, GroupStructure, OracleUnreliableError

if os.environ.get("COMPLEXAMP_PURE_PYTHON"):
    from . import _kernels_py as _kernels
    COMPILED = False
else:
    try:
        from . import _kernels
        COMPILED = True
    except ImportError:
        from . import _kernels_py as _kernels
        COMPILED = False


class DenoiserKind(str, enum.Enum):
    LASSO = "LASSO"
    GL = "GL"
    SGL = "SGL"
    REAL_SGL = "REAL_SGL"

    @classmethod
    def parse(cls, value) -> "DenoiserKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().upper().replace("-", "_")
        aliases = {"GROUP_LASSO": "GL", "REAL": "REAL_SGL", "REALSGL": "REAL_SGL"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise ConfigurationError(f"unknown denoiser kind {value!r}") from None


@dataclass(frozen=True)
class Thresholds:
    lambda_g: float
    lambda_e: float

    def __post_init__(self):
        if not (self.lambda_g >= 0 and self.lambda_e >= 0):
            raise ConfigurationError(f"thresholds must be non-negative, got {self}")

    def scaled(self, c: float) -> "Thresholds":
        return Thresholds(c * self.lambda_g, c * self.lambda_e)


@dataclass(frozen=True)
class DenoiserSpec:
    kind: DenoiserKind = DenoiserKind.SGL
    alpha_g: float = 0.2
    alpha_e: float = 0.8
    kappa: int = 1

    def __post_init__(self):
        object.__setattr__(self, "kind", DenoiserKind.parse(self.kind))
        if int(self.kappa) != self.kappa or self.kappa < 1:
            raise ConfigurationError("kappa must be an integer >= 1")
        if self.alpha_g < 0 or self.alpha_e < 0:
            raise ConfigurationError("alphas must be non-negative")

    def kind_at(self, t: int) -> DenoiserKind:
        """Denoiser applied at iteration t under the kappa schedule."""
        if self.kind in (DenoiserKind.SGL, DenoiserKind.REAL_SGL) and t % self.kappa != 0:
            return DenoiserKind.LASSO
        return self.kind

    def thresholds(self, tau: float) -> Thresholds:
        return Thresholds(self.alpha_g * tau, self.alpha_e * tau)


def effective_thresholds(kind: DenoiserKind, th: Thresholds) -> Thresholds:
    kind = DenoiserKind.parse(kind)
    if kind is DenoiserKind.LASSO:
        return Thresholds(0.0, th.lambda_e)
    if kind is DenoiserKind.GL:
        return Thresholds(th.lambda_g, 0.0)
    return th


def soft_threshold(r: np.ndarray, lambda_e: float) -> np.ndarray:
    """Complex soft threshold (1 - lambda_e/|r|)_+ r, with 0 -> 0."""
    if lambda_e < 0:
        raise ConfigurationError("lambda_e must be non-negative")
    r = np.asarray(r, dtype=complex)
    a = np.abs(r)
    keep = a > lambda_e
    scale = np.zeros_like(a)
    np.divide(lambda_e, a, out=scale, where=keep)
    return np.where(keep, (1.0 - scale) * r, 0.0)


def _as_batch(r, groups: GroupStructure, dtype):
    r = np.asarray(r)
    groups.check(r)
    return np.ascontiguousarray(r.reshape(-1, groups.N), dtype=dtype)


def denoise(kind, r: np.ndarray, groups: GroupStructure, th: Thresholds):
    """Apply a denoiser and return ``(eta(r), onsager_mean)``.

    ``r`` may be a single vector or a batch of shape (..., N). The Onsager
    mean is <eta'> = (1/N) sum_j d eta_j / d r_j (Wirtinger), one per row.
    """
    kind = DenoiserKind.parse(kind)
    r = np.asarray(r)
    shape = r.shape
    eff = effective_thresholds(kind, th)
    S = groups.size
    if kind is DenoiserKind.REAL_SGL:
        re, dre = _kernels.real_sgl_prox(_as_batch(r.real, groups, float), S, eff.lambda_g, eff.lambda_e)
        im, dim = _kernels.real_sgl_prox(_as_batch(r.imag, groups, float), S, eff.lambda_g, eff.lambda_e)
        out = re + 1j * im
        ons = 0.5 * (dre + dim) / groups.N
    else:
        out, dsum = _kernels.sgl_prox(_as_batch(r, groups, complex), S, eff.lambda_g, eff.lambda_e)
        ons = dsum / groups.N
    out = out.reshape(shape)
    ons = ons.reshape(shape[:-1])
    return out, (float(ons) if ons.ndim == 0 else ons)


def apply_denoiser(kind, r: np.ndarray, groups: GroupStructure, th: Thresholds) -> np.ndarray:
    return denoise(kind, r, groups, th)[0]


def onsager_mean(kind, r: np.ndarray, groups: GroupStructure, th: Thresholds):
    return denoise(kind, r, groups, th)[1]


def sgl_onsager_mean(r: np.ndarray, groups: GroupStructure, th: Thresholds) -> float:
    return denoise(DenoiserKind.SGL, r, groups, th)[1]


def _boundary_distance(kind, r, groups: GroupStructure, th: Thresholds) -> float:
    """Smallest distance from r to a kink of the denoiser, measured in moduli and group norms."""
    kind = DenoiserKind.parse(kind)
    eff = effective_thresholds(kind, th)
    if kind is DenoiserKind.REAL_SGL:
        parts = [r.real, r.imag]
        dists = []
        for v in parts:
            a = np.abs(v)
            s = np.where(a > eff.lambda_e, a - eff.lambda_e, 0.0).reshape(groups.G, -1)
            dists.append(np.min(np.abs(a - eff.lambda_e)))
            if eff.lambda_g > 0:
                dists.append(np.min(np.abs(np.linalg.norm(s, axis=1) - eff.lambda_g)))
        return float(min(dists))
    a = np.abs(r)
    s = soft_threshold(r, eff.lambda_e).reshape(groups.G, -1)
    d_el = np.min(np.abs(a - eff.lambda_e))
    d_gr = np.min(np.abs(np.linalg.norm(s, axis=1) - eff.lambda_g)) if eff.lambda_g > 0 else np.inf
    return float(min(d_el, d_gr))


def wirtinger_fd(denoiser: Callable[[np.ndarray], np.ndarray], r: np.ndarray, j: int,
                 h: float = 1e-6) -> complex:
    """Central-difference estimate of d eta_j / d r_j = (1/2)(d/dRe - i d/dIm) eta_j."""
    if not h > 0:
        raise ConfigurationError("h must be positive")
    r = np.asarray(r, dtype=complex)
    e = np.zeros_like(r)
    e[j] = 1.0
    # Rounded steps: divide by the step that was actually taken.
    xr = r[j].real
    hp, hm = (xr + h) - xr, xr - (xr - h)
    d_re = (denoiser(r + hp * e)[j] - denoiser(r - hm * e)[j]) / (hp + hm)
    xi = r[j].imag
    hp, hm = (xi + h) - xi, xi - (xi - h)
    d_im = (denoiser(r + 1j * hp * e)[j] - denoiser(r - 1j * hm * e)[j]) / (hp + hm)
    return complex(0.5 * (d_re - 1j * d_im))


def checked_wirtinger_fd(kind, r: np.ndarray, groups: GroupStructure, th: Thresholds,
                         j: int, h: float = 1e-6) -> complex:
    """``wirtinger_fd`` on a library denoiser, refusing points within 10h of a kink."""
    if _boundary_distance(kind, r, groups, th) <= 10 * h:
        raise OracleUnreliableError("input within 10*h of a threshold boundary")
    return wirtinger_fd(lambda v: apply_denoiser(kind, v, groups, th), r, j, h)


def fd_onsager_sum(kind, r: np.ndarray, groups: GroupStructure, th: Thresholds, h: float = 1e-6) -> complex:
    """sum_j of finite-difference Wirtinger derivatives; equals N <eta'> for smooth points."""
    if _boundary_distance(kind, r, groups, th) <= 10 * h:
        raise OracleUnreliableError("input within 10*h of a threshold boundary")
    f = lambda v: apply_denoiser(kind, v, groups, th)
    return complex(sum(wirtinger_fd(f, r, j, h) for j in range(groups.N)))
