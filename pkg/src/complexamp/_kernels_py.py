"""Pure-numpy SGL kernels. Same contract as the compiled ``_kernels`` module.

Both functions take a 2-D C-contiguous array (batch, N) whose rows are split
into contiguous groups of ``S`` entries, and return the denoised array plus
the per-row sum of diagonal derivatives.
"""

import numpy as np

_TINY = 1e-300


def sgl_prox(r, S, lambda_g, lambda_e):
    """Complex SGL prox. Derivative sum is the Wirtinger one, sum_j d eta_j / d r_j."""
    B, N = r.shape
    a = np.abs(r)
    act = a > lambda_e
    scale = np.where(act, 1.0 - lambda_e / np.maximum(a, _TINY), 0.0)
    s = (scale * r).reshape(B, N // S, S)
    nrm = np.sqrt(np.einsum("bgs,bgs->bg", s.real, s.real) + np.einsum("bgs,bgs->bg", s.imag, s.imag))
    gact = nrm > lambda_g
    inv = np.where(gact, 1.0 / np.maximum(nrm, _TINY), 0.0)
    gf = np.where(gact, 1.0 - lambda_g * inv, 0.0)
    out = (s * gf[..., None]).reshape(B, N)
    inner = np.where(act, 1.0 - 0.5 * lambda_e / np.maximum(a, _TINY), 0.0).reshape(B, N // S, S).sum(-1)
    dsum = np.where(gact, 0.5 * lambda_g * inv + gf * inner, 0.0).sum(-1)
    return out, dsum


def real_sgl_prox(v, S, lambda_g, lambda_e):
    """Real SGL prox. Derivative sum is sum_j d eta_j / d v_j."""
    B, N = v.shape
    a = np.abs(v)
    act = a > lambda_e
    s = np.where(act, np.sign(v) * (a - lambda_e), 0.0).reshape(B, N // S, S)
    nrm = np.sqrt(np.einsum("bgs,bgs->bg", s, s))
    gact = nrm > lambda_g
    inv = np.where(gact, 1.0 / np.maximum(nrm, _TINY), 0.0)
    gf = np.where(gact, 1.0 - lambda_g * inv, 0.0)
    out = (s * gf[..., None]).reshape(B, N)
    cnt = act.reshape(B, N // S, S).sum(-1)
    dsum = np.where(gact, cnt * gf + lambda_g * inv, 0.0).sum(-1)
    return out, dsum
