"""Experiment orchestration: convergence runs, SNR sweeps, .dat I/O and config files."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .amp import AMP, ISTA, run_recovery
from .core import ConfigurationError, ProblemConfig, generate_instance, trial_rng
from .denoisers import DenoiserKind, DenoiserSpec
from .se import SeConfig, se_predict

CONVERGENCE_HEADER = ["iteration", "nmse_ista", "nmse_amp", "se_amp"]
SWEEP_HEADER = ["snr_db", "nmse_group_lasso", "nmse_real_sgl", "nmse_lasso", "nmse_sgl", "std_sgl", "se_sgl"]
SWEEP_ORDER = [DenoiserKind.GL, DenoiserKind.REAL_SGL, DenoiserKind.LASSO, DenoiserKind.SGL]
DEFAULT_SWEEP_GRID = [10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0]
# Stream index reserved for state-evolution draws, away from trial indices.
SE_STREAM = 2**31


@dataclass(frozen=True)
class ExperimentConfig:
    problem: ProblemConfig = field(default_factory=ProblemConfig)
    spec: DenoiserSpec = field(default_factory=DenoiserSpec)
    algos: tuple[str, ...] = (AMP, ISTA)
    denoisers: tuple[DenoiserKind, ...] = tuple(SWEEP_ORDER)
    iters: int = 200
    trials: int = 50
    snr_grid: tuple[float, ...] = (30.0,)
    out_path: str | None = None
    se_enabled: bool = True
    mc_samples: int = 100
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigurationError("trials must be >= 1")
        if self.iters < 1:
            raise ConfigurationError("iters must be >= 1")
        if not self.snr_grid:
            raise ConfigurationError("snr grid must not be empty")
        if self.mc_samples < 1:
            raise ConfigurationError("mc_samples must be >= 1")
        if self.workers < 1:
            raise ConfigurationError("workers must be >= 1")

    @property
    def seed(self) -> int:
        return self.problem.seed


@dataclass
class DatTable:
    header: list[str]
    rows: list[tuple[float, ...]] = field(default_factory=list)

    def __post_init__(self):
        for r in self.rows:
            if len(r) != len(self.header):
                raise ValueError("row length does not match header")

    def column(self, name: str) -> np.ndarray:
        i = self.header.index(name)
        return np.array([r[i] for r in self.rows], dtype=float)


@dataclass
class ConvergenceResult:
    table: DatTable
    amp: np.ndarray           # (trials, iters), nan after divergence
    ista: np.ndarray
    se: object | None
    diverged: list[str]


@dataclass
class SweepResult:
    table: DatTable
    final: dict[float, dict[DenoiserKind, np.ndarray]]   # per-SNR, per-kind trial finals
    se: dict[float, object]
    diverged: list[str]


# ---------------------------------------------------------------- trials

def _padded(traj, iters: int) -> np.ndarray:
    out = np.full(iters, np.nan)
    out[:len(traj)] = traj.nmse_per_iter
    return out


def _convergence_trial(args):
    problem, spec, iters, trial, algos = args
    inst = generate_instance(problem, trial_rng(problem.seed, trial))
    res = {}
    for algo in algos:
        tr = run_recovery(inst, algo, spec, iters)
        res[algo] = (_padded(tr, iters), tr.diverged_at if tr.diverged else None)
    return res


def _sweep_trial(args):
    problem, spec, iters, trial, kinds = args
    inst = generate_instance(problem, trial_rng(problem.seed, trial))
    res = {}
    for kind in kinds:
        s = replace(spec, kind=kind, kappa=spec.kappa if kind in (DenoiserKind.SGL, DenoiserKind.REAL_SGL) else 1)
        tr = run_recovery(inst, AMP, s, iters)
        final = tr.nmse_per_iter[-1] if not tr.diverged else math.nan
        res[kind] = (final, tr.diverged_at if tr.diverged else None)
    return res


def _map(fn, jobs, workers: int):
    if workers == 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        # map preserves submission order, so aggregation is by trial index.
        return list(ex.map(fn, jobs))


def _se_rng(seed: int, salt: int = 0) -> np.random.Generator:
    return trial_rng(seed, SE_STREAM + salt)


# ---------------------------------------------------------------- experiments

def run_convergence_experiment(cfg: ExperimentConfig) -> ConvergenceResult:
    """Trial-averaged NMSE per iteration for AMP and ISTA plus the SE prediction."""
    if len(cfg.snr_grid) != 1:
        raise ConfigurationError("convergence experiment takes a single SNR")
    problem = replace(cfg.problem, snr_db=cfg.snr_grid[0])
    algos = tuple(a for a in (AMP, ISTA) if a in cfg.algos)
    if not algos:
        raise ConfigurationError("no algorithm selected")
    jobs = [(problem, cfg.spec, cfg.iters, t, algos) for t in range(cfg.trials)]
    results = _map(_convergence_trial, jobs, cfg.workers)
    blank = np.full((cfg.trials, cfg.iters), np.nan)
    amp = np.array([r[AMP][0] for r in results]) if AMP in algos else blank
    ista = np.array([r[ISTA][0] for r in results]) if ISTA in algos else blank
    diverged = [f"{algo} trial {t} diverged at iteration {r[algo][1]}"
                for t, r in enumerate(results) for algo in algos if r[algo][1] is not None]
    se = None
    se_col = np.full(cfg.iters, np.nan)
    if cfg.se_enabled and AMP in algos:
        se = se_predict(SeConfig(problem, cfg.spec, cfg.mc_samples), cfg.iters, _se_rng(problem.seed),
                        truncate=True)
        se_col[:len(se.nmse_pred)] = se.nmse_pred
        if se.diverged_at is not None:
            diverged.append(f"SE diverged at iteration {se.diverged_at}")
    rows = [(float(i), _mean(ista[:, i]), _mean(amp[:, i]), float(se_col[i])) for i in range(cfg.iters)]
    return ConvergenceResult(DatTable(list(CONVERGENCE_HEADER), rows), amp, ista, se, diverged)


def run_snr_sweep(cfg: ExperimentConfig) -> SweepResult:
    """Final-iteration NMSE of each denoiser across the SNR grid (AMP only)."""
    kinds = tuple(k for k in SWEEP_ORDER if k in cfg.denoisers)
    if not kinds:
        raise ConfigurationError("no denoiser selected")
    table = DatTable(list(SWEEP_HEADER))
    finals, ses, diverged = {}, {}, []
    for j, snr in enumerate(cfg.snr_grid):
        problem = replace(cfg.problem, snr_db=snr)
        jobs = [(problem, cfg.spec, cfg.iters, t, kinds) for t in range(cfg.trials)]
        results = _map(_sweep_trial, jobs, cfg.workers)
        per = {k: (np.array([r[k][0] for r in results]) if k in kinds else np.full(cfg.trials, np.nan))
               for k in SWEEP_ORDER}
        finals[snr] = per
        diverged += [f"snr {snr:g} {k.value} trial {t} diverged at iteration {r[k][1]}"
                     for t, r in enumerate(results) for k in kinds if r[k][1] is not None]
        se_val = math.nan
        if cfg.se_enabled and DenoiserKind.SGL in kinds:
            sgl = replace(cfg.spec, kind=DenoiserKind.SGL)
            se = se_predict(SeConfig(problem, sgl, cfg.mc_samples), cfg.iters, _se_rng(problem.seed, j),
                            truncate=True)
            ses[snr] = se
            if se.diverged_at is None:
                se_val = se.nmse_pred[-1]
            else:
                diverged.append(f"snr {snr:g} SE diverged at iteration {se.diverged_at}")
        sg = per[DenoiserKind.SGL]
        std = float(np.std(sg, ddof=1)) if len(sg) > 1 else 0.0
        table.rows.append((float(snr), *(_mean(per[k]) for k in SWEEP_ORDER), std, float(se_val)))
    return SweepResult(table, finals, ses, diverged)


def _mean(x: np.ndarray) -> float:
    # nan in any trial propagates to the cell
    return float(np.mean(x))


# ---------------------------------------------------------------- .dat I/O

def format_value(v: float) -> str:
    if v is None or not np.isfinite(v):
        return "nan" if v is None or np.isnan(v) else ("inf" if v > 0 else "-inf")
    return f"{v:.5e}"


def dat_text(table: DatTable) -> str:
    return " ".join(table.header) + "\n" + "".join(
        " ".join(format_value(v) for v in row) + "\n" for row in table.rows)


def emit_dat(table: DatTable, path):
    try:
        Path(path).write_text(dat_text(table))
    except OSError as err:
        raise OSError(f"cannot write {path}: {err.strerror or err}") from err


def read_dat(path) -> DatTable:
    lines = Path(path).read_text().splitlines()
    header = lines[0].split()
    rows = [tuple(float(t) for t in ln.split()) for ln in lines[1:] if ln.strip()]
    return DatTable(header, rows)


def write_report(lines: list[str], path):
    Path(path).write_text("".join(ln + "\n" for ln in lines))


# ---------------------------------------------------------------- config files

def parse_config_file(path) -> dict[str, str]:
    """key=value per line; '#' starts a comment. Keys are normalised to snake_case."""
    out = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


# ---------------------------------------------------------------- verification runs

def _small_problem(n: int, N: int, seed: int) -> ProblemConfig:
    """First feasible grouping (4, 2 or 1 groups, half active) for a small instance."""
    for G in (4, 2, 1):
        try:
            return ProblemConfig(N=N, G=G, delta=n / N, rho=0.5, r_ga=0.5 if G > 1 else 1.0,
                                 snr_db=20.0, seed=seed)
        except ConfigurationError:
            continue
    raise ConfigurationError(f"no feasible group structure for n={n}, N={N}")


def lift_verification(seed: int = 0, n: int = 20, N: int = 40, T: int = 10, h: float = 1e-6):
    """Canonical-transformation identities and the lifted/complex orbit collapse on a small SGL instance.

    The complex pair is the centered form of AMP with the SGL denoiser, with
    thresholds frozen from a preliminary recovery run.
    """
    from .amp import centered_functions
    from .lifted import Check, lift_matrix, verify_lemma1, verify_proposition1

    problem = _small_problem(n, N, seed)
    inst = generate_instance(problem, trial_rng(seed, 0))
    spec = DenoiserSpec(DenoiserKind.SGL, 0.2, 0.8, 1)
    taus = run_recovery(inst, AMP, spec, T).tau_hat_per_iter
    f, g = centered_functions(inst, spec, taus)
    res = verify_proposition1(inst.A, f, g, -inst.x0, T, h)
    checks = verify_lemma1(lift_matrix(inst.A), res.lifted, inst.A, f, g, h)
    checks.append(Check("proposition1_relative", res.relative, 1e-10))
    return checks


def _row_sgl(X0, lam_e, lam_g):
    from .denoisers import soft_threshold

    def f(k, U):
        s = soft_threshold(X0 - U, lam_e)
        nr = np.linalg.norm(s, axis=1, keepdims=True)
        sc = np.where(nr > lam_g, 1.0 - lam_g / np.maximum(nr, 1e-300), 0.0)
        return sc * s - X0

    return f


def matrix_lift_verification(seed: int = 0, n: int = 10, N: int = 20, p: int = 2, T: int = 5,
                             instances: int = 20, h: float = 1e-6):
    """Matrix-AMP lift/collapse equivalence with row-wise SGL maps and the R_R P R_L = A X identity."""
    from .core import sample_complex_gaussian, sample_complex_gaussian_matrix
    from .lifted import Check, check_matrix_identities, verify_proposition2

    rng = trial_rng(seed, 0)
    A = sample_complex_gaussian_matrix(n, N, 1.0 / n, rng)
    X0 = sample_complex_gaussian((N, p), 1.0, rng) * (rng.random((N, 1)) < 0.4)
    Wn = sample_complex_gaussian((n, p), 0.01, rng)
    f = _row_sgl(X0, 0.3, 0.2)
    du, dv = verify_proposition2(A, f, lambda k, V: V - Wn, -X0, T, h)
    checks = [Check("proposition2_U", du, 1e-9), Check("proposition2_V", dv, 1e-9)]
    worst = dict.fromkeys(("RR_W", "S_RL", "RR_P_RL"), 0.0)
    for i in range(instances):
        r = trial_rng(seed, 1 + i)
        Ai = sample_complex_gaussian_matrix(n, N, 1.0 / n, r)
        Xi = sample_complex_gaussian((N, p), 1.0, r)
        for key, val in check_matrix_identities(Ai, Xi).items():
            worst[key] = max(worst[key], val)
    checks += [Check(f"matrix_{k}", v, 1e-12) for k, v in worst.items()]
    return checks
