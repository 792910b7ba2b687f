"""Command line entry point: ``python -m complexamp <command> [flags]``."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .amp import AMP, ISTA
from .core import ConfigurationError, DomainError, ProblemConfig, dump_instance, generate_instance, trial_rng
from .denoisers import DenoiserKind, DenoiserSpec
from .harness import (DEFAULT_SWEEP_GRID, SWEEP_ORDER, DatTable, ExperimentConfig, dat_text, emit_dat,
                      lift_verification, matrix_lift_verification, parse_config_file,
                      run_convergence_experiment, run_snr_sweep, write_report)
from .se import SeConfig, se_predict

EXIT_OK, EXIT_CONFIG, EXIT_VERIFY, EXIT_IO = 0, 1, 2, 3
COMMANDS = ("convergence", "snr-sweep", "se-predict", "verify-lift", "verify-matrix-lift")

# flag name -> (type, default); None default means "command specific"
OPTIONS = {
    "n_signal": (int, 1000),
    "groups": (int, 10),
    "delta": (float, 0.6),
    "rho": (float, 0.5),
    "r_ga": (float, 0.6),
    "snr_db": (float, None),
    "alpha_g": (float, 0.2),
    "alpha_e": (float, 0.8),
    "kappa": (int, None),
    "iters": (int, 200),
    "trials": (int, 50),
    "seed": (int, 0),
    "denoiser": (str, "SGL"),
    "algo": (str, None),
    "mc_samples": (int, 100),
    "workers": (int, 1),
    "out": (str, None),
    "dump_instance": (str, None),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="complexamp", description="Complex AMP with sparse group LASSO denoising.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="key=value file; command-line flags take precedence")
    for name in OPTIONS:
        flag = "--" + name.replace("_", "-")
        if name == "snr_db":
            p.add_argument(flag, action="append", type=float, help="repeatable for sweeps")
        else:
            p.add_argument(flag, type=str)
    return p


def _settings(args) -> dict:
    values = {}
    if args.config:
        values.update(parse_config_file(args.config))
    unknown = set(values) - set(OPTIONS)
    if unknown:
        raise ConfigurationError(f"unknown config keys: {', '.join(sorted(unknown))}")
    for name in OPTIONS:
        v = getattr(args, name)
        if v is not None:
            values[name] = v
    out = {}
    for name, (typ, default) in OPTIONS.items():
        if name not in values:
            out[name] = default
            continue
        raw = values[name]
        try:
            if name == "snr_db":
                items = raw if isinstance(raw, list) else str(raw).replace(",", " ").split()
                out[name] = [float(x) for x in items]
            else:
                out[name] = typ(raw)
        except ValueError:
            raise ConfigurationError(f"invalid value for {name}: {raw!r}") from None
    return out


def _problem(s) -> ProblemConfig:
    snr = s["snr_db"][0] if s["snr_db"] else 30.0
    return ProblemConfig(N=s["n_signal"], G=s["groups"], delta=s["delta"], rho=s["rho"],
                         r_ga=s["r_ga"], snr_db=snr, seed=s["seed"])


def _spec(s, kappa_default: int) -> DenoiserSpec:
    kappa = s["kappa"] if s["kappa"] is not None else kappa_default
    return DenoiserSpec(DenoiserKind.parse(s["denoiser"]), s["alpha_g"], s["alpha_e"], kappa)


def _output(table: DatTable, out, report: list[str]):
    if out:
        emit_dat(table, out)
        if report:
            write_report(report, str(out) + ".report")
    else:
        sys.stdout.write(dat_text(table))
    for line in report:
        print(line, file=sys.stderr)


def _run(argv) -> int:
    args = build_parser().parse_args(argv)
    s = _settings(args)
    cmd = args.command
    if cmd == "convergence":
        algos = (AMP, ISTA) if s["algo"] is None else tuple(a.strip().upper() for a in s["algo"].split(","))
        if not set(algos) <= {AMP, ISTA}:
            raise ConfigurationError(f"unknown algorithm in {s['algo']!r}")
        problem = _problem(s)
        if s["dump_instance"]:
            dump_instance(generate_instance(problem, trial_rng(problem.seed, 0)), s["dump_instance"], problem.seed)
        cfg = ExperimentConfig(problem=problem, spec=_spec(s, 1), algos=algos, iters=s["iters"],
                               trials=s["trials"], snr_grid=(problem.snr_db,), out_path=s["out"],
                               mc_samples=s["mc_samples"], workers=s["workers"])
        res = run_convergence_experiment(cfg)
        _output(res.table, s["out"], res.diverged)
        return EXIT_OK
    if cmd == "snr-sweep":
        grid = tuple(s["snr_db"] or DEFAULT_SWEEP_GRID)
        cfg = ExperimentConfig(problem=_problem(s), spec=_spec(s, 5), iters=s["iters"], trials=s["trials"],
                               snr_grid=grid, denoisers=tuple(SWEEP_ORDER), out_path=s["out"],
                               mc_samples=s["mc_samples"], workers=s["workers"])
        res = run_snr_sweep(cfg)
        _output(res.table, s["out"], res.diverged)
        return EXIT_OK
    if cmd == "se-predict":
        if s["algo"] is not None and s["algo"].strip().upper() != AMP:
            raise ConfigurationError("state evolution exists only for AMP (ISTA has no Onsager term)")
        problem = _problem(s)
        se = se_predict(SeConfig(problem, _spec(s, 1), s["mc_samples"]), s["iters"],
                        trial_rng(problem.seed, 2**31), truncate=True)
        rows = [(float(t), se.tau_sq[t], se.tau_sq[t + 1], se.nmse_pred[t]) for t in range(len(se.nmse_pred))]
        report = [] if se.diverged_at is None else [f"SE diverged at iteration {se.diverged_at}"]
        _output(DatTable(["iteration", "tau_sq", "tau_sq_next", "nmse_pred"], rows), s["out"], report)
        return EXIT_OK
    if cmd in ("verify-lift", "verify-matrix-lift"):
        checks = lift_verification(s["seed"]) if cmd == "verify-lift" else matrix_lift_verification(s["seed"])
        lines = [c.line() for c in checks]
        if s["out"]:
            write_report(lines, s["out"])
        print("\n".join(lines))
        return EXIT_OK if all(c.passed for c in checks) else EXIT_VERIFY
    raise UsageError(f"unknown command {cmd}")  # pragma: no cover


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    if not argv:
        parser.print_usage(sys.stderr)
        return EXIT_CONFIG
    try:
        return _run(argv)
    except UsageError as err:
        parser.print_usage(sys.stderr)
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConfigurationError, DomainError) as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as err:
        print(f"I/O error: {err}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
