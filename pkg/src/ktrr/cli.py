"""Command-line experiment runner.

Subcommands:
  run           one configuration, `runs` seeded trials, aggregate report
  sweep         Cartesian grid over lambda / eta / snr_db / ratio / kernel_kind
  corrupt-curve sweep over corruption strength only (SNR or ratio)
  selfcheck     invariant suite on synthetic data, no config needed

Reports land in <output>/report.json and <output>/report.csv, with figures
rendered alongside unless --no-figures is given. KTRR_NUM_THREADS caps BLAS
threading (best effort; exported to the usual *_NUM_THREADS variables).
"""

from __future__ import annotations

import argparse
import os
import sys


def _apply_thread_cap() -> None:
    cap = os.environ.get("KTRR_NUM_THREADS")
    if not cap:
        return
    for var in (
        "OMP_NUM_THREADS",
        "OPENBLAS_NUM_THREADS",
        "MKL_NUM_THREADS",
        "NUMEXPR_NUM_THREADS",
    ):
        os.environ.setdefault(var, cap)
    try:
        import threadpoolctl

        global _limiter  # keep the controller alive or the cap is undone
        _limiter = threadpoolctl.threadpool_limits(int(cap))
    except ImportError:
        pass


def _build_parser() -> argparse.ArgumentParser:
    from .config import ExperimentConfig

    parser = argparse.ArgumentParser(
        prog="ktrr",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="config keys (dotted paths, defaults shown):\n"
        + ExperimentConfig().describe_keys(),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("config", help="YAML config file")
        p.add_argument("--output", help="output directory (overrides config)")
        p.add_argument("--runs", type=int, help="number of seeded runs (overrides config)")
        p.add_argument("--seed", type=int, help="master seed (overrides config)")
        p.add_argument(
            "--set",
            action="append",
            metavar="KEY=VALUE",
            help="override any config key by dotted path, e.g. --set kernel.kind=linear",
        )
        p.add_argument(
            "--dump-matrices",
            action="store_true",
            help="also write affinity.csv and embedding.csv from the first run",
        )
        p.add_argument("--no-figures", action="store_true", help="skip figure rendering")

    p_run = sub.add_parser("run", help="single-point experiment")
    add_common(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="grid experiment over the config's sweep section")
    add_common(p_sweep)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_curve = sub.add_parser("corrupt-curve", help="sweep corruption strength only")
    add_common(p_curve)
    p_curve.set_defaults(func=_cmd_corrupt_curve)

    p_self = sub.add_parser("selfcheck", help="run the invariant suite on synthetic data")
    p_self.set_defaults(func=_cmd_selfcheck)

    return parser


def _config_from_args(args):
    from .config import ExperimentConfig

    cfg = ExperimentConfig.from_file(args.config)
    overrides = list(args.set or [])
    if args.output is not None:
        overrides.append(f"output={args.output}")
    if args.runs is not None:
        overrides.append(f"runs={args.runs}")
    if args.seed is not None:
        overrides.append(f"seed={args.seed}")
    if args.dump_matrices:
        overrides.append("dump_matrices=true")
    if args.no_figures:
        overrides.append("figures=false")
    if overrides:
        cfg = cfg.with_overrides(overrides)
    return cfg


def _execute(cfg) -> int:
    from .experiment import emit_report, run_experiment

    report = run_experiment(cfg)
    paths = emit_report(report)
    for path in paths.values():
        print(f"wrote {path}")
    if cfg.figures:
        from .figures import render_report_figures

        for path in render_report_figures(report, os.path.dirname(paths["json"])):
            print(f"wrote {path}")
    for entry in report.grid:
        p = entry["params"]
        agg = entry["aggregate"]
        bits = [f"lambda={p['lambda']:g}", f"eta={p['eta']}", f"kernel={p['kernel_kind']}"]
        if p["snr_db"] is not None:
            bits.append(f"snr_db={p['snr_db']:g}")
        if p["ratio"] is not None:
            bits.append(f"ratio={p['ratio']:g}")
        if agg["ac_mean"] is None:
            scores = "all runs failed"
        else:
            scores = " ".join(
                f"{name.upper()} {agg[f'{name}_mean']:.4f}+/-{agg[f'{name}_std']:.4f}"
                for name in ("ac", "nmi", "ari", "fscore")
            )
        print(f"grid {entry['grid_index']}: {' '.join(bits)} | {scores}")
    failures = report.metadata["failures"]
    if failures:
        print(f"warning: {failures} run(s) failed; see report.json", file=sys.stderr)
    return 0


def _cmd_run(args) -> int:
    cfg = _config_from_args(args)
    if cfg.sweep is not None:
        print("note: `run` ignores the sweep section (use `sweep` to execute it)")
        cfg = cfg.with_overrides(["sweep=null"])
    return _execute(cfg)


def _cmd_sweep(args) -> int:
    cfg = _config_from_args(args)
    if cfg.sweep is None:
        raise ValueError("`sweep` requires a sweep section in the config")
    return _execute(cfg)


def _cmd_corrupt_curve(args) -> int:
    cfg = _config_from_args(args)
    kind = cfg.corruption["kind"]
    sweep = cfg.sweep or {}
    if kind == "gaussian_snr":
        grid = {"snr_db": list(sweep.get("snr_db", [10.0, 20.0, 30.0, 40.0, 50.0]))}
    elif kind == "salt_pepper":
        grid = {"ratio": list(sweep.get("ratio", [0.0, 0.05, 0.10, 0.15, 0.20, 0.25]))}
    else:
        raise ValueError(
            "corrupt-curve requires corruption.kind gaussian_snr or salt_pepper"
        )
    data = cfg.to_dict()
    data["sweep"] = grid
    from .config import ExperimentConfig

    return _execute(ExperimentConfig(data))


def _cmd_selfcheck(args) -> int:
    from .selfcheck import run_selfcheck

    return run_selfcheck()


def main(argv=None) -> int:
    _apply_thread_cap()
    parser = _build_parser()
    args = parser.parse_args(argv)
    from .experiment import PipelineError

    try:
        return args.func(args)
    except PipelineError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
