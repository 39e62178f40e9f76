"""Command line entry points: simulate, sweep, real, plot.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys

import numpy as np

from .config import ConfigError, ExperimentConfig, RealConfig
from .io_data import EdgeListParseError, LabelIngestError
from .linalg import ConvergenceError
from .mixture import DegenerateModelError

EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4


def _common_flags(sub):
    sub.add_argument("--config", required=True, help="JSON configuration file")
    sub.add_argument("--out", default=None, help="output path (overrides the config)")
    sub.add_argument("--seed", type=int, default=None, help="override base_seed")
    sub.add_argument("--threads", type=int, default=1, help="worker processes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="specmix",
        description="Spectral community detection for degree-balanced block models",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    sim = subs.add_parser(
        "simulate", help="one grid point: sample networks, run methods, JSON report"
    )
    _common_flags(sim)
    sim.add_argument(
        "--point", type=int, default=0, help="index into the config's r_grid"
    )

    sweep = subs.add_parser("sweep", help="full grid sweep, CSV output")
    _common_flags(sweep)

    real = subs.add_parser("real", help="real edge-list analysis, JSON report")
    _common_flags(real)

    plot = subs.add_parser("plot", help="render a sweep CSV as an SVG")
    _common_flags(plot)
    plot.add_argument(
        "--csv", default=None, help="input CSV (default: the config's output_csv)"
    )
    return parser


def _override_seed(config, seed):
    if seed is None:
        return config
    return dataclasses.replace(config, base_seed=seed)


def _cmd_sweep(args) -> int:
    config = _override_seed(ExperimentConfig.from_json(args.config), args.seed)
    out = args.out or config.output_csv
    if out is None:
        raise ConfigError("no output path: pass --out or set output_csv")
    from .sweep import run_sweep

    rows = run_sweep(config, threads=args.threads, out_csv=out)
    failed = sum(r.failed for r in rows)
    print(f"wrote {len(rows)} rows to {out}" + (f" ({failed} failed)" if failed else ""))
    return 0


def _cmd_simulate(args) -> int:
    config = _override_seed(ExperimentConfig.from_json(args.config), args.seed)
    if not 0 <= args.point < len(config.r_grid):
        raise ConfigError(f"--point must index r_grid (0..{len(config.r_grid) - 1})")
    single = dataclasses.replace(config, r_grid=(config.r_grid[args.point],))
    from .sweep import aggregate_results, run_sweep

    rows = run_sweep(single, threads=args.threads)
    agg = aggregate_results(rows)
    report = {
        "r1_tilde": single.r_grid[0][0],
        "r2_tilde": single.r_grid[0][1],
        "reps": single.reps,
        "config_hash": single.config_hash(),
        "methods": {
            method: stats
            for (r1, r2, method), stats in agg.items()
        },
        "rows": [
            {
                "rep": r.rep,
                "method": r.method,
                "misclustering": r.misclustering,
                "align_loglik": r.align_loglik,
            }
            for r in rows
        ],
    }
    text = json.dumps(report, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
        print(f"wrote report to {args.out}")
    else:
        print(text)
    return 0


def _cmd_real(args) -> int:
    config = _override_seed(RealConfig.from_json(args.config), args.seed)
    from .realdata import run_real

    report = run_real(config.edges, config.labels, config=config)
    text = json.dumps(report, indent=2)
    out = args.out or config.output_report
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
        print(f"wrote report to {out}")
    else:
        print(text)
    return 0


def _cmd_plot(args) -> int:
    config = ExperimentConfig.from_json(args.config)
    csv_path = args.csv or config.output_csv
    out = args.out or config.output_plot
    if csv_path is None:
        raise ConfigError("no CSV input: pass --csv or set output_csv")
    if out is None:
        raise ConfigError("no output path: pass --out or set output_plot")
    from .plot import emit_plot

    emit_plot(csv_path, out)
    print(f"wrote plot to {out}")
    return 0


COMMANDS = {
    "simulate": _cmd_simulate,
    "sweep": _cmd_sweep,
    "real": _cmd_real,
    "plot": _cmd_plot,
}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, stream=sys.stderr)
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (EdgeListParseError, LabelIngestError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ConvergenceError, DegenerateModelError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
