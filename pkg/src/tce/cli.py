"""Command-line driver.

``tce run`` executes the whole pipeline from a config file; ``generate``,
``cluster``, ``predict`` and ``report`` run single stages over the CSV
interchange files. Exit codes: 0 success, 2 config error, 3 data error,
4 numeric or infeasibility error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import csvio, pipeline
from .aggregation import aggregate
from .config import load_config
from .core import TraceSet
from .errors import ConfigError, ToolError
from .markov import PredictionRun, run_prediction
from .metrics import error_histogram, error_series, histogram_edges, position_extent
from .zoning import cluster

_EPILOG = """\
config file sections (INI format):
  [venue]       precinct_min, precinct_max ("x y"), outside_regions
                (one "x0 y0 x1 y1" per line), index_scale
  [time]        step_seconds, instant_count
  [input]       mode = generate | load; for load: trace_file, traffic_file,
                trace_format = csv | waypoint
  [scenario]    user_count, speed_min, speed_max (m/s), pause_instants,
                background_weight, attractors (one "name weight x0 y0 x1 y1"
                per line)
  [traffic]     tiers (one "fraction rate_mbps" per line; fractions sum to 1)
  [clustering]  k_inside, k_outside
  [prediction]  window_size, scope = per_user | general, run_count,
                base_seed, error_metric = diagonal | per_axis
  [report]      plot_users (ids, space separated), bin_count
  [output]      directory (overridden by --out)
"""


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tce",
        description="Model and predict joint crowd mobility and traffic in temporary crowded events.",
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="path to the INI config file")
        p.add_argument("--seed", type=int, default=None, help="override the config base seed")
        p.add_argument("--out", default=None, help="output directory")
        return p

    add("run", "run the full pipeline and write a manifest")

    add("generate", "generate a synthetic trace/traffic CSV pair")

    p = add("cluster", "fit zones over a trace and write zones.csv / labels.csv")
    p.add_argument("--trace", required=True, help="trace CSV (user_id,t,x,y)")
    p.add_argument("--traffic", required=True, help="traffic CSV (user_id,mean_traffic_mbps)")

    p = add("predict", "run seeded predictions over fitted zone labels")
    p.add_argument("--zones", required=True, help="zones CSV from the cluster stage")
    p.add_argument("--labels", required=True, help="labels CSV from the cluster stage")

    p = add("report", "aggregate, score and plot existing prediction runs")
    p.add_argument("--trace", required=True)
    p.add_argument("--traffic", required=True)
    p.add_argument("--zones", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--predictions", required=True, nargs="+", help="one or more predictions CSVs")
    return parser


def _out_dir(args, cfg) -> Path:
    out = args.out or cfg.out_dir
    if not out:
        raise ConfigError("no output directory: pass --out or set [output] directory")
    return Path(out)


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    manifest = pipeline.run(cfg, _out_dir(args, cfg), base_seed=args.seed)
    summary = manifest["summary"]
    print(f"run complete: {len(manifest['files'])} files in {_out_dir(args, cfg)}")
    print(
        f"mean error {summary['mean_error']:.4f}, median {summary['median_error']:.4f} "
        f"over {len(manifest['run_seeds'])} run(s) [{manifest['backend']} backend]"
    )
    return 0


def _cmd_generate(args) -> int:
    cfg = load_config(args.config)
    if cfg.mode != "generate":
        raise ConfigError("generate subcommand needs [input] mode = generate")
    out = _out_dir(args, cfg)
    out.mkdir(parents=True, exist_ok=True)
    seed = cfg.base_seed if args.seed is None else args.seed
    with pipeline._stage("input"):
        traces = pipeline._load_input(cfg, seed)
        csvio.write_trace(out / "trace.csv", traces)
        csvio.write_traffic(out / "traffic.csv", traces)
    print(f"wrote {out / 'trace.csv'} and {out / 'traffic.csv'}")
    return 0


def _cmd_cluster(args) -> int:
    cfg = load_config(args.config)
    out = _out_dir(args, cfg)
    out.mkdir(parents=True, exist_ok=True)
    seed = cfg.base_seed if args.seed is None else args.seed
    with pipeline._stage("input"):
        traces = csvio.load_trace(args.trace, args.traffic, cfg.venue, cfg.grid)
    with pipeline._stage("clustering"):
        zoning = cluster(traces, cfg.venue, cfg.k_inside, cfg.k_outside, seed)
        csvio.write_zoning(out / "zones.csv", out / "labels.csv", zoning)
    print(f"fitted {zoning.zone_count} zones; wrote {out / 'zones.csv'}, {out / 'labels.csv'}")
    return 0


def _cmd_predict(args) -> int:
    cfg = load_config(args.config)
    out = _out_dir(args, cfg)
    out.mkdir(parents=True, exist_ok=True)
    base_seed = cfg.base_seed if args.seed is None else args.seed
    with pipeline._stage("input"):
        zoning = csvio.load_zoning(args.zones, args.labels)
    with pipeline._stage("prediction"):
        # the chain needs only the label table; positions never enter it
        users, instants = zoning.labels.shape
        traces = TraceSet(np.zeros((users, instants, 2)), np.zeros(users))
        for r in range(cfg.run_count):
            pred = run_prediction(traces, zoning, cfg.window, base_seed + r)
            csvio.write_predictions(out / f"predictions_run{r}.csv", zoning.labels, pred.labels_pred)
    print(f"wrote {cfg.run_count} prediction run(s) to {out}")
    return 0


def _cmd_report(args) -> int:
    cfg = load_config(args.config)
    out = _out_dir(args, cfg)
    out.mkdir(parents=True, exist_ok=True)
    with pipeline._stage("input"):
        traces = csvio.load_trace(args.trace, args.traffic, cfg.venue, cfg.grid)
        zoning = csvio.load_zoning(args.zones, args.labels)
        runs = []
        for path in args.predictions:
            real, pred = csvio.load_predictions(path)
            if real.shape != zoning.labels.shape or not np.array_equal(real, zoning.labels):
                raise ConfigError(f"{path}: real zones do not match the labels file")
            runs.append(PredictionRun(pred, cfg.window.window_size, cfg.window.scope, seed=0))
    with pipeline._stage("aggregation"):
        for r, run in enumerate(runs):
            series = aggregate(traces, zoning.labels, run.labels_pred, zoning.zone_count)
            csvio.write_zone_series(out / f"zone_series_run{r}.csv", series)
    with pipeline._stage("error"):
        extent_min, extent_max = position_extent(traces)
        errors = [error_series(zoning, run, extent_min, extent_max) for run in runs]
        for r, es in enumerate(errors):
            csvio.write_errors(out / f"errors_run{r}.csv", es)
        edges = histogram_edges(cfg.bin_count)
        hist = [(r, error_histogram(es, cfg.bin_count)) for r, es in enumerate(errors)]
        csvio.write_histogram(out / "histogram.csv", hist, edges)
    with pipeline._stage("report"):
        pipeline.emit_plots(out, cfg, traces, zoning, runs, errors)
    pooled = np.concatenate([es.e.ravel() for es in errors])
    print(f"report written to {out}; mean error {pooled.mean():.4f} over {len(runs)} run(s)")
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "generate": _cmd_generate,
    "cluster": _cmd_cluster,
    "predict": _cmd_predict,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ToolError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
