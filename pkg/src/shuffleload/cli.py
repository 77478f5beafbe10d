"""Command-line driver: profile, fit, predict, evaluate, paper-protocol.

Exit codes: 0 success, 1 data/model error, 2 usage error, 3 I/O error.

Seeds: ``profile --seed S`` simulates run ``k`` of configuration ``(m, r)``
with ``mix_seed(S, m, r, k)``. With ``--unseen N`` the configurations are
sampled with seed ``mix_seed(S, 1)`` and simulated from base seed
``mix_seed(S, 2)``. ``paper-protocol`` is exactly ``profile`` (training grid)
+ ``fit`` + ``profile --unseen`` + ``evaluate`` with the same flags.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from contextlib import contextmanager
from pathlib import Path

from . import ingest, simulator
from .errors import ShuffleLoadError
from .metrics import evaluate
from .model import DEFAULT_DEGREE, fit, load_model, predict, save_model

EXIT_OK, EXIT_DATA, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

DEFAULT_GRID = "4:32:4"
DEFAULT_REPS = 10
DEFAULT_TEST_SIZE = 30
DEFAULT_SEED = 42
DEFAULT_WORKLOAD = "wordcount-like"


class StageError(Exception):
    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage {stage!r} failed: {type(cause).__name__}: {cause}")


# -- argument types -----------------------------------------------------------

def positive_int(text):
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {n}")
    return n


def grid_values(text):
    """``start:stop:step`` (inclusive), a comma list, or one value."""
    try:
        if ":" in text:
            parts = [int(p) for p in text.split(":")]
            if len(parts) == 2:
                parts.append(1)
            start, stop, step = parts
            if step < 1:
                raise ValueError
            values = list(range(start, stop + 1, step))
        else:
            values = [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}; use 4:32:4 or 4,8,16") from None
    if not values or any(v < 1 for v in values) or len(set(values)) != len(values):
        raise argparse.ArgumentTypeError(f"grid {text!r} must list distinct positive integers")
    return values


def int_range(text):
    try:
        lo, hi = (int(p) for p in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad range {text!r}; use LO:HI") from None
    if lo < 1 or hi < lo:
        raise argparse.ArgumentTypeError(f"range {text!r} must satisfy 1 <= LO <= HI")
    return lo, hi


# -- output handling ----------------------------------------------------------

class Outputs:
    """Atomic file writes; everything written is removed if the command fails."""

    def __init__(self):
        self.written: list[Path] = []

    def write(self, path, text):
        path = Path(path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc.strerror or exc}") from None
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            os.replace(tmp, path)
        except OSError as exc:
            Path(tmp).unlink(missing_ok=True)
            raise OSError(f"cannot write {path}: {exc.strerror or exc}") from None
        self.written.append(path)
        return path

    def rollback(self):
        for path in self.written:
            path.unlink(missing_ok=True)
        self.written.clear()


@contextmanager
def outputs():
    out = Outputs()
    try:
        yield out
    except BaseException:
        out.rollback()
        raise


def read_text(path):
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror or exc}") from None


def human_bytes(n: float) -> str:
    value = float(n)
    for unit in ("B", "KiB", "MiB", "GiB", "TiB"):
        if abs(value) < 1024 or unit == "TiB":
            return f"{value:.4g} {unit}"
        value /= 1024
    return f"{value:.4g} TiB"


def _profile_csv_path(path: Path) -> Path:
    return path.with_name(f"{path.stem}.avg{path.suffix or '.csv'}")


# -- stages -------------------------------------------------------------------

def _load_inputs(args):
    try:
        cluster = simulator.load_cluster(args.cluster)
        workload = simulator.load_workload(args.workload)
    except OSError as exc:
        raise OSError(f"cannot read config: {exc}") from None
    except (json.JSONDecodeError, TypeError, ValueError) as exc:
        raise ShuffleLoadError(f"bad cluster/workload config: {exc}") from None
    return cluster, workload


def _unseen_seeds(seed):
    return simulator.mix_seed(seed, 1), simulator.mix_seed(seed, 2)


def do_profile(out: Outputs, cluster, workload, grid, reps, seed, path, unseen=None,
               box=None, workers=1):
    path = Path(path)
    if unseen:
        lo, hi = box or (min(grid), max(grid))
        sample_seed, sim_seed = _unseen_seeds(seed)
        exclude = [(m, r) for m in grid for r in grid]
        configs = simulator.sample_unseen_configs(unseen, lo, hi, exclude, sample_seed)
        dataset, records = simulator.run_profile_configs(
            cluster, workload, configs, reps, sim_seed, workers)
        what = f"{unseen} unseen configurations in [{lo}, {hi}]^2"
    else:
        dataset, records = simulator.run_profile_grid(
            cluster, workload, grid, grid, reps, seed, workers)
        what = f"{len(grid)}x{len(grid)} grid"
    out.write(path, ingest.serialize_measurements_csv(records))
    avg = out.write(_profile_csv_path(path), ingest.serialize_profile_csv(dataset))
    loads = dataset.loads
    print(f"profiled {what} x {reps} runs of {workload.name}: {len(records)} records")
    print(f"  averaged load range {human_bytes(loads.min())} .. {human_bytes(loads.max())}")
    print(f"  wrote {path} and {avg}")
    return dataset, records


def do_fit(out: Outputs, measurements, degree, model_path):
    records = ingest.parse_measurements_csv(read_text(measurements))
    dataset = ingest.aggregate_runs(records)
    model = fit(dataset, degree)
    out.write(model_path, save_model(model))
    print(f"fitted degree-{degree} model on {len(dataset)} configurations "
          f"({len(records)} runs)")
    names = ["a0"] + [f"a[{name}^{j}]" for name in model.param_names
                      for j in range(1, degree + 1)]
    for name, c in zip(names, model.coefficients):
        print(f"  {name:<20} {c!r}")
    fm = model.fit_meta
    print(f"  m={fm.m} rss={fm.rss!r} condition={fm.condition:.4g}")
    print(f"  wrote {model_path}")
    return model


GNUPLOT = """\
# actual vs predicted shuffle load per unseen experiment
set datafile separator ','
set key top left
set xlabel 'unseen experiment index'
set ylabel 'shuffle load (bytes)'
plot '{data}' using 1:2 skip 1 with linespoints title 'actual', \\
     '' using 1:3 skip 1 with linespoints title 'predicted'
"""


def do_evaluate(out: Outputs, model_path, test_path, out_dir, name=""):
    model = load_model(read_text(model_path))
    records = ingest.parse_measurements_csv(read_text(test_path))
    test = ingest.aggregate_runs(records)
    report = evaluate(model, test, name=name or test.meta)
    out_dir = Path(out_dir)
    out.write(out_dir / "report.json", report.to_json())
    out.write(out_dir / "report.txt", report.to_table())
    plot = ["index,actual,predicted"]
    plot += [f"{i},{r.actual!r},{r.predicted!r}" for i, r in enumerate(report.residuals, 1)]
    out.write(out_dir / "plot.csv", "\n".join(plot) + "\n")
    out.write(out_dir / "plot.gp", GNUPLOT.format(data="plot.csv"))
    print(report.to_table(), end="")
    print(f"wrote report.json, report.txt, plot.csv, plot.gp to {out_dir}")
    return report


# -- commands -----------------------------------------------------------------

def cmd_profile(args):
    cluster, workload = _load_inputs(args)
    with outputs() as out:
        do_profile(out, cluster, workload, args.grid, args.reps, args.seed, args.out,
                   unseen=args.unseen, box=args.range, workers=args.workers)


def cmd_fit(args):
    with outputs() as out:
        do_fit(out, args.measurements, args.degree, args.out)


def cmd_predict(args):
    model = load_model(read_text(args.model))
    load = predict(model, (args.maps, args.reduces))
    print(f"{load!r} bytes ({human_bytes(load)})")


def cmd_evaluate(args):
    with outputs() as out:
        do_evaluate(out, args.model, args.test, args.out, args.name)


def cmd_protocol(args):
    out_dir = Path(args.out)

    def stage(name, fn, *a, **kw):
        try:
            return fn(*a, **kw)
        except (ShuffleLoadError, OSError) as exc:
            raise StageError(name, exc) from exc

    with outputs() as out:
        cluster, workload = stage("config", _load_inputs, args)
        out.write(out_dir / "cluster.json",
                  json.dumps(simulator.cluster_to_dict(cluster), indent=2, sort_keys=True) + "\n")
        out.write(out_dir / "workload.json",
                  json.dumps(simulator.workload_to_dict(workload), indent=2, sort_keys=True) + "\n")
        print("== profile (training grid)")
        stage("profile", do_profile, out, cluster, workload, args.grid, args.reps, args.seed,
              out_dir / "train_runs.csv", workers=args.workers)
        print("== fit")
        stage("fit", do_fit, out, out_dir / "train_runs.csv", args.degree, out_dir / "model.json")
        print("== profile (unseen test configurations)")
        stage("sample", do_profile, out, cluster, workload, args.grid, args.reps, args.seed,
              out_dir / "test_runs.csv", unseen=args.test_size, box=args.range,
              workers=args.workers)
        print("== evaluate")
        stage("evaluate", do_evaluate, out, out_dir / "model.json", out_dir / "test_runs.csv",
              out_dir, workload.name)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="shuffleload",
        description="Model and predict shuffle-phase network load of MapReduce jobs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def sim_flags(p):
        p.add_argument("--workload", default=DEFAULT_WORKLOAD,
                       help=f"preset ({', '.join(simulator.PRESETS)}) or JSON file")
        p.add_argument("--cluster", default=None, help="cluster JSON file (default: 5 nodes)")
        p.add_argument("--grid", type=grid_values, default=grid_values(DEFAULT_GRID),
                       help="map and reduce task counts, e.g. 4:32:4 (default) or 4,8,16")
        p.add_argument("--reps", type=positive_int, default=DEFAULT_REPS,
                       help="runs averaged per configuration")
        p.add_argument("--seed", type=int, default=DEFAULT_SEED)
        p.add_argument("--range", type=int_range, default=None,
                       help="LO:HI box for unseen configurations (default: grid min:max)")
        p.add_argument("--workers", type=positive_int, default=1,
                       help="threads used for simulation (results do not depend on it)")

    p = sub.add_parser("profile", help="simulate runs and write a measurement CSV")
    sim_flags(p)
    p.add_argument("--unseen", type=positive_int, default=None, metavar="N",
                   help="profile N random configurations off the grid instead of the grid")
    p.add_argument("--out", required=True, help="measurement CSV to write")
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("fit", help="fit a model to a measurement CSV")
    p.add_argument("measurements")
    p.add_argument("--degree", type=positive_int, default=DEFAULT_DEGREE)
    p.add_argument("--out", required=True, help="model document to write")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="predict the load of one configuration")
    p.add_argument("model")
    p.add_argument("maps", type=positive_int)
    p.add_argument("reduces", type=positive_int)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="score a model on test measurements")
    p.add_argument("model")
    p.add_argument("test", help="measurement CSV of the test runs")
    p.add_argument("--out", required=True, help="report directory")
    p.add_argument("--name", default="", help="row label in the report table")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("paper-protocol", help="profile, fit, sample unseen configs, evaluate")
    sim_flags(p)
    p.add_argument("--degree", type=positive_int, default=DEFAULT_DEGREE)
    p.add_argument("--test-size", type=positive_int, default=DEFAULT_TEST_SIZE)
    p.add_argument("--out", required=True, help="artifact directory")
    p.set_defaults(func=cmd_protocol)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO if isinstance(exc.cause, OSError) else EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ShuffleLoadError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
