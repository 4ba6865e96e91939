"""Command-line front end.

Exit codes: 0 success, 1 usage error (nothing written), 2 runtime or
numeric failure (files written by the failed command are removed).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import config as cfg
from . import elm as elm_core
from . import pipeline, plot
from .config import ModelKind
from .metrics import METRICS_COLUMNS, metrics_csv, summary_block
from .partition import find_boundary
from .pso import trace_csv
from .series import ScalingParams, load_csv, make_lag_dataset, minmax_apply, minmax_invert
from .vmd import decompose

STOCHASTIC = {"train", "experiment"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


class _Outputs:
    """Tracks written files so a failed command can remove them."""

    def __init__(self, directory: Path):
        self.directory = directory
        self.created_dir = not directory.exists()
        self.files: list[Path] = []

    def write(self, name: str, text: str) -> Path:
        self.directory.mkdir(parents=True, exist_ok=True)
        path = self.directory / name
        path.write_text(text, encoding="utf-8")
        self.files.append(path)
        return path

    def rollback(self) -> None:
        for path in self.files:
            path.unlink(missing_ok=True)
        if self.created_dir and self.directory.exists() and not any(self.directory.iterdir()):
            self.directory.rmdir()


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="loadforecast", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def common(p, needs_input=True):
        p.add_argument("--config", type=Path, help="key=value experiment config file")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config key (repeatable)")
        p.add_argument("--out", type=Path, required=True, help="output directory")
        if needs_input:
            p.add_argument("--input", type=Path, required=True, help="load CSV (bare values or timestamp,value)")
            p.add_argument("--column", default=None, help="column name or index (default: last column)")

    p = sub.add_parser("decompose", help="VMD modes of a load series")
    common(p)
    p = sub.add_parser("partition", help="split VMD modes into low/high frequency series")
    common(p)
    p = sub.add_parser("train", help="fit one ELM model on the training partition")
    common(p)
    p.add_argument("--model", default="ipso_elm", choices=[k.value for k in ModelKind if k is not ModelKind.VMD_IPSO_ELM])
    p.add_argument("--seed", type=int)
    p = sub.add_parser("forecast", help="one-step-ahead predictions from a saved model")
    common(p)
    p.add_argument("--model-file", type=Path, required=True)
    p = sub.add_parser("experiment", help="repeated-run comparison of model variants")
    common(p, needs_input=False)
    p.add_argument("--input", type=Path, help="load CSV (default: config data.source)")
    p.add_argument("--column", default=None)
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int, default=1)
    p = sub.add_parser("plot", help="SVG chart from a predictions CSV")
    p.add_argument("--predictions", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True, help="output .svg file or directory")
    p.add_argument("--title", default="Actual vs predicted load")
    return parser


def _resolve_config(args) -> cfg.ExperimentConfig:
    base = cfg.ExperimentConfig()
    if getattr(args, "config", None) is not None:
        try:
            text = args.config.read_text(encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        try:
            base = cfg.loads(text)
        except cfg.ConfigError as exc:
            raise UsageError(f"{args.config}: {exc}") from exc
    overrides = {}
    for item in getattr(args, "set", []):
        if "=" not in item:
            raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        overrides[key.strip()] = value.strip()
    if getattr(args, "seed", None) is not None:
        overrides["base_seed"] = str(args.seed)
    if getattr(args, "input", None) is not None:
        overrides["data_source"] = str(args.input)
    if getattr(args, "column", None) is not None:
        overrides["data_column"] = args.column
    try:
        return cfg.from_flat(overrides, base)
    except cfg.ConfigError as exc:
        raise UsageError(str(exc)) from exc


def _column(value):
    if value is None:
        return -1
    try:
        return int(value)
    except ValueError:
        return value


def _modes_csv(modes) -> str:
    freqs = ",".join(repr(float(f)) for f in modes.center_frequencies)
    lines = [f"# center_frequencies={freqs}", ",".join(f"imf{k + 1}" for k in range(modes.mode_count))]
    lines += [",".join(repr(float(v)) for v in row) for row in modes.modes.T]
    return "\n".join(lines) + "\n"


def _column_csv(name: str, values) -> str:
    return name + "\n" + "".join(f"{float(v)!r}\n" for v in values)


def cmd_decompose(args, config, out: _Outputs):
    series = load_csv(args.input, _column(args.column))
    modes = decompose(series.values, config.vmd)
    out.write("imf.csv", _modes_csv(modes))
    return modes


def cmd_partition(args, config, out: _Outputs):
    modes = cmd_decompose(args, config, out)
    part = find_boundary(modes, config.histogram)
    report = [
        f"mode_count={modes.mode_count}",
        f"boundary_index={part.boundary_index}",
        "adjacent_mi=" + ",".join(repr(float(v)) for v in part.adjacent_mi),
        "center_frequencies=" + ",".join(repr(float(f)) for f in modes.center_frequencies),
    ] + [f"warning={w}" for w in part.warnings]
    out.write("partition.txt", "\n".join(report) + "\n")
    out.write("low.csv", _column_csv("low", part.low_series))
    out.write("high.csv", _column_csv("high", part.high_series))


def cmd_train(args, config, out: _Outputs):
    series = load_csv(args.input, _column(args.column))
    kind = ModelKind(args.model)
    n_train = pipeline.train_row_count(len(series), config)
    fit = pipeline.fit_branch(series.values, n_train, kind, config, np.random.SeedSequence(config.base_seed))
    model = fit.model
    model.metadata = {
        "model_kind": kind.value,
        "lag_count": str(config.lag_count),
        "scale_min": repr(fit.scaling.min),
        "scale_max": repr(fit.scaling.max),
        "seed": str(config.base_seed),
    }
    out.write("model.elm", elm_core.dumps(model))
    if fit.history:
        out.write("trace.csv", trace_csv(fit.history))
    out.write("config_echo.cfg", cfg.dumps(config))


def cmd_forecast(args, config, out: _Outputs):
    try:
        model = elm_core.load(args.model_file)
        scaling = ScalingParams(float(model.metadata["scale_min"]), float(model.metadata["scale_max"]))
        lag = int(model.metadata["lag_count"])
    except (OSError, KeyError, ValueError, elm_core.ElmError) as exc:
        raise UsageError(f"cannot use model file {args.model_file}: {exc}") from exc
    series = load_csv(args.input, _column(args.column))
    dataset = make_lag_dataset(minmax_apply(series.values, scaling), lag)
    predicted = minmax_invert(elm_core.predict(model, dataset.features), scaling)
    actual = minmax_invert(dataset.targets, scaling)
    lines = ["index,actual,predicted"] + [f"{i},{float(a)!r},{float(p)!r}" for i, (a, p) in enumerate(zip(actual, predicted))]
    out.write("predictions.csv", "\n".join(lines) + "\n")


def cmd_experiment(args, config, out: _Outputs):
    if args.threads < 1:
        raise UsageError("--threads must be >= 1")
    series = pipeline.load_series(config)
    reports = pipeline.compare(config.models, series, config, threads=args.threads)
    out.write("metrics.csv", metrics_csv([(r.model.value, r.summary) for r in reports]))
    out.write("predictions.csv", pipeline.predictions_csv(reports))
    out.write("config_echo.cfg", cfg.dumps(config))
    out.write("summary.txt", "\n\n".join(summary_block(r.model.value, r.summary) for r in reports) + "\n")
    for r in reports:
        for branch, history in r.histories_last_run.items():
            suffix = "" if branch == "series" else f"_{branch}"
            out.write(f"trace_{r.model.value}{suffix}.csv", trace_csv(history))
    notes = [f"{r.model.value}: {w}" for r in reports for w in r.warnings]
    notes.append("metrics are computed on raw (inverse-scaled) values")
    out.write("warnings.txt", "\n".join(notes) + "\n")
    return reports


def cmd_plot(args, out_path: Path):
    x, columns = plot.read_predictions_csv(args.predictions)
    svg = plot.render_svg(x, columns, title=args.title)
    target = out_path / "plot.svg" if out_path.suffix.lower() != ".svg" else out_path
    outputs = _Outputs(target.parent)
    try:
        outputs.write(target.name, svg)
    except BaseException:
        outputs.rollback()
        raise


COMMANDS = {
    "decompose": cmd_decompose,
    "partition": cmd_partition,
    "train": cmd_train,
    "forecast": cmd_forecast,
    "experiment": cmd_experiment,
}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required: " + ", ".join([*COMMANDS, "plot"]))
        if args.command in STOCHASTIC and args.seed is None:
            raise UsageError(f"{args.command} is stochastic: --seed is required")
        config = None if args.command == "plot" else _resolve_config(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1

    if args.command == "plot":
        try:
            cmd_plot(args, args.out)
        except (OSError, ValueError) as exc:
            print(f"loadforecast plot: {exc}", file=sys.stderr)
            return 2
        return 0

    outputs = _Outputs(args.out)
    try:
        COMMANDS[args.command](args, config, outputs)
    except UsageError as exc:
        outputs.rollback()
        print(exc, file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - every runtime failure maps to exit 2
        outputs.rollback()
        print(f"loadforecast {args.command}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
