"""End-to-end experiments: ELM, PSO-ELM, IPSO-ELM and the VMD two-branch model.

Each forecasting branch only ever sees the training prefix of its series
while it is being fitted; the test region is touched once, to build the
windows that are predicted. :func:`audit_leakage` checks this by refitting
on copies whose test region is NaN-poisoned.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import elm as elm_core
from . import pso
from .config import ExperimentConfig, ModelKind, SyntheticSpec, dumps as dump_config
from .metrics import RunSummary, mape, rmse, summarize
from .partition import find_boundary
from .series import (
    SplitSpec,
    SupervisedDataset,
    TimeSeries,
    load_csv,
    make_lag_dataset,
    minmax_apply,
    minmax_fit,
    minmax_invert,
)
from .vmd import decompose

VMD_LEAK_WARNING = (
    "vmd_ipso_elm: decomposition runs on the full series before the train/test split, "
    "so mode boundaries are shaped by test-period samples"
)


class PipelineError(RuntimeError):
    pass


class RunFailure(PipelineError):
    def __init__(self, seed: int, cause: BaseException):
        super().__init__(f"run with seed {seed} failed: {cause}")
        self.seed = seed


def generate_synthetic(spec: SyntheticSpec = SyntheticSpec()) -> TimeSeries:
    """Base level + linear trend + sinusoids + seeded Gaussian noise, sampled every 15 min."""
    if spec.lower_bound() <= 0:
        raise PipelineError(
            f"synthetic spec can go non-positive (6-sigma lower bound {spec.lower_bound():.3g})"
        )
    t = np.arange(spec.length, dtype=float)
    values = spec.base_level + spec.trend_slope * t
    for amplitude, period, phase in spec.components:
        values = values + amplitude * np.sin(2 * np.pi * t / period + phase)
    if spec.noise_std > 0:
        values = values + np.random.default_rng(spec.seed).normal(0.0, spec.noise_std, spec.length)
    if np.any(values <= 0):
        raise PipelineError("synthetic series is not strictly positive")
    return TimeSeries(values)


def load_series(config: ExperimentConfig) -> TimeSeries:
    if config.data_source == "synthetic":
        return generate_synthetic(config.synthetic)
    return load_csv(config.data_source, config.data_column)


@dataclass
class BranchFit:
    scaling: object
    model: elm_core.ElmModel
    history: tuple[float, ...] = ()


@dataclass
class RunResult:
    kind: ModelKind
    seed: int
    predictions: np.ndarray
    actuals: np.ndarray
    mape: float
    rmse: float
    branch_predictions: dict[str, np.ndarray] = field(default_factory=dict)
    histories: dict[str, tuple[float, ...]] = field(default_factory=dict)
    boundary_index: int | None = None
    warnings: list[str] = field(default_factory=list)
    fits: dict[str, BranchFit] = field(default_factory=dict, repr=False)


@dataclass
class ForecastReport:
    model: ModelKind
    summary: RunSummary
    predictions_last_run: np.ndarray
    actuals: np.ndarray
    config_echo: str
    warnings: list[str] = field(default_factory=list)
    histories_last_run: dict[str, tuple[float, ...]] = field(default_factory=dict)
    runs: list[RunResult] = field(default_factory=list, repr=False)


def train_row_count(series_length: int, config: ExperimentConfig) -> int:
    """Number of lag-window rows in the training partition."""
    n_rows = series_length - config.lag_count
    if n_rows < 2:
        raise PipelineError(f"series of length {series_length} too short for lag {config.lag_count}")
    return SplitSpec(config.train_fraction).split_index(n_rows)


def _branch_seed(seed: int, branch: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=seed, spawn_key=(branch,))


def fit_branch(values, n_train: int, kind: ModelKind, config: ExperimentConfig, seed_seq, map_fn=map) -> BranchFit:
    """Fit scaling and ELM parameters for one series using its first ``n_train`` windows only."""
    lag = config.lag_count
    prefix = np.array(values[: n_train + lag], dtype=float)
    scaling = minmax_fit(prefix)
    train_set = make_lag_dataset(minmax_apply(prefix, scaling), lag)
    assert len(train_set) == n_train

    if kind is ModelKind.ELM:
        weights, biases = elm_core.init_random(config.elm, lag, np.random.default_rng(seed_seq))
        history = ()
    else:
        search = config.pso
        n_fit = SplitSpec(1.0 - search.validation_fraction).split_index(n_train)
        fit_set = SupervisedDataset(train_set.features[:n_fit], train_set.targets[:n_fit], lag)
        val_set = SupervisedDataset(train_set.features[n_fit:], train_set.targets[n_fit:], lag)
        low, high = pso.elm_search_bounds(config.elm, lag)
        pso_config = pso.PsoConfig(
            bounds_low=low,
            bounds_high=high,
            population=search.population,
            iterations=search.iterations,
            cognitive=search.cognitive,
            social=search.social,
            inertia=search.inertia,
            velocity_clamp_fraction=search.velocity_clamp_fraction,
            init_mode=pso.InitMode.UNIFORM if kind is ModelKind.PSO_ELM else pso.InitMode.TENT,
        )
        fitness = pso.ElmFitness(fit_set, val_set, config.elm, scaling)
        result = pso.optimize(fitness, pso_config, config.chaos, seed_seq, map_fn)
        weights, biases = pso.decode_elm(result.best_position, config.elm.hidden_count, lag)
        history = result.history

    model = elm_core.train(train_set.features, train_set.targets, weights, biases)
    return BranchFit(scaling, model, history)


def predict_branch(fit: BranchFit, values, n_train: int, lag: int) -> np.ndarray:
    """Predict every test-partition target of ``values`` (rows ``n_train`` onward)."""
    dataset = make_lag_dataset(minmax_apply(np.asarray(values, dtype=float), fit.scaling), lag)
    scaled = elm_core.predict(fit.model, dataset.features[n_train:])
    return minmax_invert(scaled, fit.scaling)


def _branches(kind: ModelKind, values: np.ndarray, config: ExperimentConfig):
    """Series to forecast independently, plus the boundary and any warnings."""
    if kind is not ModelKind.VMD_IPSO_ELM:
        return {"series": values}, None, []
    modes = decompose(values, config.vmd)
    notes = [VMD_LEAK_WARNING]
    if modes.iterations_used >= config.vmd.max_iterations:
        notes.append(
            f"vmd: stopped at max_iterations={config.vmd.max_iterations} "
            f"(update norm {modes.final_update_norm:.3g})"
        )
    notes.append(f"vmd: relative reconstruction residual {modes.residual:.3g}")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        part = find_boundary(modes, config.histogram)
    notes.extend(part.warnings)
    return {"low": part.low_series, "high": part.high_series}, part.boundary_index, notes


def run_single(kind, series, config: ExperimentConfig, seed: int, map_fn=map) -> RunResult:
    """One seeded train/test run of ``kind``; metrics are on raw (unscaled) values."""
    kind = ModelKind(kind)
    values = np.asarray(getattr(series, "values", series), dtype=float)
    lag = config.lag_count
    n_train = train_row_count(values.size, config)
    actuals = values[n_train + lag :]

    branches, boundary, notes = _branches(kind, values, config)
    preds: dict[str, np.ndarray] = {}
    histories: dict[str, tuple[float, ...]] = {}
    fits: dict[str, BranchFit] = {}
    for b, (name, branch_values) in enumerate(branches.items()):
        fit = fits[name] = fit_branch(branch_values, n_train, kind, config, _branch_seed(seed, b), map_fn)
        preds[name] = predict_branch(fit, branch_values, n_train, lag)
        if fit.history:
            histories[name] = fit.history
        if preds[name].shape != actuals.shape:
            raise PipelineError(f"branch {name!r} is misaligned with the test partition")

    if kind is ModelKind.VMD_IPSO_ELM:
        predictions = preds["low"] + preds["high"]
    else:
        predictions = preds["series"]
    return RunResult(
        kind=kind,
        seed=seed,
        predictions=predictions,
        actuals=actuals.copy(),
        mape=mape(actuals, predictions),
        rmse=rmse(actuals, predictions),
        branch_predictions=preds if len(preds) > 1 else {},
        histories=histories,
        boundary_index=boundary,
        warnings=notes,
        fits=fits,
    )


def _map_runs(fn, seeds, threads: int):
    if threads <= 1:
        return [fn(s) for s in seeds]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, seeds))


def run_repeated(kind, series, config: ExperimentConfig, threads: int = 1) -> ForecastReport:
    """Run seeds ``base_seed .. base_seed + run_count - 1`` and summarise.

    Results are gathered in seed order whatever ``threads`` is, so the
    report does not depend on scheduling.
    """
    kind = ModelKind(kind)

    def one(seed):
        try:
            return run_single(kind, series, config, seed)
        except Exception as exc:
            raise RunFailure(seed, exc) from exc

    seeds = [config.base_seed + i for i in range(config.run_count)]
    results = _map_runs(one, seeds, threads)
    last = results[-1]
    notes = []
    for r in results:
        for note in r.warnings:
            if note not in notes:
                notes.append(note)
    return ForecastReport(
        model=kind,
        summary=summarize([(r.mape, r.rmse) for r in results]),
        predictions_last_run=last.predictions,
        actuals=last.actuals,
        config_echo=dump_config(config),
        warnings=notes,
        histories_last_run=last.histories,
        runs=results,
    )


def compare(kinds, series, config: ExperimentConfig, threads: int = 1) -> list[ForecastReport]:
    """:func:`run_repeated` for every kind on the same series and split."""
    kinds = [ModelKind(k) for k in kinds]
    if not kinds:
        raise PipelineError("compare needs at least one model kind")
    return [run_repeated(k, series, config, threads) for k in kinds]


@dataclass(frozen=True)
class AuditResult:
    kind: ModelKind
    seed: int
    branches: tuple[str, ...]
    clean: bool
    detail: str = ""


def _same_fit(a: BranchFit, b: BranchFit) -> bool:
    return (
        a.scaling == b.scaling
        and np.array_equal(a.model.input_weights, b.model.input_weights)
        and np.array_equal(a.model.biases, b.model.biases)
        and np.array_equal(a.model.output_weights, b.model.output_weights)
        and a.history == b.history
    )


def audit_leakage(kind, series, config: ExperimentConfig, seed: int, reference: RunResult | None = None) -> AuditResult:
    """Refit every branch with its test region replaced by NaN and compare bit for bit.

    Any training or fitness path that read a test-partition value would
    either produce non-finite parameters or different ones. ``reference``
    (the :class:`RunResult` of the same kind and seed) saves the clean refit.
    """
    kind = ModelKind(kind)
    values = np.asarray(getattr(series, "values", series), dtype=float)
    n_train = train_row_count(values.size, config)
    cut = n_train + config.lag_count
    branches, _, _ = _branches(kind, values, config)
    problems = []
    for b, (name, branch_values) in enumerate(branches.items()):
        poisoned = np.array(branch_values, dtype=float)
        poisoned[cut:] = np.nan
        if reference is not None:
            clean = reference.fits[name]
        else:
            clean = fit_branch(branch_values, n_train, kind, config, _branch_seed(seed, b))
        with np.errstate(invalid="ignore"):
            try:
                dirty = fit_branch(poisoned, n_train, kind, config, _branch_seed(seed, b))
            except (ValueError, ArithmeticError) as exc:
                problems.append(f"{name} ({exc})")
                continue
        if not _same_fit(clean, dirty):
            problems.append(name)
    detail = "" if not problems else "test-region values influenced branch(es): " + ", ".join(problems)
    return AuditResult(kind, seed, tuple(branches), not problems, detail)


def predictions_csv(reports: list[ForecastReport]) -> str:
    """``index,actual,predicted`` (one ``predicted_<model>`` column per model when comparing)."""
    actuals = reports[0].actuals
    for r in reports[1:]:
        if not np.array_equal(r.actuals, actuals):
            raise PipelineError("reports do not share test actuals")
    if len(reports) == 1:
        names = ["predicted"]
    else:
        names = [f"predicted_{r.model.value}" for r in reports]
    lines = [",".join(["index", "actual", *names])]
    for i, a in enumerate(actuals):
        lines.append(",".join([str(i), repr(float(a))] + [repr(float(r.predictions_last_run[i])) for r in reports]))
    return "\n".join(lines) + "\n"

