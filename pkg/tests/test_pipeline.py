import dataclasses

import numpy as np
import pytest

from loadforecast import config as cfg
from loadforecast import pipeline
from loadforecast.config import ExperimentConfig, ModelKind, SearchConfig, SyntheticSpec
from loadforecast.vmd import VmdConfig


@pytest.fixture(scope="module")
def small():
    """A configuration small enough for unit tests (seconds, not minutes)."""
    return ExperimentConfig(
        run_count=2,
        synthetic=SyntheticSpec(length=300),
        pso=SearchConfig(population=6, iterations=4),
        vmd=VmdConfig(mode_count=3, max_iterations=100),
    )


@pytest.fixture(scope="module")
def series(small):
    return pipeline.generate_synthetic(small.synthetic)


def test_synthetic_single_sinusoid_exact():
    spec = SyntheticSpec(length=200, base_level=10, trend_slope=0, components=((2.0, 50.0, 0.3),), noise_std=0)
    t = np.arange(200)
    expected = 10 + 2.0 * np.sin(2 * np.pi * t / 50.0 + 0.3)
    assert np.array_equal(pipeline.generate_synthetic(spec).values, expected)


def test_synthetic_is_seeded():
    a = pipeline.generate_synthetic(SyntheticSpec(seed=3))
    b = pipeline.generate_synthetic(SyntheticSpec(seed=3))
    assert a.values.tobytes() == b.values.tobytes()
    assert a.values.tobytes() != pipeline.generate_synthetic(SyntheticSpec(seed=4)).values.tobytes()


def test_default_synthetic_is_positive():
    s = pipeline.generate_synthetic()
    assert len(s) == 1096
    assert s.values.min() > 0


def test_synthetic_rejects_nonpositive_spec():
    with pytest.raises(pipeline.PipelineError, match="non-positive"):
        pipeline.generate_synthetic(SyntheticSpec(base_level=50))


def test_train_row_count_on_default_length():
    assert pipeline.train_row_count(1096, ExperimentConfig()) == 816


@pytest.mark.parametrize("kind", list(ModelKind))
def test_run_single_is_deterministic(kind, series, small):
    a = pipeline.run_single(kind, series, small, 11)
    b = pipeline.run_single(kind, series, small, 11)
    assert a.predictions.tobytes() == b.predictions.tobytes()
    assert a.mape == b.mape and a.rmse == b.rmse
    n_train = pipeline.train_row_count(len(series), small)
    assert a.actuals.tolist() == series.values[n_train + small.lag_count :].tolist()
    assert a.predictions.shape == a.actuals.shape


def test_vmd_branch_sum_is_exact(series, small):
    r = pipeline.run_single(ModelKind.VMD_IPSO_ELM, series, small, 0)
    assert set(r.branch_predictions) == {"low", "high"}
    assert np.array_equal(r.predictions, r.branch_predictions["low"] + r.branch_predictions["high"])
    assert set(r.histories) == {"low", "high"}
    assert pipeline.VMD_LEAK_WARNING in r.warnings
    assert 0 <= r.boundary_index < small.vmd.mode_count - 1


def test_search_histories_are_monotone(series, small):
    r = pipeline.run_single(ModelKind.IPSO_ELM, series, small, 1)
    h = np.array(r.histories["series"])
    assert h.size == small.pso.iterations + 1
    assert np.all(np.diff(h) <= 0)


def test_elm_learns_noiseless_sinusoid():
    spec = SyntheticSpec(length=600, base_level=100, trend_slope=0, components=((20.0, 48.0, 0.0),), noise_std=0)
    config = ExperimentConfig(synthetic=spec)
    r = pipeline.run_single(ModelKind.ELM, pipeline.generate_synthetic(spec), config, 0)
    assert r.mape < 1.0


def test_run_repeated_single_run(series, small):
    report = pipeline.run_repeated(ModelKind.ELM, series, dataclasses.replace(small, run_count=1))
    s = report.summary
    assert s.run_count == 1
    assert s.mape_max == s.mape_min == s.mape_mean


def test_seed_lattice(series, small):
    config = dataclasses.replace(small, run_count=3, base_seed=40)
    report = pipeline.run_repeated(ModelKind.PSO_ELM, series, config)
    for i, run in enumerate(report.runs):
        alone = pipeline.run_single(ModelKind.PSO_ELM, series, config, 40 + i)
        assert run.seed == 40 + i
        assert run.predictions.tobytes() == alone.predictions.tobytes()
    assert report.config_echo == cfg.dumps(config)


def test_run_repeated_thread_invariant(series, small):
    serial = pipeline.run_repeated(ModelKind.IPSO_ELM, series, small, threads=1)
    threaded = pipeline.run_repeated(ModelKind.IPSO_ELM, series, small, threads=3)
    assert serial.summary == threaded.summary
    assert serial.predictions_last_run.tobytes() == threaded.predictions_last_run.tobytes()


def test_run_failure_names_seed(small):
    values = np.full(100, 5.0)
    values[::3] = 7.0
    values[-1] = 0.0
    with pytest.raises(pipeline.RunFailure, match="seed 5"):
        pipeline.run_repeated(ModelKind.ELM, values, dataclasses.replace(small, base_seed=5, run_count=1))


def test_compare_single_kind(series, small):
    reports = pipeline.compare([ModelKind.ELM], series, small)
    assert len(reports) == 1
    header = pipeline.predictions_csv(reports).splitlines()[0]
    assert header == "index,actual,predicted"


def test_compare_shares_actuals(series, small):
    reports = pipeline.compare(list(ModelKind), series, small)
    assert [r.model for r in reports] == list(ModelKind)
    for r in reports[1:]:
        assert r.actuals.tobytes() == reports[0].actuals.tobytes()
    lines = pipeline.predictions_csv(reports).splitlines()
    assert lines[0] == "index,actual," + ",".join(f"predicted_{k.value}" for k in ModelKind)
    assert len(lines) == 1 + reports[0].actuals.size


def test_compare_needs_a_kind(series, small):
    with pytest.raises(pipeline.PipelineError):
        pipeline.compare([], series, small)


@pytest.mark.parametrize("kind", list(ModelKind))
def test_audit_is_clean(kind, series, small):
    result = pipeline.audit_leakage(kind, series, small, 3)
    assert result.clean, result.detail


def test_audit_catches_a_leaky_fit(series, small, monkeypatch):
    honest = pipeline.fit_branch

    def leaky(values, n_train, kind, config, seed_seq, map_fn=map):
        # scales with the full-series maximum, a classic look-ahead bug
        fit = honest(values, n_train, kind, config, seed_seq, map_fn)
        fit.scaling = dataclasses.replace(fit.scaling, max=float(np.max(values)))
        return fit

    monkeypatch.setattr(pipeline, "fit_branch", leaky)
    result = pipeline.audit_leakage(ModelKind.ELM, series, small, 0)
    assert not result.clean
    assert "series" in result.detail


def test_config_round_trip():
    config = ExperimentConfig(
        models=(ModelKind.ELM, ModelKind.VMD_IPSO_ELM),
        run_count=4,
        base_seed=9,
        synthetic=SyntheticSpec(components=((1.5, 20.0, 0.1),), noise_std=0.3),
        vmd=VmdConfig(mode_count=5, bandwidth_penalty=1234.5),
    )
    text = cfg.dumps(config)
    assert cfg.loads(text) == config
    assert cfg.dumps(cfg.loads(text)) == text


def test_config_overrides_and_errors():
    config = cfg.from_flat({"pso.population": "12", "vmd.mode_count": "7", "models": "elm,ipso_elm"})
    assert config.pso.population == 12
    assert config.models == (ModelKind.ELM, ModelKind.IPSO_ELM)
    with pytest.raises(cfg.ConfigError):
        cfg.from_flat({"pso.nonsense": "1"})
    with pytest.raises(cfg.ConfigError):
        cfg.from_flat({"run_count": "zero"})
    with pytest.raises(cfg.ConfigError):
        cfg.from_flat({"run_count": "0"})
