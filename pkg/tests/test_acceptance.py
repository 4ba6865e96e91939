"""The twelve acceptance checks, each at its stated tolerance.

Every test reports one ``criterion N: PASS|FAIL`` line (collected in the
terminal summary by ``conftest.py``). Criteria 10 and 12 share one
run_count=10 experiment on the default synthetic series, so the suite
takes several minutes.
"""

import time

import numpy as np
import pytest
from scipy import stats

from loadforecast import cli, elm
from loadforecast import pipeline
from loadforecast.config import ExperimentConfig, ModelKind
from loadforecast.partition import HistogramSpec, entropy, find_boundary, mutual_information
from loadforecast.pso import ChaosConfig, InitMode, PsoConfig, optimize, tent_init, tent_next
from loadforecast.vmd import VmdConfig, decompose

pytestmark = pytest.mark.slow


def sphere(x):
    return float(np.sum(x**2))


def rastrigin(x):
    return float(10 * x.size + np.sum(x**2 - 10 * np.cos(2 * np.pi * x)))


def test_c01_vmd_frequency_recovery(verdict):
    t = np.arange(1000)
    x = np.cos(2 * np.pi * 0.01 * t) + 0.5 * np.cos(2 * np.pi * 0.12 * t)
    start = time.perf_counter()
    m = decompose(x, VmdConfig(mode_count=2, bandwidth_penalty=2000, ascent_rate=0.1, tolerance=1e-7))
    elapsed = time.perf_counter() - start
    rel = np.abs(m.center_frequencies - [0.01, 0.12]) / [0.01, 0.12]
    residual = np.linalg.norm(m.modes.sum(axis=0) - x) / np.linalg.norm(x)
    ok = bool(np.all(rel < 0.05)) and residual <= 1e-3 and elapsed < 10
    verdict(
        1,
        ok,
        f"freq rel err {rel.max():.2e} (<5e-2), reconstruction {residual:.2e} (<=1e-3), {elapsed:.2f}s (<10s)",
    )


def test_c02_vmd_stopping_contract(verdict):
    rng = np.random.default_rng(2)
    early, violations = 0, []
    for i in range(20):
        n = int(rng.integers(200, 800))
        t = np.arange(n)
        x = rng.normal(size=n)
        for _ in range(int(rng.integers(1, 4))):
            x += rng.uniform(0.5, 3) * np.cos(2 * np.pi * rng.uniform(0.005, 0.45) * t + rng.uniform(0, 6))
        m = decompose(x, VmdConfig(mode_count=int(rng.integers(1, 6))))
        if m.iterations_used < 500:
            early += 1
            if not m.final_update_norm < 1e-7:
                violations.append(i)
    verdict(2, not violations, f"{early}/20 signals stopped early, violations {violations}")


def test_c03_elm_exact_interpolation(verdict):
    start = time.perf_counter()
    rmses = []
    for seed in range(20):
        rng = np.random.default_rng(seed)
        x, t = rng.uniform(size=(30, 7)), rng.uniform(size=30)
        w, b = elm.init_random(elm.ElmConfig(hidden_count=40), 7, rng)
        model = elm.train(x, t, w, b)
        rmses.append(float(np.sqrt(np.mean((elm.predict(model, x) - t) ** 2))))
    elapsed = time.perf_counter() - start
    hits = sum(r < 1e-6 for r in rmses)
    verdict(3, hits == 20 and elapsed < 1, f"{hits}/20 seeds with RMSE<1e-6 (worst {max(rmses):.1e}), {elapsed:.3f}s (<1s)")


def test_c04_pseudoinverse_optimality(verdict):
    worst_grad = 0.0
    for seed in range(50):
        rng = np.random.default_rng(100 + seed)
        x = rng.uniform(size=(50, 7))
        w, b = elm.init_random(elm.ElmConfig(hidden_count=40), 7, rng)
        h = elm.hidden_matrix(w, b, x)
        t = rng.normal(size=50)
        beta, _ = elm.pinv_solve(h, t)
        worst_grad = max(worst_grad, float(np.max(np.abs(h.T @ (h @ beta - t)))))

    worst_excess = -np.inf
    for seed in range(10):
        rng = np.random.default_rng(200 + seed)
        rank = int(rng.integers(5, 30))
        h = rng.normal(size=(50, rank)) @ rng.normal(size=(rank, 40))
        t = rng.normal(size=50)
        beta, _ = elm.pinv_solve(h, t)
        null = np.linalg.svd(h)[2][rank:]
        for _ in range(10):
            other = beta + null.T @ rng.normal(size=null.shape[0])
            worst_excess = max(worst_excess, float(np.linalg.norm(beta) - np.linalg.norm(other)))
    ok = worst_grad < 1e-8 and worst_excess <= 1e-9
    verdict(4, ok, f"max |H'(Hb-T)| {worst_grad:.1e} (<1e-8), min-norm excess {worst_excess:.1e} (<=1e-9)")


def test_c05_mutual_information(verdict):
    rng = np.random.default_rng(5)
    x = rng.normal(size=5000)
    self_exact = mutual_information(x, x) == entropy(x)
    u, v = rng.uniform(size=(2, 100_000))
    mi_indep = mutual_information(u, v, HistogramSpec(bin_count=10))
    two_bin = abs(entropy(np.repeat([0.0, 1.0], 500), HistogramSpec(bin_count=2)) - np.log10(2))
    ok = self_exact and mi_indep < 0.01 and two_bin < 1e-12
    verdict(5, ok, f"MI(x,x)==H(x) {self_exact}, independent MI {mi_indep:.1e} (<0.01), two-bin err {two_bin:.1e}")


def test_c06_boundary_detection(verdict):
    hits = 0
    for seed in range(20):
        rng = np.random.default_rng(seed)
        a, b = rng.normal(size=(2, 1000))
        e = 0.3 * rng.normal(size=(4, 1000))
        modes = np.stack([a + e[0], a + e[1], b + e[2], b + e[3]])
        hits += find_boundary(modes).boundary_index == 1
    verdict(6, hits == 20, f"boundary_index == 1 in {hits}/20 seeds")


def test_c07_tent_chaos_quality(verdict):
    chaos = ChaosConfig(chaos_coefficient=2.0, shrink_factor=0.1, beta_a=3.0, beta_b=4.0)
    rng = np.random.default_rng(7)
    y, orbit = 0.123, np.empty(100_000)
    for i in range(orbit.size):
        y = tent_next(y, chaos, rng)
        orbit[i] = y
    ks_orbit = stats.kstest(orbit, "uniform").statistic
    repeats = int(np.sum(orbit[1:] == orbit[:-1]))
    pos = tent_init(10_000, 10, (-1.0, 1.0), chaos, 7)
    ks_init = max(stats.kstest((pos[:, j] + 1) / 2, "uniform").statistic for j in range(10))
    ok = ks_orbit < 0.02 and repeats == 0 and ks_init < 0.03
    verdict(7, ok, f"orbit KS {ks_orbit:.4f} (<0.02), repeats {repeats}, tent_init max KS {ks_init:.4f} (<0.03)")


def test_c08_pso_machinery(verdict):
    counts = {}
    monotone = True
    for mode in InitMode:
        cfg = PsoConfig(np.full(10, -5.0), np.full(10, 5.0), population=30, iterations=200, init_mode=mode)
        hits = 0
        for seed in range(20):
            result = optimize(sphere, cfg, ChaosConfig(), seed)
            monotone &= bool(np.all(np.diff(result.history) <= 0))
            hits += result.best_fitness < 1e-2
        counts[mode.value] = hits
    ok = monotone and all(h >= 18 for h in counts.values())
    verdict(8, ok, f"history monotone {monotone}, sphere <1e-2 seeds {counts} (>=18/20)")


def test_c09_ipso_vs_pso(verdict):
    finals = {}
    for mode in InitMode:
        cfg = PsoConfig(np.full(10, -5.12), np.full(10, 5.12), init_mode=mode)
        finals[mode] = np.mean([optimize(rastrigin, cfg, ChaosConfig(), seed).best_fitness for seed in range(20)])
    tent, uniform = finals[InitMode.TENT], finals[InitMode.UNIFORM]
    verdict(9, tent <= uniform, f"Rastrigin mean final fitness tent {tent:.3f} <= uniform {uniform:.3f}")


@pytest.fixture(scope="module")
def e2e():
    config = ExperimentConfig(run_count=10)
    series = pipeline.generate_synthetic(config.synthetic)
    start = time.perf_counter()
    reports = pipeline.compare(list(ModelKind), series, config, threads=1)
    return config, series, {r.model: r for r in reports}, time.perf_counter() - start


def test_c10_end_to_end_ordering(verdict, e2e):
    _, _, reports, elapsed = e2e
    mean = {k: r.summary.mape_mean for k, r in reports.items()}
    vmd, ipso, pso_ = mean[ModelKind.VMD_IPSO_ELM], mean[ModelKind.IPSO_ELM], mean[ModelKind.PSO_ELM]
    ok = vmd < ipso < pso_ and vmd < 0.7 * ipso and elapsed < 600
    table = ", ".join(f"{k.value} {v:.4f}" for k, v in mean.items())
    verdict(10, ok, f"mean MAPE % {table}; ratio {vmd / ipso:.3f} (<0.7); {elapsed:.0f}s (<600s)")


def test_c11_determinism(verdict, tmp_path):
    args = ["--set", "run_count=3", "--set", "pso.iterations=20"]
    digests = []
    for threads in ("1", "4", "1", "2"):
        out = tmp_path / f"run{len(digests)}"
        code = cli.main(["experiment", "--seed", "11", "--threads", threads, "--out", str(out), *args])
        code |= cli.main(["plot", "--predictions", str(out / "predictions.csv"), "--out", str(out)])
        digests.append((code,) + tuple((out / n).read_bytes() for n in ("metrics.csv", "predictions.csv", "plot.svg")))
    same = all(d == digests[0] for d in digests) and digests[0][0] == 0
    verdict(11, same, "metrics.csv, predictions.csv and plot.svg byte-identical across --threads 1,4,1,2")


def test_c12_no_leakage(verdict, e2e):
    config, series, reports, _ = e2e
    dirty = []
    audited = 0
    for kind, report in reports.items():
        for run in report.runs:
            result = pipeline.audit_leakage(kind, series, config, run.seed, reference=run)
            audited += 1
            if not result.clean:
                dirty.append(f"{kind.value}/seed {run.seed}: {result.detail}")
    verdict(12, not dirty, f"{audited} runs audited with NaN-poisoned test regions, leaks {dirty or 'none'}")
