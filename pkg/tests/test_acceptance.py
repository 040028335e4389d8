"""Acceptance suite.

Each test implements one acceptance criterion at its stated tolerance and
runtime budget and prints one pass/fail line (run with ``pytest -s`` to see
them).  Statistical criteria use fixed seeds, so outcomes are reproducible.
"""

import json
import math
import multiprocessing
import time

import numpy as np

from influmax import (SbmParams, CAP_EXCEEDED, classify_regime,
                      empirical_outcome_distribution, exact_mean_degrees,
                      exact_outcome_distribution, expected_total_progeny,
                      compute_ground_truth, kl_poisson, run_ducb,
                      run_ducb_double, run_replicates, simulate_total_progeny,
                      subsample_size, survival_probabilities, total_variation,
                      ucb_index)
from influmax.cli import main as cli_main
from influmax.configio import PolicyConfig


def report(num, description, ok, elapsed, budget):
    ok = bool(ok) and elapsed < budget
    status = "PASS" if ok else "FAIL"
    print(f"\n[{status}] criterion {num:2d}: {description} "
          f"({elapsed:.2f}s of {budget:.0f}s budget)")
    assert ok, f"criterion {num}: {description} ({elapsed:.2f}s/{budget:.0f}s)"


def subcritical_example(n=1000):
    return classify_regime(SbmParams(
        n=n, alpha=np.array([0.5, 0.5]), K=np.array([[1.2, 0.4], [0.4, 0.8]])))


# -- criterion 1 -------------------------------------------------------------


def test_criterion_01_index_solver():
    start = time.perf_counter()
    rng = np.random.default_rng(101)
    ok = True
    for _ in range(1000):
        mean = float(rng.uniform(0.0, 10.0))
        pulls = int(rng.integers(1, 10_001))
        t = int(rng.integers(2, 1_000_001))
        threshold = 3.0 * math.log(t) / pulls
        index = ucb_index(mean, pulls, t)
        ok = ok and abs(kl_poisson(mean, index) - threshold) < 1e-8
        ok = ok and abs(ucb_index(0.0, pulls, t) - threshold) < 1e-10
    elapsed = time.perf_counter() - start
    report(1, "index inversion within 1e-8 on 1000 random cases "
              "(zero-mean case exact to 1e-10)", ok, elapsed, 1.0)


# -- criterion 2 -------------------------------------------------------------


def test_criterion_02_branching_linear_system():
    start = time.perf_counter()
    model = subcritical_example()
    x = expected_total_progeny(model)
    ok = bool(np.all(np.abs(x - np.array([4.0, 3.0])) < 1e-9))
    rng = np.random.default_rng(202)
    runs = 100_000
    for community in (0, 1):
        values = np.empty(runs)
        for i in range(runs):
            values[i] = simulate_total_progeny(model, community, 100_000, rng)
        se = values.std(ddof=1) / math.sqrt(runs)
        ok = ok and abs(values.mean() - x[community]) < 3.0 * se
    elapsed = time.perf_counter() - start
    report(2, "progeny solve gives (4, 3) to 1e-9 and 1e5 simulations per "
              "type agree within 3 SE", ok, elapsed, 30.0)


# -- criterion 3 -------------------------------------------------------------


def _survival_bisection_oracle(lam, iters=200):
    lo, hi = 1e-12, 1.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if 1.0 - math.exp(-lam * mid) - mid > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def test_criterion_03_survival_fixed_point():
    start = time.perf_counter()
    model = classify_regime(SbmParams(n=100, alpha=np.array([1.0]),
                                      K=np.array([[2.0]])))
    rho = float(survival_probabilities(model)[0])
    oracle = _survival_bisection_oracle(2.0)
    ok = abs(rho - oracle) < 1e-6 and abs(rho - 0.796812) < 1e-6
    rng = np.random.default_rng(303)
    runs = 100_000
    exceeded = sum(simulate_total_progeny(model, 0, 10_000, rng) is CAP_EXCEEDED
                   for _ in range(runs))
    ok = ok and abs(exceeded / runs - rho) < 0.01
    elapsed = time.perf_counter() - start
    report(3, "survival fixed point matches the bisection oracle to 1e-6 and "
              "the cap-exceeded rate to 0.01", ok, elapsed, 60.0)


# -- criterion 4 -------------------------------------------------------------


def test_criterion_04_oracle_equivalence():
    start = time.perf_counter()
    model = classify_regime(SbmParams(n=4, alpha=np.array([1.0]),
                                      K=np.array([[2.0]])))  # p = 0.5
    exact = exact_outcome_distribution(model, 0)
    rng = np.random.default_rng(404)
    empirical = empirical_outcome_distribution(model, 0, 1_000_000, rng)
    tv = total_variation(exact, empirical)
    elapsed = time.perf_counter() - start
    report(4, f"lazy explorer vs 64-graph enumeration: TV = {tv:.5f} < 0.01 "
              "at 1e6 samples", tv < 0.01, elapsed, 60.0)


# -- criterion 5 -------------------------------------------------------------


def test_criterion_05_subcritical_gap_inequality():
    start = time.perf_counter()
    model = subcritical_example(n=1000)
    rng = np.random.default_rng(505)
    samples = 200_000
    mu = np.array([exact_mean_degrees(model)[0], exact_mean_degrees(model)[500]])
    c_hat = np.empty(2)
    c_se = np.empty(2)
    from influmax import lazy_explore
    for idx, vertex in enumerate((0, 500)):
        sizes = np.empty(samples)
        for i in range(samples):
            sizes[i] = lazy_explore(model, vertex, rng).component_size
        c_hat[idx] = sizes.mean()
        c_se[idx] = sizes.std(ddof=1) / math.sqrt(samples)
    ok = int(np.argmax(c_hat)) == int(np.argmax(mu))
    best = int(np.argmax(c_hat))
    for a in range(2):
        lhs = c_hat[best] - c_hat[a]
        rhs = (2.0 * c_hat[best] * (mu.max() - mu[a])
               + 3.0 * math.sqrt(c_se[best] ** 2 + c_se[a] ** 2))
        ok = ok and lhs <= rhs
    elapsed = time.perf_counter() - start
    report(5, "subcritical argmax agreement and gap inequality at n=1000 "
              "with 2e5 samples per type", ok, elapsed, 300.0)


# -- criterion 6 -------------------------------------------------------------


def test_criterion_06_supercritical_giant_fractions():
    start = time.perf_counter()
    model = classify_regime(SbmParams(n=5000, alpha=np.array([0.5, 0.5]),
                                      K=np.array([[3.0, 1.0], [1.0, 2.0]])))
    rho = survival_probabilities(model)
    fraction = float(model.params.alpha @ rho)
    rng = np.random.default_rng(606)
    samples = 20_000
    mu = exact_mean_degrees(model)[[0, 2500]]
    c_hat = np.empty(2)
    from influmax import lazy_explore
    for idx, vertex in enumerate((0, 2500)):
        sizes = np.empty(samples)
        for i in range(samples):
            sizes[i] = lazy_explore(model, vertex, rng).component_size
        c_hat[idx] = sizes.mean()
    ok = int(np.argmax(c_hat)) == int(np.argmax(mu))
    for i in range(2):
        ok = ok and abs(c_hat[i] / 5000 - float(rho[i]) * fraction) < 0.03
    elapsed = time.perf_counter() - start
    report(6, "supercritical argmax agreement and c_hat/n within 0.03 of "
              "rho_i * sum(alpha*rho) at n=5000", ok, elapsed, 600.0)


# -- criterion 7 -------------------------------------------------------------


class _PoissonPairEnv:
    """Two-arm stub: Poisson degrees with fixed means, pre-drawn per arm."""

    def __init__(self, means, seed, horizon):
        rng = np.random.default_rng(seed)
        self._draws = {v: rng.poisson(mu, horizon).tolist()
                       for v, mu in means.items()}
        self._next = {v: 0 for v in means}

    def __call__(self, vertex):
        i = self._next[vertex]
        self._next[vertex] = i + 1
        d = self._draws[vertex][i]
        return d, d + 1


def _criterion7_worker(seed):
    T = 100_000
    env = _PoissonPairEnv({0: 0.8, 1: 0.6}, seed, T)
    _, state = run_ducb(None, [0, 1], T, None, environment=env)
    return state.pull_counts()[1]


def test_criterion_07_play_count_bound():
    start = time.perf_counter()
    T = 100_000
    eta = (0.8 - 0.6) / 3.0
    bound = 0.8 * (2.0 + 6.0 * math.log(T)) / eta ** 2 + 3.0
    seeds = list(range(700, 750))
    ctx = multiprocessing.get_context("fork")
    with ctx.Pool(processes=2) as pool:
        counts = pool.map(_criterion7_worker, seeds)
    mean_suboptimal = float(np.mean(counts))
    elapsed = time.perf_counter() - start
    report(7, f"mean suboptimal plays {mean_suboptimal:.0f} <= {bound:.0f} "
              "over 50 runs at T=1e5", mean_suboptimal <= bound, elapsed, 120.0)


# -- criterion 8 -------------------------------------------------------------


def test_criterion_08_mgf_domination():
    start = time.perf_counter()
    rng = np.random.default_rng(808)
    s_grid = (-2.0, -1.0, -0.5, 0.5, 1.0, 2.0)
    ok = True
    rows = 0
    while rows < 100:
        for n in (50, 500):
            S = int(rng.integers(1, 5))
            raw = rng.uniform(0.5, 1.5, size=S)
            sizes = np.maximum(1, np.round(raw / raw.sum() * n)).astype(int)
            sizes[-1] = n - sizes[:-1].sum()
            if sizes.min() < 1:
                continue
            K = rng.uniform(0.2, 3.0, size=(S, S))
            K = (K + K.T) / 2.0
            row_type = int(rng.integers(S))
            counts = sizes.copy()
            counts[row_type] -= 1
            p = np.repeat(K[row_type] / n, counts)
            mean = float(p.sum())
            for s in s_grid:
                factor = math.exp(s) - 1.0
                margin = mean * factor - float(np.log1p(p * factor).sum())
                ok = ok and margin >= -1e-12
            rows += 1
    elapsed = time.perf_counter() - start
    report(8, "Bernoulli-product MGF dominated by the equal-mean Poisson MGF "
              "on 100 random rows (margin >= -1e-12)", ok, elapsed, 1.0)


# -- criterion 9 -------------------------------------------------------------


def test_criterion_09_regret_sublinearity_and_telescoping():
    start = time.perf_counter()
    model = subcritical_example(n=1000)
    ground_truth = compute_ground_truth(model, 0.4, "branching_prediction")
    policy = PolicyConfig(name="ducb_fixed_T", T=10_000, alpha=0.4)
    traces = run_replicates(model, ground_truth, policy,
                            seeds=list(range(900, 920)), workers=2)
    rate_early = np.mean([t.regret_at(1000) for t in traces]) / 1000
    rate_late = np.mean([t.regret_at(10_000) for t in traces]) / 10_000
    ok = rate_late < rate_early
    for trace in traces:
        pulls = {}
        for record in trace.records:
            pulls[record.vertex] = pulls.get(record.vertex, 0) + 1
        telescoped = sum(count * (ground_truth.c_star_alpha - ground_truth.c[v])
                         for v, count in pulls.items())
        ok = ok and abs(trace.cumulative_quantile_regret[-1] - telescoped) < 1e-9
    elapsed = time.perf_counter() - start
    report(9, f"regret rate falls ({rate_early:.4f} -> {rate_late:.4f}) and "
              "every trace telescopes exactly", ok, elapsed, 300.0)


# -- criterion 10 ------------------------------------------------------------


def test_criterion_10_doubling_schedule():
    start = time.perf_counter()
    model = classify_regime(SbmParams(n=50, alpha=np.array([1.0]),
                                      K=np.array([[0.5]])))
    env = lambda vertex: (vertex % 3, vertex % 3 + 1)
    records, schedule = run_ducb_double(model, 7, 2.0, 0.5,
                                        np.random.default_rng(10),
                                        environment=env)
    ranges = [(e.t_start, e.t_end) for e in schedule.epochs]
    ok = ranges == [(1, 1), (2, 3), (4, 7)]
    ok = ok and [r.round for r in records] == list(range(1, 8))
    for epoch in schedule.epochs:
        length = epoch.t_end - epoch.t_start + 1
        ok = ok and sum(epoch.final_state.pull_counts().values()) == length
    elapsed = time.perf_counter() - start
    report(10, "beta=2, T=7 gives epochs [1,1],[2,3],[4,7] with fresh "
               "statistics per epoch", ok, elapsed, 1.0)


# -- criterion 11 ------------------------------------------------------------


def test_criterion_11_reproducibility(tmp_path):
    start = time.perf_counter()
    config = {
        "model": {"kind": "sbm", "n": 200, "alpha": [0.5, 0.5],
                  "K": [[1.2, 0.4], [0.4, 0.8]]},
        "policy": {"name": "ducb_fixed_T", "T": 200, "alpha": 0.4},
        "ground_truth": {"method": "branching_prediction"},
        "seeds": [5, 6],
        "output_dir": str(tmp_path / "out"),
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config))
    ok = cli_main(["run", "--config", str(path), "--quiet"]) == 0
    first = {p.name: p.read_bytes() for p in (tmp_path / "out").iterdir()}
    ok = ok and cli_main(["run", "--config", str(path), "--quiet"]) == 0
    second = {p.name: p.read_bytes() for p in (tmp_path / "out").iterdir()}
    ok = ok and first == second and len(first) == 3
    elapsed = time.perf_counter() - start
    report(11, "repeated runs with the same seed produce byte-identical "
               "trace CSVs", ok, elapsed, 60.0)
