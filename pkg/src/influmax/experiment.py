"""Experiment orchestration: ground truth, regret traces, validation runs.

Regret is always measured against model-level expected component sizes (from
the branching predictions or a high-budget Monte Carlo), never against the
realized component of a single round.  Every round of an experiment draws a
fresh independent graph, realized lazily around the pulled vertex only.
"""

from __future__ import annotations

import csv
import io
import json
import math
import multiprocessing
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import bandit, branching
from .components import lazy_explore
from .configio import ExperimentConfig, PolicyConfig
from .errors import AssumptionViolation, ConfigError, DomainError, RegimeError
from .graph_models import GraphModel, ModelKind, Regime, mean_degree
from .numerics import ceil_exact

TRACE_SCHEMA_LINE = "# schema=1"
TRACE_COLUMNS = ("round", "epoch", "vertex", "observed_degree", "component_size")

GROUND_TRUTH_BRANCHING = "branching_prediction"
GROUND_TRUTH_MONTE_CARLO = "monte_carlo"

# Multiplicative allowance on c* when checking the supercritical gap
# inequality, covering the asymptotic error of the prediction at finite n.
SUPERCRITICAL_GAP_ALLOWANCE = 0.05


@dataclass(frozen=True)
class GroundTruth:
    """Per-vertex expected component sizes and the quantile baseline.

    ``c`` and ``mu`` have one entry per vertex (SBM values are computed per
    type and broadcast across its block).  ``c_star_alpha`` is the value at
    the 1-based position ceil((1-alpha)*n) of c sorted ascending (ties broken
    by vertex id); ``v_star_alpha`` holds the vertices from that position on.
    """

    alpha: float
    c: np.ndarray
    mu: np.ndarray
    c_source: str
    mc_samples: int
    c_standard_errors: np.ndarray | None
    c_star: float
    c_star_alpha: float
    mu_star_alpha: float
    v_star_alpha: np.ndarray

    def reward_gap(self, vertex: int) -> float:
        """Baseline shortfall (c*_alpha - c_v)+ of a vertex."""
        return max(self.c_star_alpha - float(self.c[vertex]), 0.0)

    def degree_gap(self, vertex: int) -> float:
        """Degree shortfall (mu*_alpha - mu_v)+ of a vertex."""
        return max(self.mu_star_alpha - float(self.mu[vertex]), 0.0)


def exact_mean_degrees(model: GraphModel) -> np.ndarray:
    """Vector of exact expected degrees, one entry per vertex."""
    params = model.params
    n = params.n
    if model.kind is ModelKind.SBM:
        sizes = params.community_sizes
        per_type = (params.K @ sizes - np.diag(params.K)) / n
        return np.repeat(per_type, sizes)
    w = params.w
    return w * (float(w.sum()) - w) / n


def _representative_vertices(model: GraphModel):
    """Exchangeability classes: (representative vertex, member count, member
    slice assignment array index) per class.  SBM classes are the
    communities; Chung-Lu classes group identical weights."""
    params = model.params
    if model.kind is ModelKind.SBM:
        starts = params.community_starts
        reps = [int(starts[m]) for m in range(params.num_communities)]
        assign = np.repeat(np.arange(params.num_communities), params.community_sizes)
        return reps, assign
    values, inverse = np.unique(params.w, return_inverse=True)
    reps = [int(np.argmax(params.w == value)) for value in values]
    return reps, inverse


def _monte_carlo_component_means(model, mc_samples, rng):
    reps, assign = _representative_vertices(model)
    means = np.empty(len(reps))
    errors = np.empty(len(reps))
    for idx, vertex in enumerate(reps):
        sizes = np.empty(mc_samples)
        for s in range(mc_samples):
            sizes[s] = lazy_explore(model, vertex, rng).component_size
        means[idx] = sizes.mean()
        errors[idx] = sizes.std(ddof=1) / math.sqrt(mc_samples) if mc_samples > 1 else 0.0
    return means[assign], errors[assign]


def compute_ground_truth(model: GraphModel, alpha: float, method: str,
                         mc_samples: int = 0,
                         rng: np.random.Generator | None = None) -> GroundTruth:
    """Expected component sizes plus the alpha-quantile baseline.

    ``method`` is "branching_prediction" (exact in the subcritical regime,
    asymptotic in the supercritical one) or "monte_carlo" (repeated lazy
    exploration per exchangeability class, with standard errors).
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    n = model.params.n
    if method == GROUND_TRUTH_BRANCHING:
        solution = branching.solve_branching(model)
        if model.regime is Regime.CRITICAL:
            raise RegimeError("no branching prediction in the critical band")
        reps, assign = _representative_vertices(model)
        if model.kind is ModelKind.SBM:
            per_class = np.array([
                branching.predicted_component_mean(model, solution, m)
                for m in range(model.params.num_communities)])
        else:
            per_vertex_index = reps
            per_class = np.array([
                branching.predicted_component_mean(model, solution, v)
                for v in per_vertex_index])
        c = per_class[assign]
        errors = None
        samples = 0
    elif method == GROUND_TRUTH_MONTE_CARLO:
        if mc_samples < 1:
            raise DomainError("monte_carlo ground truth needs mc_samples >= 1")
        if rng is None:
            raise DomainError("monte_carlo ground truth needs a random stream")
        c, errors = _monte_carlo_component_means(model, mc_samples, rng)
        samples = mc_samples
    else:
        raise DomainError(f"unknown ground-truth method {method!r}")

    mu = exact_mean_degrees(model)
    order = np.lexsort((np.arange(n), c))  # ascending c, ties by vertex id
    position = ceil_exact((1.0 - alpha) * n)  # 1-based index into the ordering
    position = min(max(position, 1), n)
    v_star = order[position - 1:]
    c_star_alpha = float(c[order[position - 1]])
    mu_star_alpha = float(mu[v_star].min())
    return GroundTruth(
        alpha=alpha, c=c, mu=mu, c_source=method, mc_samples=samples,
        c_standard_errors=errors, c_star=float(c.max()),
        c_star_alpha=c_star_alpha, mu_star_alpha=mu_star_alpha,
        v_star_alpha=v_star)


@dataclass(frozen=True)
class RegretTrace:
    """One replicate: the pull log and the running quantile regret."""

    seed: int
    config: dict
    records: tuple
    cumulative_quantile_regret: np.ndarray

    @property
    def horizon(self) -> int:
        return len(self.records)

    def regret_at(self, t: int) -> float:
        return float(self.cumulative_quantile_regret[t - 1])


def accumulate_regret(records: Sequence[bandit.PullRecord],
                      ground_truth: GroundTruth) -> np.ndarray:
    """Running sum of per-round baseline shortfalls c*_alpha - c[vertex].

    Negative contributions (arms above the baseline) are kept as-is.
    """
    gaps = ground_truth.c_star_alpha - ground_truth.c[[r.vertex for r in records]]
    return np.cumsum(gaps)


def run_single(model: GraphModel, ground_truth: GroundTruth,
               policy: PolicyConfig, seed: int) -> RegretTrace:
    """Run one replicate of a policy.

    The replicate seed is split into three independent streams (arm-set
    sampling, environment, policy-internal randomness) via SeedSequence
    spawning, so traces are reproducible byte-for-byte.
    """
    sampling_ss, env_ss, policy_ss = np.random.SeedSequence(seed).spawn(3)
    env_rng = np.random.default_rng(env_ss)

    def environment(vertex):
        outcome = lazy_explore(model, vertex, env_rng)
        return outcome.degree, outcome.component_size

    n = model.params.n
    T = policy.T
    if policy.name == "ducb_fixed_T":
        size = min(n, bandit.subsample_size(T, policy.alpha))
        sampling_rng = np.random.default_rng(sampling_ss)
        arm_set = sorted(int(v) for v in sampling_rng.choice(n, size=size, replace=False))
        records, _ = bandit.run_ducb(model, arm_set, T, env_rng, environment=environment)
    elif policy.name == "ducb_double":
        sampling_rng = np.random.default_rng(sampling_ss)
        records, _ = bandit.run_ducb_double(model, T, policy.beta, policy.alpha,
                                            sampling_rng, environment=environment)
    elif policy.name == "uniform_baseline":
        policy_rng = np.random.default_rng(policy_ss)
        records = []
        for t in range(1, T + 1):
            vertex = int(policy_rng.integers(n))
            deg, comp = environment(vertex)
            records.append(bandit.PullRecord(t, 0, vertex, deg, comp))
    else:
        raise ConfigError(f"policy.name: unknown policy {policy.name!r}")

    regret = accumulate_regret(records, ground_truth)
    snapshot = {"policy": policy.to_dict(), "alpha": ground_truth.alpha,
                "c_source": ground_truth.c_source}
    return RegretTrace(seed=seed, config=snapshot, records=tuple(records),
                       cumulative_quantile_regret=regret)


def _replicate_worker(args):
    return run_single(*args)


def run_replicates(model: GraphModel, ground_truth: GroundTruth,
                   policy: PolicyConfig, seeds: Sequence[int],
                   workers: int = 1) -> list:
    """Run one replicate per seed, optionally across processes.

    Replicates use disjoint streams, so the result list (ordered by seed
    position) is identical regardless of ``workers``.
    """
    jobs = [(model, ground_truth, policy, int(seed)) for seed in seeds]
    if workers <= 1 or len(jobs) <= 1:
        return [run_single(*job) for job in jobs]
    ctx = multiprocessing.get_context("fork")
    with ctx.Pool(processes=min(workers, len(jobs))) as pool:
        return pool.map(_replicate_worker, jobs)


def run_experiment(config: ExperimentConfig, workers: int = 1):
    """Full run from a parsed config: ground truth, all replicates, summary."""
    if config.policy is None:
        raise ConfigError("policy: required for experiment runs")
    model = config.build_model()
    gt_rng = np.random.default_rng(
        np.random.SeedSequence(config.ground_truth_seed))
    ground_truth = compute_ground_truth(
        model, config.policy.alpha, config.ground_truth.method,
        config.ground_truth.mc_samples, gt_rng)
    traces = run_replicates(model, ground_truth, config.policy,
                            config.seeds, workers)
    summary = summarize_traces(traces, config.policy.T)
    return model, ground_truth, traces, summary


def summarize_traces(traces: Sequence[RegretTrace], T: int) -> dict:
    """Mean/stddev of cumulative regret at the checkpoints T/10, T/2, T."""
    checkpoints = sorted({max(1, T // 10), max(1, T // 2), T})
    table = {}
    for t in checkpoints:
        values = np.array([trace.regret_at(t) for trace in traces])
        table[str(t)] = {
            "mean": float(values.mean()),
            "stddev": float(values.std(ddof=1)) if len(values) > 1 else 0.0,
        }
    return {"replicates": len(traces), "checkpoints": table}


def trace_to_csv_bytes(trace: RegretTrace) -> bytes:
    """Serialize a trace under the frozen 5-column schema."""
    buffer = io.StringIO()
    buffer.write(TRACE_SCHEMA_LINE + "\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(TRACE_COLUMNS)
    for record in trace.records:
        writer.writerow(record)
    return buffer.getvalue().encode("ascii")


def write_trace_csv(trace: RegretTrace, path) -> None:
    with open(path, "wb") as handle:
        handle.write(trace_to_csv_bytes(trace))


def ground_truth_to_dict(ground_truth: GroundTruth) -> dict:
    data = {
        "alpha": ground_truth.alpha,
        "c_source": ground_truth.c_source,
        "mc_samples": ground_truth.mc_samples,
        "c_star": ground_truth.c_star,
        "c_star_alpha": ground_truth.c_star_alpha,
        "mu_star_alpha": ground_truth.mu_star_alpha,
        "near_optimal_count": int(ground_truth.v_star_alpha.size),
        "c": ground_truth.c.tolist(),
        "mu": ground_truth.mu.tolist(),
    }
    if ground_truth.c_standard_errors is not None:
        data["c_standard_errors"] = ground_truth.c_standard_errors.tolist()
    return data


@dataclass(frozen=True)
class PropositionReport:
    """Outcome of the argmax-agreement and gap-inequality checks."""

    regime: str
    assumptions_checked: tuple
    mu: tuple
    c_hat: tuple
    c_hat_se: tuple
    degenerate_tie: bool
    argmax_agreement: bool | None
    gap_inequality_holds: bool
    rows: tuple = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "regime": self.regime,
            "assumptions_checked": list(self.assumptions_checked),
            "mu": list(self.mu),
            "c_hat": list(self.c_hat),
            "c_hat_se": list(self.c_hat_se),
            "degenerate_tie": self.degenerate_tie,
            "argmax_agreement": self.argmax_agreement,
            "gap_inequality_holds": self.gap_inequality_holds,
            "rows": [dict(row) for row in self.rows],
        }


def _check_structural_assumptions(model: GraphModel):
    """Equal off-diagonals always; within-community dominance when
    supercritical.  Chung-Lu models need no structural checks."""
    checked = []
    if model.kind is ModelKind.SBM:
        K = model.params.K
        S = K.shape[0]
        if S > 1:
            off = K[~np.eye(S, dtype=bool)]
            if float(off.max() - off.min()) > 1e-12:
                raise AssumptionViolation(
                    "assumption 1: off-diagonal kernel entries must all be equal")
            k = float(off[0])
        else:
            k = 0.0
        checked.append("assumption_1")
        if model.regime is Regime.SUPERCRITICAL:
            if np.any(np.diag(K) < k - 1e-12):
                raise AssumptionViolation(
                    "assumption 2: diagonal kernel entries must be >= the "
                    "off-diagonal value")
            checked.append("assumption_2")
    return tuple(checked)


def validate_propositions(model: GraphModel, mc_samples: int,
                          rng: np.random.Generator) -> PropositionReport:
    """Empirically check that local and global optima coincide.

    Reports (a) whether the argmax of the Monte Carlo component means agrees
    with the argmax of the exact mean degrees, (b) whether the regime's gap
    inequality holds with Monte Carlo slack (plus an asymptotic allowance of
    0.05*c* when supercritical), and (c) the raw numbers.  Exact asymptotic
    error terms are never asserted.
    """
    if model.regime is Regime.CRITICAL:
        raise RegimeError("propositions cover only sub- and supercritical models")
    if mc_samples < 1:
        raise DomainError("mc_samples must be >= 1")
    checked = _check_structural_assumptions(model)

    reps, _assign = _representative_vertices(model)
    mu = np.array([mean_degree(model, v) for v in reps])
    c_hat = np.empty(len(reps))
    c_se = np.empty(len(reps))
    for idx, vertex in enumerate(reps):
        sizes = np.empty(mc_samples)
        for s in range(mc_samples):
            sizes[s] = lazy_explore(model, vertex, rng).component_size
        c_hat[idx] = sizes.mean()
        c_se[idx] = sizes.std(ddof=1) / math.sqrt(mc_samples) if mc_samples > 1 else 0.0

    order = np.argsort(mu)
    tie = bool(len(mu) > 1 and abs(mu[order[-1]] - mu[order[-2]]) < 1e-9)
    agreement = None if tie else bool(int(np.argmax(c_hat)) == int(np.argmax(mu)))

    subcritical = model.regime is Regime.SUBCRITICAL
    factor = 2.0 if subcritical else 1.0
    best = int(np.argmax(c_hat))
    c_star = float(c_hat[best])
    mu_star = float(mu.max())
    rows = []
    holds = True
    for idx in range(len(reps)):
        lhs = c_star - float(c_hat[idx])
        slack = 3.0 * math.sqrt(c_se[best] ** 2 + c_se[idx] ** 2)
        if not subcritical:
            slack += SUPERCRITICAL_GAP_ALLOWANCE * c_star
        rhs = factor * c_star * (mu_star - float(mu[idx])) + slack
        ok = lhs <= rhs
        holds = holds and ok
        rows.append({"class": idx, "vertex": reps[idx], "mu": float(mu[idx]),
                     "c_hat": float(c_hat[idx]), "c_hat_se": float(c_se[idx]),
                     "gap_lhs": lhs, "gap_rhs": rhs, "holds": ok})
    return PropositionReport(
        regime=model.regime.value, assumptions_checked=checked,
        mu=tuple(float(v) for v in mu), c_hat=tuple(float(v) for v in c_hat),
        c_hat_se=tuple(float(v) for v in c_se), degenerate_tie=tie,
        argmax_agreement=agreement, gap_inequality_holds=holds,
        rows=tuple(rows))
