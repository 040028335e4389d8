"""Tests for ground truth, regret traces, and the proposition validations."""

import math

import numpy as np
import pytest

from influmax import (AssumptionViolation, ChungLuParams, DomainError,
                      PolicyConfig, PullRecord, RegimeError, SbmParams,
                      accumulate_regret, classify_regime, compute_ground_truth,
                      exact_mean_degrees, mean_degree, run_replicates,
                      run_single, summarize_traces, trace_to_csv_bytes,
                      validate_propositions)
from influmax.numerics import ceil_exact


def sbm_example(n=1000):
    return classify_regime(SbmParams(
        n=n, alpha=np.array([0.5, 0.5]), K=np.array([[1.2, 0.4], [0.4, 0.8]])))


def fixed_policy_records(vertex, T):
    return [PullRecord(t, 0, vertex, 1, 2) for t in range(1, T + 1)]


# ---------------------------------------------------------------------------
# ground truth


def test_ground_truth_branching_sbm_example():
    gt = compute_ground_truth(sbm_example(), alpha=0.4,
                              method="branching_prediction")
    # type-0 vertices have progeny 4, type-1 vertices 3; quantile index 600
    assert gt.c_star == pytest.approx(4.0, abs=1e-9)
    assert gt.c_star_alpha == pytest.approx(4.0, abs=1e-9)
    assert gt.v_star_alpha.size == 1000 - 600 + 1
    assert np.all(gt.c[gt.v_star_alpha] == gt.c_star_alpha)
    assert gt.mu_star_alpha == pytest.approx(0.7988, abs=1e-12)


def test_ground_truth_quantile_index_with_distinct_values():
    # ten distinct weights -> ten distinct progeny values; alpha = 0.25
    # places the baseline at the 8th smallest (index ceil(7.5) = 8)
    w = np.linspace(0.4, 1.3, 10)
    model = classify_regime(ChungLuParams(n=10, w=w))
    gt = compute_ground_truth(model, alpha=0.25, method="branching_prediction")
    assert gt.c_star_alpha == pytest.approx(sorted(gt.c)[7], rel=1e-12)
    assert gt.v_star_alpha.size == 3


def test_ground_truth_all_equal_makes_zero_regret():
    model = classify_regime(ChungLuParams(n=20, w=np.full(20, 0.7)))
    gt = compute_ground_truth(model, alpha=0.3, method="branching_prediction")
    assert gt.c_star_alpha == gt.c_star
    records = [PullRecord(t, 0, t % 20, 0, 1) for t in range(1, 51)]
    regret = accumulate_regret(records, gt)
    np.testing.assert_array_equal(regret, np.zeros(50))


def test_ground_truth_near_optimal_set_size_invariant():
    model = sbm_example(n=200)
    for alpha in (0.05, 0.2, 0.31, 0.5, 0.77):
        gt = compute_ground_truth(model, alpha, "branching_prediction")
        assert gt.v_star_alpha.size == 200 - ceil_exact((1 - alpha) * 200) + 1


def test_ground_truth_monte_carlo_matches_branching():
    model = sbm_example(n=400)
    rng = np.random.default_rng(5)
    gt_mc = compute_ground_truth(model, 0.4, "monte_carlo",
                                 mc_samples=4000, rng=rng)
    gt_exact = compute_ground_truth(model, 0.4, "branching_prediction")
    assert gt_mc.c_standard_errors is not None
    assert np.all(gt_mc.c_standard_errors > 0)
    for vertex in (0, 399):
        se = gt_mc.c_standard_errors[vertex]
        # Monte Carlo mean is dominated by the progeny prediction and close
        assert gt_mc.c[vertex] <= gt_exact.c[vertex] + 3 * se
        assert abs(gt_mc.c[vertex] - gt_exact.c[vertex]) <= 4 * se + 0.05


def test_ground_truth_requires_budget_for_monte_carlo():
    with pytest.raises(DomainError):
        compute_ground_truth(sbm_example(), 0.4, "monte_carlo", mc_samples=0,
                             rng=np.random.default_rng(0))


def test_ground_truth_propagates_regime_error():
    critical = classify_regime(SbmParams(n=10, alpha=np.array([1.0]),
                                         K=np.array([[1.0]])))
    with pytest.raises(RegimeError):
        compute_ground_truth(critical, 0.4, "branching_prediction")


def test_exact_mean_degrees_matches_scalar_op():
    model = sbm_example(n=100)
    mu = exact_mean_degrees(model)
    for v in (0, 49, 50, 99):
        assert mu[v] == pytest.approx(mean_degree(model, v), rel=1e-12)
    w = np.linspace(0.3, 1.5, 30)
    cl = classify_regime(ChungLuParams(n=30, w=w))
    mu_cl = exact_mean_degrees(cl)
    for v in (0, 17, 29):
        assert mu_cl[v] == pytest.approx(mean_degree(cl, v), rel=1e-12)


def test_baseline_nonincreasing_in_alpha():
    model = sbm_example(n=200)
    values = [compute_ground_truth(model, a, "branching_prediction").c_star_alpha
              for a in (0.1, 0.2, 0.3, 0.4, 0.6, 0.8)]
    assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))


# ---------------------------------------------------------------------------
# regret accumulation and traces


def test_fixed_baseline_vertex_gives_zero_regret():
    gt = compute_ground_truth(sbm_example(n=100), 0.4, "branching_prediction")
    baseline_vertex = int(gt.v_star_alpha[0])
    regret = accumulate_regret(fixed_policy_records(baseline_vertex, 40), gt)
    np.testing.assert_allclose(regret, 0.0, atol=1e-12)


def test_fixed_optimal_vertex_gives_nonpositive_regret():
    gt = compute_ground_truth(sbm_example(n=100), 0.4, "branching_prediction")
    best_vertex = int(np.argmax(gt.c))
    regret = accumulate_regret(fixed_policy_records(best_vertex, 40), gt)
    expected = 40 * (gt.c_star_alpha - gt.c_star)
    assert regret[-1] == pytest.approx(expected, abs=1e-9)
    assert regret[-1] <= 1e-12


def test_run_single_trace_shape_and_bookkeeping():
    model = sbm_example(n=200)
    gt = compute_ground_truth(model, 0.4, "branching_prediction")
    policy = PolicyConfig(name="ducb_fixed_T", T=300, alpha=0.4)
    trace = run_single(model, gt, policy, seed=42)
    assert trace.horizon == 300
    assert [r.round for r in trace.records] == list(range(1, 301))
    for record in trace.records:
        assert record.component_size >= 1
        assert (record.component_size == 1) == (record.degree == 0)


def test_regret_telescoping():
    model = sbm_example(n=200)
    gt = compute_ground_truth(model, 0.4, "branching_prediction")
    policy = PolicyConfig(name="ducb_fixed_T", T=500, alpha=0.4)
    trace = run_single(model, gt, policy, seed=7)
    pulls = {}
    for record in trace.records:
        pulls[record.vertex] = pulls.get(record.vertex, 0) + 1
    telescoped = sum(count * (gt.c_star_alpha - gt.c[v])
                     for v, count in pulls.items())
    assert trace.cumulative_quantile_regret[-1] == pytest.approx(
        telescoped, abs=1e-9)


def test_run_single_reproducible():
    model = sbm_example(n=150)
    gt = compute_ground_truth(model, 0.3, "branching_prediction")
    for name in ("ducb_fixed_T", "ducb_double", "uniform_baseline"):
        policy = PolicyConfig(name=name, T=120, alpha=0.3, beta=2.0)
        t1 = run_single(model, gt, policy, seed=99)
        t2 = run_single(model, gt, policy, seed=99)
        assert t1.records == t2.records
        np.testing.assert_array_equal(t1.cumulative_quantile_regret,
                                      t2.cumulative_quantile_regret)
        assert trace_to_csv_bytes(t1) == trace_to_csv_bytes(t2)


def test_run_replicates_parallel_matches_serial():
    model = sbm_example(n=150)
    gt = compute_ground_truth(model, 0.3, "branching_prediction")
    policy = PolicyConfig(name="ducb_fixed_T", T=100, alpha=0.3)
    serial = run_replicates(model, gt, policy, seeds=[1, 2, 3], workers=1)
    parallel = run_replicates(model, gt, policy, seeds=[1, 2, 3], workers=2)
    for a, b in zip(serial, parallel):
        assert a.records == b.records


def test_summary_checkpoints():
    model = sbm_example(n=150)
    gt = compute_ground_truth(model, 0.3, "branching_prediction")
    policy = PolicyConfig(name="uniform_baseline", T=100, alpha=0.3)
    traces = run_replicates(model, gt, policy, seeds=[1, 2], workers=1)
    summary = summarize_traces(traces, 100)
    assert set(summary["checkpoints"]) == {"10", "50", "100"}
    for stats in summary["checkpoints"].values():
        assert "mean" in stats and "stddev" in stats


def test_instance_dependent_regret_bound_sanity():
    # one-sided desk-scale check: replicate mean regret never exceeds the
    # instance-dependent bound evaluated from known gaps
    model = sbm_example(n=200)
    gt = compute_ground_truth(model, 0.4, "branching_prediction")
    T = 2000
    policy = PolicyConfig(name="ducb_fixed_T", T=T, alpha=0.4)
    traces = run_replicates(model, gt, policy, seeds=list(range(5)), workers=1)
    log_term = 18.0 + 27.0 * math.log(T)
    bounds = []
    for trace in traces:
        arms = {record.vertex for record in trace.records}
        total = max(gt.reward_gap(v) for v in range(model.params.n))  # Delta_max
        for v in arms:
            delta = gt.reward_gap(v)
            gap = gt.degree_gap(v)
            if delta > 0 and gap > 0:
                total += delta * (gt.mu_star_alpha * log_term / gap ** 2 + 3.0)
        bounds.append(total)
    mean_regret = np.mean([t.cumulative_quantile_regret[-1] for t in traces])
    assert mean_regret <= np.mean(bounds)


# ---------------------------------------------------------------------------
# proposition validation


def test_validate_props_subcritical_argmax_agreement():
    model = sbm_example(n=1000)
    rng = np.random.default_rng(23)
    report = validate_propositions(model, mc_samples=20_000, rng=rng)
    assert report.assumptions_checked == ("assumption_1",)
    assert report.degenerate_tie is False
    assert report.argmax_agreement is True
    assert report.gap_inequality_holds is True
    payload = report.to_dict()
    assert payload["regime"] == "subcritical"
    assert len(payload["rows"]) == 2


def test_validate_props_rejects_unequal_off_diagonals():
    model = classify_regime(SbmParams(
        n=90, alpha=np.array([1 / 3, 1 / 3, 1 / 3]),
        K=np.array([[2.0, 0.3, 0.4], [0.3, 2.0, 0.3], [0.4, 0.3, 2.0]])))
    with pytest.raises(AssumptionViolation, match="assumption 1"):
        validate_propositions(model, 10, np.random.default_rng(0))


def test_validate_props_rejects_weak_diagonal_when_supercritical():
    model = classify_regime(SbmParams(
        n=100, alpha=np.array([0.5, 0.5]),
        K=np.array([[4.0, 2.0], [2.0, 1.0]])))
    assert model.regime.value == "supercritical"
    with pytest.raises(AssumptionViolation, match="assumption 2"):
        validate_propositions(model, 10, np.random.default_rng(0))


def test_validate_props_flags_degenerate_tie():
    model = classify_regime(SbmParams(
        n=100, alpha=np.array([0.5, 0.5]), K=np.array([[3.0, 1.0], [1.0, 3.0]])))
    report = validate_propositions(model, mc_samples=2000,
                                   rng=np.random.default_rng(3))
    assert report.degenerate_tie is True
    assert report.argmax_agreement is None


def test_validate_props_supercritical_small_scale():
    model = classify_regime(SbmParams(
        n=600, alpha=np.array([0.5, 0.5]), K=np.array([[3.0, 1.0], [1.0, 2.0]])))
    report = validate_propositions(model, mc_samples=4000,
                                   rng=np.random.default_rng(29))
    assert report.assumptions_checked == ("assumption_1", "assumption_2")
    assert report.argmax_agreement is True
    assert report.gap_inequality_holds is True


def test_validate_props_chung_lu_needs_no_assumptions():
    w = np.concatenate([np.full(100, 0.5), np.full(100, 0.9)])
    model = classify_regime(ChungLuParams(n=200, w=w))
    report = validate_propositions(model, mc_samples=5000,
                                   rng=np.random.default_rng(31))
    assert report.assumptions_checked == ()
    assert report.argmax_agreement is True
