import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from notify_timing import NON_RESPONDER, DelayScenario, Instance, NotificationSchedule
from notify_timing.milp.solve import solve_exact
from notify_timing.policies import (
    PolicySpec,
    ThresholdTable,
    aggregate,
    decide,
    default_naw_grid,
    estimate_thresholds,
    feature_curve,
    nearest_rank,
    parse_aggregator,
    round_half_away,
    tune_naw,
)
from notify_timing.sim import ExponentialDelays, sample_scenarios, simulate


def test_naw_example():
    spec = PolicySpec.naw(3, 7)
    out = [decide(spec, k, 0, 150) for k in range(15)]
    assert out == [3, 0, 0, 0, 0, 0, 0, 3, 0, 0, 0, 0, 0, 0, 3]


def test_onp_rounds_residual():
    table = ThresholdTable((12.4,) * 3)
    assert decide(PolicySpec.onp(table), 1, 10, 150) == 2


def test_onp_clamps():
    table = ThresholdTable((0.0, 20.0))
    spec = PolicySpec.onp(table)
    assert decide(spec, 0, 3, 10) == 0
    assert decide(spec, 1, 3, 10) == 7


def test_na_notifies_everyone():
    assert decide(PolicySpec.na(), 0, 0, 150) == 150
    assert decide(PolicySpec.na(), 4, 140, 150) == 10


def test_replay_counts():
    spec = PolicySpec.replay(NotificationSchedule((0, 0, 3, None)))
    assert [decide(spec, k, 0, 4) for k in range(5)] == [2, 0, 0, 1, 0]


@pytest.mark.parametrize("x, want", [(2.5, 3), (-2.5, -3), (2.4, 2), (0.5, 1), (-0.4, 0)])
def test_round_half_away(x, want):
    assert round_half_away(x) == want


@given(st.lists(st.floats(0, 30, allow_nan=False), min_size=1, max_size=10),
       st.integers(0, 9), st.integers(0, 29))
def test_onp_monotone_in_notified(raw, k, lam):
    table = ThresholdTable(tuple(sorted(raw)))
    spec = PolicySpec.onp(table)
    k = min(k, len(table) - 1)
    a = decide(spec, k, lam, 30)
    b = decide(spec, k, lam + 1, 30)
    assert b <= a


def test_mean_aggregation():
    assert aggregate([[5, 5, 10], [5, 10, 10]], "mean") == [5, 7.5, 10]


def test_percentile_of_constants():
    feats = [[1, 3, 3, 6]] * 10
    assert aggregate(feats, "p90") == [1, 3, 3, 6]


def test_nearest_rank():
    xs = list(range(1, 21))
    assert nearest_rank(xs, 95) == 19
    assert nearest_rank(xs, 100) == 20
    assert nearest_rank(xs, 0) == 1
    assert nearest_rank([7], 50) == 7


@pytest.mark.parametrize("text, want", [("mean", ("mean", None)), ("p95", ("percentile", 95.0)),
                                        ("percentile:98", ("percentile", 98.0)), (90, ("percentile", 90.0))])
def test_parse_aggregator(text, want):
    assert parse_aggregator(text) == want


def test_parse_aggregator_rejects():
    with pytest.raises(ValueError):
        parse_aggregator("median")


def test_table_invariants():
    with pytest.raises(ValueError):
        ThresholdTable((1.0, 0.5))
    with pytest.raises(ValueError):
        ThresholdTable((0.0, 5.0), num_employees=4)
    with pytest.raises(ValueError):
        ThresholdTable((-1.0,))


@given(st.lists(st.floats(0, 1e6, allow_nan=False), min_size=1, max_size=30))
def test_table_csv_round_trip(raw):
    t = ThresholdTable(tuple(sorted(raw)), "percentile:95", 17, 2, None)
    back = ThresholdTable.from_csv(t.to_csv())
    assert back == t


def test_table_file_round_trip(tmp_path):
    t = ThresholdTable((0.1, 1 / 3, 2.0), "mean", 3, 0, 6)
    path = t.save(tmp_path / "t.csv")
    assert ThresholdTable.load(path) == t


def test_table_rejects_foreign_csv():
    with pytest.raises(ValueError):
        ThresholdTable.from_csv("epoch,target\n0,1\n")


def test_single_scenario_mean_is_its_curve(backend):
    inst = Instance(6, 6, 10, 10, 6, 200)
    scen = DelayScenario((4, 1, 5, 3, 2, 5))
    for canonical in ("earliest", "latest"):
        table = estimate_thresholds(inst, [scen], "mean", canonical=canonical)
        res = solve_exact(inst, scen, "ntp2", canonical=canonical)
        assert list(table.targets) == [float(x) for x in feature_curve(res.schedule, 10)]
        assert table.train_size == 1 and table.dropped == 0


def test_estimated_tables_are_monotone(backend):
    inst = Instance(8, 4, 15, 8, 3, 200)
    scen = sample_scenarios(ExponentialDelays(5, 0.4), 8, 12, 3)
    for agg in ("mean", "p95", "p50"):
        t, feats = estimate_thresholds(inst, scen, agg, return_features=True)
        assert all(b >= a for a, b in zip(t.targets, t.targets[1:]))
        assert len(feats) == 12 and t.targets[-1] <= 8


def test_latest_curve_is_below_earliest(backend):
    inst = Instance(8, 4, 15, 8, 3, 200)
    for scen in sample_scenarios(ExponentialDelays(5, 0.4), 8, 10, 5):
        lo = solve_exact(inst, scen, "ntp2", canonical="latest")
        hi = solve_exact(inst, scen, "ntp2", canonical="earliest")
        assert lo.objective == hi.objective
        assert all(a <= b for a, b in zip(feature_curve(lo.schedule, 15), feature_curve(hi.schedule, 15)))


def test_timeouts_are_dropped(monkeypatch):
    import notify_timing.policies as pol

    calls = iter([("TimeLimit", [0, 1]), ("Optimal", [1, 2]), ("Optimal", [1, 2])])
    monkeypatch.setattr(pol, "_solve_feature", lambda args: next(calls))
    inst = Instance(2, 2, 1, 1, 2, 1)
    with pytest.warns(RuntimeWarning, match="1 of 3"):
        table = pol.estimate_thresholds(inst, [DelayScenario((1, 1))] * 3)
    assert table.dropped == 1 and table.train_size == 2 and table.targets == (1.0, 2.0)


def test_solver_failure_propagates(monkeypatch):
    import notify_timing.policies as pol

    monkeypatch.setattr(pol, "_solve_feature", lambda args: ("Infeasible", None))
    with pytest.raises(RuntimeError):
        pol.estimate_thresholds(Instance(2, 2, 1, 1, 2, 1), [DelayScenario((1, 1))])


def test_parallel_estimation_matches_serial():
    inst = Instance(6, 3, 12, 6, 2, 200)
    scen = sample_scenarios(ExponentialDelays(4, 0.3), 6, 8, 1)
    assert estimate_thresholds(inst, scen, "p95", jobs=1) == estimate_thresholds(inst, scen, "p95", jobs=3)


def test_default_grid():
    grid = default_naw_grid()
    assert len(grid) == 50 and grid[0] == (1, 1) and grid[-1] == (5, 10)


def test_tune_naw_degenerate_grid():
    inst = Instance(4, 2, 10, 10, 4, 200)
    val = sample_scenarios(ExponentialDelays(3, 0.0), 4, 5, 0)
    res = tune_naw(inst, val, [(4, 1)])
    assert (res.eta, res.wait) == (4, 1)


def test_tune_naw_lexicographic_tie():
    inst = Instance(3, 3, 10, 10, 3, 200)
    val = [DelayScenario((1, 1, 1))] * 3
    # with the cap at 3 both points notify everyone at epoch 0
    res = tune_naw(inst, val, [(5, 1), (3, 1)])
    assert (res.eta, res.wait) == (3, 1) and res.feasible


def test_tune_naw_flags_infeasible():
    inst = Instance(4, 4, 5, 5, 4, 200)
    val = [DelayScenario((NON_RESPONDER,) * 4)] * 2
    res = tune_naw(inst, val, [(1, 1), (2, 3)])
    assert not res.feasible and (res.eta, res.wait) == (1, 1)


def test_tune_naw_finds_feasible_point():
    # plenty of responders: some grid point keeps mean vacancy within 0.3% of L
    inst = Instance(40, 10, 30, 30, 5, 200)
    val = sample_scenarios(ExponentialDelays(3, 0.5), 40, 30, 4)
    res = tune_naw(inst, val, [(e, w) for e in (2, 3, 4) for w in (1, 2, 3)])
    assert res.feasible
    chosen = [row for row in res.rows if row[:2] == (res.eta, res.wait)][0]
    assert chosen[3] <= 0.003 * 10


def test_capped_notifications_never_exceed_M(backend):
    rng = random.Random(3)
    for _ in range(50):
        M = rng.randint(1, 8)
        inst = Instance(M, rng.randint(1, M), 12, 6, rng.randint(1, 3), 1)
        scen = DelayScenario(tuple(rng.randint(1, 12) for _ in range(M)))
        spec = PolicySpec.callback(lambda k, lam: 5)
        rep = simulate(inst, scen, None, spec)
        assert rep.schedule.num_notified <= M


def test_policy_validation():
    with pytest.raises(ValueError):
        PolicySpec.naw(0, 3)
    with pytest.raises(ValueError):
        PolicySpec("onp")
