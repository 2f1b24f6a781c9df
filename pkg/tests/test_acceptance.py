"""Acceptance criteria 1-10.

Each criterion prints one ``criterion N: PASS|FAIL ...`` line. Run directly
with ``python -m tests.test_acceptance`` or through pytest.
"""
import filecmp
import json
import random
import time
from pathlib import Path

import pytest

from notify_timing import (
    DelayScenario,
    Instance,
    NotificationSchedule,
    PreferenceProfile,
    SubsetSumInstance,
)
from notify_timing.bumps import evaluate_schedule
from notify_timing.cli import main as cli_main
from notify_timing.io import write_report_json
from notify_timing.milp import build_ntp, solve_exact
from notify_timing.policies import PolicySpec
from notify_timing.reduction import (
    adversary,
    best_block_schedule,
    block_schedule,
    nbs_makespan,
    reduce,
    verify_block_properties,
    verify_reduction,
)
from notify_timing.sim import ExperimentPlan, ExponentialDelays, run_experiment

from .oracles import nbs_min_makespan, ntp_optimum


def criterion_1():
    t0 = time.perf_counter()
    r = DelayScenario((4, 1, 5, 3, 2, 5))
    b10 = solve_exact(Instance(6, 6, 10, 10, 6), r)
    b11 = solve_exact(Instance(6, 6, 11, 11, 6), r)
    c0 = nbs_makespan(r)
    secs = time.perf_counter() - t0
    ok = (b10.status, b10.objective, b11.objective, c0) == ("Optimal", 1, 0, 11) and secs < 1
    return ok, {"bumps_H10": b10.objective, "bumps_H11": b11.objective, "nbs_makespan": c0,
                "schedule_H10": b10.schedule.as_ints()}, secs


WORKED_DELAYS = (1, 0, 5, 1, 1, 1, 1, 12, 5, 5, 5, 5, 5, 5, 5, 12)


def criterion_2():
    t0 = time.perf_counter()
    red = reduce(SubsetSumInstance((1, 4, 7), 5))
    rep = evaluate_schedule(block_schedule(red, (1, 2)), red.delays, red.instance)
    opt = solve_exact(red.instance, red.delays)
    secs = time.perf_counter() - t0
    ok = (red.num_employees == 16 and red.horizon == 19 and red.delays.delays == WORKED_DELAYS
          and rep.potential_bumps == 5 and rep.makespan == 19 and opt.objective == 5 and secs < 30)
    return ok, {"M": red.num_employees, "H": red.horizon, "delays": list(red.delays.delays),
                "block_bumps": rep.potential_bumps, "block_makespan": rep.makespan,
                "optimum": opt.objective}, secs


def _random_subset_sum(rng):
    a = tuple(rng.randint(1, 6) for _ in range(rng.randint(1, 5)))
    return SubsetSumInstance(a, rng.randint(1, sum(a)))


def criterion_3():
    t0 = time.perf_counter()
    rng = random.Random(3)
    rows = []
    for _ in range(100):
        res = verify_reduction(_random_subset_sum(rng))
        rows.append({k: res[k] for k in ("sizes", "target", "optimum", "subset", "ok")})
    secs = time.perf_counter() - t0
    passed = sum(r["ok"] for r in rows)
    return passed == 100 and secs < 300, {"passed": passed, "cases": rows}, secs


def criterion_4():
    t0 = time.perf_counter()
    rng = random.Random(4)
    passed = 0
    equal_cases = 0
    for _ in range(1000):
        M = rng.randint(1, 7)
        H = rng.randint(1, 15)
        L = rng.randint(1, M)
        inst = Instance(M, L, H, rng.randint(1, H), M)
        scen = DelayScenario(tuple(rng.randint(1, H) for _ in range(M)))
        sched = NotificationSchedule(tuple(sorted(rng.randint(0, H - 1) for _ in range(M))))
        prefs = PreferenceProfile(tuple(tuple(rng.sample(range(1, L + 1), L)) for _ in range(M)))
        rep = evaluate_schedule(sched, scen, inst, prefs=prefs)
        ok = rep.realized_bumps <= rep.potential_bumps
        same = Instance(M, M, H, H, M)
        ident = evaluate_schedule(sched, scen, same, prefs=PreferenceProfile.identical(M, M))
        ok = ok and ident.realized_bumps == ident.potential_bumps
        equal_cases += ident.potential_bumps > 0
        passed += ok
    secs = time.perf_counter() - t0
    return passed == 1000, {"passed": passed, "identical_cases_with_bumps": equal_cases}, secs


def criterion_5():
    t0 = time.perf_counter()
    rng = random.Random(5)
    passed = 0
    for _ in range(200):
        r = [rng.randint(1, 6) for _ in range(rng.randint(1, 5))]
        passed += nbs_makespan(r) == nbs_min_makespan(r)
    return passed == 200, {"passed": passed}, time.perf_counter() - t0


def criterion_6():
    t0 = time.perf_counter()
    rng = random.Random(6)
    passed = 0
    failures = []
    for _ in range(50):
        ss = _random_subset_sum(rng)
        red = reduce(ss)
        n = len(ss.sizes)
        subset = tuple(k for k in range(1, n + 1) if rng.random() < 0.5)
        props = verify_block_properties(red, subset)
        opt = solve_exact(red.instance, red.delays)
        best = best_block_schedule(red)
        structure = verify_block_properties(red, best[1], optimal=opt.schedule)
        ok = props["ok"] and structure["ok"] and best[0] == opt.objective
        passed += ok
        if not ok:
            failures.append({"sizes": list(ss.sizes), "target": ss.target})
    return passed == 50, {"passed": passed, "failures": failures}, time.perf_counter() - t0


def criterion_7():
    t0 = time.perf_counter()
    inst = Instance(5, 5, 10, 10, 5)
    out = {}
    ok = True
    for name, policy in (("NA", PolicySpec.na()), ("NAW(1,2)", PolicySpec.naw(1, 2))):
        rep = adversary(policy, inst)
        online_bad = rep.online.potential_bumps == 10 or rep.online.vacancies >= 1
        offline_clean = rep.offline.potential_bumps == 0 and rep.offline.vacancies == 0
        ok = ok and online_bad and offline_clean
        out[name] = {"case": rep.case, "delays": rep.scenario.as_ints(),
                     "online_bumps": rep.online.potential_bumps, "online_vacancies": rep.online.vacancies,
                     "offline_bumps": rep.offline.potential_bumps, "offline_vacancies": rep.offline.vacancies}
    return ok, out, time.perf_counter() - t0


def criterion_8():
    t0 = time.perf_counter()
    try:
        from notify_timing.milp import HighsBackend

        engine = HighsBackend()
    except ImportError as exc:
        return False, {"error": f"external backend unavailable: {exc}"}, 0.0
    rng = random.Random(8)
    passed = 0
    for _ in range(200):
        M = rng.randint(1, 5)
        H = rng.randint(1, 8)
        inst = Instance(M, M, H, H, M)
        r = tuple(rng.randint(1, H) for _ in range(M))
        scen = DelayScenario(r)
        enum = ntp_optimum(r, H)
        bb = solve_exact(inst, scen).objective
        ext = engine.solve(build_ntp(inst, scen))
        ext_obj = None if ext.objective is None or ext.status != "Optimal" else round(ext.objective)
        passed += enum == bb == ext_obj
    return passed == 200, {"passed": passed}, time.perf_counter() - t0


def criterion_9():
    t0 = time.perf_counter()
    out = {}
    ok = True
    for D in (10, 15):
        plan = ExperimentPlan(Instance(12, 6, 30, D, 5, 200), ExponentialDelays(8.0, 0.5),
                              train_size=100, val_size=50, test_size=50, seed=0)
        rep = run_experiment(plan)
        bumps = {r.policy: r.mean_bumps for r in rep.rows}
        thresholds_ok = all(b >= a for t in rep.tables.values() for a, b in zip(t.targets, t.targets[1:]))
        identity = all(r.identity_ok for r in rep.rows)
        gated = bumps["na"] > bumps["naw"] and bumps["na"] > bumps["onp:p95"]
        ok = ok and gated and thresholds_ok and identity and not rep.errors
        out[f"D={D}"] = {"rows": [r.as_dict() for r in rep.rows],
                         "naw": [rep.naw.eta, rep.naw.wait],
                         "onp_p95_below_naw": bumps["onp:p95"] < bumps["naw"],
                         "thresholds_nondecreasing": thresholds_ok}
    secs = time.perf_counter() - t0
    return ok and secs < 600, out, secs


CRITERIA = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
            6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9}

# CLI commands whose report files criterion 10 regenerates
COMMANDS = {
    "solve.json": ["solve-offline", "--delays", "4,1,5,3,2,5", "--horizon", "10"],
    "reduce.json": ["reduce", "--sizes", "1,4,7", "--target", "5"],
    "adversary.json": ["adversary", "--policy", "naw:1,2"],
    "simulate.csv": ["simulate", "--policy", "naw:2,3", "--employees", "12", "--shifts", "6",
                     "--cap", "5", "--scenarios", "50", "--jobs", "1"],
}


def _run_all(out: Path) -> dict:
    out.mkdir(parents=True, exist_ok=True)
    results = {}
    for k, fn in CRITERIA.items():
        ok, detail, secs = fn()
        results[k] = (ok, secs)
        write_report_json({"criterion": k, "pass": ok, "detail": detail}, out / f"criterion_{k}.json")
    for name, argv in COMMANDS.items():
        cli_main(argv + ["--out", str(out / name)])
    cli_main(["experiment", "--employees", "12", "--shifts", "6", "--cutoff", "10", "--cap", "5",
              "--train", "100", "--validation", "50", "--test", "50", "--jobs", "1",
              "--out", str(out / "experiment")])
    return results


def _same_tree(a: Path, b: Path) -> tuple:
    files = sorted(p.relative_to(a) for p in a.rglob("*") if p.is_file())
    other = sorted(p.relative_to(b) for p in b.rglob("*") if p.is_file())
    diff = [str(f) for f in files if not filecmp.cmp(a / f, b / f, shallow=False)] if files == other else ["<file set>"]
    return not diff, len(files), diff


@pytest.fixture(scope="module")
def acceptance(tmp_path_factory):
    base = tmp_path_factory.mktemp("acceptance")
    first = _run_all(base / "run1")
    _run_all(base / "run2")
    same, count, diff = _same_tree(base / "run1", base / "run2")
    first[10] = (same, 0.0)
    return first, {"files": count, "differ": diff}


def _line(k, ok, secs, extra=""):
    return f"criterion {k}: {'PASS' if ok else 'FAIL'} ({secs:.2f}s){extra}"


@pytest.mark.parametrize("k", range(1, 11))
def test_criterion(acceptance, k, capsys):
    results, det = acceptance
    ok, secs = results[k]
    extra = f" {det['files']} files compared, differing: {det['differ']}" if k == 10 else ""
    with capsys.disabled():
        print("\n" + _line(k, ok, secs, extra))
    assert ok


if __name__ == "__main__":
    import tempfile

    with tempfile.TemporaryDirectory() as d:
        res = _run_all(Path(d) / "run1")
        _run_all(Path(d) / "run2")
        same, count, diff = _same_tree(Path(d) / "run1", Path(d) / "run2")
        res[10] = (same, 0.0)
        for k in sorted(res):
            print(_line(k, *res[k]))
        print(json.dumps({"files_compared": count, "differing": diff}))
