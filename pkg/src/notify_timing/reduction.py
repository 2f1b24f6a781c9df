"""Executable hardness constructions.

* ``nbs_makespan``: shortest makespan of a schedule without potential bumps.
* ``reduce``: Subset-Sum instance to an offline instance whose optimal bump
  count equals the target exactly when some subset hits it.
* ``block_schedule`` and the verifiers that check its structural properties.
* ``adversary``: builds delays that force any deterministic online policy into
  either the maximum number of potential bumps or a vacancy, while an offline
  schedule gets neither.

Indices in reports are 1-based, matching employee and item numbering.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .bumps import evaluate_schedule
from .model import (
    NON_RESPONDER,
    DelayScenario,
    Instance,
    InvalidInstanceError,
    NotificationSchedule,
    PreferenceProfile,
    RunReport,
    SubsetSumInstance,
)
from .policies import PolicySpec

__all__ = [
    "nbs_makespan",
    "ReducedInstance",
    "reduce",
    "block_schedule",
    "subset_sum_bruteforce",
    "verify_reduction",
    "verify_block_properties",
    "best_block_schedule",
    "AdversaryReport",
    "adversary",
]


def nbs_makespan(scen) -> int:
    """r_1 + sum of positive increments (r_{i+1} - r_i)^+."""
    r = list(scen.delays if isinstance(scen, DelayScenario) else scen)
    if not r:
        raise InvalidInstanceError("empty delay vector")
    if any(x is NON_RESPONDER for x in r):
        raise InvalidInstanceError("makespan needs finite delays")
    return r[0] + sum(max(0, b - a) for a, b in zip(r, r[1:]))


@dataclass(frozen=True)
class ReducedInstance:
    """Offline instance built from a Subset-Sum instance.

    Index sets are 1-based employee ids.
    """

    source: SubsetSumInstance
    delays: DelayScenario
    horizon: int
    critical: tuple
    stable_blocks: tuple
    last: int

    @property
    def num_employees(self) -> int:
        return len(self.delays)

    @property
    def nbs_makespan(self) -> int:
        return nbs_makespan(self.delays)

    @property
    def instance(self) -> Instance:
        return Instance.offline(self.num_employees, self.horizon)

    @property
    def stable(self) -> tuple:
        return tuple(i for block in self.stable_blocks for i in block)


def reduce(ss: SubsetSumInstance) -> ReducedInstance:
    """Build the reduced instance.

    Critical employee i_k = k + sum_{j<k} a_j has delay sum_{j<=k} a_j; the
    a_k stable employees after it inherit the delay of i_{k-1} (0 for k = 1);
    the last employee has delay sum(a). H = 2 sum(a) - T.
    """
    a = ss.sizes
    total = ss.total
    if ss.target > total:
        raise InvalidInstanceError(f"target {ss.target} exceeds the total size {total}; trivially infeasible")
    r = []
    critical = []
    blocks = []
    prefix = 0
    prev = 0
    for k, ak in enumerate(a, start=1):
        prefix += ak
        critical.append(len(r) + 1)
        r.append(prefix)
        start = len(r) + 1
        r.extend([prev] * ak)
        blocks.append(tuple(range(start, start + ak)))
        prev = prefix
    r.append(total)
    last = len(r)
    c0 = 2 * total
    scen = DelayScenario(tuple(r), allow_zero=True)
    if nbs_makespan(scen) != c0:
        raise AssertionError("reduction delays do not reproduce the expected makespan")
    return ReducedInstance(ss, scen, c0 - ss.target, tuple(critical), tuple(blocks), last)


def _subset(red: ReducedInstance, subset: Iterable[int]) -> frozenset:
    chosen = frozenset(subset)
    n = len(red.source.sizes)
    if any(k < 1 or k > n for k in chosen):
        raise ValueError(f"subset indices must lie in 1..{n}")
    return chosen


def block_schedule(red: ReducedInstance, subset: Iterable[int]) -> NotificationSchedule:
    """Everyone inherits the previous time, except that the first stable
    employee after i_k waits until e_{i_k} - r_i when k is outside the subset."""
    chosen = _subset(red, subset)
    r = red.delays.delays
    first_stable = {red.critical[k - 1] + 1: red.critical[k - 1] for k in range(1, len(red.critical) + 1)
                    if k not in chosen}
    s = [0] * red.num_employees
    for i in range(2, red.num_employees + 1):
        if i in first_stable:
            ik = first_stable[i]
            s[i - 1] = s[ik - 1] + r[ik - 1] - r[i - 1]
        else:
            s[i - 1] = s[i - 2]
    return NotificationSchedule(tuple(s))


def subset_sum_bruteforce(ss: SubsetSumInstance) -> Optional[tuple]:
    """Smallest-first enumeration; returns 1-based indices of a hit or None."""
    n = len(ss.sizes)
    for size in range(n + 1):
        for combo in itertools.combinations(range(1, n + 1), size):
            if sum(ss.sizes[k - 1] for k in combo) == ss.target:
                return combo
    return None


def best_block_schedule(red: ReducedInstance) -> tuple:
    """Fewest bumps over all feasible block schedules: ``(bumps, subset)``."""
    inst = red.instance
    best = None
    n = len(red.source.sizes)
    for mask in range(1 << n):
        subset = tuple(k + 1 for k in range(n) if mask >> k & 1)
        rep = evaluate_schedule(block_schedule(red, subset), red.delays, inst)
        if rep.makespan <= red.horizon and (best is None or rep.potential_bumps < best[0]):
            best = (rep.potential_bumps, subset)
    return best


def _per_employee_checks(red: ReducedInstance, sched: NotificationSchedule) -> dict:
    """Which employees initiate bumps and against whom."""
    r = red.delays.delays
    s = sched.notify_times
    e = [s[i] + r[i] for i in range(len(r))]
    M = len(r)
    size = dict(zip(red.critical, red.source.sizes))
    block_of = {red.critical[k]: set(red.stable_blocks[k]) for k in range(len(red.critical))}
    critical_ok = True
    stable_ok = True
    targets_ok = True
    counts = {}
    for i in range(1, M + 1):
        victims = [j for j in range(i + 1, M + 1) if e[i - 1] > e[j - 1]]
        counts[i] = len(victims)
        if i in size:
            if len(victims) not in (0, size[i]):
                critical_ok = False
            if any(j not in block_of[i] for j in victims):
                targets_ok = False
        elif victims:
            stable_ok = False
    return {"per_employee": counts, "critical_all_or_nothing": critical_ok,
            "stable_cause_none": stable_ok, "critical_hit_own_block": targets_ok}


def verify_block_properties(red: ReducedInstance, subset: Iterable[int],
                            optimal: Optional[NotificationSchedule] = None) -> dict:
    """Check the five structural properties of ``block_schedule(red, subset)``.

    With ``optimal`` given, also check that schedule: critical bump counts
    are 0 or a_k, stable employees bump nobody, and a critical employee only
    bumps its own block.
    """
    chosen = _subset(red, subset)
    sched = block_schedule(red, chosen)
    s = sched.notify_times
    r = red.delays.delays
    e = [s[i] + r[i] for i in range(len(r))]
    a = red.source.sizes
    crit = red.critical
    checks = {}
    checks["p1_critical_equals_predecessor"] = all(s[ik - 1] == s[ik - 2] for ik in crit if ik > 1)
    checks["p2_stable_aligned"] = all(
        e[i - 1] == e[ik - 1] or s[i - 1] == s[ik - 1]
        for ik, block in zip(crit, red.stable_blocks) for i in block)
    checks["p3_critical_steps"] = all(
        s[crit[k + 1] - 1] == s[crit[k] - 1] + (a[k] if (k + 1) not in chosen else 0)
        for k in range(len(crit) - 1))
    # the properties do not depend on T, so score against the NBS horizon
    rep = evaluate_schedule(sched, red.delays, Instance.offline(red.num_employees, red.nbs_makespan))
    gain = sum(a[k - 1] for k in chosen)
    checks["p4_bumps"] = rep.potential_bumps == gain
    checks["p5_makespan"] = rep.makespan == red.nbs_makespan - gain
    structure = _per_employee_checks(red, sched)
    out = {
        "subset": tuple(sorted(chosen)),
        "schedule": sched.as_ints(),
        "bumps": rep.potential_bumps,
        "makespan": rep.makespan,
        "per_employee": structure["per_employee"],
        "checks": checks,
    }
    if optimal is not None:
        opt = _per_employee_checks(red, optimal)
        out["optimal_checks"] = {k: v for k, v in opt.items() if k != "per_employee"}
        out["optimal_per_employee"] = opt["per_employee"]
    out["ok"] = all(checks.values()) and all(out.get("optimal_checks", {}).values())
    return out


def verify_reduction(ss: SubsetSumInstance, time_limit: Optional[float] = 60.0) -> dict:
    """Solve the reduced instance exactly and compare with brute-force Subset-Sum.

    Checks that (optimum == T) iff a subset sums to T, and optimum >= T.
    """
    from .milp.solve import OPTIMAL, solve_exact

    red = reduce(ss)
    res = solve_exact(red.instance, red.delays, formulation="ntp", time_limit=time_limit)
    if res.status != OPTIMAL:
        raise RuntimeError(f"exact solve ended with status {res.status}")
    hit = subset_sum_bruteforce(ss)
    opt = res.objective
    equivalence = (opt == ss.target) == (hit is not None)
    lower = opt >= ss.target
    return {
        "sizes": list(ss.sizes),
        "target": ss.target,
        "M": red.num_employees,
        "H": red.horizon,
        "nbs_makespan": red.nbs_makespan,
        "optimum": opt,
        "subset": None if hit is None else list(hit),
        "equivalence": equivalence,
        "lower_bound": lower,
        "ok": equivalence and lower,
        "schedule": res.schedule.as_ints(),
        "seconds": res.seconds,
    }


@dataclass
class AdversaryReport:
    case: int
    scenario: DelayScenario
    online: RunReport
    offline: RunReport
    offline_schedule: NotificationSchedule
    probe_schedule: NotificationSchedule
    detail: dict = field(default_factory=dict)

    @property
    def max_bumps(self) -> int:
        M = len(self.scenario)
        return M * (M - 1) // 2

    @property
    def ok(self) -> bool:
        offline_clean = self.offline.potential_bumps == 0 and self.offline.vacancies == 0
        online_bad = self.online.potential_bumps == self.max_bumps or self.online.vacancies >= 1
        return offline_clean and online_bad


def adversary(policy: PolicySpec, inst: Instance) -> AdversaryReport:
    """Adaptive worst case for a deterministic online policy.

    The policy is first probed with nobody responding. If it notifies all M
    employees at epoch 0, delays r_i = H + 1 - i make responses arrive in
    reverse seniority (offline: s_i = H - r_i). Otherwise every delay is H,
    so the first employee notified after epoch 0 answers too late
    (offline: notify everyone at 0).
    """
    from .sim import simulate

    M, H = inst.num_employees, inst.horizon
    if M > H:
        raise InvalidInstanceError("the construction needs M <= H so that every delay is at least 1")
    prefs = PreferenceProfile.identical(M, inst.num_shifts)
    probe = simulate(inst, DelayScenario((NON_RESPONDER,) * M), prefs, policy, accounting="potential")
    s = probe.schedule.notify_times
    if all(x == 0 for x in s):
        case = 1
        r = tuple(H + 1 - i for i in range(1, M + 1))
        offline_s = tuple(H - x for x in r)
    else:
        case = 2
        r = (H,) * M
        offline_s = (0,) * M
    scen = DelayScenario(r)
    online = simulate(inst, scen, prefs, policy, accounting="potential")
    offline_sched = NotificationSchedule(offline_s)
    offline = evaluate_schedule(offline_sched, scen, inst, prefs=prefs)
    first_wait = next((i + 1 for i, x in enumerate(s) if x is None or x > 0), None)
    return AdversaryReport(case, scen, online, offline, offline_sched, probe.schedule,
                           {"first_delayed_employee": first_wait})
