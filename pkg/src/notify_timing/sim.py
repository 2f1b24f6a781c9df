"""Epoch-by-epoch simulation of the notification system and the experiment protocol.

At each epoch t = 0..H the simulator first delivers the responses due at t in
seniority order (a responder may bump when r_i <= D), then asks the policy
how many to notify, clamped to the cap W and the employees left. Once all L
shifts are occupied nobody else is notified; occupancy never drops, so the
stop is final.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .bumps import potential_bumps
from .milp.stochastic import ScenarioSet
from .model import (
    NON_RESPONDER,
    DelayScenario,
    Instance,
    NotificationSchedule,
    PreferenceProfile,
    RunReport,
    check_prefs,
    round_half_up,
)
from .policies import (
    VACANCY_TOLERANCE,
    NawTuning,
    PolicySpec,
    estimate_thresholds,
    tune_naw,
)
from .preferences import PreferenceSpec, generate

__all__ = [
    "ExponentialDelays",
    "sample_scenarios",
    "simulate",
    "PolicySummary",
    "evaluate_policy",
    "ExperimentPlan",
    "PolicyRow",
    "ExperimentReport",
    "run_experiment",
    "accounting_identity",
]


@dataclass(frozen=True)
class ExponentialDelays:
    """Synthetic delays: exponential with the given mean, rounded half up, at least 1."""

    mean: float = 8.0
    p_nr: float = 0.5

    def __post_init__(self):
        if self.mean <= 0:
            raise ValueError("mean delay must be positive")
        if not 0 <= self.p_nr <= 1:
            raise ValueError("p_nr must lie in [0, 1]")

    def quantile(self, u: float) -> int:
        return max(1, round_half_up(-self.mean * math.log1p(-u)))

    def describe(self) -> dict:
        return {"kind": "exponential", "mean": self.mean, "p_nr": self.p_nr}


def sample_scenarios(source, num_employees: int, count: int, seed) -> ScenarioSet:
    """Draw ``count`` i.i.d. scenarios.

    Each employee is a non-responder with probability ``source.p_nr``;
    otherwise its delay is ``source.quantile(u)`` for a uniform u.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    rng = np.random.default_rng(seed)
    draws = rng.random((count, num_employees, 2))
    out = []
    for c in range(count):
        row = []
        for i in range(num_employees):
            u_nr, u = draws[c, i]
            row.append(NON_RESPONDER if u_nr < source.p_nr else source.quantile(float(u)))
        out.append(DelayScenario(tuple(row)))
    return ScenarioSet(tuple(out), seed=seed if isinstance(seed, int) else None,
                       source=str(source.describe()))


def _prefs_rows(prefs: Optional[PreferenceProfile], inst: Instance) -> list:
    if prefs is None:
        return [list(range(inst.num_shifts))] * inst.num_employees
    return [[l - 1 for l in row] for row in prefs.prefs]


def simulate(inst: Instance, scen: DelayScenario, prefs: Optional[PreferenceProfile], policy: PolicySpec,
             accounting: str = "realized", backend: Optional[str] = None) -> RunReport:
    """Run one day under ``policy``; ``prefs=None`` means identical preferences."""
    scen.check_length(inst)
    check_prefs(prefs, inst)
    k = kernels.get_backend(backend)
    code, p_int, p_float, fn = policy.kernel_args(inst.horizon)
    r = scen.as_ints()
    s, realized, _bumped, occ, occupied = k.simulate_core(
        r, _prefs_rows(prefs, inst), inst.horizon, inst.cutoff, inst.notify_cap, inst.num_shifts,
        code, p_int, p_float, fn)
    sched = NotificationSchedule(tuple(None if x < 0 else x for x in s))
    total, per = potential_bumps(sched, scen, inst, enforce_cutoff=True)
    e = sched.response_times(scen)
    makespan = max(e) if e else 0
    if not math.isinf(makespan):
        makespan = int(makespan)
    return RunReport(
        potential_bumps=total,
        vacancies=inst.num_shifts - occupied,
        makespan=makespan,
        vacancy_penalty=inst.vacancy_penalty,
        per_employee=tuple(per),
        realized_bumps=sum(realized),
        realized_per_employee=tuple(realized),
        assigned=occupied,
        num_shifts=inst.num_shifts,
        accounting=accounting,
        schedule=sched,
    )


def accounting_identity(report: RunReport, scen: DelayScenario, inst: Instance) -> bool:
    """assigned + vacancies = L, and no more assigned than in-horizon responders."""
    if report.assigned + report.vacancies != inst.num_shifts:
        return False
    e = report.schedule.response_times(scen)
    inside = sum(1 for x in e if x <= inst.horizon)
    return report.assigned == min(inst.num_shifts, inside)


@dataclass
class PolicySummary:
    name: str
    reports: list
    mean_bumps: float
    mean_potential: float
    mean_realized: float
    mean_vacancies: float
    mean_cost: float
    identity_ok: bool

    @property
    def runs(self) -> int:
        return len(self.reports)


def _mean(xs) -> float:
    xs = list(xs)
    return math.fsum(xs) / len(xs) if xs else float("nan")


def _run_chunk(args):
    inst, scens, offset, policy, prefs_spec, accounting, backend = args
    out = []
    for idx, scen in enumerate(scens):
        prefs = None if prefs_spec is None or prefs_spec.identical else generate(
            prefs_spec, inst.num_employees, inst.num_shifts, draw=offset + idx)
        rep = simulate(inst, scen, prefs, policy, accounting, backend)
        out.append((rep, accounting_identity(rep, scen, inst)))
    return out


def evaluate_policy(inst: Instance, scenarios, policy: PolicySpec, prefs_spec: Optional[PreferenceSpec] = None,
                    accounting: str = "realized", jobs: int = 1, backend: Optional[str] = None) -> PolicySummary:
    """Simulate ``policy`` on every scenario; preferences are redrawn per scenario index."""
    scenarios = list(scenarios)
    if jobs and jobs > 1 and policy.fn is None and len(scenarios) > 1:
        size = max(1, math.ceil(len(scenarios) / jobs))
        chunks = [(inst, scenarios[a:a + size], a, policy, prefs_spec, accounting, backend)
                  for a in range(0, len(scenarios), size)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_run_chunk, chunks))
        results = [x for part in parts for x in part]
    else:
        results = _run_chunk((inst, scenarios, 0, policy, prefs_spec, accounting, backend))
    reports = [rep for rep, _ in results]
    return PolicySummary(
        name=policy.name,
        reports=reports,
        mean_bumps=_mean(rep.bumps for rep in reports),
        mean_potential=_mean(rep.potential_bumps for rep in reports),
        mean_realized=_mean(rep.realized_bumps for rep in reports),
        mean_vacancies=_mean(rep.vacancies for rep in reports),
        mean_cost=_mean(rep.cost for rep in reports),
        identity_ok=all(ok for _, ok in results),
    )


@dataclass
class ExperimentPlan:
    """Train / validate / test protocol.

    ``policies`` entries: "na", "never", "naw" (tuned on validation),
    "naw:ETA,W" (fixed), "onp:mean", "onp:p95" or any other aggregator.
    """

    inst: Instance
    delay_source: object
    prefs_spec: Optional[PreferenceSpec] = None
    policies: tuple = ("na", "naw", "onp:mean", "onp:p95")
    train_size: int = 1000
    val_size: int = 500
    test_size: int = 500
    seed: int = 0
    accounting: str = "realized"
    time_limit: float = 240.0
    naw_grid: Optional[tuple] = None
    jobs: int = 1
    canonical: str = "latest"

    def __post_init__(self):
        for name, value in (("train", self.train_size), ("validation", self.val_size), ("test", self.test_size)):
            if value < 1:
                raise ValueError(f"{name} split must hold at least one scenario")
        if self.accounting not in ("potential", "realized"):
            raise ValueError("accounting must be 'potential' or 'realized'")

    def split_seeds(self) -> dict:
        return {"train": [self.seed, 1], "validation": [self.seed, 2], "test": [self.seed, 3]}


@dataclass
class PolicyRow:
    policy: str
    runs: int
    mean_bumps: float
    mean_potential_bumps: float
    mean_realized_bumps: float
    mean_vacancies: float
    mean_cost: float
    vacancy_feasible: bool
    identity_ok: bool

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class ExperimentReport:
    rows: list
    tables: dict = field(default_factory=dict)
    naw: Optional[NawTuning] = None
    errors: dict = field(default_factory=dict)
    seeds: dict = field(default_factory=dict)
    dropped: dict = field(default_factory=dict)
    summaries: dict = field(default_factory=dict, repr=False)

    def row(self, policy: str) -> PolicyRow:
        for r in self.rows:
            if r.policy == policy:
                return r
        raise KeyError(policy)


def _resolve_policy(name: str, plan: ExperimentPlan, train, val, report: ExperimentReport):
    key = name.strip().lower()
    if key == "na":
        return PolicySpec.na()
    if key == "never":
        return PolicySpec.never(plan.inst.num_employees)
    if key == "naw":
        if report.naw is None:
            report.naw = tune_naw(plan.inst, val, plan.naw_grid, plan.prefs_spec, plan.accounting, plan.jobs)
        return PolicySpec.naw(report.naw.eta, report.naw.wait)
    if key.startswith("naw:"):
        eta, w = (int(x) for x in key[4:].split(","))
        return PolicySpec.naw(eta, w)
    if key.startswith("onp:"):
        agg = key[4:]
        table = report.tables.get(agg)
        if table is None:
            table = estimate_thresholds(plan.inst, train, agg, plan.time_limit, plan.jobs, canonical=plan.canonical)
            report.tables[agg] = table
            report.dropped[agg] = table.dropped
        return PolicySpec.onp(table, label=f"ONP:{agg}")
    raise ValueError(f"unknown policy {name!r}")


def run_experiment(plan: ExperimentPlan) -> ExperimentReport:
    """Train ONP tables, tune NAW, then score every policy on the shared test split.

    A failure while preparing or scoring one policy is recorded in
    ``errors`` and does not stop the others.
    """
    M = plan.inst.num_employees
    seeds = plan.split_seeds()
    train = sample_scenarios(plan.delay_source, M, plan.train_size, seeds["train"])
    val = sample_scenarios(plan.delay_source, M, plan.val_size, seeds["validation"])
    test = sample_scenarios(plan.delay_source, M, plan.test_size, seeds["test"])
    report = ExperimentReport(rows=[], seeds={k: list(v) for k, v in seeds.items()})
    limit = VACANCY_TOLERANCE * plan.inst.num_shifts
    for name in plan.policies:
        try:
            policy = _resolve_policy(name, plan, train, val, report)
            summary = evaluate_policy(plan.inst, test, policy, plan.prefs_spec, plan.accounting, plan.jobs)
        except Exception as exc:  # isolate per-policy failures
            report.errors[name] = f"{type(exc).__name__}: {exc}"
            continue
        report.summaries[name] = summary
        report.rows.append(PolicyRow(
            policy=name,
            runs=summary.runs,
            mean_bumps=summary.mean_bumps,
            mean_potential_bumps=summary.mean_potential,
            mean_realized_bumps=summary.mean_realized,
            mean_vacancies=summary.mean_vacancies,
            mean_cost=summary.mean_cost,
            vacancy_feasible=summary.mean_vacancies <= limit + 1e-12,
            identity_ok=summary.identity_ok,
        ))
    return report


def replay_schedule(inst: Instance, scen: DelayScenario, sched: NotificationSchedule,
                    prefs: Optional[PreferenceProfile] = None, accounting: str = "realized") -> RunReport:
    """Simulate a fixed schedule as a Replay policy."""
    return simulate(inst, scen, prefs, PolicySpec.replay(sched), accounting)

