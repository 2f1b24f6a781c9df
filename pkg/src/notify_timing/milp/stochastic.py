"""Extensive-form two-stage model over a scenario set.

First stage: integer notification times s with seniority and cap rows.
Second stage, per scenario w: zbar_i (responds in horizon and is counted),
zhat_i (responds in horizon, not counted), y_ij (counted bump), theta
(vacancies). Counted responders form a seniority prefix of the in-horizon
responders, so the recourse reduces to choosing how many of them to count.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Optional, Sequence

from ..model import DelayScenario, Instance, InvalidInstanceError, NotificationSchedule
from .model import BINARY, CONTINUOUS, INTEGER, MilpModel
from .offline import ntp2_pairs, surrogate_delays

__all__ = [
    "INEQUALITY",
    "EQUALITY",
    "ScenarioSet",
    "SizeBudgetError",
    "DEFAULT_MAX_VARIABLES",
    "estimate_size",
    "build_dntps",
    "recourse_cost",
    "expected_cost",
    "solve_dntps",
    "extract_first_stage",
]

INEQUALITY = "inequality"
EQUALITY = "equality"
_CAP_MODES = (INEQUALITY, EQUALITY)

DEFAULT_MAX_VARIABLES = 500_000


class SizeBudgetError(ValueError):
    """The extensive form would exceed the variable budget."""


@dataclass(frozen=True)
class ScenarioSet:
    """Equally likely delay scenarios."""

    scenarios: tuple
    seed: Optional[int] = None
    source: str = ""

    def __post_init__(self):
        scen = tuple(self.scenarios)
        object.__setattr__(self, "scenarios", scen)
        if not scen:
            raise InvalidInstanceError("a scenario set needs at least one scenario")
        n = len(scen[0])
        if any(len(s) != n for s in scen):
            raise InvalidInstanceError("all scenarios must have the same length")

    def __len__(self) -> int:
        return len(self.scenarios)

    def __iter__(self):
        return iter(self.scenarios)

    def __getitem__(self, k):
        return self.scenarios[k]

    @property
    def num_employees(self) -> int:
        return len(self.scenarios[0])


def _as_set(omega) -> ScenarioSet:
    return omega if isinstance(omega, ScenarioSet) else ScenarioSet(tuple(omega))


def estimate_size(inst: Instance, omega) -> int:
    """Variables in the extensive form, roughly |W| (M^2/2 + 2M + 1) + M."""
    omega = _as_set(omega)
    total = inst.num_employees
    for scen in omega:
        r = surrogate_delays(scen, inst.horizon)
        total += len(ntp2_pairs(r, inst.cutoff)) + 2 * inst.num_employees + 1
    return total


def build_dntps(inst: Instance, omega, cap_mode: str = INEQUALITY,
                max_variables: int = DEFAULT_MAX_VARIABLES) -> MilpModel:
    """Extensive form over ``omega``.

    Non-responders use the surrogate delay H + 1. Besides the published rows,
    each employee gets ``zbar + zhat <= 1`` per scenario, which rules out
    marking one responder both counted and uncounted.

    Raises
    ------
    SizeBudgetError
        Before building, when the variable estimate exceeds ``max_variables``.
    """
    omega = _as_set(omega)
    if cap_mode not in _CAP_MODES:
        raise ValueError(f"cap_mode must be one of {_CAP_MODES}")
    for scen in omega:
        scen.check_length(inst)
    size = estimate_size(inst, omega)
    if size > max_variables:
        raise SizeBudgetError(f"extensive form needs {size} variables, budget is {max_variables}")
    M, L, H, D, W = inst.num_employees, inst.num_shifts, inst.horizon, inst.cutoff, inst.notify_cap
    G = inst.vacancy_penalty
    n = len(omega)
    m = MilpModel(name="dntps")
    for i in range(M):
        m.add_var(f"s_{i + 1}", INTEGER)
    for i in range(M - 1):
        m.add_constr(f"seniority_{i + 1}", {f"s_{i + 1}": 1, f"s_{i + 2}": -1}, "<=", 0)
    sense = "=" if cap_mode == EQUALITY else ">="
    for i in range(M - W):
        m.add_constr(f"cap_{i + 1}", {f"s_{i + W + 1}": 1, f"s_{i + 1}": -1}, sense, 1)

    obj = {}
    for w, scen in enumerate(omega, start=1):
        r = surrogate_delays(scen, H)
        pairs = ntp2_pairs(r, D)
        zb = [m.add_var(f"zbar_{i + 1}_w{w}", BINARY) for i in range(M)]
        zh = [m.add_var(f"zhat_{i + 1}_w{w}", BINARY) for i in range(M)]
        for i, j in pairs:
            m.add_var(f"y_{i + 1}_{j + 1}_w{w}", BINARY)
        theta = m.add_var(f"theta_w{w}", CONTINUOUS, ub=L)
        for i in range(M):
            s = f"s_{i + 1}"
            m.add_constr(f"late_{i + 1}_w{w}", {s: 1, zb[i]: H + 1, zh[i]: H + 1}, ">=", H + 1 - r[i])
            m.add_constr(f"ontime_{i + 1}_w{w}", {s: 1, zb[i]: r[i], zh[i]: r[i]}, "<=", H)
            m.add_constr(f"onelabel_{i + 1}_w{w}", {zb[i]: 1, zh[i]: 1}, "<=", 1)
        for i, j in pairs:
            delta = r[i] - r[j]
            y = f"y_{i + 1}_{j + 1}_w{w}"
            m.add_constr(f"bump_{i + 1}_{j + 1}_w{w}",
                         {f"s_{i + 1}": 1, f"s_{j + 1}": -1, y: -delta, zb[i]: H + r[i], zh[i]: -(H + r[i])},
                         "<=", H + r[i] - delta)
            obj[y] = 1.0 / n
        m.add_constr(f"vacancy_w{w}", {**{z: 1 for z in zb}, theta: 1}, ">=", L)
        for i in range(M):
            # counted responders form a seniority prefix
            coeffs = {zh[j]: 1 for j in range(i)}
            coeffs[zb[i]] = i + 1
            m.add_constr(f"prefix_{i + 1}_w{w}", coeffs, "<=", i + 1)
        obj[theta] = G / n
    m.set_objective(obj)
    m.meta = {"formulation": "dntps", "instance": inst, "scenarios": omega, "cap_mode": cap_mode}
    return m


def recourse_cost(s: Sequence[int], scen: DelayScenario, inst: Instance) -> float:
    """Optimal second-stage cost of first-stage times ``s`` under ``scen``.

    Equals min over m of G * max(0, L - m) plus the cutoff-gated bumps
    initiated by the m most senior in-horizon responders.
    """
    H, D, L, G = inst.horizon, inst.cutoff, inst.num_shifts, inst.vacancy_penalty
    r = surrogate_delays(scen, H)
    M = len(r)
    e = [s[i] + r[i] for i in range(M)]
    inside = [i for i in range(M) if e[i] <= H]
    best = G * L
    bumps = 0
    for m, i in enumerate(inside, start=1):
        if r[i] <= D:
            bumps += sum(1 for j in range(i + 1, M) if e[j] < e[i])
        best = min(best, G * max(0, L - m) + bumps)
    return best


def expected_cost(s: Sequence[int], omega, inst: Instance) -> float:
    omega = _as_set(omega)
    return sum(recourse_cost(s, scen, inst) for scen in omega) / len(omega)


def _first_stage(inst: Instance, cap_mode: str):
    """All integer first-stage schedules with every time in 0..H."""
    M, H, W = inst.num_employees, inst.horizon, inst.notify_cap
    s = [0] * M

    def rec(i):
        if i == M:
            yield tuple(s)
            return
        if i == 0:
            lo = 0
        else:
            lo = s[i - 1]
            if i >= W:
                lo = max(lo, s[i - W] + 1)
        if cap_mode == EQUALITY and i >= W:
            values = [s[i - W] + 1] if lo <= s[i - W] + 1 <= H else []
        else:
            values = range(lo, H + 1)
        for v in values:
            s[i] = v
            yield from rec(i + 1)

    return rec(0)


def solve_dntps(inst: Instance, omega, cap_mode: str = INEQUALITY,
                time_limit: Optional[float] = None):
    """Exact extensive-form optimum by enumerating first-stage schedules.

    Desk scale only. Returns a ``SolveResult`` whose ``extra`` holds the
    per-scenario costs of the chosen schedule.
    """
    from .solve import OPTIMAL, TIME_LIMIT, SolveResult

    omega = _as_set(omega)
    if cap_mode not in _CAP_MODES:
        raise ValueError(f"cap_mode must be one of {_CAP_MODES}")
    t0 = time.perf_counter()
    deadline = t0 + time_limit if time_limit else math.inf
    best, best_s = math.inf, None
    count = 0
    status = OPTIMAL
    for s in _first_stage(inst, cap_mode):
        count += 1
        if count % 256 == 0 and time.perf_counter() > deadline:
            status = TIME_LIMIT
            break
        total = 0.0
        for scen in omega:
            total += recourse_cost(s, scen, inst)
            if total / len(omega) >= best:
                break
        else:
            value = total / len(omega)
            if value < best:
                best, best_s = value, s
    seconds = time.perf_counter() - t0
    if best_s is None:
        return SolveResult("Infeasible" if status == OPTIMAL else status, None, None, {}, "dntps",
                           count, seconds, "embedded-enumeration")
    per = [recourse_cost(best_s, scen, inst) for scen in omega]
    objective = int(best) if float(best).is_integer() else best
    return SolveResult(status, objective, NotificationSchedule(best_s), {}, "dntps", count, seconds,
                       "embedded-enumeration", extra={"per_scenario": per})


def extract_first_stage(result):
    """Replay policy for the solved first-stage schedule."""
    from ..policies import PolicySpec

    if result.schedule is None:
        raise ValueError(f"no schedule to extract (status {result.status})")
    return PolicySpec.replay(result.schedule)

