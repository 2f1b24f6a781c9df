"""Exact solution of the offline models.

The embedded solver is a depth-first branch and bound over integer
notification times (see ``_pykernels.search``). Because every row is a
difference constraint once the binaries are fixed and all data are integral,
restricting s_i to integers loses no optimum.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional, Union

from .. import kernels
from ..model import DelayScenario, Instance, InvalidInstanceError, NotificationSchedule
from .model import MilpModel
from .offline import build_ntp, build_ntp2, ntp2_pairs, ntp_pairs, surrogate_delays

__all__ = [
    "OPTIMAL",
    "FEASIBLE",
    "INFEASIBLE",
    "TIME_LIMIT",
    "SolveResult",
    "solve_exact",
    "solve_with_backend",
    "bump_matrix",
    "DEFAULT_TIME_LIMIT",
    "EARLIEST",
    "LATEST",
    "CANONICAL",
]

EARLIEST = "earliest"
LATEST = "latest"
CANONICAL = (EARLIEST, LATEST)

OPTIMAL = "Optimal"
FEASIBLE = "Feasible"
INFEASIBLE = "Infeasible"
TIME_LIMIT = "TimeLimit"

# matches the per-instance budget used for the offline solves in the experiments
DEFAULT_TIME_LIMIT = 240.0

_STATUS = {
    kernels.OPTIMAL: OPTIMAL,
    kernels.TIME_LIMIT: TIME_LIMIT,
    kernels.INFEASIBLE: INFEASIBLE,
    kernels.TIME_LIMIT_NO_INCUMBENT: TIME_LIMIT,
}


@dataclass
class SolveResult:
    """Outcome of one solve.

    ``y`` holds the 1-based pairs (i, j) with y_ij = 1.
    """

    status: str
    objective: Optional[float]
    schedule: Optional[NotificationSchedule]
    y: dict = field(default_factory=dict)
    formulation: str = "ntp"
    nodes: int = 0
    seconds: float = 0.0
    solver: str = "embedded"
    extra: dict = field(default_factory=dict)

    @property
    def has_solution(self) -> bool:
        return self.schedule is not None

    def as_dict(self) -> dict:
        return {
            "status": self.status,
            "objective": self.objective,
            "schedule": None if self.schedule is None else list(self.schedule.as_ints()),
            "bumps": sorted([list(k) for k in self.y]),
            "formulation": self.formulation,
            "solver": self.solver,
        }


def bump_matrix(s, r, pairs, horizon: Optional[int] = None) -> dict:
    """Pairs from ``pairs`` (0-based) whose senior responds strictly later.

    With ``horizon`` set, the senior must respond by H.
    """
    out = {}
    for i, j in pairs:
        ei, ej = s[i] + r[i], s[j] + r[j]
        if horizon is not None and ei > horizon:
            continue
        if ei > ej:
            out[(i + 1, j + 1)] = 1
    return out


def _from_model(model: MilpModel):
    meta = model.meta
    if "formulation" not in meta:
        raise ValueError("model carries no build metadata; use solve_with_backend")
    return meta["formulation"], meta


def solve_exact(model_or_inst: Union[MilpModel, Instance], scen: Optional[DelayScenario] = None,
                formulation: str = "ntp", time_limit: Optional[float] = DEFAULT_TIME_LIMIT,
                backend: Optional[str] = None, canonical: str = EARLIEST) -> SolveResult:
    """Solve an offline model to optimality with the embedded search.

    Parameters
    ----------
    model_or_inst : MilpModel or Instance
        A model from one of the builders, or an instance (then ``scen`` and
        ``formulation`` are required).
    formulation : {"ntp", "ntp2"}
    time_limit : float, optional
        Seconds; on expiry the incumbent is returned with status TimeLimit.
    backend : str, optional
        Kernel backend name, default the active one.
    canonical : {"earliest", "latest"}
        Which optimum to return for ntp2: the lexicographically smallest
        schedule (free employees notified as early as possible) or the largest
        (as late as possible). NTP always returns the smallest.
    """
    if canonical not in CANONICAL:
        raise ValueError(f"canonical must be one of {CANONICAL}")
    if isinstance(model_or_inst, MilpModel):
        formulation, meta = _from_model(model_or_inst)
        if formulation == "dntps":
            from .stochastic import solve_dntps
            return solve_dntps(meta["instance"], meta["scenarios"], cap_mode=meta["cap_mode"],
                               time_limit=time_limit)
        inst, scen = meta["instance"], meta["scenario"]
    else:
        inst = model_or_inst
        if scen is None:
            raise ValueError("a scenario is required when solving from an instance")
    scen.check_length(inst)
    k = kernels.get_backend(backend)
    limit = float(time_limit) if time_limit else 0.0
    t0 = time.perf_counter()
    if formulation == "ntp":
        if not scen.finite():
            raise InvalidInstanceError("the offline model needs every employee to respond")
        r = list(scen.delays)
        status, obj, s, nodes = k.search(r, inst.horizon, inst.num_shifts, inst.cutoff,
                                         inst.notify_cap, 0.0, kernels.MODE_NTP, limit)
        pairs = ntp_pairs(r)
        horizon = None
    elif formulation == "ntp2":
        if inst.num_employees > inst.notify_cap * (inst.horizon + 1):
            return SolveResult(INFEASIBLE, None, None, {}, formulation, 0, 0.0, f"embedded-{k.NAME}")
        r = scen.as_ints()
        status, obj, s, nodes = k.search(r, inst.horizon, inst.num_shifts, inst.cutoff,
                                         inst.notify_cap, float(inst.vacancy_penalty),
                                         kernels.MODE_NTP2, limit, canonical == LATEST)
        pairs = ntp2_pairs(surrogate_delays(scen, inst.horizon), inst.cutoff)
        r = surrogate_delays(scen, inst.horizon)
        horizon = inst.horizon
    else:
        raise ValueError(f"unknown formulation {formulation!r}")
    seconds = time.perf_counter() - t0
    label = _STATUS[status]
    if s is None:
        return SolveResult(label, None, None, {}, formulation, nodes, seconds, f"embedded-{k.NAME}")
    y = bump_matrix(s, r, pairs, horizon)
    return SolveResult(label, obj, NotificationSchedule(tuple(s)), y, formulation, nodes, seconds,
                       f"embedded-{k.NAME}")


def solve_with_backend(model: MilpModel, engine, time_limit: Optional[float] = DEFAULT_TIME_LIMIT) -> SolveResult:
    """Solve an exported model with an external engine and read the schedule back."""
    t0 = time.perf_counter()
    sol = engine.solve(model, time_limit)
    seconds = time.perf_counter() - t0
    formulation = model.meta.get("formulation", "custom")
    if not sol.values:
        return SolveResult(sol.status, sol.objective, None, {}, formulation, 0, seconds, engine.name)
    s_names = [v for v in model.variables if v.startswith("s_")]
    s = [int(round(sol.values[v])) for v in s_names]
    y = {}
    for name, val in sol.values.items():
        if name.startswith("y_") and val > 0.5:
            parts = name.split("_")
            if len(parts) == 3:
                y[(int(parts[1]), int(parts[2]))] = 1
    objective = sol.objective
    if objective is not None and abs(objective - round(objective)) < 1e-6:
        objective = int(round(objective))
    schedule = None
    if s and all(a <= b for a, b in zip(s, s[1:])):
        schedule = NotificationSchedule(tuple(s))
    return SolveResult(sol.status, objective, schedule, y, formulation, 0, seconds, engine.name,
                       extra={"values": sol.values})


def build(formulation: str, inst: Instance, scen: DelayScenario, **kw) -> MilpModel:
    """Dispatch to ``build_ntp`` or ``build_ntp2``."""
    if formulation == "ntp":
        return build_ntp(inst, scen)
    if formulation == "ntp2":
        return build_ntp2(inst, scen, **kw)
    raise ValueError(f"unknown formulation {formulation!r}")
