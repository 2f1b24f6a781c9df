"""Builders for the offline models.

``build_ntp`` minimizes potential bumps when every employee must respond by
H. ``build_ntp2`` adds response indicators z, the vacancy count theta, the
cutoff-gated bump rows and the per-epoch notification cap.

Seniority is imposed on adjacent pairs only, which is equivalent to all pairs
by transitivity.
"""
from __future__ import annotations

from ..model import DelayScenario, Instance, InvalidInstanceError
from .model import BINARY, CONTINUOUS, MilpModel

__all__ = ["build_ntp", "build_ntp2", "ntp_pairs", "ntp2_pairs", "surrogate_delays"]


def surrogate_delays(scen: DelayScenario, horizon: int) -> list[int]:
    """Delays with non-responders replaced by H + 1 (never within the horizon)."""
    return scen.as_ints(non_responder=horizon + 1)


def ntp_pairs(r) -> list[tuple[int, int]]:
    """0-based pairs i < j with r_i > r_j."""
    M = len(r)
    return [(i, j) for i in range(M) for j in range(i + 1, M) if r[i] > r[j]]


def ntp2_pairs(r, cutoff: int) -> list[tuple[int, int]]:
    """0-based pairs i < j with r_j <= r_i <= D."""
    M = len(r)
    return [(i, j) for i in range(M) for j in range(i + 1, M) if r[j] <= r[i] <= cutoff]


def build_ntp(inst: Instance, scen: DelayScenario) -> MilpModel:
    """Potential-bump minimization with every response inside the horizon."""
    scen.check_length(inst)
    if not scen.finite():
        raise InvalidInstanceError("the offline model needs every employee to respond")
    r = list(scen.delays)
    M, H = inst.num_employees, inst.horizon
    m = MilpModel(name="ntp")
    for i in range(M):
        m.add_var(f"s_{i + 1}", CONTINUOUS)
        m.add_var(f"e_{i + 1}", CONTINUOUS, ub=H)
    pairs = ntp_pairs(r)
    for i, j in pairs:
        m.add_var(f"y_{i + 1}_{j + 1}", BINARY)
    for i in range(M - 1):
        m.add_constr(f"seniority_{i + 1}", {f"s_{i + 1}": 1, f"s_{i + 2}": -1}, "<=", 0)
    for i in range(M):
        m.add_constr(f"horizon_{i + 1}", {f"e_{i + 1}": 1}, "<=", H)
        m.add_constr(f"response_{i + 1}", {f"e_{i + 1}": 1, f"s_{i + 1}": -1}, "=", r[i])
    for i, j in pairs:
        m.add_constr(f"bump_{i + 1}_{j + 1}",
                     {f"e_{i + 1}": 1, f"e_{j + 1}": -1, f"y_{i + 1}_{j + 1}": -(r[i] - r[j])}, "<=", 0)
    m.set_objective({f"y_{i + 1}_{j + 1}": 1 for i, j in pairs})
    m.meta = {"formulation": "ntp", "instance": inst, "scenario": scen, "pairs": pairs}
    return m


def build_ntp2(inst: Instance, scen: DelayScenario, strengthen: bool = True) -> MilpModel:
    """Offline model with vacancies, cutoff and notification cap.

    Parameters
    ----------
    strengthen : bool
        Add the strengthening families: y_ij bounded by z_i and z_j, and,
        when the cap cannot bind (M <= W), no waiting after an in-horizon
        responder whose successor is slower. Under a binding cap the no-wait
        rows cut off feasible schedules, so they are left out.
    """
    scen.check_length(inst)
    M, L, H, D, W = inst.num_employees, inst.num_shifts, inst.horizon, inst.cutoff, inst.notify_cap
    r = surrogate_delays(scen, H)
    m = MilpModel(name="ntp2")
    for i in range(M):
        m.add_var(f"s_{i + 1}", CONTINUOUS)
    for i in range(M):
        m.add_var(f"z_{i + 1}", BINARY)
    pairs = ntp2_pairs(r, D)
    for i, j in pairs:
        m.add_var(f"y_{i + 1}_{j + 1}", BINARY)
    m.add_var("theta", CONTINUOUS, ub=L)

    for i in range(M - 1):
        m.add_constr(f"seniority_{i + 1}", {f"s_{i + 1}": 1, f"s_{i + 2}": -1}, "<=", 0)
    for i in range(M):
        # z_i = 0 forces e_i >= H + 1, z_i = 1 forces e_i <= H
        m.add_constr(f"late_{i + 1}", {f"s_{i + 1}": 1, f"z_{i + 1}": H + 1}, ">=", H + 1 - r[i])
        m.add_constr(f"ontime_{i + 1}", {f"s_{i + 1}": 1, f"z_{i + 1}": r[i]}, "<=", H)
    for i, j in pairs:
        delta = r[i] - r[j]
        m.add_constr(f"bump_{i + 1}_{j + 1}",
                     {f"s_{i + 1}": 1, f"s_{j + 1}": -1, f"y_{i + 1}_{j + 1}": -delta,
                      f"z_{i + 1}": H + r[i]},
                     "<=", H + r[i] - delta)
    m.add_constr("vacancy", {**{f"z_{i + 1}": 1 for i in range(M)}, "theta": 1}, ">=", L)
    for i in range(M - W):
        m.add_constr(f"cap_{i + 1}", {f"s_{i + W + 1}": 1, f"s_{i + 1}": -1}, ">=", 1)
    if strengthen and M <= W:
        for i in range(M - 1):
            if r[i + 1] >= r[i]:
                m.add_constr(f"nowait_{i + 1}",
                             {f"s_{i + 2}": 1, f"s_{i + 1}": -1, f"z_{i + 1}": H}, "<=", H)
    if strengthen:
        for i, j in pairs:
            m.add_constr(f"ylink_i_{i + 1}_{j + 1}", {f"y_{i + 1}_{j + 1}": 1, f"z_{i + 1}": -1}, "<=", 0)
            m.add_constr(f"ylink_j_{i + 1}_{j + 1}", {f"y_{i + 1}_{j + 1}": 1, f"z_{j + 1}": -1}, "<=", 0)
    obj = {f"y_{i + 1}_{j + 1}": 1 for i, j in pairs}
    obj["theta"] = inst.vacancy_penalty
    m.set_objective(obj)
    m.meta = {"formulation": "ntp2", "instance": inst, "scenario": scen, "pairs": pairs,
              "strengthen": strengthen}
    return m
