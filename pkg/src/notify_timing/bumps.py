"""Bump chains, potential-bump counting and schedule scoring.

Shift assignment follows the seniority rules of the notification system: a
responder takes its most preferred shift that is vacant or, when it still
holds bump rights, occupied by a junior. A displaced employee resumes its
search just past the shift it lost and may itself displace juniors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from . import kernels
from .model import (
    DelayScenario,
    Instance,
    InvalidInstanceError,
    NotificationSchedule,
    PreferenceProfile,
    RunReport,
    check_prefs,
)

__all__ = [
    "EMPTY",
    "EMPTY_SHIFT",
    "NULL_SHIFT",
    "AssignmentState",
    "BumpChain",
    "resolve_response",
    "potential_bumps",
    "evaluate_schedule",
    "response_order",
]

EMPTY = None
EMPTY_SHIFT = "EMPTY_SHIFT"
NULL_SHIFT = "NULL_SHIFT"


@dataclass
class AssignmentState:
    """Mutable occupancy of one run.

    Attributes
    ----------
    occ : list of int
        ``occ[l]`` is the 0-based employee on shift l, or -1.
    held : list of int
        ``held[i]`` is the 0-based shift of employee i, or -1.
    cursor : list of int
        Position in employee i's preference list where its search resumes;
        equal to L once the list is exhausted.
    prefs : list of list of int
        0-based preference lists.
    clock : int
        Current epoch.
    """

    occ: list
    held: list
    cursor: list
    prefs: list
    clock: int = 0
    responded: set = field(default_factory=set)

    @classmethod
    def empty(cls, prefs: PreferenceProfile) -> "AssignmentState":
        M, L = prefs.num_employees, prefs.num_shifts
        rows = [[l - 1 for l in row] for row in prefs.prefs]
        return cls([-1] * L, [-1] * M, [0] * M, rows)

    @property
    def num_shifts(self) -> int:
        return len(self.occ)

    @property
    def occupied(self) -> int:
        return sum(1 for o in self.occ if o >= 0)

    @property
    def vacant(self) -> int:
        return self.num_shifts - self.occupied

    def occupancy(self) -> dict:
        """Shift id (1-based) to employee id (1-based) or ``EMPTY``."""
        return {l + 1: (o + 1 if o >= 0 else EMPTY) for l, o in enumerate(self.occ)}

    def check(self) -> None:
        """Raise if occupancy and holdings disagree."""
        for l, o in enumerate(self.occ):
            if o >= 0 and self.held[o] != l:
                raise AssertionError(f"shift {l + 1} lists employee {o + 1} who holds {self.held[o] + 1}")
        for i, l in enumerate(self.held):
            if l >= 0 and self.occ[l] != i:
                raise AssertionError(f"employee {i + 1} holds shift {l + 1} occupied by {self.occ[l] + 1}")


@dataclass(frozen=True)
class BumpChain:
    """Displacements triggered by one response (1-based employee ids)."""

    initiator: int
    chain: tuple
    terminal: str

    def __len__(self) -> int:
        return len(self.chain)


def resolve_response(state: AssignmentState, i: int, may_bump: bool) -> tuple[AssignmentState, BumpChain]:
    """Seat responder ``i`` (0-based) and cascade any bumps.

    Parameters
    ----------
    state : AssignmentState
        Updated in place and returned.
    i : int
        Responding employee.
    may_bump : bool
        Whether ``i`` responded within the cutoff.

    Returns
    -------
    (AssignmentState, BumpChain)
    """
    if i in state.responded:
        raise InvalidInstanceError(f"employee {i + 1} already responded")
    state.responded.add(i)
    chain, filled = kernels.backend.resolve_chain(
        state.occ, state.held, state.cursor, state.prefs, i, bool(may_bump))
    terminal = EMPTY_SHIFT if filled else NULL_SHIFT
    return state, BumpChain(i + 1, tuple(j + 1 for j in chain), terminal)


def _kernel_inputs(sched: NotificationSchedule, scen: DelayScenario):
    if len(sched) != len(scen):
        raise InvalidInstanceError("schedule and scenario lengths differ")
    return sched.as_ints(), scen.as_ints()


def potential_bumps(sched: NotificationSchedule, scen: DelayScenario, inst: Instance,
                    enforce_cutoff: bool = False, in_horizon_only: bool = True) -> tuple[int, list]:
    """Count pairs i < j with e_i > e_j, both finite.

    With ``in_horizon_only`` only responses at or before H count; with
    ``enforce_cutoff`` the senior must also satisfy r_i <= D.

    Returns
    -------
    total : int
    per_employee : list of int
        Pairs initiated by each employee.
    """
    s, r = _kernel_inputs(sched, scen)
    total, per = kernels.backend.potential_counts(
        s, r, inst.horizon, inst.cutoff, bool(enforce_cutoff), bool(in_horizon_only))
    return total, list(per)


def response_order(sched: NotificationSchedule, scen: DelayScenario, horizon: int) -> list[tuple[int, int]]:
    """In-horizon responses as ``(epoch, employee)`` sorted by time then seniority."""
    s, r = _kernel_inputs(sched, scen)
    events = [(s[i] + r[i], i) for i in range(len(s))
              if s[i] >= 0 and r[i] >= 0 and s[i] + r[i] <= horizon]
    events.sort()
    return events


def evaluate_schedule(sched: NotificationSchedule, scen: DelayScenario, inst: Instance,
                      prefs: Optional[PreferenceProfile] = None,
                      enforce_cutoff: bool = False) -> RunReport:
    """Score a fixed schedule under one scenario.

    Realized bumps are computed only when ``prefs`` is given, by replaying the
    in-horizon responses in time order (seniority first on ties); a responder
    may bump when r_i <= D.
    """
    scen.check_length(inst)
    check_prefs(prefs, inst)
    total, per = potential_bumps(sched, scen, inst, enforce_cutoff)
    events = response_order(sched, scen, inst.horizon)
    assigned = min(inst.num_shifts, len(events))
    vacancies = inst.num_shifts - assigned
    e = sched.response_times(scen)
    makespan = max(e) if e else 0
    if not math.isinf(makespan):
        makespan = int(makespan)
    realized = realized_per = None
    if prefs is not None:
        state = AssignmentState.empty(prefs)
        counts = [0] * inst.num_employees
        r = scen.as_ints()
        for t, i in events:
            state.clock = t
            _, chain = resolve_response(state, i, r[i] <= inst.cutoff)
            counts[i] += len(chain)
        realized = sum(counts)
        realized_per = tuple(counts)
        assigned = state.occupied
        vacancies = inst.num_shifts - assigned
    return RunReport(
        potential_bumps=total,
        vacancies=vacancies,
        makespan=makespan,
        vacancy_penalty=inst.vacancy_penalty,
        per_employee=tuple(per),
        realized_bumps=realized,
        realized_per_employee=realized_per,
        assigned=assigned,
        num_shifts=inst.num_shifts,
        schedule=sched,
    )
