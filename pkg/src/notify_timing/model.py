"""Shared domain types for the notification timing problem.

Symbols used throughout the package map onto these fields:

========  ==========================  =====================================
symbol    field                       meaning
========  ==========================  =====================================
M         ``Instance.num_employees``  employees, 1 is the most senior
L         ``Instance.num_shifts``     shifts to fill
H         ``Instance.horizon``        planning horizon in epochs (minutes)
D         ``Instance.cutoff``         bump cutoff after notification
W         ``Instance.notify_cap``     max notifications per epoch
G         ``Instance.vacancy_penalty`` cost per unfilled shift
r_i       ``DelayScenario.delays``    response delay of employee i
s_i       ``NotificationSchedule``    notification epoch of employee i
e_i       ``response_times``          s_i + r_i
========  ==========================  =====================================

Employees and shifts are 1-based in documentation and reports; arrays are
0-based in code.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

__all__ = [
    "NON_RESPONDER",
    "InvalidInstanceError",
    "Instance",
    "DelayScenario",
    "NotificationSchedule",
    "PreferenceProfile",
    "SubsetSumInstance",
    "RunReport",
    "validate_instance",
    "round_half_up",
]


class _NonResponder:
    """Sentinel for an employee who never answers (delay is effectively infinite).

    Deliberately supports no arithmetic and no ordering against numbers.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "NON_RESPONDER"

    def __reduce__(self):
        return (_NonResponder, ())


NON_RESPONDER = _NonResponder()

Delay = Union[int, _NonResponder]


class InvalidInstanceError(ValueError):
    """Raised when an instance or scenario violates one of its invariants."""


def round_half_up(x: float) -> int:
    """Round to the nearest integer, halves going up (0.5 -> 1, 1.5 -> 2)."""
    return int(math.floor(x + 0.5))


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def validate_instance(inst: "Instance") -> "Instance":
    """Return ``inst`` if all invariants hold, else raise naming the first breach."""
    checks = [
        (all(_is_int(v) for v in (inst.num_employees, inst.num_shifts, inst.horizon,
                                  inst.cutoff, inst.notify_cap)),
         "integer parameters violated"),
        (inst.num_employees >= 1, "M ≥ 1 violated"),
        (inst.num_shifts >= 1, "L ≥ 1 violated"),
        (inst.num_shifts <= inst.num_employees, "L ≤ M violated"),
        (inst.horizon >= 1, "H ≥ 1 violated"),
        (0 < inst.cutoff <= inst.horizon, "0 < D ≤ H violated"),
        (inst.notify_cap >= 1, "W ≥ 1 violated"),
        (inst.vacancy_penalty >= 0, "G ≥ 0 violated"),
    ]
    for ok, message in checks:
        if not ok:
            raise InvalidInstanceError(message)
    return inst


@dataclass(frozen=True)
class Instance:
    """Parameters of one planning day."""

    num_employees: int
    num_shifts: int
    horizon: int
    cutoff: int
    notify_cap: int
    vacancy_penalty: float = 0

    def __post_init__(self):
        validate_instance(self)

    @property
    def M(self) -> int:
        return self.num_employees

    @property
    def L(self) -> int:
        return self.num_shifts

    @property
    def H(self) -> int:
        return self.horizon

    @property
    def D(self) -> int:
        return self.cutoff

    @property
    def W(self) -> int:
        return self.notify_cap

    @property
    def G(self) -> float:
        return self.vacancy_penalty

    @classmethod
    def offline(cls, num_employees: int, horizon: int) -> "Instance":
        """Instance for the no-cutoff, no-cap offline problem (L = M, D = H, W = M)."""
        return cls(num_employees, num_employees, horizon, horizon, num_employees, 0)

    def as_dict(self) -> dict:
        return {
            "M": self.num_employees, "L": self.num_shifts, "H": self.horizon,
            "D": self.cutoff, "W": self.notify_cap, "G": self.vacancy_penalty,
        }


@dataclass(frozen=True)
class DelayScenario:
    """Realized response delays, one per employee.

    Finite delays must be at least 1 epoch. ``allow_zero=True`` relaxes that to
    0, which only the Subset-Sum reduction needs.
    """

    delays: tuple
    allow_zero: bool = field(default=False, compare=False)

    def __post_init__(self):
        delays = tuple(self.delays)
        object.__setattr__(self, "delays", delays)
        floor = 0 if self.allow_zero else 1
        for idx, d in enumerate(delays):
            if d is NON_RESPONDER:
                continue
            if not _is_int(d):
                raise InvalidInstanceError(f"delay of employee {idx + 1} is not an integer: {d!r}")
            if d < floor:
                raise InvalidInstanceError(f"delay of employee {idx + 1} below {floor}: {d}")

    def __len__(self) -> int:
        return len(self.delays)

    def __getitem__(self, i):
        return self.delays[i]

    @property
    def num_employees(self) -> int:
        return len(self.delays)

    def is_responder(self, i: int) -> bool:
        return self.delays[i] is not NON_RESPONDER

    def finite(self) -> bool:
        return all(d is not NON_RESPONDER for d in self.delays)

    def as_ints(self, non_responder: int = -1) -> list[int]:
        """Delays with the sentinel replaced by ``non_responder`` (kernel encoding)."""
        return [non_responder if d is NON_RESPONDER else d for d in self.delays]

    def check_length(self, inst: Instance) -> None:
        if len(self.delays) != inst.num_employees:
            raise InvalidInstanceError(
                f"scenario has {len(self.delays)} delays but instance has M={inst.num_employees}")


@dataclass(frozen=True)
class NotificationSchedule:
    """Notification epoch per employee; ``None`` marks an employee never notified.

    Never-notified employees must form a tail of the seniority order.
    """

    notify_times: tuple

    def __post_init__(self):
        times = tuple(self.notify_times)
        object.__setattr__(self, "notify_times", times)
        prev = None
        seen_none = False
        for idx, s in enumerate(times):
            if s is None:
                seen_none = True
                continue
            if seen_none:
                raise InvalidInstanceError(
                    f"employee {idx + 1} notified after a more senior employee was skipped")
            if not _is_int(s) or s < 0:
                raise InvalidInstanceError(f"notify time of employee {idx + 1} must be a nonnegative integer")
            if prev is not None and s < prev:
                raise InvalidInstanceError(
                    f"seniority violated: s_{idx} = {prev} > s_{idx + 1} = {s}")
            prev = s

    def __len__(self) -> int:
        return len(self.notify_times)

    @property
    def num_notified(self) -> int:
        return sum(1 for s in self.notify_times if s is not None)

    def response_times(self, scen: DelayScenario) -> tuple:
        """e_i = s_i + r_i, or ``math.inf`` for non-responders and never-notified employees."""
        if len(scen) != len(self.notify_times):
            raise InvalidInstanceError("schedule and scenario lengths differ")
        out = []
        for s, r in zip(self.notify_times, scen.delays):
            out.append(math.inf if s is None or r is NON_RESPONDER else s + r)
        return tuple(out)

    def as_ints(self) -> list[int]:
        return [-1 if s is None else s for s in self.notify_times]

    def cumulative_notifications(self, horizon: int) -> list[int]:
        """Number of employees notified by each epoch 0..H."""
        counts = [0] * (horizon + 1)
        for s in self.notify_times:
            if s is not None and s <= horizon:
                counts[s] += 1
        total = 0
        for k in range(horizon + 1):
            total += counts[k]
            counts[k] = total
        return counts


@dataclass(frozen=True)
class PreferenceProfile:
    """Ordered shift preferences (1-based shift ids), most preferred first."""

    prefs: tuple

    def __post_init__(self):
        prefs = tuple(tuple(p) for p in self.prefs)
        object.__setattr__(self, "prefs", prefs)
        if not prefs:
            raise InvalidInstanceError("empty preference profile")
        L = len(prefs[0])
        expected = set(range(1, L + 1))
        for idx, p in enumerate(prefs):
            if len(p) != L or set(p) != expected:
                raise InvalidInstanceError(f"preferences of employee {idx + 1} are not a permutation of 1..{L}")

    @property
    def num_employees(self) -> int:
        return len(self.prefs)

    @property
    def num_shifts(self) -> int:
        return len(self.prefs[0])

    @classmethod
    def identical(cls, num_employees: int, num_shifts: int) -> "PreferenceProfile":
        row = tuple(range(1, num_shifts + 1))
        return cls(tuple(row for _ in range(num_employees)))

    def is_identical(self) -> bool:
        return all(p == self.prefs[0] for p in self.prefs)


@dataclass(frozen=True)
class SubsetSumInstance:
    """Sizes ``a`` and target ``T`` of a Subset-Sum instance.

    The target is called T here because W already names the notification cap.
    """

    sizes: tuple
    target: int

    def __post_init__(self):
        sizes = tuple(self.sizes)
        object.__setattr__(self, "sizes", sizes)
        if not sizes:
            raise InvalidInstanceError("Subset-Sum needs at least one size")
        if any(not _is_int(a) or a < 1 for a in sizes):
            raise InvalidInstanceError("Subset-Sum sizes must be positive integers")
        if not _is_int(self.target) or self.target < 1:
            raise InvalidInstanceError("Subset-Sum target must be a positive integer")

    @property
    def total(self) -> int:
        return sum(self.sizes)


@dataclass(frozen=True)
class RunReport:
    """Outcome of evaluating or simulating one schedule under one scenario.

    ``cost`` charges ``vacancy_penalty`` per vacancy plus the bumps selected by
    ``accounting`` ("potential" or "realized").
    """

    potential_bumps: int
    vacancies: int
    makespan: float
    vacancy_penalty: float
    per_employee: tuple
    realized_bumps: Optional[int] = None
    realized_per_employee: Optional[tuple] = None
    assigned: int = 0
    num_shifts: int = 0
    accounting: str = "potential"
    schedule: Optional[NotificationSchedule] = None

    def __post_init__(self):
        if self.accounting not in ("potential", "realized"):
            raise ValueError(f"unknown accounting mode {self.accounting!r}")
        if self.accounting == "realized" and self.realized_bumps is None:
            raise ValueError("realized accounting needs realized_bumps")

    @property
    def bumps(self) -> int:
        return self.realized_bumps if self.accounting == "realized" else self.potential_bumps

    @property
    def cost(self) -> float:
        return self.vacancy_penalty * self.vacancies + self.bumps

    def with_accounting(self, mode: str) -> "RunReport":
        from dataclasses import replace
        return replace(self, accounting=mode)

    def as_row(self) -> dict:
        return {
            "potential_bumps": self.potential_bumps,
            "realized_bumps": "" if self.realized_bumps is None else self.realized_bumps,
            "vacancies": self.vacancies,
            "assigned": self.assigned,
            "makespan": "inf" if math.isinf(self.makespan) else int(self.makespan),
            "cost": self.cost,
        }


def check_prefs(prefs: Optional[PreferenceProfile], inst: Instance) -> None:
    if prefs is None:
        return
    if prefs.num_employees != inst.num_employees or prefs.num_shifts != inst.num_shifts:
        raise InvalidInstanceError(
            f"preference profile is {prefs.num_employees}x{prefs.num_shifts}, "
            f"instance needs {inst.num_employees}x{inst.num_shifts}")


def delays_from(values: Sequence, allow_zero: bool = False) -> DelayScenario:
    """Build a scenario from ints, with ``None`` or ``-1`` meaning non-responder."""
    out = []
    for v in values:
        out.append(NON_RESPONDER if v is None or v is NON_RESPONDER or v == -1 else int(v))
    return DelayScenario(tuple(out), allow_zero=allow_zero)
