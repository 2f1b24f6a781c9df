"""Notification policies and threshold estimation from offline solutions.

A policy answers one question per epoch: how many more employees to notify.
The simulator, not the policy, applies the per-epoch cap and stops once all
shifts are occupied.
"""
from __future__ import annotations

import io
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

from . import kernels
from .model import Instance, InvalidInstanceError, NotificationSchedule

__all__ = [
    "ThresholdTable",
    "PolicySpec",
    "decide",
    "aggregate",
    "parse_aggregator",
    "nearest_rank",
    "round_half_away",
    "feature_curve",
    "estimate_thresholds",
    "NawTuning",
    "tune_naw",
    "default_naw_grid",
    "VACANCY_TOLERANCE",
]

TABLE_FORMAT = "notify-timing-threshold-table"
TABLE_VERSION = 1

# feasible policies keep mean vacancies within 0.3% of the shifts
VACANCY_TOLERANCE = 0.003


def round_half_away(x: float) -> int:
    return kernels._pykernels._round_half_away(x)


@dataclass(frozen=True)
class ThresholdTable:
    """Target cumulative notifications per epoch 0..H."""

    targets: tuple
    aggregator: str = "mean"
    train_size: int = 0
    dropped: int = 0
    num_employees: Optional[int] = None

    def __post_init__(self):
        targets = tuple(float(x) for x in self.targets)
        object.__setattr__(self, "targets", targets)
        if not targets:
            raise InvalidInstanceError("empty threshold table")
        if any(x < 0 for x in targets):
            raise InvalidInstanceError("threshold targets must be nonnegative")
        if any(b < a for a, b in zip(targets, targets[1:])):
            raise InvalidInstanceError("threshold targets must be nondecreasing")
        if self.num_employees is not None and targets[-1] > self.num_employees:
            raise InvalidInstanceError("final threshold exceeds the number of employees")

    def __len__(self) -> int:
        return len(self.targets)

    @property
    def horizon(self) -> int:
        return len(self.targets) - 1

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# format={TABLE_FORMAT}\n")
        buf.write(f"# version={TABLE_VERSION}\n")
        buf.write(f"# aggregator={self.aggregator}\n")
        buf.write(f"# train_size={self.train_size}\n")
        buf.write(f"# dropped={self.dropped}\n")
        buf.write(f"# num_employees={'' if self.num_employees is None else self.num_employees}\n")
        buf.write("epoch,target\n")
        for k, x in enumerate(self.targets):
            buf.write(f"{k},{x!r}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ThresholdTable":
        meta = {}
        rows = []
        header_seen = False
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition("=")
                meta[key.strip()] = val.strip()
                continue
            if not header_seen:
                if line != "epoch,target":
                    raise ValueError(f"line {lineno}: expected header 'epoch,target'")
                header_seen = True
                continue
            k, _, x = line.partition(",")
            if int(k) != len(rows):
                raise ValueError(f"line {lineno}: epochs must be consecutive from 0")
            rows.append(float(x))
        if meta.get("format") != TABLE_FORMAT:
            raise ValueError("not a threshold table file")
        if int(meta.get("version", -1)) != TABLE_VERSION:
            raise ValueError(f"unsupported threshold table version {meta.get('version')}")
        n = meta.get("num_employees", "")
        return cls(tuple(rows), meta.get("aggregator", "mean"), int(meta.get("train_size", 0)),
                   int(meta.get("dropped", 0)), int(n) if n else None)

    def save(self, path) -> Path:
        path = Path(path)
        path.write_text(self.to_csv())
        return path

    @classmethod
    def load(cls, path) -> "ThresholdTable":
        return cls.from_csv(Path(path).read_text())


NA = "na"
NAW = "naw"
ONP = "onp"
REPLAY = "replay"
CALLBACK = "callback"
_KINDS = (NA, NAW, ONP, REPLAY, CALLBACK)


@dataclass(frozen=True)
class PolicySpec:
    """One notification policy.

    Use the constructors :meth:`na`, :meth:`naw`, :meth:`onp`,
    :meth:`replay`, :meth:`never` and :meth:`callback`.
    """

    kind: str
    eta: int = 0
    wait: int = 0
    table: Optional[ThresholdTable] = None
    schedule: Optional[NotificationSchedule] = None
    fn: Optional[Callable] = field(default=None, compare=False)
    label: str = ""

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown policy kind {self.kind!r}")
        if self.kind == NAW and (self.eta < 1 or self.wait < 1):
            raise ValueError("NAW needs eta >= 1 and w >= 1")
        if self.kind == ONP and self.table is None:
            raise ValueError("ONP needs a threshold table")
        if self.kind == REPLAY and self.schedule is None:
            raise ValueError("Replay needs a schedule")
        if self.kind == CALLBACK and self.fn is None:
            raise ValueError("callback policy needs a function")

    @classmethod
    def na(cls) -> "PolicySpec":
        return cls(NA, label="NA")

    @classmethod
    def naw(cls, eta: int, wait: int) -> "PolicySpec":
        return cls(NAW, eta=eta, wait=wait, label=f"NAW({eta},{wait})")

    @classmethod
    def onp(cls, table: ThresholdTable, label: str = "") -> "PolicySpec":
        return cls(ONP, table=table, label=label or f"ONP[{table.aggregator}]")

    @classmethod
    def replay(cls, schedule: NotificationSchedule, label: str = "Replay") -> "PolicySpec":
        return cls(REPLAY, schedule=schedule, label=label)

    @classmethod
    def never(cls, num_employees: int) -> "PolicySpec":
        return cls(REPLAY, schedule=NotificationSchedule((None,) * num_employees), label="Never")

    @classmethod
    def callback(cls, fn: Callable[[int, int], int], label: str = "callback") -> "PolicySpec":
        """``fn(k, notified)`` returns the count to notify at epoch k."""
        return cls(CALLBACK, fn=fn, label=label)

    @property
    def name(self) -> str:
        return self.label or self.kind

    def replay_counts(self, horizon: int) -> list[int]:
        counts = [0] * (horizon + 1)
        for s in self.schedule.notify_times:
            if s is not None and s <= horizon:
                counts[s] += 1
        return counts

    def kernel_args(self, horizon: int):
        """``(kind_code, p_int, p_float, callback)`` for ``simulate_core``."""
        if self.kind == NA:
            return kernels.POLICY_NA, [0], [0.0], None
        if self.kind == NAW:
            return kernels.POLICY_NAW, [self.eta, self.wait], [0.0], None
        if self.kind == ONP:
            return kernels.POLICY_ONP, [0], list(self.table.targets), None
        if self.kind == REPLAY:
            return kernels.POLICY_REPLAY, self.replay_counts(horizon), [0.0], None
        return kernels.POLICY_CALLBACK, [0], [0.0], self.fn


def decide(spec: PolicySpec, k: int, notified: int, num_employees: int, state_summary=None) -> int:
    """Employees ``spec`` wants notified at epoch ``k`` after ``notified`` so far.

    NA asks for everyone left at every epoch, so a binding cap only spreads
    its notifications out. The cap itself is applied by the simulator.
    """
    if notified > num_employees:
        raise ValueError("more employees notified than exist")
    horizon = max(k, 0)
    if spec.kind == REPLAY:
        horizon = max(horizon, max((s for s in spec.schedule.notify_times if s is not None), default=0))
    code, p_int, p_float, fn = spec.kernel_args(horizon)
    n = kernels._pykernels._decide(code, k, notified, num_employees, p_int, p_float, fn)
    return max(int(n), 0)


def nearest_rank(values: Sequence[float], q: float) -> float:
    """Nearest-rank percentile: the ceil(q/100 * n)-th smallest value."""
    if not values:
        raise ValueError("percentile of an empty sample")
    if not 0 <= q <= 100:
        raise ValueError("percentile level must lie in [0, 100]")
    xs = sorted(values)
    rank = max(1, math.ceil(q / 100.0 * len(xs)))
    return xs[min(rank, len(xs)) - 1]


def parse_aggregator(spec) -> tuple[str, Optional[float]]:
    """Accept "mean", "p95", "percentile:95" or a number (a percentile level)."""
    if isinstance(spec, (int, float)):
        return "percentile", float(spec)
    text = str(spec).strip().lower()
    if text == "mean":
        return "mean", None
    if text.startswith("percentile:"):
        return "percentile", float(text.split(":", 1)[1])
    if text.startswith("p") and text[1:].replace(".", "", 1).isdigit():
        return "percentile", float(text[1:])
    raise ValueError(f"unknown aggregator {spec!r}")


def _aggregator_label(kind: str, q: Optional[float]) -> str:
    if kind == "mean":
        return "mean"
    return f"percentile:{q:g}"


def aggregate(features: Sequence[Sequence[float]], aggregator="mean") -> list[float]:
    """Epoch-wise mean or nearest-rank percentile of feature curves."""
    if not features:
        raise ValueError("no feature curves to aggregate")
    kind, q = parse_aggregator(aggregator)
    n = len(features[0])
    if any(len(f) != n for f in features):
        raise ValueError("feature curves differ in length")
    out = []
    for k in range(n):
        col = [f[k] for f in features]
        out.append(sum(col) / len(col) if kind == "mean" else float(nearest_rank(col, q)))
    return out


def feature_curve(schedule: NotificationSchedule, horizon: int) -> list[int]:
    """Cumulative notifications by epoch, the feature aggregated into thresholds."""
    return schedule.cumulative_notifications(horizon)


def _solve_feature(args):
    from .milp.solve import solve_exact

    inst, scen, time_limit, backend, canonical = args
    res = solve_exact(inst, scen, formulation="ntp2", time_limit=time_limit, backend=backend,
                      canonical=canonical)
    curve = None if res.schedule is None else feature_curve(res.schedule, inst.horizon)
    return res.status, curve


def estimate_thresholds(inst: Instance, scenarios, aggregator="mean", time_limit: Optional[float] = 240.0,
                        jobs: int = 1, backend: Optional[str] = None,
                        return_features: bool = False, canonical: str = "latest"):
    """Aggregate offline-optimal notification curves into a threshold table.

    Each scenario is solved to optimality as the offline NTP2; its cumulative
    notification curve is the feature. Scenarios whose solve hits the time
    limit are dropped with a warning and counted in ``dropped``.

    Parameters
    ----------
    inst : Instance
    scenarios : iterable of DelayScenario
    aggregator : str or float
        "mean", or a percentile level such as 95 / "p95".
    jobs : int
        Worker processes; results are collected in scenario order.
    canonical : {"latest", "earliest"}
        Which of several optimal schedules supplies the curve; see
        ``solve_exact``.

    Returns
    -------
    ThresholdTable, or ``(ThresholdTable, features)`` with ``return_features``.
    """
    kind, q = parse_aggregator(aggregator)
    scenarios = list(scenarios)
    if not scenarios:
        raise ValueError("at least one training scenario is required")
    tasks = [(inst, scen, time_limit, backend, canonical) for scen in scenarios]
    if jobs and jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_solve_feature, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        results = [_solve_feature(t) for t in tasks]
    features = []
    dropped = 0
    for idx, (status, curve) in enumerate(results):
        if status == "TimeLimit":
            dropped += 1
            continue
        if curve is None:
            raise RuntimeError(f"offline solve failed on training scenario {idx} with status {status}")
        features.append(curve)
    if dropped:
        warnings.warn(f"{dropped} of {len(scenarios)} training scenarios hit the time limit and were dropped",
                      RuntimeWarning, stacklevel=2)
    if not features:
        raise RuntimeError("every training scenario timed out")
    targets = aggregate(features, aggregator)
    table = ThresholdTable(tuple(targets), _aggregator_label(kind, q), len(features), dropped,
                           inst.num_employees)
    return (table, features) if return_features else table


def default_naw_grid() -> list[tuple[int, int]]:
    return [(eta, w) for eta in range(1, 6) for w in range(1, 11)]


@dataclass(frozen=True)
class NawTuning:
    eta: int
    wait: int
    feasible: bool
    rows: tuple = ()

    @property
    def policy(self) -> PolicySpec:
        return PolicySpec.naw(self.eta, self.wait)


def tune_naw(inst: Instance, validation, grid: Optional[Sequence[tuple[int, int]]] = None,
             prefs_spec=None, accounting: str = "realized", jobs: int = 1) -> NawTuning:
    """Pick (eta, w) with the fewest mean bumps among vacancy-feasible points.

    A point is feasible when its mean vacancy is at most 0.3% of L. Ties go to
    the lower mean cost, then the lexicographically smaller (eta, w). When no
    point is feasible, the point with the fewest mean vacancies is returned
    with ``feasible=False``.

    ``rows`` lists ``(eta, w, mean_bumps, mean_vacancies, mean_cost)`` per
    grid point in grid order.
    """
    from .sim import evaluate_policy

    grid = list(grid) if grid is not None else default_naw_grid()
    if not grid:
        raise ValueError("empty NAW grid")
    rows = []
    for eta, w in grid:
        summary = evaluate_policy(inst, validation, PolicySpec.naw(eta, w), prefs_spec,
                                  accounting=accounting, jobs=jobs)
        rows.append((eta, w, summary.mean_bumps, summary.mean_vacancies, summary.mean_cost))
    limit = VACANCY_TOLERANCE * inst.num_shifts
    feasible = [row for row in rows if row[3] <= limit + 1e-12]
    if feasible:
        best = min(feasible, key=lambda row: (row[2], row[4], row[0], row[1]))
        return NawTuning(best[0], best[1], True, tuple(rows))
    best = min(rows, key=lambda row: (row[3], row[2], row[4], row[0], row[1]))
    return NawTuning(best[0], best[1], False, tuple(rows))
