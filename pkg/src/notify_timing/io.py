"""Delay ingestion, configuration files and report writers.

Every report carries a config hash, the seeds and the artifact version and no
timestamps, so rerunning a command with the same inputs reproduces its files
byte for byte.
"""
from __future__ import annotations

import configparser
import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .model import Instance, round_half_up
from .policies import ThresholdTable
from .preferences import PreferenceSpec

__all__ = [
    "EmpiricalDelayDistribution",
    "ingest_delays",
    "load_config",
    "plan_to_dict",
    "config_hash",
    "artifact_version",
    "report_rows",
    "write_report_csv",
    "write_report_json",
    "plot_data_csv",
    "REPORT_COLUMNS",
]

SECONDS = "seconds"
MINUTES = "minutes"


@dataclass(frozen=True)
class EmpiricalDelayDistribution:
    """Observed delays in epochs, sorted, plus a non-response probability."""

    samples: tuple
    p_nr: float = 0.0
    path: str = ""

    def __post_init__(self):
        samples = tuple(sorted(int(x) for x in self.samples))
        object.__setattr__(self, "samples", samples)
        if not samples:
            raise ValueError("empirical delay sample is empty")
        if not 0 <= self.p_nr <= 1:
            raise ValueError("p_nr must lie in [0, 1]")

    @property
    def count(self) -> int:
        return len(self.samples)

    def quantile(self, u: float) -> int:
        """Inverse empirical CDF: the ceil(u n)-th smallest sample."""
        n = len(self.samples)
        idx = min(n - 1, max(0, math.ceil(u * n) - 1))
        return self.samples[idx]

    def describe(self) -> dict:
        return {"kind": "empirical", "path": self.path, "count": self.count, "p_nr": self.p_nr}


def ingest_delays(path, unit: str = MINUTES, p_nr: float = 0.0) -> EmpiricalDelayDistribution:
    """Read one delay per row; an optional non-numeric header on the first row.

    Values are converted to minutes, rounded half up and raised to at least
    one epoch.

    Raises
    ------
    ValueError
        Empty file, negative values, or non-numeric rows (with line numbers).
    """
    if unit not in (SECONDS, MINUTES):
        raise ValueError(f"unit must be {SECONDS!r} or {MINUTES!r}")
    scale = 60.0 if unit == SECONDS else 1.0
    values = []
    bad = []
    first = True
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        text = raw.strip().split(",")[0].strip()
        if not text:
            continue
        try:
            x = float(text)
        except ValueError:
            if first:
                first = False
                continue
            bad.append(lineno)
            continue
        first = False
        if not math.isfinite(x) or x < 0:
            bad.append(lineno)
            continue
        values.append(max(1, round_half_up(x / scale)))
    if bad:
        raise ValueError(f"non-numeric or invalid delay rows at lines {bad}")
    if not values:
        raise ValueError(f"no delays found in {path}")
    return EmpiricalDelayDistribution(tuple(values), p_nr, str(path))


def _policy_string(section) -> str:
    kind = section.get("kind", "").strip().lower()
    if kind in ("na", "never"):
        return kind
    if kind == "naw":
        if "eta" in section and "wait" in section:
            return f"naw:{section.getint('eta')},{section.getint('wait')}"
        return "naw"
    if kind == "onp":
        return f"onp:{section.get('aggregator', 'mean').strip()}"
    raise ValueError(f"unknown policy kind {kind!r} in [{section.name}]")


def load_config(path):
    """Read an experiment plan from an INI file.

    Sections: ``[instance]``, ``[delays]``, ``[preferences]``,
    ``[experiment]`` and any number of ``[policy.NAME]`` blocks. See the
    README for keys and defaults.
    """
    from .sim import ExperimentPlan, ExponentialDelays

    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    with open(path) as fh:
        cp.read_file(fh)
    sec = cp["instance"] if cp.has_section("instance") else {}
    M = int(sec.get("employees", 12))
    H = int(sec.get("horizon", 30))
    inst = Instance(
        num_employees=M,
        num_shifts=int(sec.get("shifts", M)),
        horizon=H,
        cutoff=int(sec.get("cutoff", H)),
        notify_cap=int(sec.get("cap", M)),
        vacancy_penalty=float(sec.get("penalty", 200)),
    )
    dsec = cp["delays"] if cp.has_section("delays") else {}
    source_kind = dsec.get("source", "exponential")
    p_nr = float(dsec.get("p_nr", 0.5))
    if source_kind == "exponential":
        source = ExponentialDelays(float(dsec.get("mean", 8.0)), p_nr)
    elif source_kind == "empirical":
        file = Path(dsec["path"])
        if not file.is_absolute():
            file = Path(path).parent / file
        source = ingest_delays(file, dsec.get("unit", MINUTES), p_nr)
    else:
        raise ValueError(f"unknown delay source {source_kind!r}")
    psec = cp["preferences"] if cp.has_section("preferences") else {}
    prefs = PreferenceSpec(psec.get("kind", "fixed"), int(psec.get("seed", 0)),
                           int(psec.get("num_disliked", 5)), int(psec.get("window", 4)))
    esec = cp["experiment"] if cp.has_section("experiment") else {}
    blocks = [cp[s] for s in cp.sections() if s.startswith("policy.")]
    if blocks:
        policies = tuple(_policy_string(b) for b in blocks)
    else:
        policies = tuple(p.strip() for p in esec.get("policies", "na,naw,onp:mean,onp:p95").split(",") if p.strip())
    grid = None
    if "naw_eta" in esec or "naw_wait" in esec:
        etas = [int(x) for x in esec.get("naw_eta", "1,2,3,4,5").split(",")]
        waits = [int(x) for x in esec.get("naw_wait", "1,2,3,4,5,6,7,8,9,10").split(",")]
        grid = tuple((e, w) for e in etas for w in waits)
    return ExperimentPlan(
        inst=inst,
        delay_source=source,
        prefs_spec=prefs,
        policies=policies,
        train_size=int(esec.get("train", 1000)),
        val_size=int(esec.get("validation", 500)),
        test_size=int(esec.get("test", 500)),
        seed=int(esec.get("seed", 0)),
        accounting=esec.get("accounting", "realized"),
        time_limit=float(esec.get("time_limit", 240)),
        naw_grid=grid,
        jobs=int(esec.get("jobs", 1)),
    )


def plan_to_dict(plan) -> dict:
    """Everything that determines an experiment's results (not ``jobs``)."""
    prefs = plan.prefs_spec
    return {
        "instance": plan.inst.as_dict(),
        "delays": plan.delay_source.describe() if hasattr(plan.delay_source, "describe") else str(plan.delay_source),
        "delay_samples_sha256": (hashlib.sha256(repr(plan.delay_source.samples).encode()).hexdigest()
                                 if hasattr(plan.delay_source, "samples") else None),
        "preferences": None if prefs is None else {"kind": prefs.kind, "seed": prefs.seed,
                                                   "num_disliked": prefs.num_disliked, "window": prefs.window},
        "policies": list(plan.policies),
        "splits": [plan.train_size, plan.val_size, plan.test_size],
        "seed": plan.seed,
        "accounting": plan.accounting,
        "time_limit": plan.time_limit,
        "naw_grid": None if plan.naw_grid is None else [list(p) for p in plan.naw_grid],
    }


def config_hash(payload: dict) -> str:
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def artifact_version() -> str:
    """Package version plus a digest of the package sources."""
    from . import __version__

    root = Path(__file__).resolve().parent
    h = hashlib.sha256()
    for f in sorted(root.rglob("*")):
        if f.suffix in (".py", ".pyx") and f.is_file():
            h.update(f.relative_to(root).as_posix().encode())
            h.update(f.read_bytes())
    return f"{__version__}+src.{h.hexdigest()[:12]}"


REPORT_COLUMNS = ("policy", "runs", "mean_bumps", "mean_potential_bumps", "mean_realized_bumps",
                  "mean_vacancies", "mean_cost", "vacancy_feasible", "identity_ok")


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _header(meta: dict) -> str:
    return "".join(f"# {k}={_fmt(v) if not isinstance(v, (dict, list)) else json.dumps(v, sort_keys=True)}\n"
                   for k, v in meta.items())


def report_rows(report) -> list[dict]:
    return [row.as_dict() for row in report.rows]


def write_report_csv(report, path, meta: dict) -> Path:
    """Policy rows with a ``#``-comment header of ``meta``."""
    buf = io.StringIO()
    buf.write(_header(meta))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_COLUMNS)
    for row in report.rows:
        d = row.as_dict()
        w.writerow([_fmt(d[c]) for c in REPORT_COLUMNS])
    path = Path(path)
    path.write_text(buf.getvalue())
    return path


def write_report_json(payload: dict, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(payload, sort_keys=True, indent=2, default=str) + "\n")
    return path


def plot_data_csv(curves: dict, meta: Optional[dict] = None) -> str:
    """``epoch`` plus one cumulative-notification column per named curve."""
    names = list(curves)
    n = max(len(c) for c in curves.values())
    buf = io.StringIO()
    if meta:
        buf.write(_header(meta))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["epoch", *names])
    for k in range(n):
        row = [k]
        for name in names:
            c = curves[name]
            v = c[k] if k < len(c) else c[-1]
            row.append(_fmt(float(v)) if isinstance(v, float) else v)
        w.writerow(row)
    return buf.getvalue()


def table_curves(tables: dict) -> dict:
    return {f"onp_{name}": list(t.targets) for name, t in tables.items() if isinstance(t, ThresholdTable)}
