"""Command-line entry point: ``notify-timing <command> [options]``.

Report CSV columns, in order:
  experiment / simulate: policy, runs, mean_bumps, mean_potential_bumps,
      mean_realized_bumps, mean_vacancies, mean_cost, vacancy_feasible, identity_ok
  tune-naw: eta, wait, mean_bumps, mean_vacancies, mean_cost
  plot data: epoch, then one cumulative-notification column per curve
Every report starts with ``#`` header lines holding the config hash, seeds and
artifact version.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

from . import kernels
from .io import (
    MINUTES,
    SECONDS,
    artifact_version,
    config_hash,
    ingest_delays,
    load_config,
    plan_to_dict,
    plot_data_csv,
    table_curves,
    write_report_csv,
    write_report_json,
)
from .model import NON_RESPONDER, DelayScenario, Instance, SubsetSumInstance
from .policies import (
    VACANCY_TOLERANCE,
    PolicySpec,
    ThresholdTable,
    default_naw_grid,
    estimate_thresholds,
    tune_naw,
)
from .preferences import KINDS, PreferenceSpec

DEFAULT_SEED = 0


def _cores() -> int:
    return os.cpu_count() or 1


def _parse_delays(text: str) -> DelayScenario:
    out = []
    for tok in text.replace(";", ",").split(","):
        tok = tok.strip().lower()
        if not tok:
            continue
        out.append(NON_RESPONDER if tok in ("nr", "x", "-", "none") else int(tok))
    return DelayScenario(tuple(out))


def _instance_flags(p: argparse.ArgumentParser, employees=12, shifts=None, horizon=30):
    g = p.add_argument_group("instance")
    g.add_argument("--employees", type=int, default=employees, help="M (default %(default)s)")
    g.add_argument("--shifts", type=int, default=shifts, help="L (default M)")
    g.add_argument("--horizon", type=int, default=horizon, help="H in epochs (default %(default)s)")
    g.add_argument("--cutoff", type=int, default=None, help="D in epochs (default H)")
    g.add_argument("--cap", type=int, default=None, help="W notifications per epoch (default M)")
    g.add_argument("--penalty", type=float, default=200.0, help="G per vacant shift (default %(default)s)")


def _delay_flags(p: argparse.ArgumentParser):
    g = p.add_argument_group("delay distribution")
    g.add_argument("--delay-mean", type=float, default=8.0, help="exponential mean (default %(default)s)")
    g.add_argument("--p-nr", type=float, default=0.5, help="non-response probability (default %(default)s)")
    g.add_argument("--delay-file", help="empirical delays, one per row; overrides --delay-mean")
    g.add_argument("--delay-unit", choices=(SECONDS, MINUTES), default=MINUTES)


def _common_flags(p: argparse.ArgumentParser, seed=True, prefs=False, jobs=False):
    if seed:
        p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="random seed (default %(default)s)")
    if prefs:
        p.add_argument("--prefs", choices=KINDS, default="fixed", help="preference distribution")
    if jobs:
        p.add_argument("--jobs", type=int, default=_cores(), help="worker processes (default: all cores)")
    p.add_argument("--out", help="output path (directory for experiment)")


def _instance(args, employees=None) -> Instance:
    M = employees if employees is not None else args.employees
    H = args.horizon
    return Instance(M, args.shifts if args.shifts is not None else M, H,
                    args.cutoff if args.cutoff is not None else H,
                    args.cap if args.cap is not None else M, args.penalty)


def _source(args):
    from .sim import ExponentialDelays

    if args.delay_file:
        return ingest_delays(args.delay_file, args.delay_unit, args.p_nr)
    return ExponentialDelays(args.delay_mean, args.p_nr)


def _meta(payload: dict, seeds) -> dict:
    return {"config_hash": config_hash(payload), "seeds": seeds, "version": artifact_version()}


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _dump(payload: dict, out) -> None:
    _emit(json.dumps(payload, sort_keys=True, indent=2, default=str) + "\n", out)


def _policy(text: str, M: int) -> PolicySpec:
    """na | never | naw:ETA,W | onp:TABLE.csv | replay:S1,S2,..."""
    key, _, arg = text.partition(":")
    key = key.strip().lower()
    if key == "na":
        return PolicySpec.na()
    if key == "never":
        return PolicySpec.never(M)
    if key == "naw":
        eta, w = (int(x) for x in arg.split(","))
        return PolicySpec.naw(eta, w)
    if key == "onp":
        return PolicySpec.onp(ThresholdTable.load(arg), label=f"ONP:{Path(arg).name}")
    if key == "replay":
        from .model import NotificationSchedule

        times = tuple(None if t.strip().lower() in ("nr", "none", "-") else int(t) for t in arg.split(","))
        return PolicySpec.replay(NotificationSchedule(times))
    raise argparse.ArgumentTypeError(f"unknown policy {text!r}")


# commands

def cmd_solve_offline(args) -> int:
    from .milp.solve import solve_exact

    scen = _parse_delays(args.delays)
    inst = _instance(args, employees=len(scen))
    res = solve_exact(inst, scen, formulation=args.formulation, time_limit=args.time_limit,
                      canonical=args.canonical)
    payload = {
        "instance": inst.as_dict(),
        "delays": scen.as_ints(),
        "formulation": args.formulation,
        "status": res.status,
        "objective": res.objective,
        "schedule": None if res.schedule is None else res.schedule.as_ints(),
    }
    payload.update(_meta({k: payload[k] for k in ("instance", "delays", "formulation")}, None))
    _dump(payload, args.out)
    if args.out:
        print(f"status={res.status} objective={res.objective}")
    return 0 if res.schedule is not None else 2


def cmd_build_model(args) -> int:
    from .milp.export import export_model
    from .milp.offline import build_ntp, build_ntp2
    from .milp.stochastic import build_dntps
    from .sim import sample_scenarios

    if args.formulation == "dntps":
        inst = _instance(args)
        omega = sample_scenarios(_source(args), inst.num_employees, args.scenarios, args.seed)
        model = build_dntps(inst, omega, cap_mode=args.cap_mode)
    else:
        if not args.delays:
            raise SystemExit("build-model: --delays is required for ntp and ntp2")
        scen = _parse_delays(args.delays)
        inst = _instance(args, employees=len(scen))
        model = build_ntp(inst, scen) if args.formulation == "ntp" else build_ntp2(inst, scen)
    _emit(export_model(model, args.format), args.out)
    return 0


def _train(args, inst):
    from .sim import sample_scenarios

    train = sample_scenarios(_source(args), inst.num_employees, args.scenarios, [args.seed, 1])
    return estimate_thresholds(inst, train, args.aggregator, args.time_limit, args.jobs,
                               return_features=True, canonical=args.canonical)


def cmd_train_onp(args) -> int:
    inst = _instance(args)
    table, features = _train(args, inst)
    payload = {"instance": inst.as_dict(), "delays": _source(args).describe(), "aggregator": args.aggregator,
               "scenarios": args.scenarios, "time_limit": args.time_limit, "canonical": args.canonical}
    meta = _meta(payload, [args.seed, 1])
    _emit(table.to_csv(), args.out)
    if args.plot_out:
        Path(args.plot_out).write_text(plot_data_csv({f"onp_{table.aggregator}": list(table.targets)}, meta))
    return 0


def cmd_tune_naw(args) -> int:
    from .sim import sample_scenarios

    inst = _instance(args)
    val = sample_scenarios(_source(args), inst.num_employees, args.scenarios, [args.seed, 2])
    prefs = PreferenceSpec(args.prefs, args.seed)
    res = tune_naw(inst, val, default_naw_grid(), prefs, args.accounting, args.jobs)
    payload = {"instance": inst.as_dict(), "delays": _source(args).describe(), "prefs": args.prefs,
               "scenarios": args.scenarios, "accounting": args.accounting}
    meta = _meta(payload, [args.seed, 2])
    meta.update({"best_eta": res.eta, "best_wait": res.wait, "feasible": res.feasible})
    buf = io.StringIO()
    for k, v in meta.items():
        buf.write(f"# {k}={json.dumps(v) if isinstance(v, list) else v}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["eta", "wait", "mean_bumps", "mean_vacancies", "mean_cost"])
    for row in res.rows:
        w.writerow([row[0], row[1], repr(float(row[2])), repr(float(row[3])), repr(float(row[4]))])
    _emit(buf.getvalue(), args.out)
    return 0


def cmd_simulate(args) -> int:
    from .sim import PolicyRow, evaluate_policy, sample_scenarios

    inst = _instance(args)
    policy = _policy(args.policy, inst.num_employees)
    test = sample_scenarios(_source(args), inst.num_employees, args.scenarios, [args.seed, 3])
    prefs = PreferenceSpec(args.prefs, args.seed)
    summary = evaluate_policy(inst, test, policy, prefs, args.accounting, args.jobs)
    limit = VACANCY_TOLERANCE * inst.num_shifts
    row = PolicyRow(args.policy, summary.runs, summary.mean_bumps, summary.mean_potential,
                    summary.mean_realized, summary.mean_vacancies, summary.mean_cost,
                    summary.mean_vacancies <= limit + 1e-12, summary.identity_ok)
    payload = {"instance": inst.as_dict(), "delays": _source(args).describe(), "prefs": args.prefs,
               "policy": args.policy, "scenarios": args.scenarios, "accounting": args.accounting}
    meta = _meta(payload, [args.seed, 3])

    class _Report:
        rows = [row]

    if args.out:
        write_report_csv(_Report, args.out, meta)
    else:
        tmp = io.StringIO()
        tmp.write("".join(f"# {k}={v}\n" for k, v in meta.items()))
        w = csv.writer(tmp, lineterminator="\n")
        d = row.as_dict()
        w.writerow(list(d))
        w.writerow([repr(v) if isinstance(v, float) else v for v in d.values()])
        sys.stdout.write(tmp.getvalue())
    return 0


def cmd_experiment(args) -> int:
    from dataclasses import replace

    from .sim import ExperimentPlan, run_experiment

    if args.config:
        plan = load_config(args.config)
    else:
        plan = ExperimentPlan(_instance(args), _source(args), PreferenceSpec(args.prefs, args.seed),
                              train_size=args.train, val_size=args.validation, test_size=args.test,
                              seed=args.seed, time_limit=args.time_limit)
    if args.jobs:
        plan = replace(plan, jobs=args.jobs)
    report = run_experiment(plan)
    payload = plan_to_dict(plan)
    meta = _meta(payload, report.seeds)
    out = Path(args.out or "experiment-out")
    out.mkdir(parents=True, exist_ok=True)
    write_report_csv(report, out / "report.csv", meta)
    write_report_json({
        **meta,
        "plan": payload,
        "rows": [r.as_dict() for r in report.rows],
        "errors": report.errors,
        "dropped": report.dropped,
        "naw": None if report.naw is None else {"eta": report.naw.eta, "wait": report.naw.wait,
                                                "feasible": report.naw.feasible},
    }, out / "report.json")
    for agg, table in report.tables.items():
        table.save(out / f"thresholds_{agg}.csv")
    curves = table_curves(report.tables)
    if curves:
        (out / "plot.csv").write_text(plot_data_csv(curves, meta))
    for r in report.rows:
        print(f"{r.policy}: bumps={r.mean_bumps:.4f} vacancies={r.mean_vacancies:.4f} cost={r.mean_cost:.4f}")
    for name, err in report.errors.items():
        print(f"{name}: FAILED {err}", file=sys.stderr)
    return 0 if not report.errors else 1


def _read_subset_sum(path) -> SubsetSumInstance:
    """First line: sizes; second line: target. Separators: spaces or commas."""
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if len(lines) < 2:
        raise ValueError("subset-sum file needs a sizes line and a target line")
    sizes = tuple(int(x) for x in lines[0].replace(",", " ").split())
    return SubsetSumInstance(sizes, int(lines[1].strip()))


def cmd_reduce(args) -> int:
    from .reduction import reduce, verify_reduction

    if args.file:
        ss = _read_subset_sum(args.file)
    elif args.sizes and args.target is not None:
        ss = SubsetSumInstance(tuple(int(x) for x in args.sizes.split(",")), args.target)
    else:
        raise SystemExit("reduce: give --file or both --sizes and --target")
    red = reduce(ss)
    res = verify_reduction(ss, time_limit=args.time_limit)
    print(f"M={red.num_employees}, H={red.horizon}")
    print(f"delays={list(red.delays.as_ints())}")
    print(f"optimum={res['optimum']} subset={res['subset']}")
    print(f"verification {'PASS' if res['ok'] else 'FAIL'}")
    if args.out:
        res = {k: v for k, v in res.items() if k != "seconds"}
        res.update({"delays": red.delays.as_ints(), "critical": list(red.critical)})
        res.update(_meta({"sizes": list(ss.sizes), "target": ss.target}, None))
        _dump(res, args.out)
    return 0 if res["ok"] else 1


def cmd_adversary(args) -> int:
    from .reduction import adversary

    inst = _instance(args)
    policy = _policy(args.policy, inst.num_employees)
    rep = adversary(policy, inst)
    payload = {
        "policy": args.policy,
        "instance": inst.as_dict(),
        "case": rep.case,
        "delays": rep.scenario.as_ints(),
        "online": {"potential_bumps": rep.online.potential_bumps, "vacancies": rep.online.vacancies,
                   "schedule": rep.online.schedule.as_ints()},
        "offline": {"potential_bumps": rep.offline.potential_bumps, "vacancies": rep.offline.vacancies,
                    "schedule": rep.offline_schedule.as_ints()},
        "max_bumps": rep.max_bumps,
        "ok": rep.ok,
    }
    payload.update(_meta({"policy": args.policy, "instance": inst.as_dict()}, None))
    _dump(payload, args.out)
    if args.out:
        print(f"case={rep.case} online bumps={rep.online.potential_bumps} vacancies={rep.online.vacancies} "
              f"offline bumps={rep.offline.potential_bumps} vacancies={rep.offline.vacancies} "
              f"{'PASS' if rep.ok else 'FAIL'}")
    return 0 if rep.ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="notify-timing", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--backend", choices=kernels.available_backends(), default=None,
                        help="kernel backend (default: compiled when available)")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("solve-offline", help="optimal schedule for one delay scenario")
    p.add_argument("--delays", required=True, help="comma-separated delays, 'nr' for non-responders")
    p.add_argument("--formulation", choices=("ntp", "ntp2"), default="ntp")
    p.add_argument("--time-limit", type=float, default=240.0)
    p.add_argument("--canonical", choices=("earliest", "latest"), default="earliest")
    _instance_flags(p, employees=None, horizon=10)
    _common_flags(p, seed=False)
    p.set_defaults(func=cmd_solve_offline)

    p = sub.add_parser("build-model", help="export a MILP as MPS or LP text")
    p.add_argument("--formulation", choices=("ntp", "ntp2", "dntps"), default="ntp")
    p.add_argument("--format", choices=("mps", "lp"), default="mps")
    p.add_argument("--delays", help="delay scenario for ntp / ntp2")
    p.add_argument("--scenarios", type=int, default=5, help="sampled scenarios for dntps")
    p.add_argument("--cap-mode", choices=("inequality", "equality"), default="inequality")
    _instance_flags(p)
    _delay_flags(p)
    _common_flags(p)
    p.set_defaults(func=cmd_build_model)

    p = sub.add_parser("train-onp", help="estimate an ONP threshold table")
    p.add_argument("--scenarios", type=int, default=100)
    p.add_argument("--aggregator", default="mean", help="mean, p95, percentile:90, ...")
    p.add_argument("--time-limit", type=float, default=240.0, help="seconds per offline solve")
    p.add_argument("--canonical", choices=("earliest", "latest"), default="latest")
    p.add_argument("--plot-out", help="write plot data (epoch, cumulative) here")
    _instance_flags(p)
    _delay_flags(p)
    _common_flags(p, jobs=True)
    p.set_defaults(func=cmd_train_onp)

    p = sub.add_parser("tune-naw", help="grid-search NAW parameters on validation scenarios")
    p.add_argument("--scenarios", type=int, default=50)
    p.add_argument("--accounting", choices=("realized", "potential"), default="realized")
    _instance_flags(p)
    _delay_flags(p)
    _common_flags(p, prefs=True, jobs=True)
    p.set_defaults(func=cmd_tune_naw)

    p = sub.add_parser("simulate", help="score one policy on sampled test scenarios")
    p.add_argument("--policy", required=True, help="na | never | naw:ETA,W | onp:TABLE.csv | replay:S1,S2,...")
    p.add_argument("--scenarios", type=int, default=50)
    p.add_argument("--accounting", choices=("realized", "potential"), default="realized")
    _instance_flags(p)
    _delay_flags(p)
    _common_flags(p, prefs=True, jobs=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("experiment", help="train, tune and test all policies")
    p.add_argument("--config", help="INI experiment plan; overrides the flags below")
    p.add_argument("--train", type=int, default=100)
    p.add_argument("--validation", type=int, default=50)
    p.add_argument("--test", type=int, default=50)
    p.add_argument("--time-limit", type=float, default=240.0)
    _instance_flags(p)
    _delay_flags(p)
    _common_flags(p, prefs=True, jobs=True)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("reduce", help="Subset-Sum reduction with verification")
    p.add_argument("--file", help="sizes on line 1, target on line 2")
    p.add_argument("--sizes", help="comma-separated sizes")
    p.add_argument("--target", type=int)
    p.add_argument("--time-limit", type=float, default=60.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("adversary", help="worst-case certificate for an online policy")
    p.add_argument("--policy", required=True, help="na | never | naw:ETA,W | onp:TABLE.csv")
    _instance_flags(p, employees=5, horizon=10)
    p.add_argument("--out")
    p.set_defaults(func=cmd_adversary)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.backend:
        os.environ["NOTIFY_TIMING_PURE"] = "1" if args.backend == "python" else "0"
        kernels.backend = kernels.get_backend(args.backend)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"notify-timing {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
