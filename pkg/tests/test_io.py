import csv
import json

import pytest

from notify_timing import Instance
from notify_timing.io import (
    REPORT_COLUMNS,
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
from notify_timing.policies import ThresholdTable
from notify_timing.sim import ExponentialDelays, run_experiment


def test_seconds_round_half_up(tmp_path):
    f = tmp_path / "d.csv"
    f.write_text("30\n90\n")
    dist = ingest_delays(f, "seconds", 0.5)
    assert dist.samples == (1, 2) and dist.p_nr == 0.5 and dist.count == 2


def test_single_value_and_header(tmp_path):
    f = tmp_path / "d.csv"
    f.write_text("delay_minutes\n7\n\n")
    dist = ingest_delays(f)
    assert dist.samples == (7,) and [dist.quantile(u) for u in (0, 0.3, 0.999)] == [7, 7, 7]


def test_tiny_delays_become_one_epoch(tmp_path):
    f = tmp_path / "d.csv"
    f.write_text("0\n0.2\n2.5,extra\n")
    assert ingest_delays(f).samples == (1, 1, 3)


def test_quantile_nearest_rank(tmp_path):
    f = tmp_path / "d.csv"
    f.write_text("\n".join(str(x) for x in (5, 1, 3, 2, 4)) + "\n")
    dist = ingest_delays(f)
    assert dist.samples == (1, 2, 3, 4, 5)
    assert [dist.quantile(u) for u in (0.0, 0.2, 0.21, 0.5, 0.99)] == [1, 1, 2, 3, 5]


def test_bad_rows_report_line_numbers(tmp_path):
    f = tmp_path / "d.csv"
    f.write_text("delay\n3\nabc\n-2\n4\nnan\n")
    with pytest.raises(ValueError, match=r"\[3, 4, 6\]"):
        ingest_delays(f)


def test_empty_file_rejected(tmp_path):
    f = tmp_path / "d.csv"
    f.write_text("")
    with pytest.raises(ValueError):
        ingest_delays(f)
    f.write_text("header only\n")
    with pytest.raises(ValueError):
        ingest_delays(f)
    with pytest.raises(ValueError):
        ingest_delays(f, unit="hours")


CONFIG = """
[instance]
employees = 6
shifts = 3
horizon = 12
cutoff = 8
cap = 3
penalty = 100

[delays]
source = empirical
path = delays.csv
unit = minutes
p_nr = 0.4

[preferences]
kind = perturbed
seed = 4
window = 2

[experiment]
seed = 9
train = 4
validation = 3
test = 5
time_limit = 5
naw_eta = 1,2
naw_wait = 2,3

[policy.baseline]
kind = na

[policy.waiting]
kind = naw

[policy.fixed]
kind = naw
eta = 2
wait = 5

[policy.learned]
kind = onp
aggregator = p95
"""


def test_load_config(tmp_path):
    (tmp_path / "delays.csv").write_text("1\n2\n5\n9\n")
    cfg = tmp_path / "plan.ini"
    cfg.write_text(CONFIG)
    plan = load_config(cfg)
    assert plan.inst == Instance(6, 3, 12, 8, 3, 100.0)
    assert plan.delay_source.samples == (1, 2, 5, 9) and plan.delay_source.p_nr == 0.4
    assert plan.prefs_spec.kind == "perturbed" and plan.prefs_spec.window == 2
    assert plan.policies == ("na", "naw", "naw:2,5", "onp:p95")
    assert (plan.train_size, plan.val_size, plan.test_size, plan.seed) == (4, 3, 5, 9)
    assert plan.naw_grid == ((1, 2), (1, 3), (2, 2), (2, 3))


def test_load_config_defaults_and_errors(tmp_path):
    cfg = tmp_path / "plan.ini"
    cfg.write_text("[instance]\nemployees = 4\nhorizon = 9\n")
    plan = load_config(cfg)
    assert plan.inst == Instance(4, 4, 9, 9, 4, 200.0)
    assert isinstance(plan.delay_source, ExponentialDelays)
    assert plan.policies == ("na", "naw", "onp:mean", "onp:p95")
    cfg.write_text("[policy.x]\nkind = magic\n")
    with pytest.raises(ValueError):
        load_config(cfg)
    cfg.write_text("[delays]\nsource = normal\n")
    with pytest.raises(ValueError):
        load_config(cfg)


def test_config_hash_is_canonical():
    a = {"b": 1, "a": [1, 2]}
    b = {"a": [1, 2], "b": 1}
    assert config_hash(a) == config_hash(b) and len(config_hash(a)) == 16
    assert config_hash(a) != config_hash({"a": [2, 1], "b": 1})


def test_artifact_version_is_stable():
    from notify_timing import __version__

    v = artifact_version()
    assert v.startswith(__version__ + "+src.") and v == artifact_version()


def test_report_writers_are_reproducible(tmp_path):
    (tmp_path / "delays.csv").write_text("1\n2\n5\n9\n")
    cfg = tmp_path / "plan.ini"
    cfg.write_text(CONFIG.replace("[policy.learned]\nkind = onp\naggregator = p95\n", ""))
    plan = load_config(cfg)
    outputs = []
    for run in range(2):
        report = run_experiment(plan)
        payload = plan_to_dict(plan)
        meta = {"config_hash": config_hash(payload), "seeds": report.seeds, "version": artifact_version()}
        p = write_report_csv(report, tmp_path / f"r{run}.csv", meta)
        j = write_report_json({**meta, "rows": [r.as_dict() for r in report.rows]}, tmp_path / f"r{run}.json")
        outputs.append((p.read_text(), j.read_text()))
    assert outputs[0] == outputs[1]
    text = outputs[0][0]
    lines = text.splitlines()
    assert lines[0].startswith("# config_hash=") and lines[1].startswith("# seeds=")
    rows = list(csv.DictReader(ln for ln in lines if not ln.startswith("#")))
    assert tuple(rows[0]) == REPORT_COLUMNS and [r["policy"] for r in rows] == ["na", "naw", "naw:2,5"]
    data = json.loads(outputs[0][1])
    assert data["seeds"]["test"] == [9, 3]


def test_plot_data():
    t = ThresholdTable((0.0, 1.5, 3.0), "mean")
    curves = table_curves({"mean": t, "broken": None})
    assert list(curves) == ["onp_mean"]
    text = plot_data_csv({**curves, "na": [2, 2]}, {"seeds": [0, 1]})
    assert text.splitlines() == ["# seeds=[0, 1]", "epoch,onp_mean,na", "0,0.0,2", "1,1.5,2", "2,3.0,2"]


def test_readme_config_parses(tmp_path):
    from pathlib import Path

    readme = (Path(__file__).resolve().parent.parent / "README.md").read_text()
    block = readme.split("```ini\n", 1)[1].split("```", 1)[0]
    (tmp_path / "delays.csv").write_text("seconds\n30\n90\n600\n")
    cfg = tmp_path / "plan.ini"
    cfg.write_text(block)
    plan = load_config(cfg)
    assert plan.inst == Instance(12, 6, 30, 10, 5, 200.0)
    assert plan.delay_source.samples == (1, 2, 10)
    assert plan.policies == ("na", "naw", "onp:p95")
    assert plan.accounting == "realized" and len(plan.naw_grid) == 50
