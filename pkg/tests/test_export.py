import random

import pytest

from notify_timing import NON_RESPONDER, DelayScenario, Instance
from notify_timing.milp import (
    MilpModel,
    build_dntps,
    build_ntp,
    build_ntp2,
    export_model,
    solve_dntps,
    solve_exact,
    solve_with_backend,
    write_model,
)
from notify_timing.milp.model import CONTINUOUS, INTEGER

highspy = pytest.importorskip("highspy")
from notify_timing.milp import HighsBackend  # noqa: E402

SIX = DelayScenario((4, 1, 5, 3, 2, 5))


def _highs_rows(text, suffix, tmp_path):
    path = tmp_path / f"m.{suffix}"
    path.write_text(text)
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    assert h.readModel(str(path)) == highspy.HighsStatus.kOk
    lp = h.getLp()
    return lp.num_row_, lp.num_col_


def test_empty_constraint_model(tmp_path):
    m = MilpModel("empty")
    m.add_var("x", CONTINUOUS, ub=4)
    m.set_objective({"x": 1})
    for fmt in ("mps", "lp"):
        text = export_model(m, fmt)
        assert _highs_rows(text, fmt, tmp_path) == (0, 1)
    res = HighsBackend().solve(m)
    assert res.objective == 0


def test_model_without_objective(tmp_path):
    m = MilpModel("noobj")
    m.add_var("x", INTEGER, ub=3)
    m.add_constr("c", {"x": 1}, ">=", 2)
    for fmt in ("mps", "lp"):
        assert _highs_rows(export_model(m, fmt), fmt, tmp_path) == (1, 1)


def test_two_employee_ntp2_row_count(tmp_path):
    m = build_ntp2(Instance(2, 2, 5, 5, 1, 10), DelayScenario((3, 1)))
    for fmt in ("mps", "lp"):
        rows, cols = _highs_rows(export_model(m, fmt), fmt, tmp_path)
        assert rows == m.num_constrs and cols == m.num_vars


def test_mps_markers_and_bounds():
    m = build_ntp(Instance(6, 6, 10, 10, 6), SIX)
    text = export_model(m, "mps")
    assert text.count("'INTORG'") == text.count("'INTEND'") >= 1
    assert " BV BND y_1_2" in text and " UP BND e_1 10" in text
    assert text.endswith("ENDATA\n")


def test_lp_sections():
    m = build_dntps(Instance(3, 2, 4, 4, 2, 5), [DelayScenario((1, 2, NON_RESPONDER))])
    text = export_model(m, "lp")
    for section in ("Minimize", "Subject To", "Bounds", "Generals", "Binaries", "End"):
        assert f"\n{section}\n" in f"\n{text}"
    assert max(len(line) for line in text.splitlines()) <= 255


def test_write_model_infers_format(tmp_path):
    m = build_ntp(Instance(6, 6, 10, 10, 6), SIX)
    path = write_model(m, tmp_path / "six.lp")
    assert path.read_text().startswith("\\ ")
    with pytest.raises(ValueError):
        export_model(m, "xml")


def test_six_external_optimum():
    for fmt in ("mps", "lp"):
        res = solve_with_backend(build_ntp(Instance(6, 6, 10, 10, 6), SIX), HighsBackend(fmt=fmt))
        assert res.status == "Optimal" and res.objective == 1


def test_ntp_cross_check():
    rng = random.Random(31)
    hb = HighsBackend()
    for _ in range(60):
        M = rng.randint(1, 5)
        H = rng.randint(1, 8)
        inst = Instance(M, M, H, H, M)
        r = DelayScenario(tuple(rng.randint(1, H) for _ in range(M)))
        a = solve_exact(inst, r)
        b = hb.solve(build_ntp(inst, r))
        if a.objective is None:
            assert b.status == "Infeasible"
        else:
            assert b.objective == pytest.approx(a.objective)


@pytest.mark.parametrize("strengthen", [True, False])
def test_ntp2_cross_check(strengthen):
    rng = random.Random(32)
    hb = HighsBackend()
    for _ in range(60):
        M = rng.randint(1, 6)
        H = rng.randint(2, 9)
        inst = Instance(M, rng.randint(1, M), H, rng.randint(1, H), rng.randint(1, M), rng.choice([0.5, 3, 50]))
        scen = DelayScenario(tuple(NON_RESPONDER if rng.random() < 0.3 else rng.randint(1, H) for _ in range(M)))
        a = solve_exact(inst, scen, "ntp2")
        b = hb.solve(build_ntp2(inst, scen, strengthen=strengthen))
        if a.objective is None:
            assert b.status == "Infeasible"
        else:
            assert b.objective == pytest.approx(a.objective)


def test_dntps_cross_check():
    rng = random.Random(33)
    hb = HighsBackend()
    for _ in range(25):
        M = rng.randint(1, 4)
        H = rng.randint(2, 5)
        inst = Instance(M, rng.randint(1, M), H, rng.randint(1, H), rng.randint(1, M), rng.choice([0.5, 3, 50]))
        omega = [DelayScenario(tuple(NON_RESPONDER if rng.random() < 0.3 else rng.randint(1, H) for _ in range(M)))
                 for _ in range(rng.randint(1, 3))]
        for mode in ("inequality", "equality"):
            a = solve_dntps(inst, omega, cap_mode=mode)
            b = hb.solve(build_dntps(inst, omega, cap_mode=mode))
            if a.objective is None:
                assert b.status == "Infeasible"
            else:
                assert b.objective == pytest.approx(a.objective)
