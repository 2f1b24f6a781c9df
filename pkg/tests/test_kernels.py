import os
import random
import subprocess
import sys

import pytest

from notify_timing import kernels
from notify_timing import _pykernels as py

cy = pytest.importorskip("notify_timing._ckernels")


def _r(rng, M, H, p_nr=0.25):
    return [-1 if rng.random() < p_nr else rng.randint(1, H) for _ in range(M)]


def test_backend_selection():
    assert kernels.available_backends() == ["cython", "python"]
    assert kernels.get_backend("python") is py and kernels.get_backend("cython") is cy
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")
    code = "from notify_timing import kernels; print(kernels.BACKEND_NAME)"
    env = {**os.environ, "NOTIFY_TIMING_PURE": "1"}
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == py.NAME
    env["NOTIFY_TIMING_PURE"] = "0"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == cy.NAME


def test_potential_counts_parity():
    rng = random.Random(71)
    for _ in range(500):
        M = rng.randint(1, 10)
        H = rng.randint(1, 12)
        s = sorted(rng.randint(0, H) for _ in range(M))
        s = [x if rng.random() > 0.1 else -1 for x in s]
        r = _r(rng, M, H)
        args = (s, r, H, rng.randint(1, H), rng.random() < 0.5, rng.random() < 0.5)
        assert tuple(cy.potential_counts(*args)[1]) == tuple(py.potential_counts(*args)[1])
        assert cy.potential_counts(*args)[0] == py.potential_counts(*args)[0]


def test_resolve_chain_parity():
    rng = random.Random(72)
    for _ in range(300):
        M = rng.randint(1, 8)
        L = rng.randint(1, M)
        prefs = [rng.sample(range(L), L) for _ in range(M)]
        order = rng.sample(range(M), M)
        states = []
        for mod in (py, cy):
            occ, held, cursor = [-1] * L, [-1] * M, [0] * M
            log = []
            for i in order:
                log.append(mod.resolve_chain(occ, held, cursor, prefs, i, True))
            states.append((occ, held, cursor, [list(x) if isinstance(x, (list, tuple)) else x for x in log]))
        assert states[0] == states[1]


@pytest.mark.parametrize("kind", ["na", "naw", "onp", "replay"])
def test_simulate_core_parity(kind):
    rng = random.Random(f"sim-{kind}")
    for _ in range(200):
        M = rng.randint(1, 9)
        L = rng.randint(1, M)
        H = rng.randint(1, 14)
        r = _r(rng, M, H)
        prefs = [rng.sample(range(L), L) for _ in range(M)]
        if kind == "na":
            code, pi, pf = kernels.POLICY_NA, [0], [0.0]
        elif kind == "naw":
            code, pi, pf = kernels.POLICY_NAW, [rng.randint(1, 3), rng.randint(1, 4)], [0.0]
        elif kind == "onp":
            code, pi, pf = kernels.POLICY_ONP, [0], sorted(rng.uniform(0, M) for _ in range(H + 1))
        else:
            counts = [0] * (H + 1)
            for _k in range(M):
                counts[rng.randint(0, H)] += 1
            code, pi, pf = kernels.POLICY_REPLAY, counts, [0.0]
        args = (r, prefs, H, rng.randint(1, H), rng.randint(1, M), L, code, pi, pf, None)
        a = py.simulate_core(*args)
        b = cy.simulate_core(*args)
        assert [list(x) if not isinstance(x, int) else x for x in a] == \
            [list(x) if not isinstance(x, int) else x for x in b]


def test_search_parity():
    rng = random.Random(73)
    for _ in range(300):
        M = rng.randint(1, 7)
        H = rng.randint(1, 10)
        W = rng.randint(1, M)
        if rng.random() < 0.5:
            r = [rng.randint(1, H) for _ in range(M)]
            args = (r, H, M, H, M, 0.0, kernels.MODE_NTP, 0.0)
        else:
            r = _r(rng, M, H)
            args = (r, H, rng.randint(1, M), rng.randint(1, H), W, rng.choice([0.5, 3.0, 40.0]),
                    kernels.MODE_NTP2, 0.0, rng.random() < 0.5)
        a = py.search(*args)
        b = cy.search(*args)
        assert a[0] == b[0] and a[1] == b[1]
        assert (None if a[2] is None else list(a[2])) == (None if b[2] is None else list(b[2]))
