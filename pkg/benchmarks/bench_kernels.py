"""Time the compiled kernels against the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--repeat N] [--seed S]
"""
import argparse
import random
import timeit

from notify_timing import kernels


def _workloads(seed: int):
    rng = random.Random(seed)
    M, L, H = 40, 20, 60
    r = [-1 if rng.random() < 0.5 else rng.randint(1, 20) for _ in range(M)]
    prefs = [rng.sample(range(L), L) for _ in range(M)]
    s = sorted(rng.randint(0, H) for _ in range(M))
    ntp_r = [rng.randint(1, 8) for _ in range(14)]
    ntp2_r = [-1 if rng.random() < 0.5 else rng.randint(1, 12) for _ in range(12)]
    return {
        "potential_counts M=40": lambda k: k.potential_counts(s, r, H, 30, True),
        "simulate NA M=40": lambda k: k.simulate_core(r, prefs, H, 30, 5, L, kernels.POLICY_NA, [0], [0.0], None),
        "simulate NAW M=40": lambda k: k.simulate_core(r, prefs, H, 30, 5, L, kernels.POLICY_NAW, [2, 3], [0.0],
                                                       None),
        "search NTP M=14": lambda k: k.search(ntp_r, 30, 14, 30, 14, 0.0, kernels.MODE_NTP, 0.0),
        "search NTP2 M=12": lambda k: k.search(ntp2_r, 30, 6, 15, 5, 200.0, kernels.MODE_NTP2, 0.0, True),
    }


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)
    names = kernels.available_backends()
    if "cython" not in names:
        print("compiled kernels not built; only the Python fallback is available")
    mods = {n: kernels.get_backend(n) for n in names}
    print(f"{'workload':<24}" + "".join(f"{n + ' (ms)':>16}" for n in names) + f"{'speedup':>10}")
    for label, fn in _workloads(args.seed).items():
        results = [fn(m) for m in mods.values()]
        if any(a[:2] != results[0][:2] for a in results[1:]):
            raise SystemExit(f"{label}: backends disagree")
        times = {}
        for n, m in mods.items():
            number = max(1, int(0.2 / max(1e-6, timeit.timeit(lambda: fn(m), number=1))))
            best = min(timeit.repeat(lambda: fn(m), number=number, repeat=args.repeat)) / number
            times[n] = best * 1e3
        speed = times["python"] / times["cython"] if "cython" in times else float("nan")
        print(f"{label:<24}" + "".join(f"{times[n]:>16.3f}" for n in names) + f"{speed:>9.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
