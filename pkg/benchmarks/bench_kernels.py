"""Compare the compiled and pure-Python kernels.

Kernel calls are recorded from a real workload (Kronecker theta functions and
their products), then replayed against each backend.  The end-to-end rows run
the whole workload with the kernels swapped in place.

    python benchmarks/bench_kernels.py [--repeat 5] [--order 12]
"""

import argparse
import copy
import time

from artifact import kernels
from artifact import seed_data as sd
from artifact.broken_lines import theta_function
from artifact.lattice_core import PerturbedPoint
from artifact.verify_harness import box_points

NAMES = ("mul_terms", "upow", "shift_accumulate", "first_crossing")


def workload(order):
    sd._completed.cache_clear()
    d = sd.seed_diagram(sd.kronecker_seed(), order)
    p = PerturbedPoint((1, 1), (1, 7), (3, 1))
    thetas = [theta_function(d, u, p).series for u in box_points(2)]
    for a in thetas[:6]:
        for b in thetas[:6]:
            a * b


def use(module):
    for name in NAMES:
        setattr(kernels, name, getattr(module, name))


def record(order):
    calls = {name: [] for name in NAMES}
    real = {name: getattr(kernels, name) for name in NAMES}

    def wrap(name):
        def f(*args):
            calls[name].append(copy.deepcopy(args))
            return real[name](*args)
        return f

    for name in NAMES:
        setattr(kernels, name, wrap(name))
    try:
        workload(order)
    finally:
        for name in NAMES:
            setattr(kernels, name, real[name])
    return calls


def replay(fn, calls, repeat):
    best = None
    for _ in range(repeat):
        # shift_accumulate writes into its first argument
        args = copy.deepcopy(calls)
        t0 = time.perf_counter()
        for a in args:
            fn(*a)
        dt = time.perf_counter() - t0
        best = dt if best is None else min(best, dt)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--order", type=int, default=12)
    args = ap.parse_args(argv)

    backends = kernels.backends()
    if "cython" not in backends:
        print("compiled kernels are not built; only the Python backend is timed")
    calls = record(args.order)
    print(f"{'kernel':<18}{'calls':>8}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for name in NAMES:
        times = {b: replay(getattr(m, name), calls[name], args.repeat) for b, m in backends.items()}
        row = f"{name:<18}{len(calls[name]):>8}" + "".join(f"{t:>11.4f}s" for t in times.values())
        if "cython" in times and times["cython"] > 0:
            row += f"{times['python'] / times['cython']:>9.2f}x"
        print(row)

    original = {name: getattr(kernels, name) for name in NAMES}
    try:
        times = {}
        for b, m in backends.items():
            use(m)
            best = None
            for _ in range(max(1, args.repeat // 2)):
                t0 = time.perf_counter()
                workload(args.order)
                dt = time.perf_counter() - t0
                best = dt if best is None else min(best, dt)
            times[b] = best
    finally:
        for name in NAMES:
            setattr(kernels, name, original[name])
    row = f"{'end-to-end':<18}{'':>8}" + "".join(f"{t:>11.4f}s" for t in times.values())
    if "cython" in times:
        row += f"{times['python'] / times['cython']:>9.2f}x"
    print(row)


if __name__ == "__main__":
    main()
