"""Compare the compiled and pure-Python kernel backends.

Usage: python benchmarks/bench_kernels.py [--repeat N]

Each kernel runs on identical seeded inputs under both backends; the table
reports the best-of-N wall time and the speedup of the compiled version. The
last table times whole verification suites in fresh interpreters, with the
fallback forced through CONVEXCERT_PURE_PYTHON.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from convexcert.kernels import backends


def fw_case(rng, m, d):
    V = rng.normal(size=(m, d))
    x = rng.normal(size=d) * 2
    return V @ V.T, V @ x, np.full(m, 1.0 / m)


def cases():
    rng = np.random.default_rng(0)
    out = []
    for m, d in ((8, 2), (32, 4), (128, 6)):
        G, c, lam = fw_case(rng, m, d)
        out.append((f"away_step_fw m={m} d={d}", "away_step_fw", (G, c, lam, 1e-10, 20000)))
    for n, steps in ((3, 4096), (6, 4096), (20, 1024)):
        A = rng.normal(size=(n, n))
        A /= 1.1 * np.abs(np.linalg.eigvals(A)).max()
        out.append((f"cesaro_run n={n} steps={steps}", "cesaro_run", (A, rng.normal(size=n), rng.normal(size=n), steps)))
    return out


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    mods = backends()
    names = sorted(mods)
    print(f"backends: {', '.join(names)}")
    header = f"{'kernel':34s}" + "".join(f"{n + ' (ms)':>16s}" for n in names)
    if len(names) > 1:
        header += f"{'speedup':>10s}"
    print(header)
    for label, fn, argv in cases():
        times = {}
        for n in names:
            f = getattr(mods[n], fn)
            number = 3
            times[n] = min(timeit.repeat(lambda: f(*argv), number=number, repeat=args.repeat)) / number * 1e3
        row = f"{label:34s}" + "".join(f"{times[n]:16.3f}" for n in names)
        if len(names) > 1:
            row += f"{times['python'] / times['cython']:9.1f}x"
        print(row)
    if "cython" in mods:
        end_to_end()


SUITE_SNIPPET = (
    "import time; from convexcert.suites import run_suite; t = time.perf_counter(); "
    "run_suite({name!r}, 0, {{'tol': 1e-9, 'resolution': 1 / 16}}, {trials}); print(time.perf_counter() - t)"
)


def end_to_end():
    print()
    print(f"{'suite (fresh process)':34s}{'cython (s)':>16s}{'python (s)':>16s}{'speedup':>10s}")
    for name, trials in (("point-separation", 50), ("stampacchia", 30), ("markov-kakutani", 30)):
        times = {}
        for backend, flag in (("cython", "0"), ("python", "1")):
            env = {**os.environ, "CONVEXCERT_PURE_PYTHON": flag}
            out = subprocess.run([sys.executable, "-c", SUITE_SNIPPET.format(name=name, trials=trials)],
                                 env=env, capture_output=True, text=True, check=True)
            times[backend] = float(out.stdout.strip())
        print(f"{name + f' x{trials}':34s}{times['cython']:16.3f}{times['python']:16.3f}"
              f"{times['python'] / times['cython']:9.1f}x")


if __name__ == "__main__":
    main()
