"""Compare the numba and numpy kernels on a few representative windows.

    python3 benchmarks/bench_kernels.py [--size 256] [--repeat 3] [--threads 1]

Each workload runs once to warm up (this is where numba compiles, or loads
its on-disk cache), then ``--repeat`` times; the best wall time is reported.
Outputs of the two backends are compared and must be identical.
"""
import argparse
import time

import numpy as np

from semidyn import _kernels
from semidyn.dynamics import GridSpec, WordBudget, escaping_mask
from semidyn.expr import parse
from semidyn.words import Alphabet

WORKLOADS = {
    # escapes within a step or two nearly everywhere
    "exp L3": (["exp(z)"], 1 + 0j, 6.0, 3),
    # mostly bounded, so every orbit runs the full N steps
    "sin/cos L3": (["sin(z)", "cos(z)"], 0j, 8.0, 3),
    "zexp L3": (["z*exp(-(z^2/2 + 3*z/2 - 1))"], 0j, 8.0, 3),
}


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=256)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args(argv)

    if not _kernels.HAVE_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")

    rows = []
    for name, (formulas, center, width, L) in WORKLOADS.items():
        gens = [parse(f) for f in formulas]
        grid = GridSpec(center, width, width, args.size, args.size)
        ab = Alphabet(tuple("fg"[:len(gens)]))
        res = {}
        for backend in ("numba", "numpy"):
            t, r = best_of(lambda: escaping_mask(gens, grid, WordBudget(L), alphabet=ab,
                                                 threads=args.threads, backend=backend),
                           args.repeat)
            res[backend] = (t, r.cube)
        same = np.array_equal(res["numba"][1], res["numpy"][1])
        rows.append((f"escape {name}", res["numba"][0], res["numpy"][0], same))

    rng = np.random.default_rng(0)
    mask = rng.random((args.size * 2, args.size * 2)) < 0.55
    res = {b: best_of(lambda: _kernels.label4(mask, backend=b), args.repeat)
           for b in ("numba", "numpy")}
    rows.append(("label4 random", res["numba"][0], res["numpy"][0],
                 np.array_equal(res["numba"][1][0], res["numpy"][1][0])))

    print(f"{args.size}x{args.size} grid, threads={args.threads}, best of {args.repeat}")
    print(f"{'workload':<22}{'numba s':>10}{'numpy s':>10}{'speedup':>9}  same")
    for name, tn, tp, same in rows:
        print(f"{name:<22}{tn:>10.4f}{tp:>10.4f}{tp / tn:>8.2f}x  {same}")
    if not all(r[3] for r in rows):
        raise SystemExit("backends disagree")


if __name__ == "__main__":
    main()
