"""Compare the compiled and pure-Python bitmask kernels.

Run with ``python benchmarks/bench_kernels.py [--repeat N]``.  The workload
is the trace-set comparisons made by the impossible-futures checker over
the exhaustive depth-2 enumeration, plus random refusal-subset searches.
"""

import argparse
import random
import time

from bccs import _pykernels, kernels
from bccs.generate import enumerate_closed
from bccs.semantics import residual_map, traces


def dominance_workload():
    terms = enumerate_closed("ab", 2)
    rows = []
    for p in terms:
        rp = residual_map(p, False)
        for q in terms:
            rq = residual_map(q, False)
            for tr, ps in rp.items():
                qs = rq.get(tr)
                if qs:
                    sets = [traces(r) for r in ps] + [traces(r) for r in qs]
                    masks, _ = kernels.masks_for(sets)
                    rows.append((masks[:len(ps)], masks[len(ps):]))
    return rows


def subset_workload(n: int = 400, seed: int = 0):
    rng = random.Random(seed)
    rows = []
    for _ in range(n):
        nbits = rng.randint(6, 12)
        ps = [rng.getrandbits(nbits) for _ in range(rng.randint(1, 4))]
        qs = [rng.getrandbits(nbits) | 1 for _ in range(rng.randint(1, 4))]
        rows.append((ps, qs, nbits))
    return rows


def timed(fn, rows, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        for r in rows:
            fn(*r)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    dom, sub = dominance_workload(), subset_workload()
    print(f"compiled backend available: {kernels.BACKEND == 'cython'}")
    for label, rows, py, fast in (
        ("dominated", dom, _pykernels.dominated, kernels.dominated),
        ("refuting_subset", sub, _pykernels.refuting_subset, kernels.refuting_subset),
    ):
        for r in rows:
            assert py(*r) == fast(*r)
        t_py = timed(py, rows, args.repeat)
        t_fast = timed(fast, rows, args.repeat)
        print(f"{label:16s} calls={len(rows):6d}  python={t_py * 1e3:8.2f} ms  "
              f"{kernels.BACKEND}={t_fast * 1e3:8.2f} ms  speedup={t_py / t_fast:5.1f}x")


if __name__ == "__main__":
    main()
