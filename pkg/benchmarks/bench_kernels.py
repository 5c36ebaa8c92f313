"""Compare the compiled and numpy kernels on the workloads the scheme runs.

    python benchmarks/bench_kernels.py [--repeat 5] [--json out.json]
"""

from __future__ import annotations

import argparse
import json
import time

import numpy as np

from mdspir import _backend, bench, linalg
from mdspir.field import GF


def _time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def kernel_cases(rng: np.random.Generator):
    gf2, gf4, gf16 = GF(2), GF(4), GF(16)
    A2 = gf2.random((200, 200), rng)
    A16 = gf16.random((120, 120), rng)
    B4 = gf4.random((120, 90), rng)
    C4 = gf4.random((90, 150), rng)
    stack2 = gf2.random((20000, 9, 9), rng)
    stack4 = gf4.random((2000, 9, 9), rng)
    yield "rref GF(2) 200x200", lambda k: linalg.rref(gf2, A2, kernels=k)
    yield "rref GF(16) 120x120", lambda k: linalg.rref(gf16, A16, kernels=k)
    yield "matmul GF(4) 120x90x150", lambda k: linalg.matmul(gf4, B4, C4, kernels=k)
    yield "batch rank GF(2) 20000x9x9", lambda k: linalg.batch_rank(gf2, stack2, kernels=k)
    yield "batch rank GF(4) 2000x9x9", lambda k: linalg.batch_rank(gf4, stack4, kernels=k)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", default=None)
    args = ap.parse_args(argv)

    names = _backend.available()
    rows = []
    for label, fn in kernel_cases(np.random.default_rng(0)):
        times = {n: _time(lambda: fn(_backend.load(n)), args.repeat) for n in names}
        rows.append({"case": label, **times})
    print(f"{'kernel':<30}" + "".join(f"{n:>12}" for n in names) + ("   speedup" if len(names) > 1 else ""))
    for r in rows:
        line = f"{r['case']:<30}" + "".join(f"{r[n] * 1e3:10.2f}ms" for n in names)
        if len(names) > 1:
            line += f"   {r['python'] / r['cython']:7.1f}x"
        print(line)

    print()
    end_to_end = [bench.run_bench(5, 3, 4, 2, repeat=args.repeat, backend=n) for n in names]
    for rep in end_to_end:
        print(rep.format(), end="")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"kernels": rows, "end_to_end": [r.to_dict() for r in end_to_end]}, fh, indent=1)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
