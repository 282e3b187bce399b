"""Compare the compiled and pure-Python float kernels.

    python3 benchmarks/bench_kernels.py [--depth 12] [--repeat 3]
"""
from __future__ import annotations

import argparse
import time
from importlib import resources

import numpy as np

from gdfractal import _kernels_py
from gdfractal.kernels import graph_arrays
from gdfractal.spec_io import parse_spec

try:
    from gdfractal import _kernels as compiled
except ImportError:  # extension not built
    compiled = None


def _best(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--depth", type=int, default=12)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    fixtures = resources.files("gdfractal") / "fixtures"
    print(f"{'fixture':<18}{'kernel':<16}{'n':>9}{'python s':>12}{'compiled s':>12}{'speedup':>9}")
    for name, vertex in (("cantor.json", "1"), ("example47.json", "1"), ("example43.json", "3")):
        f = parse_spec((fixtures / name).read_bytes()).build()
        arr = graph_arrays(f)
        call = lambda impl: impl.level_intervals(*arr[:7], arr[7][vertex], args.depth)  # noqa: E731
        tp, ref = _best(lambda: call(_kernels_py), args.repeat)
        row = f"{name:<18}{'level_intervals':<16}{len(ref):>9}{tp:>12.4f}"
        if compiled is not None:
            tc, got = _best(lambda: call(compiled), args.repeat)
            assert np.allclose(ref, got, rtol=0, atol=1e-12)
            row += f"{tc:>12.4f}{tp / tc:>9.1f}"
        print(row)
        a, b = ref, call(_kernels_py) if args.depth < 2 else _kernels_py.level_intervals(*arr[:7], arr[7][vertex], args.depth - 2)
        tp, dp = _best(lambda: _kernels_py.hausdorff_f64(a, b), args.repeat)
        row = f"{'':<18}{'hausdorff_f64':<16}{len(a):>9}{tp:>12.4f}"
        if compiled is not None:
            tc, dc = _best(lambda: compiled.hausdorff_f64(a, b), args.repeat)
            assert abs(dp - dc) < 1e-12
            row += f"{tc:>12.4f}{tp / tc:>9.1f}"
        print(row)


if __name__ == "__main__":
    main()
