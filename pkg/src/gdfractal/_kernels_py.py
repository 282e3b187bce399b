"""Pure-Python float kernels; the compiled module mirrors these signatures."""
from __future__ import annotations

import bisect

import numpy as np


def level_intervals(ratio, trans, dst, out_ptr, out_idx, hull_lo, hull_len, u, m):
    """Float64 images of the hulls under every length-m path from vertex index ``u``.

    The graph comes in CSR form: the out-edges of vertex ``v`` are
    ``out_idx[out_ptr[v]:out_ptr[v + 1]]``.  Returns an (n, 2) array sorted
    by left endpoint.
    """
    ratio = [float(x) for x in ratio]
    trans = [float(x) for x in trans]
    dst = [int(x) for x in dst]
    out_ptr = [int(x) for x in out_ptr]
    out_idx = [int(x) for x in out_idx]
    rows = []
    # stack of (vertex, composed ratio, composed translation, depth)
    stack = [(int(u), 1.0, 0.0, 0)]
    while stack:
        v, r, t, d = stack.pop()
        if d == m:
            a = r * hull_lo[v] + t
            b = r * (hull_lo[v] + hull_len[v]) + t
            rows.append((a, b) if a <= b else (b, a))
            continue
        for k in range(out_ptr[v + 1] - 1, out_ptr[v] - 1, -1):
            e = out_idx[k]
            stack.append((dst[e], r * ratio[e], r * trans[e] + t, d + 1))
    rows.sort()
    return np.array(rows, dtype=np.float64).reshape(-1, 2)


def _merge(a):
    out = []
    for lo, hi in a:
        if out and lo <= out[-1][1]:
            if hi > out[-1][1]:
                out[-1][1] = hi
        else:
            out.append([lo, hi])
    return out


def _dist(x, b, lefts):
    i = bisect.bisect_right(lefts, x) - 1
    best = float("inf")
    if i >= 0:
        if x <= b[i][1]:
            return 0.0
        best = x - b[i][1]
    if i + 1 < len(b):
        best = min(best, b[i + 1][0] - x)
    return best


def _one_sided(a, b):
    """sup of dist(x, b) over x in a: a-endpoints plus b-gap midpoints lying in a."""
    la = [lo for lo, _ in a]
    lb = [lo for lo, _ in b]
    worst = 0.0
    for lo, hi in a:
        worst = max(worst, _dist(lo, b, lb), _dist(hi, b, lb))
    for (_, g0), (g1, _) in zip(b, b[1:]):
        mid = 0.5 * (g0 + g1)
        if _dist(mid, a, la) == 0.0:
            worst = max(worst, _dist(mid, b, lb))
    return worst


def hausdorff_f64(a, b):
    """Hausdorff distance between two float unions of closed intervals."""
    a = _merge(sorted((float(x), float(y)) for x, y in a))
    b = _merge(sorted((float(x), float(y)) for x, y in b))
    if not a or not b:
        raise ValueError("both interval sets must be nonempty")
    return max(_one_sided(a, b), _one_sided(b, a))
