"""Float kernels: the compiled extension when built, else the pure-Python version.

Set ``GDFRACTAL_PURE=1`` to force the fallback.
"""
from __future__ import annotations

import os

import numpy as np

if os.environ.get("GDFRACTAL_PURE") == "1":
    from . import _kernels_py as _impl
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
        BACKEND = "compiled"
    except ImportError:
        from . import _kernels_py as _impl
        BACKEND = "python"

hausdorff_f64 = _impl.hausdorff_f64


def graph_arrays(f):
    """CSR float64 description of a GD-IFS for :func:`level_intervals`."""
    from .exactnum import eval_numeric

    g = f.graph
    index = {v: i for i, v in enumerate(g.vertices)}
    ratio = np.array([r.sign * float(eval_numeric(r.magnitude, 64).mid) for r in f.ratios], dtype=np.float64)
    trans = np.array([float(_mid(t)) for t in f.translations], dtype=np.float64)
    dst = np.array([index[e.dst] for e in g.edges], dtype=np.int64)
    out_ptr = np.zeros(len(g.vertices) + 1, dtype=np.int64)
    out_idx = []
    for i, v in enumerate(g.vertices):
        out_idx.extend(g.out_lists[v])
        out_ptr[i + 1] = len(out_idx)
    hull_lo = np.array([float(_mid(f.base[v])) for v in g.vertices], dtype=np.float64)
    hull_len = np.array([float(_mid(f.lengths[v])) for v in g.vertices], dtype=np.float64)
    return ratio, trans, dst, out_ptr, np.array(out_idx, dtype=np.int64), hull_lo, hull_len, index


def _mid(x):
    from .exactnum import Enclosure, eval_numeric

    if isinstance(x, Enclosure):
        return x.mid
    return eval_numeric(x, 64).mid


def level_intervals(f, u: str, m: int, arrays=None) -> np.ndarray:
    """Float64 level-m intervals of F_u, sorted by left endpoint."""
    ratio, trans, dst, out_ptr, out_idx, lo, ln, index = arrays or graph_arrays(f)
    return _impl.level_intervals(ratio, trans, dst, out_ptr, out_idx, lo, ln, index[u], m)
