# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled float kernels; see _kernels_py for the reference semantics."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def level_intervals(double[::1] ratio, double[::1] trans, long[::1] dst, long[::1] out_ptr,
                    long[::1] out_idx, double[::1] hull_lo, double[::1] hull_len, long u, long m):
    cdef Py_ssize_t n = 1, cap, top = 0, k, e, v
    cdef long d
    cdef double r, t, a, b
    # count the leaves first so the output is allocated once
    cdef Py_ssize_t nv = hull_lo.shape[0]
    counts = np.zeros(nv, dtype=np.int64)
    cdef long long[::1] cnt = counts
    cnt[u] = 1
    for d in range(m):
        nxt = np.zeros(nv, dtype=np.int64)
        for v in range(nv):
            if cnt[v]:
                for k in range(out_ptr[v], out_ptr[v + 1]):
                    nxt[dst[out_idx[k]]] += cnt[v]
        counts = nxt
        cnt = counts
    n = int(counts.sum())
    out = np.empty((n, 2), dtype=np.float64)
    cdef double[:, ::1] o = out
    cap = 1 + m * (out_ptr[nv] + 1)
    sv_arr = np.empty(cap, dtype=np.int64)
    sr_arr = np.empty(cap, dtype=np.float64)
    st_arr = np.empty(cap, dtype=np.float64)
    sd_arr = np.empty(cap, dtype=np.int64)
    cdef long long[::1] sv = sv_arr
    cdef double[::1] sr = sr_arr
    cdef double[::1] st = st_arr
    cdef long long[::1] sd = sd_arr
    cdef Py_ssize_t filled = 0
    sv[0] = u
    sr[0] = 1.0
    st[0] = 0.0
    sd[0] = 0
    top = 1
    while top > 0:
        top -= 1
        v = sv[top]
        r = sr[top]
        t = st[top]
        d = sd[top]
        if d == m:
            a = r * hull_lo[v] + t
            b = r * (hull_lo[v] + hull_len[v]) + t
            if a <= b:
                o[filled, 0] = a
                o[filled, 1] = b
            else:
                o[filled, 0] = b
                o[filled, 1] = a
            filled += 1
            continue
        for k in range(out_ptr[v + 1] - 1, out_ptr[v] - 1, -1):
            e = out_idx[k]
            sv[top] = dst[e]
            sr[top] = r * ratio[e]
            st[top] = r * trans[e] + t
            sd[top] = d + 1
            top += 1
    order = np.lexsort((out[:, 1], out[:, 0]))
    return out[order]


cdef object _merge(double[:, ::1] a):
    """Fuse overlapping or touching neighbours of a sorted interval array."""
    out = np.empty((a.shape[0], 2), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, n = 0
    for i in range(a.shape[0]):
        if n and a[i, 0] <= o[n - 1, 1]:
            if a[i, 1] > o[n - 1, 1]:
                o[n - 1, 1] = a[i, 1]
        else:
            o[n, 0] = a[i, 0]
            o[n, 1] = a[i, 1]
            n += 1
    return out[:n]


cdef double _one_sided(double[:, ::1] a, double[:, ::1] b):
    """sup of dist(x, b) over x in a: a-endpoints plus b-gap midpoints lying in a."""
    cdef double worst = 0.0, mid
    cdef Py_ssize_t i, k
    for i in range(a.shape[0]):
        worst = max(worst, _dist(a[i, 0], b))
        worst = max(worst, _dist(a[i, 1], b))
    for k in range(b.shape[0] - 1):
        mid = 0.5 * (b[k, 1] + b[k + 1, 0])
        if _dist(mid, a) == 0.0:
            worst = max(worst, _dist(mid, b))
    return worst


cdef double _dist(double x, double[:, ::1] b):
    # binary search for the last interval starting at or before x
    cdef Py_ssize_t lo = 0, hi = b.shape[0], mid
    cdef double best = 1e308
    while lo < hi:
        mid = (lo + hi) // 2
        if b[mid, 0] <= x:
            lo = mid + 1
        else:
            hi = mid
    lo -= 1
    if lo >= 0:
        if x <= b[lo, 1]:
            return 0.0
        best = x - b[lo, 1]
    if lo + 1 < b.shape[0]:
        best = min(best, b[lo + 1, 0] - x)
    return best


def _sorted(x):
    x = np.asarray(x, dtype=np.float64).reshape(-1, 2)
    return np.ascontiguousarray(x[np.lexsort((x[:, 1], x[:, 0]))])


def hausdorff_f64(a, b):
    a = _sorted(a)
    b = _sorted(b)
    if a.shape[0] == 0 or b.shape[0] == 0:
        raise ValueError("both interval sets must be nonempty")
    ma = np.ascontiguousarray(_merge(a))
    mb = np.ascontiguousarray(_merge(b))
    return max(_one_sided(ma, mb), _one_sided(mb, ma))
