"""Level-m approximations, gap-length catalogs and interval-set metrics."""
from __future__ import annotations

import bisect
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import cmp_to_key
from typing import Iterable, Sequence

from .construct import DEFAULT_PRECISION, MAX_PRECISION, GdIfs, verify_separation
from .digraph import Path
from .exactnum import Enclosure, Monomial, MonomialSum, eval_numeric, sign

DEFAULT_BUDGET = 10**6


class GapsError(Exception):
    pass


class DepthTooLarge(GapsError):
    pass


class ThetaAbsent(GapsError):
    pass


class EmptyInput(GapsError):
    pass


@dataclass(frozen=True)
class IntervalSet:
    """Sorted closed intervals ``(lo, hi)``; endpoints are MonomialSums."""

    intervals: tuple[tuple[MonomialSum, MonomialSum], ...]

    def __len__(self):
        return len(self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    def rational(self) -> list[tuple[Fraction, Fraction]] | None:
        out = []
        for lo, hi in self.intervals:
            a, b = lo.rational_value(), hi.rational_value()
            if a is None or b is None:
                return None
            out.append((a, b))
        return out

    def total_length(self) -> MonomialSum:
        total = MonomialSum.ZERO
        for lo, hi in self.intervals:
            total = total + (hi - lo)
        return total

    def merged(self) -> "IntervalSet":
        """Union with touching or overlapping neighbours fused."""
        out: list[list[MonomialSum]] = []
        for lo, hi in self.intervals:
            if out and _cmp(lo, out[-1][1]) <= 0:
                if _cmp(hi, out[-1][1]) > 0:
                    out[-1][1] = hi
            else:
                out.append([lo, hi])
        return IntervalSet(tuple((a, b) for a, b in out))

    def contains_set(self, other: "IntervalSet") -> bool:
        """Every interval of ``other`` lies in one interval of the merged self."""
        mine = self.merged().intervals
        for lo, hi in other.intervals:
            if not any(_cmp(a, lo) <= 0 and _cmp(hi, b) <= 0 for a, b in mine):
                return False
        return True

    def __str__(self):
        return "{" + ", ".join(f"[{a}, {b}]" for a, b in self.intervals) + "}"


def _cmp(a, b) -> int:
    return sign(MonomialSum.coerce(a) - MonomialSum.coerce(b), DEFAULT_PRECISION, MAX_PRECISION)


def _sorted_intervals(items: Iterable[tuple]) -> IntervalSet:
    items = list(items)
    if all(a.is_rational() and b.is_rational() for a, b in items):
        items.sort(key=lambda ab: (ab[0].rational_value(), ab[1].rational_value()))
    else:
        items.sort(key=cmp_to_key(lambda x, y: _cmp(x[0], y[0]) or _cmp(x[1], y[1])))
    return IntervalSet(tuple(items))


def count_paths(f: GdIfs, u: str, m: int) -> int:
    """#E_u^m without enumerating."""
    counts = {v: 0 for v in f.graph.vertices}
    counts[u] = 1
    for _ in range(m):
        nxt = {v: 0 for v in f.graph.vertices}
        for v, c in counts.items():
            if c:
                for e in f.graph.out_lists[v]:
                    nxt[f.graph.edges[e].dst] += c
        counts = nxt
    return sum(counts.values())


def _check_budget(f: GdIfs, u: str, m: int, budget: int, cumulative: bool = False):
    n = sum(count_paths(f, u, k) for k in range(m + 1)) if cumulative else count_paths(f, u, m)
    if n > budget:
        raise DepthTooLarge(f"{n} intervals at depth {m} exceed the budget {budget}")


def _images(f: GdIfs, u: str, m: int):
    """(path, ratio, translation) for every path of length m leaving u."""
    one = f.compose(())
    level = [((), one[0], one[1], u)]
    for _ in range(m):
        nxt = []
        for path, r, t, w in level:
            for e in f.graph.out_lists[w]:
                # S_path o S_e
                nxt.append((path + (e,), r * f.ratios[e], f.translations[e] * r + t, f.graph.edges[e].dst))
        level = nxt
    return level


def level_approx(f: GdIfs, u: str, m: int, budget: int = DEFAULT_BUDGET) -> IntervalSet:
    """I_u^m: the images of the hulls under all length-m paths leaving u."""
    if m < 0:
        raise ValueError("m must be >= 0")
    if not f.exact:
        raise ValueError("level_approx needs an exact GD-IFS; use kernels.level_intervals for numeric mode")
    _check_budget(f, u, m, budget)
    out = []
    for path, r, t, w in _images(f, u, m):
        lo, hi = f.hull(w)
        a, b = lo * r + t, hi * r + t
        out.append((a, b) if r.sign > 0 else (b, a))
    return _sorted_intervals(out)


# ---------------------------------------------------------------------------
# gap catalogs

@dataclass(frozen=True)
class GapEntry:
    length: Monomial
    depth: int | None
    path: Path | None = None
    vertex: str | None = None  # vertex owning the basic gap
    gap_index: int | None = None
    interval: tuple | None = None  # geometric location (brute force only)


@dataclass
class GapCatalog:
    entries: list[GapEntry]
    start: str | None = None
    max_depth: int | None = None
    floor: Fraction | None = None  # every gap not listed is no longer than this

    def values(self) -> list[Monomial]:
        """Distinct lengths in canonical order."""
        return sorted(set(e.length for e in self.entries), key=Monomial.sort_key)

    def multiset(self) -> Counter:
        return Counter(e.length for e in self.entries)

    def up_to_depth(self, d: int) -> "GapCatalog":
        return GapCatalog([e for e in self.entries if e.depth is not None and e.depth <= d], self.start, d)

    def __len__(self):
        return len(self.entries)


def gap_lengths_truncated(f: GdIfs, u: str, max_depth: int, budget: int = DEFAULT_BUDGET) -> GapCatalog:
    """{lambda_v^(r) * |rho_e| : e a path from u of length <= max_depth}, with provenance."""
    if max_depth < 0:
        raise ValueError("max_depth must be >= 0")
    _check_budget(f, u, max_depth, budget, cumulative=True)
    rep = verify_separation(f)
    positive = {v: [(gp.index, gp.length.as_monomial()) for gp in rep.positive_gaps(v)] for v in f.graph.vertices}
    for v, gs in positive.items():
        if any(m is None for _, m in gs):
            raise GapsError(f"basic gap at {v} is not a monomial")
    entries = []
    level: list[tuple[Path, Monomial, str]] = [((), Monomial.ONE, u)]
    for depth in range(max_depth + 1):
        for path, mag, w in level:
            for k, lam in positive[w]:
                entries.append(GapEntry(lam * mag, depth, path, w, k))
        if depth < max_depth:
            level = [(path + (e,), mag * f.ratios[e].magnitude, f.graph.edges[e].dst)
                     for path, mag, w in level for e in f.graph.out_lists[w]]
    entries.sort(key=lambda e: (e.depth, e.length.sort_key(), e.path, e.gap_index))
    big = max((eval_numeric(m, 64).hi for gs in positive.values() for _, m in gs), default=Fraction(0))
    rho = f.max_abs_ratio()
    return GapCatalog(entries, u, max_depth, big * rho ** (max_depth + 1))


def gaps_bruteforce(f: GdIfs, u: str, m: int, budget: int = DEFAULT_BUDGET) -> GapCatalog:
    """Complementary intervals of I_u^m inside conv F_u, found geometrically."""
    if m == 0:
        return GapCatalog([], u, None)
    parts = level_approx(f, u, m, budget).merged().intervals
    entries = []
    for (a0, a1), (b0, b1) in zip(parts, parts[1:]):
        length = b0 - a1
        mono = length.as_monomial()
        if mono is None:
            raise GapsError(f"gap length {length} is not a monomial")
        entries.append(GapEntry(mono, None, interval=(a1, b0)))
    return GapCatalog(entries, u, None)


def provenance_value(f: GdIfs, entry: GapEntry) -> Monomial:
    """Recompute an entry's length from its path and basic-gap index."""
    gp = verify_separation(f).gaps[entry.vertex][entry.gap_index - 1]
    mag = Monomial.ONE
    for e in entry.path:
        mag = mag * f.ratios[e].magnitude
    return gp.length.as_monomial() * mag


# ---------------------------------------------------------------------------
# Hausdorff distance

def _merge(iv: Sequence[tuple]) -> list[tuple]:
    out: list[list] = []
    for lo, hi in sorted(iv):
        if out and lo <= out[-1][1]:
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return [(a, b) for a, b in out]


def _one_sided(a: list[tuple], b: list[tuple]):
    """sup over x in A of dist(x, B); both merged and sorted."""
    lefts = [lo for lo, _ in b]

    def dist(x):
        i = bisect.bisect_right(lefts, x) - 1
        best = None
        if i >= 0:
            lo, hi = b[i]
            if x <= hi:
                return x - x  # zero of the right type
            best = x - hi
        if i + 1 < len(b):
            d = b[i + 1][0] - x
            best = d if best is None else min(best, d)
        return best

    worst = None
    cands = []
    for lo, hi in a:
        cands += [lo, hi]
        for (_, g0), (g1, _) in zip(b, b[1:]):
            mid = (g0 + g1) / 2
            if lo <= mid <= hi:
                cands.append(mid)
    for x in cands:
        d = dist(x)
        worst = d if worst is None or d > worst else worst
    return worst


def hausdorff_exact(a: Sequence[tuple], b: Sequence[tuple]):
    """Hausdorff distance between finite unions of closed intervals (exact for Fractions)."""
    if not a or not b:
        raise EmptyInput("both interval sets must be nonempty")
    a, b = _merge(a), _merge(b)
    return max(_one_sided(a, b), _one_sided(b, a))


def _as_pairs(s) -> list[tuple]:
    return list(s.intervals) if isinstance(s, IntervalSet) else list(s)


def hausdorff_distance(a, b, precision_bits: int = DEFAULT_PRECISION) -> Enclosure:
    """Rigorous enclosure of the Hausdorff distance between two interval unions."""
    pa, pb = _as_pairs(a), _as_pairs(b)
    if not pa or not pb:
        raise EmptyInput("both interval sets must be nonempty")
    flat = [x for pair in pa + pb for x in pair]
    if all(isinstance(x, (int, Fraction)) or MonomialSum.coerce(x).is_rational() for x in flat):
        q = lambda x: Fraction(x) if isinstance(x, (int, Fraction)) else MonomialSum.coerce(x).rational_value()  # noqa: E731
        d = hausdorff_exact([(q(x), q(y)) for x, y in pa], [(q(x), q(y)) for x, y in pb])
        return Enclosure(d, d)
    # move every endpoint to its enclosure midpoint: each set shifts by at most eps
    eps = Fraction(0)

    def mid(x):
        nonlocal eps
        e = eval_numeric(MonomialSum.coerce(x), precision_bits)
        eps = max(eps, e.width / 2)
        return e.mid

    ma = [(mid(x), mid(y)) for x, y in pa]
    mb = [(mid(x), mid(y)) for x, y in pb]
    ma = [(x, max(x, y)) for x, y in ma]
    mb = [(x, max(x, y)) for x, y in mb]
    d = hausdorff_exact(ma, mb)
    return Enclosure(max(Fraction(0), d - 2 * eps), d + 2 * eps)


# ---------------------------------------------------------------------------
# truncated ratio oracle

def detect_geometric_ratios(catalog: GapCatalog, theta: Monomial, k_min: int = 3) -> list[Monomial]:
    """Ratios r < 1 of progressions through ``theta`` that stay inside the catalog.

    An oracle for property tests only: a progression counts when it has at
    least ``k_min`` consecutive terms among the catalog values and its first
    missing term lies at or below the catalog floor, where truncation could
    explain the absence.
    """
    if k_min < 2:
        raise ValueError("k_min must be >= 2")
    values = set(catalog.values())
    if theta not in values:
        raise ThetaAbsent(str(theta))
    floor = catalog.floor if catalog.floor is not None else Fraction(0)
    tv = eval_numeric(theta, 64)
    ratios: set[Monomial] = set()
    for v in values:
        if v == theta:
            continue
        ev = eval_numeric(v, 64)
        if ev.hi < tv.lo:
            ratios.add(v / theta)
        elif ev.lo > tv.hi:
            ratios.add(theta / v)
        else:
            s = sign(MonomialSum.from_monomial(v) - MonomialSum.from_monomial(theta), DEFAULT_PRECISION, MAX_PRECISION)
            ratios.add(v / theta if s < 0 else theta / v)
    found = []
    for r in ratios:
        start = theta
        while start / r in values:
            start = start / r
        n, t = 0, start
        while t in values:
            n += 1
            t = t * r
        if n < k_min:
            continue
        if eval_numeric(t, 64).lo > floor:
            continue  # the progression stops where the catalog is still complete
        found.append(r)
    return sorted(found, key=Monomial.sort_key)
