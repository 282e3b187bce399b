"""Fourier-Motzkin elimination over the rationals.

Constraints are pairs ``(coeffs, rhs)`` meaning ``coeffs . y >= rhs``.
Instances here are tiny (one variable per edge at most), so the classic
quadratic blow-up is irrelevant; what matters is that the answer is exact
and a feasible point falls out of back-substitution.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

Constraint = tuple[tuple[Fraction, ...], Fraction]


def _normalise(c: Constraint) -> Constraint:
    coeffs, rhs = c
    scale = max((abs(a) for a in coeffs), default=Fraction(0))
    if scale == 0:
        return coeffs, rhs
    return tuple(a / scale for a in coeffs), rhs / scale


def _eliminate(cons: list[Constraint], j: int) -> list[Constraint] | None:
    pos, neg, out = [], [], []
    for c in cons:
        a = c[0][j]
        if a > 0:
            pos.append(c)
        elif a < 0:
            neg.append(c)
        else:
            out.append(c)
    for cp, bp in pos:
        for cn, bn in neg:
            ap, an = cp[j], -cn[j]
            coeffs = tuple(an * x + ap * y for x, y in zip(cp, cn))
            out.append((coeffs, an * bp + ap * bn))
    seen = set()
    kept = []
    for c in out:
        c = _normalise(c)
        if not any(c[0]):
            if c[1] > 0:
                return None
            continue
        if c not in seen:
            seen.add(c)
            kept.append(c)
    return kept


def _pick(lo: Fraction | None, hi: Fraction | None) -> Fraction:
    # prefer 0, then the nearest bound, so witnesses stay small and deterministic
    if lo is not None and lo > 0:
        return lo
    if hi is not None and hi < 0:
        return hi
    return Fraction(0)


def feasible_point(cons: Sequence[tuple[Sequence, object]], nvars: int) -> tuple[Fraction, ...] | None:
    """Return some y with every ``coeffs . y >= rhs``, or None if infeasible."""
    stages: list[list[Constraint]] = []
    cur: list[Constraint] = []
    for coeffs, rhs in cons:
        coeffs = tuple(Fraction(a) for a in coeffs)
        if len(coeffs) != nvars:
            raise ValueError("constraint width mismatch")
        rhs = Fraction(rhs)
        if not any(coeffs):
            if rhs > 0:
                return None
            continue
        cur.append(_normalise((coeffs, rhs)))
    for j in range(nvars):
        stages.append(cur)
        nxt = _eliminate(cur, j)
        if nxt is None:
            return None
        cur = nxt
    y = [Fraction(0)] * nvars
    for j in range(nvars - 1, -1, -1):
        lo: Fraction | None = None
        hi: Fraction | None = None
        for coeffs, rhs in stages[j]:
            a = coeffs[j]
            if not a:
                continue
            rest = rhs - sum((coeffs[i] * y[i] for i in range(j + 1, nvars)), Fraction(0))
            bound = rest / a
            if a > 0:
                lo = bound if lo is None else max(lo, bound)
            else:
                hi = bound if hi is None else min(hi, bound)
        if lo is not None and hi is not None and lo > hi:  # pragma: no cover - FM guarantees consistency
            return None
        y[j] = _pick(lo, hi)
    return tuple(y)

