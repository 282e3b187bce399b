"""Decide whether a graph-directed attractor is self-similar, with certificates.

The pipeline tries, in order: extraction of a standard IFS when every
circuit reachable from ``u`` passes through ``u``; the equal-gap route that
rules out every standard IFS; the two gap-ratio routes that rule out COSC
standard IFSs.  Each claim in a :class:`Certificate` is stored as a
:class:`CheckRecord` that :func:`replay_certificate` can re-run.
"""
from __future__ import annotations

import math
import os
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

from .construct import (
    GdIfs,
    ParamPoint,
    SeparationReport,
    equal_gap_delta,
    verify_separation,
)
from .digraph import (
    Digraph,
    Path,
    all_circuits_through,
    circuit_avoiding,
    circuit_vertices,
    reachable,
    return_circuits,
    simple_circuits,
    strongly_connected,
    validate_graph,
)
from .exactnum import (
    Monomial,
    MonomialSum,
    SignedMonomial,
    cone_intersection_empty,
    exponent_matrix,
    fraction_str,
    membership,
    nullspace,
)


class ClassifyError(Exception):
    pass


class SeparationUnverified(ClassifyError):
    pass


class CircuitAvoidsU(ClassifyError):
    pass


class NotEqualGapFamily(ClassifyError):
    pass


SELF_SIMILAR = "SelfSimilar"
NOT_COSC_SELF_SIMILAR = "NotCoscSelfSimilar"
NOT_SELF_SIMILAR = "NotSelfSimilar"
INCONCLUSIVE = "Inconclusive"


def _fmt(x) -> Any:
    if x is None:
        return None
    if isinstance(x, (Monomial, MonomialSum, SignedMonomial)):
        return str(x)
    if isinstance(x, Fraction):
        return fraction_str(x)
    if isinstance(x, bool) or isinstance(x, (int, str)):
        return x
    if isinstance(x, dict):
        return {str(k): _fmt(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_fmt(v) for v in x]
    return str(x)


# ---------------------------------------------------------------------------
# replayable check records

@dataclass(frozen=True)
class CheckRecord:
    """One exact test: ``kind`` names the procedure, ``args`` its inputs."""

    kind: str  # membership | cone | distinct | independent | in-gap | zero-quotient
    args: tuple
    result: bool
    witness: Any = None
    label: str = ""

    def replay(self) -> bool:
        return _run_check(self.kind, self.args)[0] == self.result

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "result": self.result, "label": self.label}
        if self.kind == "membership":
            target, a, cone = self.args
            d.update(target=str(target), set=[str(m) for m in a], cone=cone)
        elif self.kind == "cone":
            d.update(a1=[str(m) for m in self.args[0]], a2=[str(m) for m in self.args[1]])
        elif self.kind in ("distinct", "independent"):
            d.update(set=[str(m) for m in self.args[0]])
        elif self.kind == "in-gap":
            d.update(point=_fmt(self.args[0]), gap=[_fmt(self.args[1]), _fmt(self.args[2])])
        else:
            d.update(args=_fmt(list(self.args)))
        d["witness"] = _fmt(self.witness)
        return d


def _run_check(kind: str, args: tuple):
    if kind == "membership":
        r = membership(*args)
        return r.member, r.witness
    if kind == "cone":
        r = cone_intersection_empty(*args)
        return r.empty, None if r.empty else (r.p, r.q)
    if kind == "distinct":
        mags = list(args[0])
        for i in range(len(mags)):
            for j in range(i + 1, len(mags)):
                if mags[i] == mags[j]:
                    return False, (i, j)
        return True, None
    if kind == "independent":
        basis = nullspace(exponent_matrix(list(args[0]))[0]) if args[0] else []
        return not basis, basis[0] if basis else None
    if kind == "in-gap":
        point, lo, hi = args
        return lo < point < hi, None
    if kind == "zero-quotient":
        return False, None
    raise ValueError(f"unknown check kind {kind!r}")


def _record(kind: str, args: tuple, label: str = "") -> CheckRecord:
    result, witness = _run_check(kind, args)
    return CheckRecord(kind, args, result, witness, label)


@dataclass
class ConditionResult:
    name: str
    holds: bool
    witness: Any = None
    checks: list[CheckRecord] = field(default_factory=list)
    detail: dict = field(default_factory=dict)

    def __bool__(self):
        return self.holds

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "holds": self.holds,
            "witness": _fmt(self.witness),
            "checks": [c.to_dict() for c in self.checks],
            "detail": _fmt(self.detail),
        }


# ---------------------------------------------------------------------------
# admissibility

@dataclass
class AdmissibilityResult:
    admissible: bool
    labels: list[str]
    entries: list[Monomial]
    s_plus: tuple[Fraction, ...] | None = None
    s_minus: tuple[Fraction, ...] | None = None
    in_p1: bool = True
    assumptions: list[str] = field(default_factory=list)

    def __bool__(self):
        return self.admissible

    def relation(self) -> str | None:
        """The witness as an equation, e.g. ``x5^1*x6^1 = 1``."""
        if self.admissible:
            return None

        def side(vec):
            parts = [f"{self.labels[i]}^{fraction_str(c)}" for i, c in enumerate(vec) if c]
            return "*".join(parts) or "1"

        return f"{side(self.s_plus)} = {side(self.s_minus)}"


def check_admissible(p: ParamPoint) -> AdmissibilityResult:
    """Admissible iff the nonzero entry magnitudes are multiplicatively independent over Q."""
    labelled = p.entries()
    n_zero = sum(1 for v in p.graph.vertices for x in p.gaps[v] if x.is_zero())
    labels = [f"x{i + 1}" for i in range(len(labelled))]
    monos = [m for _, m in labelled]
    gens = sorted({g for m in monos for g in m.abstract_generators()}, key=lambda g: g.name)
    assumptions = [_independence_axiom(gens)] if gens else []
    m, _ = exponent_matrix(monos)
    basis = nullspace(m)
    if not basis:
        return AdmissibilityResult(True, labels, monos, None, None, n_zero == 0, assumptions)
    s = basis[0]
    s_plus = tuple(max(c, Fraction(0)) for c in s)
    s_minus = tuple(max(-c, Fraction(0)) for c in s)
    return AdmissibilityResult(False, labels, monos, s_plus, s_minus, n_zero == 0, assumptions)


def _independence_axiom(gens) -> str:
    names = ", ".join(g.name for g in gens)
    return f"declared: {{{names}}} together with the primes are multiplicatively independent over Q"


def _smooth_numbers(pool: Sequence[int], bound: int) -> list[int]:
    out = {1}
    for p in sorted(set(pool)):
        frontier = list(out)
        for n in frontier:
            k = n * p
            while k <= bound:
                out.add(k)
                k *= p
    return sorted(out)


@dataclass(frozen=True)
class SampleResult:
    fraction: float
    admissible: int
    total: int


def sample_admissibility(g: Digraph, n: int, seed=0, prime_pool: Sequence[int] | None = None,
                         denom_bound: int = 1000, max_tries: int = 1000) -> SampleResult:
    """Share of random contractive rational points that are admissible (seeded)."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return SampleResult(1.0, 0, 0)
    pool = list(prime_pool) if prime_pool is not None else _primes_upto(denom_bound)
    smooth = _smooth_numbers(pool, denom_bound)
    if len(smooth) < 2:
        raise ValueError("prime pool yields fewer than two integers below denom_bound")
    rng = random.Random(seed)

    def ratio() -> Fraction:
        while True:
            a, b = rng.choice(smooth), rng.choice(smooth)
            if a < b:
                return Fraction(a, b)

    good = 0
    for _ in range(n):
        ratios: list[SignedMonomial | None] = [None] * len(g.edges)
        for v in g.vertices:
            for _try in range(max_tries):
                mags = [ratio() for _ in g.out_lists[v]]
                if sum(mags) < 1:
                    break
            else:
                raise ValueError(f"could not meet the row-sum gate at vertex {v}")
            for e, q in zip(g.out_lists[v], mags):
                ratios[e] = SignedMonomial.from_fraction(q)
        gaps = {v: tuple(MonomialSum.from_fraction(Fraction(rng.choice(smooth), rng.choice(smooth)))
                         for _ in range(g.degree(v) - 1)) for v in g.vertices}
        p = ParamPoint(g, tuple(ratios), gaps)
        if check_admissible(p):
            good += 1
    return SampleResult(good / n, good, n)


def _primes_upto(n: int) -> list[int]:
    return [p for p in range(2, n + 1) if all(p % q for q in range(2, math.isqrt(p) + 1))]


# ---------------------------------------------------------------------------
# conditions

def _dedup(ms: Sequence[Monomial]) -> list[Monomial]:
    out: list[Monomial] = []
    for m in ms:
        if m not in out:
            out.append(m)
    return out


def split_ratio_sets(f: GdIfs, circuit: Path) -> tuple[list[Monomial], list[Monomial]]:
    """A(L) and A(L^c): distinct |rho_e| on and off the circuit."""
    on = set(circuit)
    a_l = _dedup([f.ratios[e].magnitude for e in circuit])
    a_c = _dedup([f.ratios[e].magnitude for e in range(len(f.ratios)) if e not in on])
    return a_l, a_c


def check_condition_i(f: GdIfs, circuit: Path) -> ConditionResult:
    a_l, a_c = split_ratio_sets(f, circuit)
    rec = _record("cone", (tuple(a_l), tuple(a_c)), "A(L)^Q* and A(L^c)^Q+* are disjoint")
    return ConditionResult("i", rec.result, rec.witness, [rec], {"A(L)": a_l, "A(L^c)": a_c})


def check_condition_iprime(f: GdIfs) -> ConditionResult:
    mags = [r.magnitude for r in f.ratios]
    dist = _record("distinct", (tuple(mags),), "all |ratio| differ")
    if not dist.result:
        i, j = dist.witness
        w = (f.graph.edges[i].label, f.graph.edges[j].label)
        return ConditionResult("i'", False, w, [dist], {"duplicate": w})
    mem = _record("membership", (Monomial.ONE, tuple(mags), "Qstar"), "1 is not in A^Q*")
    return ConditionResult("i'", not mem.result, mem.witness, [dist, mem], {"A": mags})


def check_condition_ii(f: GdIfs, u: str, v: str, report: SeparationReport | None = None) -> bool:
    rep = report or verify_separation(f)
    return bool(rep.lambda_set(u)) and bool(rep.lambda_set(v))


def check_condition_iiprime(f: GdIfs, report: SeparationReport | None = None) -> ConditionResult:
    rep = report or verify_separation(f)
    empty = [v for v in f.graph.vertices if not rep.lambda_set(v)]
    return ConditionResult("ii'", not empty, empty or None, [], {"Lambda": {v: rep.lambda_set(v) for v in f.graph.vertices}})


@dataclass(frozen=True)
class QuotientRow:
    numerator: tuple[str, int]
    denominator: tuple[str, int]
    quotient: Monomial | None  # None encodes the quotient 0
    in_group: bool
    witness: tuple | None

    def quotient_str(self) -> str:
        return "0" if self.quotient is None else str(self.quotient)


def check_condition_iii(f: GdIfs, report: SeparationReport | None = None) -> ConditionResult:
    """No quotient of two distinct basic gaps lies in A^Q (zero numerators pass)."""
    rep = report or verify_separation(f)
    a = tuple(_dedup([r.magnitude for r in f.ratios]))
    gaps = [(v, gp.index, gp.length) for v in f.graph.vertices for gp in rep.gaps[v]]
    rows: list[QuotientRow] = []
    checks: list[CheckRecord] = []
    failure = None
    for w, k, num in gaps:
        for z, m, den in gaps:
            if (w, k) == (z, m) or den.is_zero():
                continue
            dm = den.as_monomial()
            if num.is_zero():
                rows.append(QuotientRow((w, k), (z, m), None, False, None))
                checks.append(CheckRecord("zero-quotient", (w, k, z, m), False, None, "0 is never in A^Q"))
                continue
            nm = num.as_monomial()
            if nm is None or dm is None:
                failure = failure or ((w, k), (z, m), "non-monomial gap")
                continue
            q = nm / dm
            rec = _record("membership", (q, a, "Q"), f"gap({w},{k})/gap({z},{m}) not in A^Q")
            checks.append(rec)
            rows.append(QuotientRow((w, k), (z, m), q, rec.result, rec.witness))
            if rec.result and failure is None:
                failure = ((w, k), (z, m), rec.witness)
    return ConditionResult("iii", failure is None, failure, checks, {"quotients": rows})


def quotient_values(cond: ConditionResult) -> list[str]:
    """Distinct quotients of a condition-(iii) table, as strings ("0" for zero)."""
    out: list[str] = []
    for row in cond.detail["quotients"]:
        s = row.quotient_str()
        if s not in out:
            out.append(s)
    return out


@dataclass
class T2Result:
    holds: bool
    reason: str | None
    memberships: dict[str, tuple[int, int]]
    checks: list[CheckRecord] = field(default_factory=list)
    delta: Fraction | None = None

    def __bool__(self):
        return self.holds


def check_theorem_T2_conditions(f: GdIfs, i: str) -> T2Result:
    """Equal-gap route: a circuit avoids ``i`` and |x_i^(1)|, 1 - |x_i^(1)| sit in gaps of every other F_j."""
    delta = equal_gap_delta(f)
    if delta is None:
        raise NotEqualGapFamily("hulls must be [0, 1] with every basic gap equal to one delta > 0")
    g = f.graph
    if not strongly_connected(g):
        return T2Result(False, "graph is not strongly connected", {}, delta=delta)
    if circuit_avoiding(g, i) is None:
        return T2Result(False, f"no circuit avoids vertex {i}", {}, delta=delta)
    first = f.ratios[g.out_lists[i][0]].magnitude.rational_value()
    if first is None:
        return T2Result(False, "|x_i^(1)| is not rational", {}, delta=delta)
    memberships: dict[str, tuple[int, int]] = {}
    checks: list[CheckRecord] = []
    for j in g.vertices:
        if j == i:
            continue
        mags = [f.ratios[e].magnitude.rational_value() for e in g.out_lists[j]]
        if any(m is None for m in mags):
            return T2Result(False, f"ratios at vertex {j} are not rational", memberships, checks, delta)
        found = []
        for point in (first, 1 - first):
            hit = None
            acc = Fraction(0)
            for k in range(1, g.degree(j)):
                acc += mags[k - 1]
                lo, hi = acc + (k - 1) * delta, acc + k * delta
                if lo < point < hi:
                    hit = k
                    checks.append(_record("in-gap", (point, lo, hi), f"point in basic gap {k} of F_{j}"))
                    break
            if hit is None:
                return T2Result(False, f"{fraction_str(point)} is in no basic gap of F_{j}", memberships, checks, delta)
            found.append(hit)
        memberships[j] = (found[0], found[1])
    return T2Result(True, None, memberships, checks, delta)


# ---------------------------------------------------------------------------
# standard IFS extraction

@dataclass
class StandardIfs:
    maps: list[tuple[SignedMonomial, MonomialSum]]
    circuits: list[Path] = field(default_factory=list)
    labels: list[list[str]] = field(default_factory=list)

    def level_approx(self, hull: tuple[MonomialSum, MonomialSum], m: int) -> list[tuple[MonomialSum, MonomialSum]]:
        level = [(SignedMonomial(1, Monomial.ONE), MonomialSum.ZERO)]
        for _ in range(m):
            level = [(r * r2, t2 * r + t) for r, t in level for r2, t2 in self.maps]
        lo, hi = MonomialSum.coerce(hull[0]), MonomialSum.coerce(hull[1])
        out = []
        for r, t in level:
            a, b = lo * r + t, hi * r + t
            out.append((a, b) if r.sign > 0 else (b, a))
        return out

    def to_dict(self) -> dict:
        return {
            "maps": [{"ratio": str(r), "translation": str(t), "circuit": lab} for (r, t), lab in zip(self.maps, self.labels)],
        }


def extract_standard_ifs(f: GdIfs, u: str) -> StandardIfs:
    """Compose the maps along every return circuit at ``u``."""
    g = f.graph
    if not all_circuits_through(g, u):
        raise CircuitAvoidsU(f"a circuit reachable from {u} avoids it")
    circuits = return_circuits(g, u)
    maps = [f.compose(c) for c in circuits]
    return StandardIfs(maps, circuits, [g.labels(c) for c in circuits])


# ---------------------------------------------------------------------------
# verdicts

@dataclass
class Certificate:
    route: str | None
    vertex: str
    circuit: Path | None = None
    v: str | None = None
    connecting_path: Path | None = None
    conditions: dict[str, ConditionResult] = field(default_factory=dict)
    assumptions: list[str] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)
    breach: dict | None = None
    failures: list[dict] = field(default_factory=list)
    extra_checks: list[CheckRecord] = field(default_factory=list)
    labels: dict = field(default_factory=dict)

    def all_checks(self) -> list[CheckRecord]:
        out = [c for cond in self.conditions.values() for c in cond.checks]
        return out + list(self.extra_checks)

    def to_dict(self) -> dict:
        return {
            "route": self.route,
            "vertex": self.vertex,
            "circuit": self.labels.get("circuit"),
            "v": self.v,
            "connecting_path": self.labels.get("path"),
            "conditions": {k: c.to_dict() for k, c in sorted(self.conditions.items())},
            "assumptions": list(self.assumptions),
            "flags": list(self.flags),
            "breach": _fmt(self.breach),
            "failures": _fmt(self.failures),
            "checks": [c.to_dict() for c in self.extra_checks],
        }


@dataclass
class Verdict:
    vertex: str
    outcome: str
    certificate: Certificate
    extracted: StandardIfs | None = None

    def to_dict(self) -> dict:
        d = {"vertex": self.vertex, "outcome": self.outcome, "certificate": self.certificate.to_dict()}
        if self.extracted is not None:
            d["extracted"] = self.extracted.to_dict()
        return d


def replay_certificate(cert: Certificate) -> bool:
    """Re-run every recorded exact check; True iff all reproduce."""
    return all(c.replay() for c in cert.all_checks())


@dataclass
class ClassifyOptions:
    try_t2: bool = True
    breach_depth: int | None = None  # run the truncated ratio oracle at this depth
    threads: int | None = None


def _assumptions(f: GdIfs) -> list[str]:
    gens = set()
    for r in f.ratios:
        gens.update(r.magnitude.abstract_generators())
    for v in f.graph.vertices:
        for x in f.gaps.get(v, ()):
            gens.update(x.abstract_generators())
    return [_independence_axiom(sorted(gens, key=lambda g: g.name))] if gens else []


def _breach(f: GdIfs, u: str, v: str, circuit: Path, path: Path, rep: SeparationReport, depth: int | None) -> tuple[dict, list[CheckRecord]]:
    a_l, _ = split_ratio_sets(f, circuit)
    r = Monomial.ONE
    for e in circuit:
        r = r * f.ratios[e].magnitude
    rho_e = Monomial.ONE
    for e in path:
        rho_e = rho_e * f.ratios[e].magnitude
    theta1 = rep.lambda_set(v)[0] * rho_e
    theta2 = rep.lambda_set(u)[0]
    rec = _record("membership", (r, tuple(a_l), "QplusStar"), "|rho_L| lies in A(L)^Q+*")
    out = {"theta1": theta1, "ratio": r, "theta2": theta2, "ratio_in_cone": rec.result,
           "theta2_claim": "ratios through theta2 avoid A(L)^Q+* by condition (i)"}
    checks = [rec]
    if depth is not None:
        out.update(confirm_breach(f, u, circuit, theta1, theta2, depth, checks))
    return out, checks


def confirm_breach(f: GdIfs, u: str, circuit: Path, theta1: Monomial, theta2: Monomial, depth: int,
                   checks: list[CheckRecord] | None = None, k_min: int = 3) -> dict:
    """Run the truncated ratio oracle on both thetas and settle each finding by membership."""
    from .gaps import detect_geometric_ratios, gap_lengths_truncated

    a_l = tuple(split_ratio_sets(f, circuit)[0])
    cat = gap_lengths_truncated(f, u, depth)
    out = {}
    for name, theta in (("theta1", theta1), ("theta2", theta2)):
        found = detect_geometric_ratios(cat, theta, k_min)
        inside = []
        for r in found:
            rec = _record("membership", (r, a_l, "QplusStar"), f"oracle ratio for {name}")
            if checks is not None:
                checks.append(rec)
            if rec.result:
                inside.append(r)
        out[f"{name}_ratios"] = found
        out[f"{name}_in_cone"] = inside
    return out


def _lemma41_candidate(f: GdIfs, u: str, circuit: Path, v: str, rep: SeparationReport, cache: dict):
    path = reachable(f.graph, u, v)
    if path is None:
        return None, {"reason": "no path from u to v"}
    key = tuple(circuit)
    if key not in cache:
        cache[key] = check_condition_i(f, circuit)
    ci = cache[key]
    if not ci:
        return None, {"reason": "condition (i) fails", "witness": ci.witness}
    if not check_condition_ii(f, u, v, rep):
        return None, {"reason": "condition (ii) fails"}
    if "iii" not in cache:
        cache["iii"] = check_condition_iii(f, rep)
    if not cache["iii"]:
        return None, {"reason": "condition (iii) fails", "witness": cache["iii"].witness}
    return (ci, cache["iii"], path), None


def classify_vertex(f: GdIfs, u: str, options: ClassifyOptions | None = None) -> Verdict:
    opts = options or ClassifyOptions()
    g = f.graph
    if u not in g.vertices:
        raise ValueError(f"unknown vertex {u!r}")
    bad = validate_graph(g)
    if bad:
        raise ClassifyError("; ".join(str(b) for b in bad))
    rep = verify_separation(f)
    if rep.status not in ("CSSC", "COSC-only"):
        raise SeparationUnverified(f"separation status is {rep.status}")
    if rep.order_violations:
        raise SeparationUnverified("child images are not listed left to right")
    sc = strongly_connected(g)
    flags = [] if sc else ["graph is not strongly connected"]
    assumptions = _assumptions(f)

    # (a) every reachable circuit passes through u
    if all_circuits_through(g, u):
        phi = extract_standard_ifs(f, u)
        if not sc:
            flags.append("extraction uses the subgraph reachable from u")
        cert = Certificate("Thm5.1", u, assumptions=assumptions, flags=flags,
                           labels={"circuits": phi.labels})
        return Verdict(u, SELF_SIMILAR, cert, phi)

    # (b) equal-gap family
    if opts.try_t2 and equal_gap_delta(f) is not None:
        t2 = check_theorem_T2_conditions(f, i=u)
        if t2:
            cert = Certificate("Thm4.9", u, assumptions=assumptions, flags=flags, extra_checks=t2.checks,
                               breach={"delta": t2.delta, "memberships": {j: list(mn) for j, mn in t2.memberships.items()}})
            return Verdict(u, NOT_SELF_SIMILAR, cert)

    failures: list[dict] = []
    # (c1) global conditions with any circuit avoiding u
    if sc:
        c_ip = check_condition_iprime(f)
        c_iip = check_condition_iiprime(f, rep)
        c_iii = check_condition_iii(f, rep)
        circ = circuit_avoiding(g, u)
        if c_ip and c_iip and c_iii and circ is not None:
            v = circuit_vertices(g, circ)[0]
            path = reachable(g, u, v)
            breach, bchecks = _breach(f, u, v, circ, path, rep, opts.breach_depth)
            cert = Certificate("Lemma4.4", u, circ, v, path, {"i'": c_ip, "ii'": c_iip, "iii": c_iii},
                               assumptions, flags, breach, [], bchecks,
                               {"circuit": g.labels(circ), "path": g.labels(path)})
            return Verdict(u, NOT_COSC_SELF_SIMILAR, cert)
        failures.append({"route": "Lemma4.4", "i'": c_ip.holds, "ii'": c_iip.holds, "iii": c_iii.holds,
                         "circuit_avoiding_u": circ is not None})

    # (c2) per-circuit conditions, earliest success in enumeration order wins
    cache: dict = {}
    candidates = [(c, v) for c in simple_circuits(g, avoid=u) for v in _unique(circuit_vertices(g, c))]
    threads = opts.threads or int(os.environ.get("GDFRACTAL_THREADS", "1") or 1)
    if threads > 1 and len(candidates) > 1:
        # condition (iii) and the cone tests are shared; warm them first so workers only read
        cache["iii"] = check_condition_iii(f, rep)
        for c, _ in candidates:
            cache.setdefault(tuple(c), check_condition_i(f, c))
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda cv: _lemma41_candidate(f, u, cv[0], cv[1], rep, cache), candidates))
    else:
        results = []
        for c, v in candidates:
            results.append(_lemma41_candidate(f, u, c, v, rep, cache))
            if results[-1][0] is not None:
                break
    for (c, v), (ok, why) in zip(candidates, results):
        if ok is None:
            failures.append({"route": "Lemma4.1", "circuit": g.labels(c), "v": v, **why})
            continue
        ci, ciii, path = ok
        breach, bchecks = _breach(f, u, v, c, path, rep, opts.breach_depth)
        cii = ConditionResult("ii", True, None, [], {"Lambda_u": rep.lambda_set(u), "Lambda_v": rep.lambda_set(v)})
        cert = Certificate("Lemma4.1", u, c, v, path, {"i": ci, "ii": cii, "iii": ciii}, assumptions, flags,
                           breach, failures, bchecks, {"circuit": g.labels(c), "path": g.labels(path)})
        return Verdict(u, NOT_COSC_SELF_SIMILAR, cert)
    return Verdict(u, INCONCLUSIVE, Certificate(None, u, assumptions=assumptions, flags=flags, failures=failures))


def _unique(xs):
    out = []
    for x in xs:
        if x not in out:
            out.append(x)
    return out
