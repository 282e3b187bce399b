"""JSON problem specs: parsing, validation, canonical serialization.

Expressions are signed products of rational literals and generator powers,
for example ``-1/3``, ``11^(-1/2)*lam`` or ``29/4*lam``; base points may be
sums such as ``1/2 + pi``.  Prime aliases (``{"name": "p5", "kind":
"prime", "value": 11}``) resolve to the canonical prime generator, so
serialized expressions always spell primes as integers.  A literal
fraction binds tighter than ``^``: ``1/11^(1/2)`` means ``(1/11)^(1/2)``.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .construct import (
    GdIfs,
    ParamPoint,
    build_equal_gap_family,
    build_gdifs,
    build_gdifs_numeric,
)
from .digraph import Digraph, validate_graph
from .exactnum import (
    Generator,
    Indeterminate,
    Monomial,
    MonomialSum,
    SignedMonomial,
    abstract_generator,
    factor_rational,
    fraction_str,
    prime_generator,
    sign,
    _is_prime,
)

SCHEMA = "gdfractal/1"
DEFAULT_NUMERIC = {"precision": 128, "depth": 4}


class SpecError(Exception):
    pass


class ParseError(SpecError):
    def __init__(self, line: int, col: int, message: str):
        super().__init__(f"{line}:{col}: {message}")
        self.line, self.col, self.message = line, col, message

    def to_dict(self):
        return {"error": "ParseError", "line": self.line, "col": self.col, "message": self.message}


class ValidationError(SpecError):
    def __init__(self, errors: list[tuple[str, str]]):
        super().__init__("; ".join(f"{p}: {m}" for p, m in errors))
        self.errors = errors

    def to_dict(self):
        return {"error": "ValidationError", "errors": [{"path": p, "message": m} for p, m in self.errors]}


# ---------------------------------------------------------------------------
# expressions

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(\S))")


class _ExprError(Exception):
    pass


class _Parser:
    def __init__(self, text: str, names: dict[str, Generator]):
        self.toks = []
        pos = 0
        text = text.strip()
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if m is None:
                break
            if m.group(1):
                self.toks.append(("int", int(m.group(1))))
            elif m.group(2):
                self.toks.append(("name", m.group(2)))
            else:
                self.toks.append(("op", m.group(3)))
            pos = m.end()
        self.i = 0
        self.names = names

    def peek(self, value=None):
        if self.i >= len(self.toks):
            return None
        t = self.toks[self.i]
        if value is not None and t != ("op", value):
            return None
        return t

    def take(self, value=None):
        t = self.peek(value)
        if t is None:
            raise _ExprError(f"expected {value!r}" if value else "unexpected end of expression")
        self.i += 1
        return t

    def done(self):
        if self.i != len(self.toks):
            raise _ExprError(f"unexpected token {self.toks[self.i][1]!r}")

    def sum(self) -> MonomialSum:
        total = MonomialSum.ZERO
        s = -1 if self.peek("-") else 1
        if self.peek("-") or self.peek("+"):
            self.i += 1
        while True:
            c, m = self.product()
            total = total + MonomialSum.from_monomial(m, s * c)
            if self.peek("+"):
                s = 1
            elif self.peek("-"):
                s = -1
            else:
                return total
            self.i += 1

    def product(self) -> tuple[Fraction, Monomial]:
        coeff, mono = self.factor()
        while True:
            if self.peek("*"):
                self.i += 1
                c, m = self.factor()
                coeff, mono = coeff * c, mono * m
            elif self.peek("/"):
                self.i += 1
                c, m = self.factor(allow_fraction=False)
                if c == 0:
                    raise _ExprError("division by zero")
                coeff, mono = coeff / c, mono / m
            else:
                return coeff, mono

    def factor(self, allow_fraction: bool = True) -> tuple[Fraction, Monomial]:
        """``a``, ``a/b``, ``a^e``, ``(a/b)^e``-style literal, ``name[^e]`` or ``(product)``."""
        t = self.take()
        if t[0] == "int":
            base = Fraction(t[1])
            if allow_fraction and self.peek("/") and self.i + 1 < len(self.toks) and self.toks[self.i + 1][0] == "int":
                self.i += 1
                den = self.take()[1]
                if den == 0:
                    raise _ExprError("division by zero")
                base = base / den
            if self.peek("^"):
                self.i += 1
                e = self.exponent()
                if base <= 0:
                    raise _ExprError("powers need a positive base")
                return Fraction(1), factor_rational(base) ** e
            return base, Monomial.ONE
        if t[0] == "name":
            if t[1] not in self.names:
                raise _ExprError(f"unknown generator {t[1]!r}")
            e = Fraction(1)
            if self.peek("^"):
                self.i += 1
                e = self.exponent()
            return Fraction(1), Monomial.of(self.names[t[1]], e)
        if t == ("op", "("):
            c, m = self.product()
            self.take(")")
            if self.peek("^"):
                self.i += 1
                e = self.exponent()
                if c <= 0:
                    raise _ExprError("powers need a positive base")
                return Fraction(1), (factor_rational(c) * m) ** e
            return c, m
        raise _ExprError(f"unexpected token {t[1]!r}")

    def exponent(self) -> Fraction:
        if self.peek("("):
            self.i += 1
            s = 1
            if self.peek("-"):
                self.i += 1
                s = -1
            num = self.take()
            if num[0] != "int":
                raise _ExprError("exponent must be rational")
            e = Fraction(num[1])
            if self.peek("/"):
                self.i += 1
                den = self.take()
                if den[0] != "int" or den[1] == 0:
                    raise _ExprError("bad exponent denominator")
                e /= den[1]
            self.take(")")
            return s * e
        s = 1
        if self.peek("-"):
            self.i += 1
            s = -1
        t = self.take()
        if t[0] != "int":
            raise _ExprError("exponent must be rational")
        return Fraction(s * t[1])


def parse_sum(text: str, names: dict[str, Generator]) -> MonomialSum:
    if not isinstance(text, (str, int)):
        raise _ExprError("expression must be a string")
    p = _Parser(str(text), names)
    if not p.toks:
        raise _ExprError("empty expression")
    out = p.sum()
    p.done()
    return out


def parse_signed(text: str, names: dict[str, Generator]) -> SignedMonomial:
    s = parse_sum(text, names)
    items = list(s.items())
    if len(items) != 1:
        raise _ExprError("a ratio must be a single signed term")
    m, c = items[0]
    return SignedMonomial(1 if c > 0 else -1, m * factor_rational(abs(c)))


def parse_gap(text: str, names: dict[str, Generator]) -> MonomialSum:
    s = parse_sum(text, names)
    if s.is_zero():
        return s
    if s.as_monomial() is None:
        raise _ExprError("a gap length must be 0 or a single positive term")
    return s


# ---------------------------------------------------------------------------
# spec objects

@dataclass(frozen=True)
class EdgeSpec:
    src: str
    dst: str
    ratio: SignedMonomial | None
    label: str | None = None


@dataclass(frozen=True)
class FamilySpec:
    delta: Fraction
    magnitudes: dict
    signs: dict


@dataclass
class ProblemSpec:
    generators: list[dict]
    vertices: list[str]
    edges: list[EdgeSpec]
    gaps: dict[str, tuple[MonomialSum, ...]]
    base_points: dict[str, MonomialSum] = field(default_factory=dict)
    family: FamilySpec | None = None
    query: list[str] = field(default_factory=list)
    numeric: dict = field(default_factory=lambda: dict(DEFAULT_NUMERIC))
    names: dict[str, Generator] = field(default_factory=dict, compare=False, repr=False)

    def graph(self) -> Digraph:
        return Digraph(self.vertices, [(e.src, e.dst, e.label) for e in self.edges])

    def point(self) -> ParamPoint:
        if self.family is not None:
            g = self.graph()
            ratios = [None] * len(g.edges)
            for v in g.vertices:
                for k, e in enumerate(g.out_lists[v]):
                    ratios[e] = SignedMonomial(self.family.signs[v][k], self.family.magnitudes[v][k])
            d = MonomialSum.from_fraction(self.family.delta)
            return ParamPoint(g, tuple(ratios), {v: (d,) * (g.degree(v) - 1) for v in g.vertices}, {})
        return ParamPoint(self.graph(), tuple(e.ratio for e in self.edges), dict(self.gaps), dict(self.base_points))

    def exact(self) -> bool:
        return all(r.magnitude.is_rational() for r in self.point().ratios)

    def build(self) -> GdIfs:
        if self.family is not None:
            return build_equal_gap_family(self.graph(), self.family.delta, self.family.magnitudes, self.family.signs)
        p = self.point()
        if p.rational_magnitudes():
            return build_gdifs(p)
        return build_gdifs_numeric(p, self.numeric.get("precision", 128))

    def query_vertices(self) -> list[str]:
        return list(self.query) if self.query else list(self.vertices)


def _position(text: str, key: str) -> tuple[int, int]:
    i = text.find(f'"{key}"')
    if i < 0:
        return 1, 1
    return text.count("\n", 0, i) + 1, i - text.rfind("\n", 0, i)


def parse_spec(text: bytes | str) -> ProblemSpec:
    """Parse and validate a JSON spec; raises ParseError or ValidationError."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(1, exc.start + 1, "input is not UTF-8") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.lineno, exc.colno, exc.msg) from None
    if not isinstance(doc, dict):
        raise ParseError(1, 1, "top level must be an object")
    errors: list[tuple[str, str]] = []
    if doc.get("schema") != SCHEMA:
        errors.append(("schema", f"expected {SCHEMA!r}"))

    names: dict[str, Generator] = {}
    gens_out: list[dict] = []
    for i, gd in enumerate(doc.get("generators", [])):
        path = f"generators[{i}]"
        if not isinstance(gd, dict) or "name" not in gd:
            errors.append((path, "generator needs a name"))
            continue
        name = str(gd["name"])
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name):
            errors.append((f"{path}.name", "generator names are identifiers"))
            continue
        if name in names:
            errors.append((f"{path}.name", f"duplicate generator {name!r}"))
            continue
        kind = gd.get("kind", "abstract")
        if kind == "prime":
            value = gd.get("value")
            if not isinstance(value, int) or not _is_prime(value):
                errors.append((f"{path}.value", "prime generator needs a prime integer value"))
                continue
            if any(g.prime == value for g in names.values()):
                errors.append((f"{path}.value", f"prime {value} declared twice"))
                continue
            names[name] = prime_generator(value)
            gens_out.append({"name": name, "kind": "prime", "value": value})
        elif kind == "abstract":
            approx = gd.get("approx")
            try:
                if approx is None or not float(approx) > 0:
                    raise ValueError
            except (TypeError, ValueError):
                errors.append((f"{path}.approx", "abstract generator needs a positive decimal approx"))
                continue
            names[name] = abstract_generator(name, str(approx))
            gens_out.append({"name": name, "kind": "abstract", "approx": str(approx)})
        else:
            errors.append((f"{path}.kind", f"unknown kind {kind!r}"))

    def expr(fn, value, path):
        try:
            return fn(value, names)
        except _ExprError as exc:
            errors.append((path, str(exc)))
            return None

    vertices = [str(v) for v in doc.get("vertices", [])]
    if not vertices:
        errors.append(("vertices", "at least one vertex is required"))
    if len(set(vertices)) != len(vertices):
        errors.append(("vertices", "duplicate vertex ids"))
    vset = set(vertices)
    family_doc = doc.get("family")
    edges: list[EdgeSpec] = []
    for i, ed in enumerate(doc.get("edges", [])):
        path = f"edges[{i}]"
        if not isinstance(ed, dict):
            errors.append((path, "edge must be an object"))
            continue
        src, dst = str(ed.get("from")), str(ed.get("to"))
        for k, val in (("from", src), ("to", dst)):
            if val not in vset:
                errors.append((f"{path}.{k}", f"unknown vertex {val!r}"))
        ratio = None
        if "ratio" in ed:
            ratio = expr(parse_signed, ed["ratio"], f"{path}.ratio")
            if ratio is not None:
                try:
                    if sign(MonomialSum.from_fraction(1) - ratio.magnitude) <= 0:
                        errors.append((f"{path}.ratio", f"|ratio| = {ratio.magnitude} is not < 1"))
                except Indeterminate:
                    errors.append((f"{path}.ratio", "|ratio| < 1 cannot be certified"))
                except Exception as exc:  # missing approximation and the like
                    errors.append((f"{path}.ratio", str(exc)))
        elif family_doc is None:
            errors.append((f"{path}.ratio", "ratio is required"))
        edges.append(EdgeSpec(src, dst, ratio, ed.get("label")))

    graph = None
    if not any(p.startswith(("edges", "vertices")) for p, _ in errors):
        try:
            graph = Digraph(vertices, [(e.src, e.dst, e.label) for e in edges])
        except ValueError as exc:
            errors.append(("edges", str(exc)))
    if graph is not None:
        for viol in validate_graph(graph):
            errors.append((f"vertices.{viol.vertex}", f"out-degree {viol.degree}; d_u >= 2 is required"))

    gaps: dict[str, tuple[MonomialSum, ...]] = {}
    base: dict[str, MonomialSum] = {}
    family = None
    if family_doc is not None:
        family = _parse_family(family_doc, graph, names, errors)
    elif graph is not None:
        gdoc = doc.get("gaps", {})
        for v in vertices:
            raw = gdoc.get(v)
            want = graph.degree(v) - 1
            if not isinstance(raw, list) or len(raw) != want:
                errors.append((f"gaps.{v}", f"expected a list of {want} gap lengths"))
                continue
            vals = [expr(parse_gap, x, f"gaps.{v}[{k}]") for k, x in enumerate(raw)]
            if any(x is None for x in vals):
                continue
            for k, x in enumerate(vals):
                if not x.is_zero() and x.exact_sign() is not None and x.exact_sign() < 0:
                    errors.append((f"gaps.{v}[{k}]", "gap lengths must be >= 0"))
            if all(x.is_zero() for x in vals):
                errors.append((f"gaps.{v}", "at least one gap must be positive"))
            gaps[v] = tuple(vals)
        for v, raw in doc.get("base_points", {}).items():
            if v not in vset:
                errors.append((f"base_points.{v}", "unknown vertex"))
                continue
            x = expr(parse_sum, raw, f"base_points.{v}")
            if x is not None and not x.is_zero():
                base[v] = x
    query = [str(q) for q in doc.get("query", [])]
    for q in query:
        if q not in vset:
            errors.append(("query", f"unknown vertex {q!r}"))
    numeric = dict(DEFAULT_NUMERIC)
    for k, v in doc.get("numeric", {}).items():
        if k not in DEFAULT_NUMERIC or not isinstance(v, int) or v < (32 if k == "precision" else 0):
            errors.append((f"numeric.{k}", "unknown setting or bad value"))
        else:
            numeric[k] = v
    if errors:
        raise ValidationError(errors)
    return ProblemSpec(gens_out, vertices, edges, gaps, base, family, query, numeric, names)


def _parse_family(fd, graph: Digraph | None, names, errors) -> FamilySpec | None:
    if not isinstance(fd, dict):
        errors.append(("family", "family must be an object"))
        return None
    try:
        delta = Fraction(str(fd.get("delta")))
    except (ValueError, ZeroDivisionError):
        errors.append(("family.delta", "delta must be a rational literal"))
        return None
    if graph is None:
        return None
    mags: dict[str, tuple[Monomial, ...]] = {}
    signs: dict[str, tuple[int, ...]] = {}
    for v in graph.vertices:
        raw = fd.get("magnitudes", {}).get(v)
        if not isinstance(raw, list) or len(raw) != graph.degree(v):
            errors.append((f"family.magnitudes.{v}", f"expected {graph.degree(v)} magnitudes"))
            continue
        vals = []
        for k, x in enumerate(raw):
            try:
                s = parse_signed(x, names)
            except _ExprError as exc:
                errors.append((f"family.magnitudes.{v}[{k}]", str(exc)))
                continue
            if s.sign < 0:
                errors.append((f"family.magnitudes.{v}[{k}]", "magnitudes are positive"))
            vals.append(s.magnitude)
        mags[v] = tuple(vals)
        sg = fd.get("signs", {}).get(v, [1] * graph.degree(v))
        if not isinstance(sg, list) or len(sg) != graph.degree(v) or any(s not in (1, -1) for s in sg):
            errors.append((f"family.signs.{v}", "signs must be a list of +1/-1"))
            continue
        signs[v] = tuple(sg)
    from .construct import BadDelta, MagnitudeSumMismatch

    if not any(p.startswith("family") for p, _ in errors):
        try:
            build_equal_gap_family(graph, delta, mags, signs)
        except BadDelta as exc:
            errors.append(("family.delta", str(exc)))
        except MagnitudeSumMismatch as exc:
            errors.append(("family.magnitudes", str(exc)))
    return FamilySpec(delta, mags, signs)


def _ratio_str(r: SignedMonomial) -> str:
    return str(r)


def spec_to_dict(spec: ProblemSpec) -> dict:
    doc: dict[str, Any] = {
        "schema": SCHEMA,
        "generators": spec.generators,
        "vertices": list(spec.vertices),
        "edges": [],
        "query": list(spec.query),
        "numeric": dict(spec.numeric),
    }
    for e in spec.edges:
        ed = {"from": e.src, "to": e.dst}
        if e.ratio is not None:
            ed["ratio"] = _ratio_str(e.ratio)
        if e.label:
            ed["label"] = e.label
        doc["edges"].append(ed)
    if spec.family is not None:
        doc["family"] = {
            "delta": fraction_str(spec.family.delta),
            "magnitudes": {v: [str(m) for m in ms] for v, ms in spec.family.magnitudes.items()},
            "signs": {v: list(s) for v, s in spec.family.signs.items()},
        }
    else:
        doc["gaps"] = {v: [str(x) for x in xs] for v, xs in spec.gaps.items()}
        if spec.base_points:
            doc["base_points"] = {v: str(x) for v, x in spec.base_points.items()}
    return doc


def serialize(spec: ProblemSpec) -> str:
    """Canonical JSON text (sorted keys, canonical expressions)."""
    return json.dumps(spec_to_dict(spec), sort_keys=True, indent=2) + "\n"
