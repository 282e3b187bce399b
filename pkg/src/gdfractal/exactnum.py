"""Exact arithmetic over a finitely generated multiplicative group of positive reals.

Every positive number handled by the package is a :class:`Monomial`, a finite
product ``g1^e1 * g2^e2 * ...`` of generators raised to rational exponents.
Generators are either primes (created on demand when rational literals are
factored) or abstract reals such as ``lam`` or ``pi`` whose multiplicative
independence from everything else is declared by the user, never checked.

Q-linear combinations of monomials (:class:`MonomialSum`) carry lengths,
translations and interval endpoints.  Membership in the cones generated by a
finite set of monomials reduces to exact linear algebra on exponent vectors,
see :func:`membership` and :func:`cone_intersection_empty`.
"""
from __future__ import annotations

import math
import re
import threading
from contextlib import contextmanager
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from mpmath import iv, mpf
from mpmath.libmp import to_rational

from . import fm

__all__ = [
    "AbstractWithoutApprox",
    "ConeResult",
    "Enclosure",
    "ExactNumError",
    "Generator",
    "Indeterminate",
    "MembershipResult",
    "Monomial",
    "MonomialSum",
    "QMatrix",
    "SignedMonomial",
    "abstract_generator",
    "cone_intersection_empty",
    "eval_numeric",
    "exponent_matrix",
    "factor_rational",
    "fraction_str",
    "membership",
    "mono_mul",
    "mono_pow",
    "nullspace",
    "prime_generator",
    "sign",
]

Q = Fraction
CONES = ("Q", "Qstar", "Qplus", "QplusStar")


class ExactNumError(Exception):
    pass


class AbstractWithoutApprox(ExactNumError):
    """An abstract generator has no declared approximation."""


class Indeterminate(ExactNumError):
    """Enclosures could not separate a value from zero at the maximum precision."""


def fraction_str(q: Fraction) -> str:
    """Canonical rational string: lowest terms, sign on the numerator."""
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


# ---------------------------------------------------------------------------
# generators

_IDENT = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


@dataclass(frozen=True)
class Generator:
    """A multiplicative generator: a prime, or an abstract positive real."""

    name: str
    prime: int | None = None
    approx: str | None = field(default=None, compare=False, hash=False)

    def __post_init__(self):
        if self.prime is not None:
            if self.prime < 2 or not _is_prime(self.prime):
                raise ValueError(f"{self.prime} is not prime")
            if self.name != str(self.prime):
                raise ValueError("prime generators are named by their value")
        else:
            if not _IDENT.match(self.name):
                raise ValueError(f"bad abstract generator name {self.name!r}")
            if self.approx is not None and not (mpf(self.approx) > 0):
                raise ValueError(f"approximation for {self.name} must be positive")

    @property
    def kind(self) -> str:
        return "abstract" if self.prime is None else "prime"

    @property
    def is_prime(self) -> bool:
        return self.prime is not None

    def interval(self, prec: int):
        """Interval enclosure of the generator value at the ambient iv precision."""
        if self.prime is not None:
            return iv.mpf(self.prime)
        if self.approx is None:
            raise AbstractWithoutApprox(self.name)
        return iv.mpf(self.approx)


@lru_cache(maxsize=None)
def prime_generator(p: int) -> Generator:
    return Generator(str(p), prime=p)


def abstract_generator(name: str, approx: str | None = None) -> Generator:
    return Generator(name, None, approx)


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    # deterministic Miller-Rabin for n < 3.3e24
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41):
        if a % n == 0:
            continue
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _factor_int(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    if n > 10**12:
        from sympy import factorint  # slow import, only for big literals

        return {int(p): int(k) for p, k in factorint(n).items()}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


# ---------------------------------------------------------------------------
# monomials

class Monomial:
    """Positive real ``prod g**e`` with rational exponents, in canonical form.

    Zero exponents are never stored; factors are kept sorted by generator
    name, so equality and hashing are structural.
    """

    __slots__ = ("_exps", "_hash")

    def __init__(self, exps: Mapping[Generator, Fraction] | Iterable[tuple[Generator, Fraction]] = ()):
        items = exps.items() if isinstance(exps, Mapping) else exps
        acc: dict[Generator, Fraction] = {}
        for g, e in items:
            e = Fraction(e)
            if e:
                acc[g] = acc.get(g, Fraction(0)) + e
        self._exps = tuple(sorted(((g, e) for g, e in acc.items() if e), key=lambda t: t[0].name))
        self._hash = hash(self._exps)

    ONE: "Monomial"

    @classmethod
    def of(cls, g: Generator, e=1) -> "Monomial":
        return cls({g: Fraction(e)})

    @property
    def exponents(self) -> dict[Generator, Fraction]:
        return dict(self._exps)

    @property
    def generators(self) -> tuple[Generator, ...]:
        return tuple(g for g, _ in self._exps)

    def exponent(self, g: Generator) -> Fraction:
        for h, e in self._exps:
            if h == g:
                return e
        return Fraction(0)

    def items(self):
        return self._exps

    def is_one(self) -> bool:
        return not self._exps

    def __eq__(self, other):
        if isinstance(other, Monomial):
            return self._exps == other._exps
        return NotImplemented

    def __hash__(self):
        return self._hash

    def __mul__(self, other: "Monomial") -> "Monomial":
        if not isinstance(other, Monomial):
            return NotImplemented
        return Monomial(self._exps + other._exps)

    def __truediv__(self, other: "Monomial") -> "Monomial":
        if not isinstance(other, Monomial):
            return NotImplemented
        return Monomial(self._exps + tuple((g, -e) for g, e in other._exps))

    def __pow__(self, r) -> "Monomial":
        r = Fraction(r)
        return Monomial((g, e * r) for g, e in self._exps)

    def inverse(self) -> "Monomial":
        return self ** -1

    def sort_key(self):
        return tuple((g.name, e) for g, e in self._exps)

    def __lt__(self, other: "Monomial"):
        return self.sort_key() < other.sort_key()

    def rational_value(self) -> Fraction | None:
        """The exact rational value, or None when the monomial is irrational."""
        num, den = 1, 1
        for g, e in self._exps:
            if g.prime is None or e.denominator != 1:
                return None
            if e > 0:
                num *= g.prime ** int(e)
            else:
                den *= g.prime ** int(-e)
        return Fraction(num, den)

    def is_rational(self) -> bool:
        return self.rational_value() is not None

    def split_rational(self) -> tuple[Fraction, "Monomial"]:
        """Write self = q * k with q rational and k's prime exponents in [0, 1)."""
        q = Fraction(1)
        rest = []
        for g, e in self._exps:
            if g.prime is not None:
                fl = math.floor(e)
                if fl:
                    q *= Fraction(g.prime) ** fl
                if e - fl:
                    rest.append((g, e - fl))
            else:
                rest.append((g, e))
        return q, Monomial(rest)

    def abstract_generators(self) -> tuple[Generator, ...]:
        return tuple(g for g, _ in self._exps if g.prime is None)

    def __str__(self):
        return _mono_str(Fraction(1), self)

    def __repr__(self):
        return f"Monomial({self})"


Monomial.ONE = Monomial()


def _pow_str(g: Generator, e: Fraction) -> str:
    if e == 1:
        return g.name
    if e.denominator == 1 and e > 0:
        return f"{g.name}^{e.numerator}"
    return f"{g.name}^({fraction_str(e)})"


def _mono_str(coeff: Fraction, m: Monomial) -> str:
    # integral prime powers print as one fraction, the rest as sorted factors
    q = Fraction(coeff)
    rest = []
    for g, e in m.items():
        if g.prime is not None and e.denominator == 1:
            q *= Fraction(g.prime) ** int(e)
        else:
            rest.append(_pow_str(g, e))
    head = [] if (q == 1 and rest) else ["-" + fraction_str(-q) if q < 0 else fraction_str(q)]
    return "*".join(head + rest)


def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    return a * b


def mono_pow(a: Monomial, r) -> Monomial:
    return a ** Fraction(r)


def factor_rational(q) -> Monomial:
    """Embed a positive rational into the generator group via prime factorisation."""
    q = Fraction(q)
    if q <= 0:
        raise ValueError("factor_rational needs q > 0")
    exps: dict[Generator, Fraction] = {}
    for p, k in _factor_int(q.numerator).items():
        exps[prime_generator(p)] = Fraction(k)
    for p, k in _factor_int(q.denominator).items():
        exps[prime_generator(p)] = -Fraction(k)
    return Monomial(exps)


@dataclass(frozen=True)
class SignedMonomial:
    """A nonzero real with its sign carried separately from the magnitude."""

    sign: int
    magnitude: Monomial

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    @classmethod
    def from_fraction(cls, q) -> "SignedMonomial":
        q = Fraction(q)
        if q == 0:
            raise ValueError("zero has no signed-monomial form")
        return cls(1 if q > 0 else -1, factor_rational(abs(q)))

    def __mul__(self, other: "SignedMonomial") -> "SignedMonomial":
        return SignedMonomial(self.sign * other.sign, self.magnitude * other.magnitude)

    def __neg__(self):
        return SignedMonomial(-self.sign, self.magnitude)

    def as_sum(self) -> "MonomialSum":
        return MonomialSum.from_monomial(self.magnitude, self.sign)

    def rational_value(self) -> Fraction | None:
        v = self.magnitude.rational_value()
        return None if v is None else self.sign * v

    def __str__(self):
        return _mono_str(Fraction(self.sign), self.magnitude)


# ---------------------------------------------------------------------------
# Q-linear combinations

class MonomialSum:
    """Formal Q-linear combination of monomials.

    Canonical form: each term is keyed by a monomial whose prime exponents lie
    in [0, 1); integer prime powers are folded into the rational coefficient.
    Under the independence axiom distinct keys are Q-linearly independent, so
    two sums are equal as reals iff their term maps are equal.
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, Fraction] | Iterable[tuple[Monomial, Fraction]] = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[Monomial, Fraction] = {}
        for m, c in items:
            c = Fraction(c)
            if not c:
                continue
            q, k = m.split_rational()
            acc[k] = acc.get(k, Fraction(0)) + c * q
        self._terms = tuple(sorted(((k, c) for k, c in acc.items() if c), key=lambda t: t[0].sort_key()))
        self._hash = None

    ZERO: "MonomialSum"

    @classmethod
    def from_fraction(cls, q) -> "MonomialSum":
        return cls({Monomial.ONE: Fraction(q)})

    @classmethod
    def from_monomial(cls, m: Monomial, coeff=1) -> "MonomialSum":
        return cls({m: Fraction(coeff)})

    @classmethod
    def coerce(cls, x) -> "MonomialSum":
        if isinstance(x, MonomialSum):
            return x
        if isinstance(x, Monomial):
            return cls.from_monomial(x)
        if isinstance(x, SignedMonomial):
            return x.as_sum()
        return cls.from_fraction(Fraction(x))

    @property
    def terms(self) -> dict[Monomial, Fraction]:
        return dict(self._terms)

    def items(self):
        return self._terms

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self):
        return bool(self._terms)

    def __eq__(self, other):
        if not isinstance(other, MonomialSum):
            try:
                other = MonomialSum.coerce(other)
            except (TypeError, ValueError):
                return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._terms)
        return self._hash

    def __add__(self, other):
        other = MonomialSum.coerce(other)
        return MonomialSum(self._terms + other._terms)

    __radd__ = __add__

    def __neg__(self):
        return MonomialSum((m, -c) for m, c in self._terms)

    def __sub__(self, other):
        return self + (-MonomialSum.coerce(other))

    def __rsub__(self, other):
        return MonomialSum.coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return MonomialSum((m, c * other) for m, c in self._terms)
        if isinstance(other, SignedMonomial):
            return MonomialSum((m * other.magnitude, c * other.sign) for m, c in self._terms)
        other = MonomialSum.coerce(other)
        return MonomialSum((m1 * m2, c1 * c2) for m1, c1 in self._terms for m2, c2 in other._terms)

    __rmul__ = __mul__

    def __truediv__(self, q):
        q = Fraction(q)
        return MonomialSum((m, c / q) for m, c in self._terms)

    def rational_value(self) -> Fraction | None:
        if not self._terms:
            return Fraction(0)
        if len(self._terms) == 1 and self._terms[0][0].is_one():
            return self._terms[0][1]
        return None

    def is_rational(self) -> bool:
        return self.rational_value() is not None

    def as_monomial(self) -> Monomial | None:
        """The sum as a single positive monomial, or None if it is not one."""
        if len(self._terms) != 1:
            return None
        k, c = self._terms[0]
        if c <= 0:
            return None
        return factor_rational(c) * k

    def abstract_generators(self) -> set[Generator]:
        return {g for m, _ in self._terms for g in m.abstract_generators()}

    def exact_sign(self) -> int | None:
        """Sign when it is structurally evident (zero or a single term)."""
        if not self._terms:
            return 0
        if len(self._terms) == 1:
            return 1 if self._terms[0][1] > 0 else -1
        if all(c > 0 for _, c in self._terms):
            return 1
        if all(c < 0 for _, c in self._terms):
            return -1
        return None

    def __str__(self):
        if not self._terms:
            return "0"
        out = []
        for i, (m, c) in enumerate(self._terms):
            s = _mono_str(Fraction(1), factor_rational(abs(c)) * m)
            if i == 0:
                out.append(s if c > 0 else "-" + s)
            else:
                out.append(("+ " if c > 0 else "- ") + s)
        return " ".join(out)

    def __repr__(self):
        return f"MonomialSum({self})"


MonomialSum.ZERO = MonomialSum()


# ---------------------------------------------------------------------------
# numeric enclosures

@dataclass(frozen=True)
class Enclosure:
    """Closed interval [lo, hi] with exact binary-rational endpoints."""

    lo: Fraction
    hi: Fraction

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, x) -> bool:
        return self.lo <= Fraction(x) <= self.hi

    def __float__(self):
        return float(self.mid)

    def __add__(self, other: "Enclosure") -> "Enclosure":
        return Enclosure(self.lo + other.lo, self.hi + other.hi)


_IV_LOCK = threading.RLock()


@contextmanager
def _iv_prec(bits: int):
    # mpmath's interval context keeps precision globally
    with _IV_LOCK:
        old = iv.prec
        iv.prec = bits
        try:
            yield
        finally:
            iv.prec = old


def _iv_bounds(x) -> tuple[Fraction, Fraction]:
    a, b = x._mpi_
    return tuple(Fraction(int(p), int(q)) for p, q in (to_rational(a), to_rational(b)))


def _mono_interval(m: Monomial, prec: int):
    acc = iv.mpf(1)
    for g, e in m.items():
        base = g.interval(prec)
        if e.denominator == 1:
            acc = acc * base ** int(e)
        else:
            acc = acc * base ** (iv.mpf(e.numerator) / e.denominator)
    return acc


def eval_numeric(x, precision_bits: int = 128) -> Enclosure:
    """Rigorous enclosure of a monomial / sum, using declared approximations.

    Rational inputs give degenerate enclosures.  Raises
    :class:`AbstractWithoutApprox` when an abstract generator lacks ``approx``.
    """
    if precision_bits < 32:
        raise ValueError("precision_bits must be >= 32")
    x = MonomialSum.coerce(x)
    r = x.rational_value()
    if r is not None:
        return Enclosure(r, r)
    with _iv_prec(precision_bits):
        total = iv.mpf(0)
        for m, c in x.items():
            term = _mono_interval(m, precision_bits)
            cq = iv.mpf(c.numerator) / c.denominator if c.denominator != 1 else iv.mpf(c.numerator)
            total = total + cq * term
        return Enclosure(*_iv_bounds(total))


def sign(x, precision_bits: int = 128, max_bits: int = 1024) -> int:
    """Sign of an exact value: structural when possible, else by enclosure.

    Precision doubles from ``precision_bits`` up to ``max_bits``; raises
    :class:`Indeterminate` when zero is never excluded.
    """
    x = MonomialSum.coerce(x)
    s = x.exact_sign()
    if s is not None:
        return s
    bits = precision_bits
    while bits <= max_bits:
        enc = eval_numeric(x, bits)
        if enc.lo > 0:
            return 1
        if enc.hi < 0:
            return -1
        bits *= 2
    raise Indeterminate(str(x))


# ---------------------------------------------------------------------------
# rational linear algebra

@dataclass(frozen=True)
class QMatrix:
    rows: tuple[tuple[Fraction, ...], ...]
    ncols: int

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], ncols: int | None = None) -> "QMatrix":
        rr = tuple(tuple(Fraction(v) for v in r) for r in rows)
        n = ncols if ncols is not None else (len(rr[0]) if rr else 0)
        if any(len(r) != n for r in rr):
            raise ValueError("ragged matrix")
        return cls(rr, n)

    @classmethod
    def identity(cls, n: int) -> "QMatrix":
        return cls.from_rows([[1 if i == j else 0 for j in range(n)] for i in range(n)], n)

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def matvec(self, v: Sequence) -> tuple[Fraction, ...]:
        return tuple(sum((a * Fraction(b) for a, b in zip(r, v)), Fraction(0)) for r in self.rows)

    def __sub__(self, other: "QMatrix") -> "QMatrix":
        return QMatrix.from_rows([[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(self.rows, other.rows)], self.ncols)

    def transpose(self) -> "QMatrix":
        return QMatrix.from_rows([[self.rows[i][j] for i in range(self.nrows)] for j in range(self.ncols)], self.nrows)

    def rank(self) -> int:
        return len(_rref([list(r) for r in self.rows], self.ncols)[1])

    def det(self) -> Fraction:
        n = self.nrows
        if n != self.ncols:
            raise ValueError("det of non-square matrix")
        a = [list(r) for r in self.rows]
        d = Fraction(1)
        for c in range(n):
            piv = next((r for r in range(c, n) if a[r][c]), None)
            if piv is None:
                return Fraction(0)
            if piv != c:
                a[c], a[piv] = a[piv], a[c]
                d = -d
            d *= a[c][c]
            for r in range(c + 1, n):
                f = a[r][c] / a[c][c]
                if f:
                    for k in range(c, n):
                        a[r][k] -= f * a[c][k]
        return d

    def leading_minors(self) -> list[Fraction]:
        return [QMatrix.from_rows([r[:k] for r in self.rows[:k]], k).det() for k in range(1, self.nrows + 1)]

    def __str__(self):
        return "[" + ", ".join("[" + ", ".join(fraction_str(v) for v in r) + "]" for r in self.rows) + "]"


def _rref(a: list[list[Fraction]], ncols: int) -> tuple[list[list[Fraction]], list[int]]:
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(a)) if a[i][c]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = 1 / a[r][c]
        a[r] = [v * inv for v in a[r]]
        for i in range(len(a)):
            if i != r and a[i][c]:
                f = a[i][c]
                a[i] = [vi - f * vr for vi, vr in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == len(a):
            break
    return a, pivots


def _primitive(v: Sequence[Fraction], fix_sign: bool = True) -> tuple[Fraction, ...]:
    """Scale a nonzero vector to a primitive integer vector.

    With ``fix_sign`` the first nonzero entry is made positive; otherwise
    only positive scaling is applied.
    """
    den = 1
    for x in v:
        den = den * x.denominator // math.gcd(den, x.denominator)
    ints = [int(x * den) for x in v]
    g = 0
    for x in ints:
        g = math.gcd(g, x)
    if g == 0:
        return tuple(Fraction(0) for _ in v)
    if fix_sign and next(x for x in ints if x) < 0:
        g = -g
    return tuple(Fraction(x, g) for x in ints)


def nullspace(m: QMatrix) -> list[tuple[Fraction, ...]]:
    """Basis of {v : m v = 0} over Q, each vector primitive-integer normalised."""
    a, pivots = _rref([list(r) for r in m.rows], m.ncols)
    free = [c for c in range(m.ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * m.ncols
        v[f] = Fraction(1)
        for i, p in enumerate(pivots):
            v[p] = -a[i][f]
        basis.append(_primitive(v))
    return basis


def _solve_affine(m: QMatrix, t: Sequence[Fraction]):
    """Particular solution (free vars zero) of m w = t plus a nullspace basis, or None."""
    aug = [list(r) + [Fraction(ti)] for r, ti in zip(m.rows, t)]
    a, pivots = _rref(aug, m.ncols + 1)
    if m.ncols in pivots:
        return None
    w = [Fraction(0)] * m.ncols
    for i, p in enumerate(pivots):
        w[p] = a[i][m.ncols]
    return tuple(w), nullspace(m)


def exponent_matrix(monos: Sequence[Monomial], extra: Sequence[Monomial] = ()) -> tuple[QMatrix, list[Generator]]:
    """Rows = generators (sorted by name), columns = exponent vectors of ``monos``.

    Generators appearing only in ``extra`` are included as rows too, so the
    matrix can be paired with a target vector.
    """
    gens = sorted({g for m in list(monos) + list(extra) for g in m.generators}, key=lambda g: g.name)
    rows = [[m.exponent(g) for m in monos] for g in gens]
    return QMatrix.from_rows(rows, len(monos)), gens


# ---------------------------------------------------------------------------
# cone membership

@dataclass(frozen=True)
class MembershipResult:
    member: bool
    witness: tuple[Fraction, ...] | None = None

    def __bool__(self):
        return self.member


def _affine_cone_point(w0, basis, cone: str, target_is_one: bool):
    n = len(w0)
    k = len(basis)
    if cone == "Q":
        return w0
    if cone == "Qstar":
        if not target_is_one:
            return w0
        return basis[0] if basis else None
    # nonnegative cones: w = w0 + sum y_j basis_j >= 0
    ineqs = []
    for i in range(n):
        ineqs.append((tuple(b[i] for b in basis), -w0[i]))
    if cone == "QplusStar" and target_is_one:
        ineqs.append((tuple(sum(b) for b in basis), 1 - sum(w0)))
    y = fm.feasible_point(ineqs, k)
    if y is None:
        return None
    w = tuple(w0[i] + sum((y[j] * basis[j][i] for j in range(k)), Fraction(0)) for i in range(n))
    if cone == "QplusStar" and target_is_one:
        w = _primitive(w, fix_sign=False)
    return w


def membership(target: Monomial, a: Sequence[Monomial], cone: str) -> MembershipResult:
    """Decide ``target in a^cone`` exactly; the witness lists one exponent per element of ``a``.

    ``cone`` is one of ``Q``, ``Qstar`` (nonzero exponents), ``Qplus``
    (nonnegative) and ``QplusStar`` (nonnegative, nonzero).
    """
    if cone not in CONES:
        raise ValueError(f"unknown cone {cone!r}")
    a = list(a)
    m, gens = exponent_matrix(a, [target])
    t = [target.exponent(g) for g in gens]
    if not a:
        ok = target.is_one() and cone in ("Q", "Qplus")
        return MembershipResult(ok, () if ok else None)
    sol = _solve_affine(m, t)
    if sol is None:
        return MembershipResult(False)
    w0, basis = sol
    w = _affine_cone_point(w0, basis, cone, target.is_one())
    if w is None:
        return MembershipResult(False)
    return MembershipResult(True, tuple(w))


def product_of_powers(a: Sequence[Monomial], w: Sequence) -> Monomial:
    out = Monomial.ONE
    for m, e in zip(a, w):
        out = out * m ** Fraction(e)
    return out


@dataclass(frozen=True)
class ConeResult:
    empty: bool
    p: tuple[Fraction, ...] | None = None
    q: tuple[Fraction, ...] | None = None

    def __bool__(self):
        return self.empty


def cone_intersection_empty(a1: Sequence[Monomial], a2: Sequence[Monomial]) -> ConeResult:
    """Decide whether ``a1^{Q*}`` and ``a2^{Q+*}`` are disjoint.

    Solves ``prod a1^p = prod a2^q`` on exponent coordinates: the solution
    space is the nullspace of ``[B | -C]``; Fourier-Motzkin then tests it
    against ``q >= 0, sum q >= 1, +-p_j >= 1`` (cone scaling turns the strict
    conditions ``q != 0, p != 0`` into these).
    """
    a1, a2 = list(a1), list(a2)
    if not a1 or not a2:
        return ConeResult(True)
    n1, n2 = len(a1), len(a2)
    m, gens = exponent_matrix(a1 + a2)
    rows = [list(r[:n1]) + [-v for v in r[n1:]] for r in m.rows]
    basis = nullspace(QMatrix.from_rows(rows, n1 + n2))
    if not basis:
        return ConeResult(True)
    k = len(basis)
    base = [(tuple(b[n1 + i] for b in basis), Fraction(0)) for i in range(n2)]
    base.append((tuple(sum(b[n1:]) for b in basis), Fraction(1)))
    for j in range(n1):
        for s in (1, -1):
            ineqs = base + [(tuple(s * b[j] for b in basis), Fraction(1))]
            y = fm.feasible_point(ineqs, k)
            if y is None:
                continue
            v = [sum((y[t] * basis[t][i] for t in range(k)), Fraction(0)) for i in range(n1 + n2)]
            v = _primitive(v, fix_sign=False)
            return ConeResult(False, tuple(v[:n1]), tuple(v[n1:]))
    return ConeResult(True)
