"""
Univariate polynomials over GF(q) and the minimum complementary polynomial.

Coefficients are stored in ascending degree order with no trailing zeros;
the zero polynomial has an empty coefficient tuple.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .errors import DivisionByZero, FieldMismatch, NoConstantTerm, SearchExhausted
from .galois import GaloisField


def _canonical(coeffs: Sequence[int]) -> tuple[int, ...]:
    out = [int(c) for c in coeffs]
    while out and out[-1] == 0:
        out.pop()
    return tuple(out)


@dataclass(frozen=True)
class GfPoly:
    field: GaloisField
    coeffs: tuple[int, ...]

    def __init__(self, field: GaloisField, coeffs: Sequence[int]):
        coeffs = _canonical(coeffs)
        if any(c < 0 or c >= field.q for c in coeffs):
            raise ValueError(f"coefficients {coeffs} outside GF({field.q})")
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def monomial(cls, field: GaloisField, degree: int, coef: int = 1) -> "GfPoly":
        return cls(field, [0] * degree + [coef])

    @classmethod
    def parse(cls, field: GaloisField, text: str) -> "GfPoly":
        return cls(field, parse_poly(text))

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def coef(self, i: int) -> int:
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else 0

    def padded(self, length: int) -> tuple[int, ...]:
        """Coefficients zero-padded (never truncated) to ``length``."""
        if length < len(self.coeffs):
            raise ValueError(f"degree {self.degree} does not fit in {length} taps")
        return self.coeffs + (0,) * (length - len(self.coeffs))

    def _check(self, other: "GfPoly"):
        if self.field != other.field:
            raise FieldMismatch(f"{self.field!r} vs {other.field!r}")

    def __add__(self, other: "GfPoly") -> "GfPoly":
        self._check(other)
        n = max(len(self.coeffs), len(other.coeffs))
        f = self.field
        return GfPoly(f, [f.add(self.coef(i), other.coef(i)) for i in range(n)])

    def __neg__(self) -> "GfPoly":
        return GfPoly(self.field, [self.field.neg(c) for c in self.coeffs])

    def __sub__(self, other: "GfPoly") -> "GfPoly":
        return self + (-other)

    def __mul__(self, other: "GfPoly") -> "GfPoly":
        return poly_mul(self, other)

    def scale(self, c: int) -> "GfPoly":
        return GfPoly(self.field, [self.field.mul(c, x) for x in self.coeffs])

    def __call__(self, x: int) -> int:
        f = self.field
        acc = 0
        for c in reversed(self.coeffs):
            acc = f.add(f.mul(acc, x), c)
        return acc

    def __str__(self) -> str:
        return format_poly(self.coeffs)


def poly_mul(u: GfPoly, v: GfPoly) -> GfPoly:
    """Schoolbook product."""
    u._check(v)
    f = u.field
    if u.is_zero() or v.is_zero():
        return GfPoly(f, [])
    out = [0] * (len(u.coeffs) + len(v.coeffs) - 1)
    for i, a in enumerate(u.coeffs):
        if a == 0:
            continue
        for j, b in enumerate(v.coeffs):
            out[i + j] = f.add(out[i + j], f.mul(a, b))
    return GfPoly(f, out)


def poly_divmod(u: GfPoly, v: GfPoly) -> tuple[GfPoly, GfPoly]:
    """Long division: returns (quotient, remainder) with deg r < deg v."""
    u._check(v)
    if v.is_zero():
        raise DivisionByZero("polynomial division by zero")
    f = u.field
    rem = list(u.coeffs)
    dv = v.degree
    lead_inv = f.inv(v.coeffs[-1])
    quot = [0] * max(len(rem) - dv, 0)
    while len(rem) - 1 >= dv and rem:
        shift = len(rem) - 1 - dv
        c = f.mul(rem[-1], lead_inv)
        quot[shift] = c
        for i, vi in enumerate(v.coeffs):
            rem[shift + i] = f.sub(rem[shift + i], f.mul(c, vi))
        rem = list(_canonical(rem))
    return GfPoly(f, quot), GfPoly(f, rem)


class Complement(NamedTuple):
    z: GfPoly
    l: int
    N: int
    feedback_coeff: int


def min_complementary(a: GfPoly, max_degree: int | None = None) -> Complement:
    """Smallest N > deg(a) with a(x) | x^N - c for a nonzero constant c.

    Returns z = (x^N - c)/a, so that a*z == x^N - c holds exactly, together
    with l = N - deg(a) and c.  A constant a is the degenerate case: the
    dual machine has no memory (z = 1, N = 0).

    The scan keeps r = x^N mod a and advances it with one shift-and-reduce
    per step.  The order of x modulo a (up to a constant) is at most
    q^n - 1, so N <= n + q^n - 1 always succeeds.
    """
    f = a.field
    if a.is_zero() or a.coeffs[0] == 0:
        raise NoConstantTerm(f"{a} has no constant term")
    n = a.degree
    if n == 0:
        return Complement(GfPoly(f, [1]), 0, 0, 1)

    limit = n + f.q**n - 1 if max_degree is None else max_degree
    lead_inv = f.inv(a.coeffs[-1])
    # x^n mod a = -(a_0 + ... + a_{n-1} x^{n-1}) / a_n
    r = [f.neg(f.mul(c, lead_inv)) for c in a.coeffs[:-1]]
    for N in range(n + 1, limit + 1):
        top = r[-1]
        r = [0] + r[:-1]
        if top:
            for i in range(n):
                r[i] = f.sub(r[i], f.mul(top, f.mul(a.coeffs[i], lead_inv)))
        if r[0] != 0 and not any(r[1:]):
            c = r[0]
            target = GfPoly.monomial(f, N) - GfPoly(f, [c])
            z, rem = poly_divmod(target, a)
            assert rem.is_zero()
            return Complement(z, N - n, N, c)
    raise SearchExhausted(f"no N <= {limit} with {a} | x^N - c")


# -- text formats ---------------------------------------------------------

_TERM_RE = re.compile(r"^(\d*)\s*\*?\s*(x(?:\^(\d+))?)?$")


def parse_poly(text: str) -> tuple[int, ...]:
    """Parse ``"1+3x+2x^2"`` or ``"1,3,2"`` into ascending coefficients."""
    text = text.strip().replace(" ", "")
    if not text:
        raise ValueError("empty polynomial")
    if "x" not in text and "," in text or text.isdigit():
        return _canonical(int(c) for c in text.split(","))
    coeffs: dict[int, int] = {}
    for term in text.split("+"):
        m = _TERM_RE.match(term)
        if not term or not m:
            raise ValueError(f"bad polynomial term {term!r} in {text!r}")
        num, xpart, power = m.groups()
        if xpart is None:
            deg, coef = 0, int(num)
        else:
            deg = int(power) if power else 1
            coef = int(num) if num else 1
        if deg in coeffs:
            raise ValueError(f"repeated degree {deg} in {text!r}")
        coeffs[deg] = coef
    out = [0] * (max(coeffs) + 1)
    for d, c in coeffs.items():
        out[d] = c
    return _canonical(out)


def format_poly(coeffs: Sequence[int]) -> str:
    terms = []
    for i, c in enumerate(coeffs):
        if c == 0:
            continue
        if i == 0:
            terms.append(str(c))
        else:
            lead = "" if c == 1 else str(c)
            terms.append(f"{lead}x" + (f"^{i}" if i > 1 else ""))
    return "+".join(terms) if terms else "0"


def __getattr__(name):
    # dual_taps needs CodeSpec, which itself depends on this module
    if name in ("dual_taps", "DualSpec"):
        from . import dualspec
        return getattr(dualspec, name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
