"""
Table-driven arithmetic in GF(p^m) for q = p^m <= 256.

Elements are integer labels in [0, q).  The label of an element is the
base-p expansion of its polynomial representation, least significant digit
first: label = d_0 + d_1*p + ... + d_{m-1}*p^{m-1} stands for
d_0 + d_1*x + ... + d_{m-1}*x^{m-1} modulo the defining polynomial.  For
p = 2 this is the usual bit pattern, so addition is XOR.

Full q-by-q addition and multiplication tables are built once per field and
shared read-only; the decoders are pure table lookups on top of them.
"""

from __future__ import annotations

import re
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import NotPrime, ReduciblePolynomial, UnsupportedSize, ZeroScalar

MAX_FIELD_SIZE = 256


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    f = 2
    while f * f <= n:
        if n % f == 0:
            return False
        f += 1
    return True


def _trim(u: list[int]) -> list[int]:
    while u and u[-1] == 0:
        u.pop()
    return u


def _prime_poly_mod(u: Sequence[int], v: Sequence[int], p: int) -> list[int]:
    """Remainder of u modulo v over GF(p); ascending coefficient lists."""
    u = _trim([c % p for c in u])
    v = _trim([c % p for c in v])
    inv_lead = pow(v[-1], p - 2, p)
    while len(u) >= len(v):
        coef = (u[-1] * inv_lead) % p
        shift = len(u) - len(v)
        for i, vi in enumerate(v):
            u[shift + i] = (u[shift + i] - coef * vi) % p
        _trim(u)
    return u


def _monic_polys(p: int, degree: int):
    """All monic polynomials of the given degree, in increasing label order."""
    for low in range(p**degree):
        coeffs = []
        for _ in range(degree):
            coeffs.append(low % p)
            low //= p
        yield coeffs + [1]


def is_irreducible(poly: Sequence[int], p: int) -> bool:
    """Trial division by every monic polynomial of degree <= deg/2."""
    poly = _trim([c % p for c in poly])
    deg = len(poly) - 1
    if deg < 1:
        return False
    for d in range(1, deg // 2 + 1):
        for g in _monic_polys(p, d):
            if not _prime_poly_mod(poly, g, p):
                return False
    return True


def _x_order(poly: Sequence[int], p: int) -> int:
    """Multiplicative order of x modulo a monic irreducible poly (0 if x | poly)."""
    m = len(poly) - 1
    if poly[0] % p == 0:
        return 0
    r = _prime_poly_mod([0, 1], poly, p)
    for k in range(1, p**m):
        if r == [1]:
            return k
        r = _prime_poly_mod([0] + r, poly, p)
    return 0


@lru_cache(maxsize=None)
def default_irreducible(p: int, m: int) -> tuple[int, ...]:
    """Smallest-label primitive polynomial of degree m over GF(p).

    For p = 2 this reproduces the usual Conway choices (x^2+x+1, x^3+x+1,
    x^4+x+1, x^8+x^4+x^3+x^2+1).
    """
    for cand in _monic_polys(p, m):
        if cand[0] and is_irreducible(cand, p) and _x_order(cand, p) == p**m - 1:
            return tuple(cand)
    raise UnsupportedSize(f"no primitive polynomial found for GF({p}^{m})")


class GaloisField:
    """GF(p^m) with precomputed add/sub/mul/inverse tables.

    Instances are immutable and compare equal when (p, m, irreducible)
    agree.  Use :func:`field` to get cached instances.
    """

    def __init__(self, p: int, m: int = 1, irreducible: Sequence[int] | str = "default"):
        if not _is_prime(p):
            raise NotPrime(f"{p} is not prime")
        if m < 1:
            raise UnsupportedSize(f"extension degree must be >= 1, got {m}")
        q = p**m
        if q > MAX_FIELD_SIZE:
            raise UnsupportedSize(f"GF({p}^{m}) has {q} > {MAX_FIELD_SIZE} elements")

        if m == 1:
            irr: tuple[int, ...] = ()
        elif isinstance(irreducible, str):
            if irreducible != "default":
                raise ValueError(f"unknown irreducible spec {irreducible!r}")
            irr = default_irreducible(p, m)
        else:
            irr = tuple(int(c) % p for c in irreducible)
            irr = tuple(_trim(list(irr)))
            if len(irr) != m + 1:
                raise ReduciblePolynomial(f"polynomial {irr} does not have degree {m}")
            if irr[-1] != 1:
                lead_inv = pow(irr[-1], p - 2, p)
                irr = tuple((c * lead_inv) % p for c in irr)
            if not is_irreducible(irr, p):
                raise ReduciblePolynomial(f"{irr} is reducible over GF({p})")

        self.p, self.m, self.q = p, m, q
        self.irreducible = irr
        self.is_default = m == 1 or irr == default_irreducible(p, m)

        labels = np.arange(q)
        digits = np.stack([(labels // p**i) % p for i in range(m)], axis=-1)
        weights = p ** np.arange(m)

        add = ((digits[:, None, :] + digits[None, :, :]) % p) @ weights
        neg = ((-digits) % p) @ weights
        sub = add[:, neg]

        # Polynomial product of digit vectors, then reduction by the modulus.
        prod = np.zeros((q, q, 2 * m - 1), dtype=np.int64)
        for i in range(m):
            for j in range(m):
                prod[:, :, i + j] += np.outer(digits[:, i], digits[:, j])
        prod %= p
        for k in range(2 * m - 2, m - 1, -1):
            lead = prod[:, :, k].copy()
            for i in range(m):
                prod[:, :, k - m + i] = (prod[:, :, k - m + i] - lead * irr[i]) % p
            prod[:, :, k] = 0
        mul = prod[:, :, :m] @ weights

        inv = np.zeros(q, dtype=np.int64)
        for a in range(1, q):
            inv[a] = int(np.flatnonzero(mul[a] == 1)[0])

        self.digits = digits
        self.add_table = add.astype(np.int64)
        self.sub_table = sub.astype(np.int64)
        self.mul_table = mul.astype(np.int64)
        self.neg_table = neg.astype(np.int64)
        self.inv_table = inv
        for arr in (self.digits, self.add_table, self.sub_table, self.mul_table,
                    self.neg_table, self.inv_table):
            arr.flags.writeable = False
        self._perm_cache: dict[int, np.ndarray] = {}

    # -- identity -------------------------------------------------------
    def _key(self):
        return (self.p, self.m, self.irreducible)

    def __eq__(self, other):
        return isinstance(other, GaloisField) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return f"GaloisField({self.descriptor!r})"

    @property
    def descriptor(self) -> str:
        """Text form: ``gf<q>`` or ``gf<p>^<m>:<c0,...,cm>``."""
        if self.is_default:
            return f"gf{self.q}"
        return f"gf{self.p}^{self.m}:" + ",".join(str(c) for c in self.irreducible)

    @property
    def bits_per_symbol(self) -> int | None:
        """log2(q) when q is a power of two, else None."""
        if self.p == 2:
            return self.m
        return None

    # -- scalar arithmetic --------------------------------------------------
    def add(self, a: int, b: int) -> int:
        return int(self.add_table[a, b])

    def sub(self, a: int, b: int) -> int:
        return int(self.sub_table[a, b])

    def neg(self, a: int) -> int:
        return int(self.neg_table[a])

    def mul(self, a: int, b: int) -> int:
        return int(self.mul_table[a, b])

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("0 has no multiplicative inverse")
        return int(self.inv_table[a])

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def mul_permutation(self, h: int) -> np.ndarray:
        """The bijection j -> j*h as an index array (entry j holds j*h)."""
        h = int(h)
        if h % self.q == 0:
            raise ZeroScalar("multiplication by 0 is not a permutation")
        perm = self._perm_cache.get(h)
        if perm is None:
            perm = self.mul_table[:, h].copy()
            perm.flags.writeable = False
            self._perm_cache[h] = perm
        return perm


@lru_cache(maxsize=None)
def _cached_field(p: int, m: int, irreducible) -> GaloisField:
    return GaloisField(p, m, irreducible)


def field(p: int, m: int = 1, irreducible: Sequence[int] | str = "default") -> GaloisField:
    """Return a (cached) GaloisField."""
    if not isinstance(irreducible, str):
        irreducible = tuple(int(c) for c in irreducible)
    return _cached_field(p, m, irreducible)


field_new = field


def _prime_power(q: int) -> tuple[int, int]:
    if q < 2:
        raise UnsupportedSize(f"{q} is not a prime power")
    p = next(d for d in range(2, q + 1) if q % d == 0)
    m, r = 0, q
    while r % p == 0:
        r //= p
        m += 1
    if r != 1:
        raise UnsupportedSize(f"{q} is not a prime power")
    return p, m


_FIELD_RE = re.compile(r"^gf(\d+)(?:\^(\d+))?(?::([\d,\s]+))?$", re.IGNORECASE)


def parse_field(text: str) -> GaloisField:
    """Parse ``gf4``, ``gf5`` or ``gf2^2:1,1,1`` (ascending coefficients)."""
    match = _FIELD_RE.match(text.strip())
    if not match:
        raise ValueError(f"bad field descriptor {text!r}")
    base, exp, coeffs = match.groups()
    if exp is None:
        if coeffs is not None:
            raise ValueError(f"explicit polynomial needs the gf<p>^<m> form: {text!r}")
        q = int(base)
        if q > MAX_FIELD_SIZE:
            raise UnsupportedSize(f"GF({q}) exceeds {MAX_FIELD_SIZE} elements")
        p, m = _prime_power(q)
        return field(p, m)
    p, m = int(base), int(exp)
    if coeffs is None:
        return field(p, m)
    return field(p, m, [int(c) for c in coeffs.split(",")])
