"""Arithmetic in GF(p^m).

Elements are integer codes ``sum(c_i * p**i)`` of their coefficient vectors
over GF(p), lowest degree first.  All operations accept Python ints or numpy
integer arrays and broadcast like numpy ufuncs.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Sequence

import numpy as np

MAX_ORDER = 1 << 20
# q*q tables above this size are not built; callers fall back to log/exp.
TABLE_LIMIT = 256


class FieldError(ValueError):
    pass


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    r = math.isqrt(n)
    for d in range(3, r + 1, 2):
        if n % d == 0:
            return False
    return True


def prime_factors(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def prime_power(q: int) -> tuple[int, int]:
    """Return ``(p, m)`` with ``q == p**m``; raise if q is not a prime power."""
    if q < 2:
        raise FieldError(f"{q} is not a prime power")
    fs = prime_factors(q)
    if len(fs) != 1:
        raise FieldError(f"{q} is not a prime power")
    p = fs[0]
    m = round(math.log(q, p))
    while p**m < q:
        m += 1
    while p**m > q:
        m -= 1
    return p, m


def is_prime_power(q: int) -> bool:
    try:
        prime_power(q)
    except FieldError:
        return False
    return True


def prime_powers(limit: int) -> list[int]:
    return list(iter_prime_powers(limit))


def iter_prime_powers(limit: int | None = None):
    """Prime powers 2, 3, 4, 5, 7, 8, ... in increasing order."""
    q = 2
    while limit is None or q <= limit:
        if is_prime_power(q):
            yield q
        q += 1


# -- polynomials over GF(p): lists of ints, lowest degree first -------------

def _trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _pmod(a: list[int], f: list[int], p: int) -> list[int]:
    a = _trim([x % p for x in a])
    df = len(f) - 1
    inv_lead = pow(f[-1], p - 2, p)
    while len(a) - 1 >= df:
        c = a[-1] * inv_lead % p
        shift = len(a) - 1 - df
        for i, fi in enumerate(f):
            a[shift + i] = (a[shift + i] - c * fi) % p
        _trim(a)
    return a


def _pmulmod(a: list[int], b: list[int], f: list[int], p: int) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _pmod(out, f, p)


def _ppowmod(a: list[int], e: int, f: list[int], p: int) -> list[int]:
    result = [1]
    base = _pmod(list(a), f, p)
    while e:
        if e & 1:
            result = _pmulmod(result, base, f, p)
        base = _pmulmod(base, base, f, p)
        e >>= 1
    return result


def _pgcd(a: list[int], b: list[int], p: int) -> list[int]:
    a, b = _trim([x % p for x in a]), _trim([x % p for x in b])
    while b:
        a, b = b, _pmod(a, b, p)
    return a


def _psub(a: list[int], b: list[int], p: int) -> list[int]:
    n = max(len(a), len(b))
    a = a + [0] * (n - len(a))
    b = b + [0] * (n - len(b))
    return _trim([(x - y) % p for x, y in zip(a, b)])


def is_irreducible(poly: Sequence[int], p: int) -> bool:
    """Rabin's irreducibility test for a polynomial over GF(p)."""
    f = _trim([c % p for c in poly])
    m = len(f) - 1
    if m < 1:
        return False
    if m == 1:
        return True
    x = [0, 1]
    if _psub(_ppowmod(x, p**m, f, p), x, p):
        return False
    for r in prime_factors(m):
        h = _psub(_ppowmod(x, p ** (m // r), f, p), x, p)
        if len(_pgcd(f, h, p)) != 1:
            return False
    return True


def is_primitive_polynomial(poly: Sequence[int], p: int) -> bool:
    f = _trim([c % p for c in poly])
    m = len(f) - 1
    if m < 1 or f[-1] != 1 or f[0] == 0 or not is_irreducible(f, p):
        return False
    order = p**m - 1
    if m == 1:
        g = (-f[0]) % p
        return all(pow(g, order // r, p) != 1 for r in prime_factors(order)) if order > 1 else True
    return all(_ppowmod([0, 1], order // r, f, p) != [1] for r in prime_factors(order))


def _code_to_poly(code: int, p: int, m: int) -> list[int]:
    return [(code // p**i) % p for i in range(m)]


def search_primitive_polynomial(p: int, m: int, seed: int | None = None) -> tuple[int, ...]:
    """Find a monic primitive polynomial of degree m over GF(p).

    With ``seed=None`` the lexicographically smallest one (by integer code of
    the low coefficients) is returned; otherwise candidates are drawn from a
    seeded random source.
    """
    count = p**m
    if seed is None:
        candidates = range(count)
    else:
        rng = random.Random(seed)
        candidates = (rng.randrange(count) for _ in range(200 * m * m + 1000))
    for code in candidates:
        f = _code_to_poly(code, p, m) + [1]
        if is_primitive_polynomial(f, p):
            return tuple(f)
    raise FieldError(f"no primitive polynomial found for GF({p}^{m})")


@lru_cache(maxsize=None)
def default_modulus(p: int, m: int) -> tuple[int, ...]:
    from ._moduli import PRIMITIVE_POLYNOMIALS

    f = PRIMITIVE_POLYNOMIALS.get((p, m))
    if f is not None:
        return f
    return search_primitive_polynomial(p, m, seed=p * 1000 + m)


class GaloisField:
    """The finite field GF(p^m) with a fixed monic irreducible modulus.

    The primitive element ``alpha`` is the class of ``x`` whenever the
    modulus is primitive (true for all default moduli).
    """

    def __init__(self, p: int, m: int = 1, modulus: Sequence[int] | None = None):
        if not is_prime(p):
            raise FieldError(f"characteristic {p} is not prime")
        if m < 1:
            raise FieldError("degree must be >= 1")
        if p**m > MAX_ORDER:
            raise FieldError(f"GF({p}^{m}) exceeds the supported size 2^20")
        if modulus is None:
            modulus = default_modulus(p, m)
        modulus = tuple(int(c) % p for c in modulus)
        if len(modulus) != m + 1 or modulus[-1] != 1:
            raise FieldError(f"modulus must be monic of degree {m}")
        if not is_irreducible(modulus, p):
            raise FieldError(f"modulus {modulus} is reducible over GF({p})")
        self.p = p
        self.m = m
        self.order = p**m
        self.modulus = modulus
        self._build_tables()

    # -- construction -----------------------------------------------------

    def _times_x(self, v: int) -> int:
        p, m = self.p, self.m
        if m == 1:
            return v * (-self.modulus[0]) % p
        if p == 2:
            v <<= 1
            if (v >> m) & 1:
                v ^= self._modulus_code
            return v
        top = v // p ** (m - 1)
        v = (v % p ** (m - 1)) * p
        return self._add_scalar(v, self._reduction[top])

    def _build_tables(self) -> None:
        p, m, q = self.p, self.m, self.order
        self._modulus_code = sum(c * p**i for i, c in enumerate(self.modulus))
        self._pows = [p**i for i in range(m)]
        low = self.modulus[:-1]
        self._reduction = [
            sum(((-c * fi) % p) * p**i for i, fi in enumerate(low)) for c in range(p)
        ]
        exp = np.zeros(2 * (q - 1) if q > 2 else 2, dtype=np.int64)
        log = np.zeros(q, dtype=np.int64)
        # the class of x generates the group iff the modulus is primitive
        gen = p if m > 1 else (-self.modulus[0]) % p
        v = 1
        period = 0
        for i in range(q - 1):
            if i and v == 1:
                break
            exp[i] = v
            log[v] = i
            v = self._times_x(v)
            period += 1
        if period != q - 1 or v != 1:
            gen = self._find_generator()
            v = 1
            for i in range(q - 1):
                exp[i] = v
                log[v] = i
                v = self._mul_slow(v, gen)
        exp[q - 1 :] = exp[: len(exp) - (q - 1)]
        self.primitive_element = gen
        self._exp = exp
        self._log = log

    def _mul_slow(self, a: int, b: int) -> int:
        pa = _code_to_poly(a, self.p, self.m)
        pb = _code_to_poly(b, self.p, self.m)
        r = _pmulmod(pa, pb, list(self.modulus), self.p)
        return sum(c * self.p**i for i, c in enumerate(r))

    def _find_generator(self) -> int:
        q = self.order
        factors = prime_factors(q - 1)
        for g in range(2, q):
            ok = True
            for r in factors:
                e, acc, base = (q - 1) // r, 1, g
                while e:
                    if e & 1:
                        acc = self._mul_slow(acc, base)
                    base = self._mul_slow(base, base)
                    e >>= 1
                if acc == 1:
                    ok = False
                    break
            if ok:
                return g
        raise FieldError("no primitive element")  # unreachable for a field

    # -- identity ---------------------------------------------------------

    @property
    def q(self) -> int:
        return self.order

    @property
    def alpha(self) -> int:
        return self.primitive_element

    @property
    def is_prime_field(self) -> bool:
        return self.m == 1

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, GaloisField)
            and self.p == other.p
            and self.modulus == other.modulus
        )

    def __hash__(self) -> int:
        return hash((self.p, self.modulus))

    def __repr__(self) -> str:
        if self.m == 1:
            return f"GF({self.p})"
        return f"GF({self.p}^{self.m}, modulus={self.modulus})"

    def __reduce__(self):
        return (GaloisField, (self.p, self.m, self.modulus))

    # -- element helpers --------------------------------------------------

    def coeffs(self, a: int) -> tuple[int, ...]:
        return tuple((a // pw) % self.p for pw in self._pows)

    def from_coeffs(self, coeffs: Sequence[int]) -> int:
        if len(coeffs) != self.m:
            raise FieldError(f"expected {self.m} coefficients")
        return sum((int(c) % self.p) * pw for c, pw in zip(coeffs, self._pows))

    def validate(self, a) -> None:
        arr = np.asarray(a)
        if arr.size and (arr.min() < 0 or arr.max() >= self.order):
            raise FieldError(f"values outside GF({self.order})")

    def elements(self) -> np.ndarray:
        return np.arange(self.order, dtype=np.int64)

    def power(self, a: int, e: int) -> int:
        if a == 0:
            if e < 0:
                raise ZeroDivisionError("0 has no inverse")
            return 1 if e == 0 else 0
        return int(self._exp[(int(self._log[a]) * e) % (self.order - 1)])

    def alpha_power(self, j: int) -> int:
        return int(self._exp[j % (self.order - 1)])

    def log(self, a: int) -> int:
        if a == 0:
            raise FieldError("log of 0")
        return int(self._log[a])

    def multiplicative_order(self, a: int) -> int:
        if a == 0:
            raise FieldError("0 has no multiplicative order")
        n = self.order - 1
        return n // math.gcd(n, self.log(a))

    # -- vectorised arithmetic -------------------------------------------

    def _add_scalar(self, a: int, b: int) -> int:
        p = self.p
        out = 0
        for pw in self._pows:
            out += (((a // pw) + (b // pw)) % p) * pw
        return out

    @staticmethod
    def _wrap(x, scalar: bool):
        return int(x) if scalar else x

    def _digits(self, a: np.ndarray) -> np.ndarray:
        pw = np.asarray(self._pows, dtype=np.int64)
        return (a[..., None] // pw) % self.p

    def _undigits(self, d: np.ndarray) -> np.ndarray:
        pw = np.asarray(self._pows, dtype=np.int64)
        return (d * pw).sum(axis=-1)

    def add(self, a, b):
        scalar = np.isscalar(a) and np.isscalar(b)
        if self.p == 2:
            r = np.bitwise_xor(a, b)
        elif self.m == 1:
            r = (np.asarray(a, dtype=np.int64) + b) % self.p
        else:
            a, b = np.broadcast_arrays(np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64))
            r = self._undigits((self._digits(a) + self._digits(b)) % self.p)
        return self._wrap(r, scalar)

    def neg(self, a):
        scalar = np.isscalar(a)
        if self.p == 2:
            r = a
        elif self.m == 1:
            r = (-np.asarray(a, dtype=np.int64)) % self.p
        else:
            r = self._undigits((-self._digits(np.asarray(a, dtype=np.int64))) % self.p)
        return self._wrap(r, scalar)

    def sub(self, a, b):
        if self.p == 2:
            return self.add(a, b)
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        scalar = np.isscalar(a) and np.isscalar(b)
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if self.m == 1:
            r = (a * b) % self.p
        else:
            r = self._exp[self._log[a] + self._log[b]]
            r = np.where((a == 0) | (b == 0), 0, r)
        return self._wrap(r, scalar)

    def inv(self, a):
        scalar = np.isscalar(a)
        a = np.asarray(a, dtype=np.int64)
        if np.any(a == 0):
            raise ZeroDivisionError("0 has no multiplicative inverse")
        r = self._exp[(self.order - 1 - self._log[a]) % (self.order - 1)]
        return self._wrap(r, scalar)

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def random(self, size, rng: np.random.Generator) -> np.ndarray:
        return rng.integers(0, self.order, size=size, dtype=np.int64)

    @cached_property
    def tables(self) -> "FieldTables | None":
        """Full add/mul tables for small fields; ``None`` above TABLE_LIMIT."""
        if self.order > TABLE_LIMIT:
            return None
        e = self.elements()
        add = np.ascontiguousarray(self.add(e[:, None], e[None, :]), dtype=np.int64)
        mul = np.ascontiguousarray(self.mul(e[:, None], e[None, :]), dtype=np.int64)
        neg = np.ascontiguousarray(self.neg(e), dtype=np.int64)
        inv = np.zeros(self.order, dtype=np.int64)
        inv[1:] = self.inv(e[1:])
        return FieldTables(add, mul, neg, inv)


@dataclass(frozen=True)
class FieldTables:
    add: np.ndarray
    mul: np.ndarray
    neg: np.ndarray
    inv: np.ndarray


@lru_cache(maxsize=None)
def GF(q: int) -> GaloisField:
    """Cached default field of order q."""
    p, m = prime_power(q)
    return GaloisField(p, m)


def element_width(q: int) -> int:
    """Bytes per element in binary formats: minimal big-endian width."""
    return max(1, ((q - 1).bit_length() + 7) // 8)


@dataclass(frozen=True)
class FieldElement:
    """A single element with operator overloads; mostly for the scalar API."""

    field: GaloisField
    value: int

    def __post_init__(self):
        if not 0 <= self.value < self.field.order:
            raise FieldError(f"{self.value} is not an element of {self.field}")

    @property
    def coeffs(self) -> tuple[int, ...]:
        return self.field.coeffs(self.value)

    @classmethod
    def from_coeffs(cls, field: GaloisField, coeffs: Sequence[int]) -> "FieldElement":
        return cls(field, field.from_coeffs(coeffs))

    def _check(self, other: "FieldElement") -> None:
        if not isinstance(other, FieldElement) or other.field != self.field:
            raise FieldError("field mismatch")

    def __add__(self, other):
        return field_add(self, other)

    def __sub__(self, other):
        self._check(other)
        return FieldElement(self.field, self.field.sub(self.value, other.value))

    def __neg__(self):
        return FieldElement(self.field, self.field.neg(self.value))

    def __mul__(self, other):
        return field_mul(self, other)

    def __truediv__(self, other):
        return field_mul(self, field_inv(other))

    def __pow__(self, e: int):
        return FieldElement(self.field, self.field.power(self.value, e))

    def __bool__(self) -> bool:
        return self.value != 0

    def __int__(self) -> int:
        return self.value

    def __repr__(self) -> str:
        return f"FieldElement({self.value} in {self.field!r})"


def field_add(a: FieldElement, b: FieldElement) -> FieldElement:
    a._check(b)
    return FieldElement(a.field, a.field.add(a.value, b.value))


def field_mul(a: FieldElement, b: FieldElement) -> FieldElement:
    a._check(b)
    return FieldElement(a.field, a.field.mul(a.value, b.value))


def field_inv(a: FieldElement) -> FieldElement:
    if a.value == 0:
        raise ZeroDivisionError("0 has no multiplicative inverse")
    return FieldElement(a.field, a.field.inv(a.value))
