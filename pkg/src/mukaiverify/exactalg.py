"""Exact scalar arithmetic: prime fields, rationals and truncated jet rings.

Polynomials and matrices elsewhere in the package store *raw* domain values
(plain ``int`` in ``[0, p)`` for a prime field, :class:`fractions.Fraction`
for the rationals) and route arithmetic through the domain object.  The
element wrappers :class:`FpElement` exist for user-facing scalar work.
"""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Iterable, Sequence

import numpy as np

DEFAULT_PRIME = 10007

# numpy int64 products stay exact below this bound
NUMPY_PRIME_LIMIT = 2**31


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin for n < 3.3e24."""
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
    for q in small:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in small:
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


class PrimeField:
    """The field F_p with canonical representatives in [0, p)."""

    is_prime_field = True

    def __init__(self, p: int = DEFAULT_PRIME):
        p = int(p)
        if not is_prime(p):
            raise ValueError(f"{p} is not prime")
        self.p = p
        self.zero = 0
        self.one = 1
        self.characteristic = p

    def __repr__(self):
        return f"PrimeField({self.p})"

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("GF", self.p))

    def __call__(self, x) -> "FpElement":
        return FpElement(self, self.convert(x))

    @property
    def numpy_ok(self) -> bool:
        return self.p < NUMPY_PRIME_LIMIT

    def convert(self, x) -> int:
        if isinstance(x, FpElement):
            if x.field != self:
                raise ValueError("element of a different field")
            return x.value
        if isinstance(x, Fraction):
            if x.denominator % self.p == 0:
                raise ZeroDivisionError(f"{x} has no image in F_{self.p}")
            return x.numerator * pow(x.denominator, -1, self.p) % self.p
        return int(x) % self.p

    def add(self, a, b):
        return (a + b) % self.p

    def sub(self, a, b):
        return (a - b) % self.p

    def neg(self, a):
        return -a % self.p

    def mul(self, a, b):
        return a * b % self.p

    def inv(self, a):
        if a % self.p == 0:
            raise ZeroDivisionError(f"0 has no inverse in F_{self.p}")
        return pow(a, -1, self.p)

    def div(self, a, b):
        return a * self.inv(b) % self.p

    def pow(self, a, e: int):
        if e < 0:
            return pow(self.inv(a), -e, self.p)
        return pow(a, e, self.p)

    def is_zero(self, a) -> bool:
        return a % self.p == 0

    def random(self, rng: random.Random) -> int:
        return rng.randrange(self.p)

    def random_nonzero(self, rng: random.Random) -> int:
        return rng.randrange(1, self.p)

    def symmetric(self, a) -> int:
        """Representative in (-p/2, p/2], handy for printing small values."""
        a %= self.p
        return a - self.p if a > self.p // 2 else a

    def elements(self) -> range:
        return range(self.p)


class RationalField:
    """Exact rationals backed by :class:`fractions.Fraction`."""

    is_prime_field = False
    numpy_ok = False
    characteristic = 0

    def __init__(self):
        self.zero = Fraction(0)
        self.one = Fraction(1)

    def __repr__(self):
        return "QQ"

    def __eq__(self, other):
        return isinstance(other, RationalField)

    def __hash__(self):
        return hash("QQ")

    def __call__(self, x) -> Fraction:
        return self.convert(x)

    def convert(self, x) -> Fraction:
        if isinstance(x, FpElement):
            raise ValueError("cannot lift a prime-field element to QQ")
        return Fraction(x)

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def neg(self, a):
        return -a

    def mul(self, a, b):
        return a * b

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("0 has no inverse in QQ")
        return 1 / Fraction(a)

    def div(self, a, b):
        if b == 0:
            raise ZeroDivisionError("division by zero in QQ")
        return Fraction(a) / b

    def pow(self, a, e: int):
        if e < 0:
            return self.inv(a) ** -e
        return Fraction(a) ** e

    def is_zero(self, a) -> bool:
        return a == 0

    def random(self, rng: random.Random) -> Fraction:
        return Fraction(rng.randint(-20, 20))

    def random_nonzero(self, rng: random.Random) -> Fraction:
        while True:
            a = rng.randint(-20, 20)
            if a:
                return Fraction(a)

    def symmetric(self, a):
        return a


QQ = RationalField()


class FpElement:
    """Immutable element of a :class:`PrimeField`."""

    __slots__ = ("field", "value")

    def __init__(self, field: PrimeField, value: int):
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "value", value % field.p)

    def __setattr__(self, name, value):
        raise AttributeError("FpElement is immutable")

    def _coerce(self, other) -> int:
        if isinstance(other, FpElement):
            if other.field != self.field:
                raise ValueError("mixing elements of different prime fields")
            return other.value
        if isinstance(other, (int, Fraction)):
            return self.field.convert(other)
        return NotImplemented

    def __add__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        return FpElement(self.field, self.value + b)

    __radd__ = __add__

    def __sub__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        return FpElement(self.field, self.value - b)

    def __rsub__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        return FpElement(self.field, b - self.value)

    def __mul__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        return FpElement(self.field, self.value * b)

    __rmul__ = __mul__

    def __truediv__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        return FpElement(self.field, self.field.div(self.value, b))

    def __rtruediv__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        return FpElement(self.field, self.field.div(b, self.value))

    def __neg__(self):
        return FpElement(self.field, -self.value)

    def __pow__(self, e: int):
        return FpElement(self.field, self.field.pow(self.value, e))

    def inverse(self) -> "FpElement":
        return FpElement(self.field, self.field.inv(self.value))

    def __eq__(self, other):
        if isinstance(other, FpElement):
            return self.field == other.field and self.value == other.value
        if isinstance(other, int):
            return self.value == other % self.field.p
        return NotImplemented

    def __hash__(self):
        return hash((self.field.p, self.value))

    def __int__(self):
        return self.value

    def __bool__(self):
        return self.value != 0

    def __repr__(self):
        return f"{self.value} (mod {self.field.p})"


def extended_gcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, s, t) with s*a + t*b == g == gcd(a, b)."""
    s0, s1, t0, t1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if a < 0:
        return -a, -s0, -t0
    return a, s0, t0


# --------------------------------------------------------------------------
# truncated jets


def monomials_up_to(nvars: int, order: int) -> list[tuple[int, ...]]:
    """All exponent vectors of total degree <= order, graded then lex."""
    out = []
    for d in range(order + 1):
        block = []
        for combo in combinations_with_replacement(range(nvars), d):
            e = [0] * nvars
            for i in combo:
                e[i] += 1
            block.append(tuple(e))
        block.sort(reverse=True)
        out.extend(block)
    return out


class JetRing:
    """k[e_1..e_n] / (e)^(t+1): polynomials truncated above total degree t."""

    def __init__(self, field, nvars: int, order: int):
        if nvars < 1 or order < 0:
            raise ValueError("jet ring needs nvars >= 1 and order >= 0")
        self.field = field
        self.nvars = nvars
        self.order = order
        self.monomials = monomials_up_to(nvars, order)
        self.index = {m: k for k, m in enumerate(self.monomials)}
        self.size = len(self.monomials)
        self.degrees = np.array([sum(m) for m in self.monomials])
        left, right, target = [], [], []
        for i, a in enumerate(self.monomials):
            da = sum(a)
            for j, b in enumerate(self.monomials):
                if da + sum(b) <= order:
                    left.append(i)
                    right.append(j)
                    target.append(self.index[tuple(x + y for x, y in zip(a, b))])
        self._left = np.array(left, dtype=np.int64)
        self._right = np.array(right, dtype=np.int64)
        self._target = np.array(target, dtype=np.int64)
        self._fast = getattr(field, "numpy_ok", False)

    def __repr__(self):
        return f"JetRing({self.field!r}, nvars={self.nvars}, order={self.order})"

    def __eq__(self, other):
        return (isinstance(other, JetRing) and self.field == other.field
                and self.nvars == other.nvars and self.order == other.order)

    def __hash__(self):
        return hash((self.field, self.nvars, self.order))

    def _zeros(self):
        if self._fast:
            return np.zeros(self.size, dtype=np.int64)
        return [self.field.zero] * self.size

    def from_dict(self, terms: dict) -> "JetElement":
        c = self._zeros()
        for m, v in terms.items():
            m = tuple(m)
            if sum(m) <= self.order:
                c[self.index[m]] = self.field.convert(v)
        return JetElement(self, c)

    def from_array(self, coeffs) -> "JetElement":
        if self._fast:
            c = np.asarray(coeffs, dtype=np.int64) % self.field.p
        else:
            c = [self.field.convert(v) for v in coeffs]
        if len(c) != self.size:
            raise ValueError("coefficient vector has the wrong length")
        return JetElement(self, c)

    def constant(self, value) -> "JetElement":
        c = self._zeros()
        c[0] = self.field.convert(value)
        return JetElement(self, c)

    def variable(self, i: int) -> "JetElement":
        e = [0] * self.nvars
        e[i] = 1
        return self.from_dict({tuple(e): 1})

    def linear(self, const, coeffs: Sequence) -> "JetElement":
        """const + sum coeffs[i] * e_i."""
        terms = {(0,) * self.nvars: const}
        for i, a in enumerate(coeffs):
            e = [0] * self.nvars
            e[i] = 1
            terms[tuple(e)] = a
        return self.from_dict(terms)

    def mul_arrays(self, a, b):
        if self._fast:
            p = self.field.p
            prod = a[self._left] * b[self._right] % p
            if p < 2**21:
                # float64 bucket sums stay below 2^53, hence exact
                out = np.bincount(self._target, weights=prod.astype(np.float64), minlength=self.size)
                return np.rint(out).astype(np.int64) % p
            out = np.zeros(self.size, dtype=np.int64)
            np.add.at(out, self._target, prod)
            return out % p
        F = self.field
        out = [F.zero] * self.size
        for i, j, k in zip(self._left.tolist(), self._right.tolist(), self._target.tolist()):
            if a[i] and b[j]:
                out[k] = F.add(out[k], F.mul(a[i], b[j]))
        return out


    def mul_many(self, A, B):
        """Row-wise products of two stacks of jet coefficient arrays."""
        if not self._fast:
            return [self.mul_arrays(a, b) for a, b in zip(A, B)]
        A = np.asarray(A, dtype=np.int64)
        B = np.asarray(B, dtype=np.int64)
        p = self.field.p
        prod = A[:, self._left] * B[:, self._right] % p
        if p >= 2**21:
            return np.array([self.mul_arrays(a, b) for a, b in zip(A, B)], dtype=np.int64)
        if not hasattr(self, "_scatter"):
            T = np.zeros((len(self._target), self.size), dtype=np.float64)
            T[np.arange(len(self._target)), self._target] = 1.0
            self._scatter = T
        out = np.zeros((A.shape[0], self.size), dtype=np.int64)
        # chunk rows of the pair axis so float64 partial sums stay exact
        step = max(1, int(2**52 // (p * p)))
        for s in range(0, prod.shape[1], step):
            part = prod[:, s:s + step].astype(np.float64) @ self._scatter[s:s + step]
            out = (out + np.rint(part).astype(np.int64)) % p
        return out


class JetElement:
    """An element of a :class:`JetRing`; immutable by convention."""

    __slots__ = ("ring", "coeffs")

    def __init__(self, ring: JetRing, coeffs):
        self.ring = ring
        self.coeffs = coeffs

    def _check(self, other: "JetElement"):
        if not isinstance(other, JetElement) or other.ring != self.ring:
            raise ValueError("jet elements live in different jet rings")

    def _lift(self, other):
        if isinstance(other, JetElement):
            self._check(other)
            return other
        return self.ring.constant(other)

    def __add__(self, other):
        other = self._lift(other)
        R = self.ring
        if R._fast:
            return JetElement(R, (self.coeffs + other.coeffs) % R.field.p)
        return JetElement(R, [R.field.add(a, b) for a, b in zip(self.coeffs, other.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        R = self.ring
        if R._fast:
            return JetElement(R, (-self.coeffs) % R.field.p)
        return JetElement(R, [R.field.neg(a) for a in self.coeffs])

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        R = self.ring
        if not isinstance(other, JetElement):
            s = R.field.convert(other)
            if R._fast:
                return JetElement(R, self.coeffs * s % R.field.p)
            return JetElement(R, [R.field.mul(a, s) for a in self.coeffs])
        self._check(other)
        return JetElement(R, R.mul_arrays(self.coeffs, other.coeffs))

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("negative jet powers are not supported")
        result = self.ring.constant(1)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def __eq__(self, other):
        if not isinstance(other, JetElement) or other.ring != self.ring:
            return NotImplemented
        return list(self.coeffs) == list(other.coeffs)

    def to_dict(self) -> dict:
        F = self.ring.field
        return {m: (int(c) if self.ring._fast else c)
                for m, c in zip(self.ring.monomials, self.coeffs) if not F.is_zero(c)}

    def order(self) -> int | None:
        """Lowest degree carrying a nonzero coefficient, None for the zero jet."""
        F = self.ring.field
        for m, c in zip(self.ring.monomials, self.coeffs):
            if not F.is_zero(c):
                return sum(m)
        return None

    def coefficients_below(self, degree: int):
        """Coefficients of all monomials of degree < degree, as a list."""
        return [c for m, c in zip(self.ring.monomials, self.coeffs) if sum(m) < degree]

    def __repr__(self):
        return f"JetElement({self.to_dict()})"


def random_vector(field, n: int, rng: random.Random) -> list:
    return [field.random(rng) for _ in range(n)]


def as_field_vector(field, values: Iterable) -> list:
    return [field.convert(v) for v in values]
