"""Sparse multivariate polynomials over a prime field or QQ.

A polynomial is a dict ``{exponent tuple: coefficient}`` with no zero
coefficients, wrapped in :class:`Poly`.  Term order only matters for leading
terms and printing; it lives on the :class:`PolyRing`.

Text format (reports, golden files)::

    3*x0^2*x3^1+10006*x1^1*x4^2+5

terms in decreasing order of the ring's monomial order, zero exponents
omitted, the zero polynomial printed as ``0``.
"""

from __future__ import annotations

import random
import re
from functools import lru_cache
from itertools import combinations_with_replacement
from typing import Iterable, Sequence

import numpy as np

from . import linalg
from .exactalg import QQ, PrimeField


class MonomialOrder:
    """Monomial order; ``key(e)`` is larger for larger monomials.

    kinds: ``grevlex``, ``lex``, ``block`` (grevlex on the first ``k``
    variables, ties broken by grevlex on the rest) and ``weighted``
    (weight vector, ties broken by grevlex).
    """

    def __init__(self, kind: str = "grevlex", k: int | None = None,
                 weights: Sequence[int] | None = None):
        if kind not in ("grevlex", "lex", "block", "weighted"):
            raise ValueError(f"unknown monomial order {kind!r}")
        if kind == "block" and (k is None or k < 0):
            raise ValueError("block order needs k >= 0")
        if kind == "weighted" and not weights:
            raise ValueError("weighted order needs a weight vector")
        if weights is not None and any(w <= 0 for w in weights):
            raise ValueError("weights must be positive")
        self.kind = kind
        self.k = k
        self.weights = tuple(weights) if weights is not None else None
        self.key = lru_cache(maxsize=1 << 18)(self._key)

    def _key(self, e):
        if self.kind == "grevlex":
            return (sum(e), tuple(-x for x in reversed(e)))
        if self.kind == "lex":
            return e
        if self.kind == "block":
            a, b = e[:self.k], e[self.k:]
            return (sum(a), tuple(-x for x in reversed(a)), sum(b), tuple(-x for x in reversed(b)))
        w = sum(x * y for x, y in zip(self.weights, e))
        return (w, sum(e), tuple(-x for x in reversed(e)))

    def __eq__(self, other):
        return (isinstance(other, MonomialOrder) and self.kind == other.kind
                and self.k == other.k and self.weights == other.weights)

    def __hash__(self):
        return hash((self.kind, self.k, self.weights))

    def __repr__(self):
        if self.kind == "block":
            return f"block({self.k})"
        if self.kind == "weighted":
            return f"weighted{self.weights}"
        return self.kind

    @property
    def is_degree_compatible(self) -> bool:
        return self.kind == "grevlex"


GREVLEX = MonomialOrder("grevlex")
LEX = MonomialOrder("lex")


def block_order(k: int) -> MonomialOrder:
    return MonomialOrder("block", k=k)


def weighted_order(weights: Sequence[int]) -> MonomialOrder:
    return MonomialOrder("weighted", weights=weights)


@lru_cache(maxsize=None)
def monomials_of_degree(nvars: int, d: int) -> tuple[tuple[int, ...], ...]:
    """All exponent vectors of total degree d, in decreasing grevlex order."""
    if d < 0:
        return ()
    out = []
    for combo in combinations_with_replacement(range(nvars), d):
        e = [0] * nvars
        for i in combo:
            e[i] += 1
        out.append(tuple(e))
    out.sort(key=GREVLEX.key, reverse=True)
    return tuple(out)


def monomial_index(nvars: int, d: int) -> dict:
    return _monomial_index(nvars, d)


@lru_cache(maxsize=None)
def _monomial_index(nvars, d):
    return {m: i for i, m in enumerate(monomials_of_degree(nvars, d))}


def mono_mul(a, b):
    return tuple(x + y for x, y in zip(a, b))


def mono_divides(a, b) -> bool:
    return all(x <= y for x, y in zip(a, b))


def mono_div(a, b):
    return tuple(x - y for x, y in zip(a, b))


def mono_lcm(a, b):
    return tuple(max(x, y) for x, y in zip(a, b))


class PolyRing:
    """k[x0..x{n-1}] with a chosen field and monomial order."""

    def __init__(self, nvars: int, field=None, order: MonomialOrder = GREVLEX,
                 names: Sequence[str] | None = None):
        if nvars < 1:
            raise ValueError("need at least one variable")
        self.nvars = nvars
        self.field = field if field is not None else PrimeField()
        self.order = order
        self.names = tuple(names) if names is not None else tuple(f"x{i}" for i in range(nvars))
        if len(self.names) != nvars:
            raise ValueError("wrong number of variable names")

    def __repr__(self):
        return f"PolyRing({self.nvars}, {self.field!r}, {self.order!r})"

    def __eq__(self, other):
        return (isinstance(other, PolyRing) and self.nvars == other.nvars
                and self.field == other.field and self.order == other.order)

    def __hash__(self):
        return hash((self.nvars, self.field, self.order))

    def same_space(self, other: "PolyRing") -> bool:
        """Same variables and coefficients (order may differ)."""
        return self.nvars == other.nvars and self.field == other.field

    def with_order(self, order: MonomialOrder) -> "PolyRing":
        return PolyRing(self.nvars, self.field, order, self.names)

    # constructors -------------------------------------------------------
    def zero(self) -> "Poly":
        return Poly(self, {})

    def one(self) -> "Poly":
        return self.constant(1)

    def constant(self, c) -> "Poly":
        c = self.field.convert(c)
        return Poly(self, {(0,) * self.nvars: c} if not self.field.is_zero(c) else {})

    def gen(self, i: int) -> "Poly":
        e = [0] * self.nvars
        e[i] = 1
        return Poly(self, {tuple(e): self.field.one})

    def gens(self) -> list["Poly"]:
        return [self.gen(i) for i in range(self.nvars)]

    def monomial(self, e, c=1) -> "Poly":
        c = self.field.convert(c)
        return Poly(self, {tuple(e): c} if not self.field.is_zero(c) else {})

    def from_dict(self, terms: dict) -> "Poly":
        F = self.field
        out = {}
        for e, c in terms.items():
            c = F.convert(c)
            if not F.is_zero(c):
                out[tuple(e)] = c
        return Poly(self, out)

    def linear_form(self, coeffs: Sequence) -> "Poly":
        terms = {}
        for i, c in enumerate(coeffs):
            e = [0] * self.nvars
            e[i] = 1
            terms[tuple(e)] = c
        return self.from_dict(terms)

    def from_vector(self, vec, monomials: Sequence) -> "Poly":
        """Polynomial with coefficient ``vec[i]`` on ``monomials[i]``."""
        F = self.field
        out = {}
        for m, c in zip(monomials, vec):
            c = F.convert(int(c) if F.numpy_ok else c)
            if not F.is_zero(c):
                out[m] = c
        return Poly(self, out)

    def random_form(self, d: int, rng: random.Random, density: float = 1.0) -> "Poly":
        F = self.field
        terms = {}
        for m in monomials_of_degree(self.nvars, d):
            if density >= 1.0 or rng.random() < density:
                terms[m] = F.random(rng)
        return self.from_dict(terms)

    def monomials(self, d: int):
        return monomials_of_degree(self.nvars, d)

    # text ---------------------------------------------------------------
    def parse(self, text: str) -> "Poly":
        """Inverse of :meth:`Poly.to_str` (also accepts '-' separators)."""
        text = text.replace(" ", "")
        if text in ("", "0"):
            return self.zero()
        text = re.sub(r"(?<=[0-9a-z\)])-", "+-", text)
        acc = {}
        F = self.field
        for term in text.split("+"):
            if not term:
                continue
            coeff = F.one
            e = [0] * self.nvars
            sign = 1
            if term.startswith("-"):
                sign = -1
                term = term[1:]
            for factor in term.split("*"):
                m = re.fullmatch(r"([a-zA-Z_]\w*?)(\d*)(?:\^(\d+))?", factor)
                if m and (m.group(1) + m.group(2)) in self.names:
                    i = self.names.index(m.group(1) + m.group(2))
                    e[i] += int(m.group(3) or 1)
                else:
                    coeff = F.mul(coeff, F.convert(_parse_number(factor)))
            if sign < 0:
                coeff = F.neg(coeff)
            key = tuple(e)
            acc[key] = F.add(acc.get(key, F.zero), coeff)
        return self.from_dict(acc)


def _parse_number(s: str):
    from fractions import Fraction
    return Fraction(s)


class Poly:
    """Immutable sparse polynomial."""

    __slots__ = ("ring", "terms", "_lm")

    def __init__(self, ring: PolyRing, terms: dict):
        self.ring = ring
        self.terms = terms
        self._lm = None

    # structure ----------------------------------------------------------
    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __len__(self):
        return len(self.terms)

    def degree(self) -> int:
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def is_homogeneous(self) -> bool:
        if not self.terms:
            return True
        it = iter(self.terms)
        d = sum(next(it))
        return all(sum(e) == d for e in it)

    def lead_monomial(self, order: MonomialOrder | None = None):
        if not self.terms:
            raise ValueError("zero polynomial has no leading monomial")
        if order is None:
            if self._lm is None:
                self._lm = max(self.terms, key=self.ring.order.key)
            return self._lm
        return max(self.terms, key=order.key)

    def lead_coeff(self, order: MonomialOrder | None = None):
        return self.terms[self.lead_monomial(order)]

    def sorted_terms(self, order: MonomialOrder | None = None) -> list:
        order = order or self.ring.order
        return sorted(self.terms.items(), key=lambda t: order.key(t[0]), reverse=True)

    def coefficient(self, e):
        return self.terms.get(tuple(e), self.ring.field.zero)

    def homogeneous_part(self, d: int) -> "Poly":
        return Poly(self.ring, {e: c for e, c in self.terms.items() if sum(e) == d})

    def variables(self) -> set[int]:
        return {i for e in self.terms for i, x in enumerate(e) if x}

    # arithmetic -------------------------------------------------------------
    def _check(self, other: "Poly"):
        if not isinstance(other, Poly):
            raise TypeError("expected a Poly")
        if not self.ring.same_space(other.ring):
            raise ValueError("polynomials from different rings")

    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            self._check(other)
            return other
        return self.ring.constant(other)

    def __add__(self, other):
        other = self._coerce(other)
        F = self.ring.field
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = F.add(out.get(e, F.zero), c)
            if F.is_zero(v):
                out.pop(e, None)
            else:
                out[e] = v
        return Poly(self.ring, out)

    __radd__ = __add__

    def __neg__(self):
        F = self.ring.field
        return Poly(self.ring, {e: F.neg(c) for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def scale(self, s) -> "Poly":
        F = self.ring.field
        s = F.convert(s)
        if F.is_zero(s):
            return self.ring.zero()
        return Poly(self.ring, {e: F.mul(c, s) for e, c in self.terms.items()})

    def mul_term(self, e, c) -> "Poly":
        F = self.ring.field
        if F.is_zero(c):
            return self.ring.zero()
        return Poly(self.ring, {mono_mul(m, e): F.mul(v, c) for m, v in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return self.scale(other)
        self._check(other)
        F = self.ring.field
        if len(self.terms) > len(other.terms):
            a, b = self, other
        else:
            a, b = other, self
        out: dict = {}
        if getattr(F, "is_prime_field", False):
            p = F.p
            for e2, c2 in b.terms.items():
                for e1, c1 in a.terms.items():
                    e = tuple(x + y for x, y in zip(e1, e2))
                    out[e] = (out.get(e, 0) + c1 * c2) % p
            return Poly(self.ring, {e: c for e, c in out.items() if c})
        for e2, c2 in b.terms.items():
            for e1, c1 in a.terms.items():
                e = tuple(x + y for x, y in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return Poly(self.ring, {e: c for e, c in out.items() if c != 0})

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power")
        result = self.ring.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.ring.same_space(other.ring) and self.terms == other.terms
        if isinstance(other, int) and other == 0:
            return not self.terms
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def monic(self, order: MonomialOrder | None = None) -> "Poly":
        if not self.terms:
            return self
        return self.scale(self.ring.field.inv(self.lead_coeff(order)))

    def derivative(self, i: int) -> "Poly":
        F = self.ring.field
        out = {}
        for e, c in self.terms.items():
            if e[i]:
                v = F.mul(c, F.convert(e[i]))
                if not F.is_zero(v):
                    e2 = list(e)
                    e2[i] -= 1
                    out[tuple(e2)] = v
        return Poly(self.ring, out)

    def gradient(self) -> list["Poly"]:
        return [self.derivative(i) for i in range(self.ring.nvars)]

    def exact_divide(self, other: "Poly") -> "Poly":
        """Return q with self == q * other; raises ValueError otherwise."""
        q, r = divide_univariate_style(self, other)
        if r:
            raise ValueError("division is not exact")
        return q

    # evaluation / substitution -----------------------------------------------
    def evaluate(self, point: Sequence):
        return evaluate(self, point)

    def compose(self, images: Sequence["Poly"]) -> "Poly":
        return compose(self, images)

    def to_str(self) -> str:
        return poly_to_str(self)

    def __repr__(self):
        return f"Poly({self.to_str()})"


def divide_univariate_style(f: Poly, g: Poly) -> tuple[Poly, Poly]:
    """Multivariate division of f by a single g w.r.t. the ring order."""
    if not g:
        raise ZeroDivisionError("division by the zero polynomial")
    R = f.ring
    F = R.field
    order = R.order
    lg = g.lead_monomial()
    inv = F.inv(g.terms[lg])
    rem = dict(f.terms)
    quot = {}
    out_rem = {}
    while rem:
        lm = max(rem, key=order.key)
        c = rem[lm]
        if mono_divides(lg, lm):
            e = mono_div(lm, lg)
            q = F.mul(c, inv)
            quot[e] = F.add(quot.get(e, F.zero), q)
            for m, v in g.terms.items():
                mm = mono_mul(m, e)
                nv = F.sub(rem.get(mm, F.zero), F.mul(q, v))
                if F.is_zero(nv):
                    rem.pop(mm, None)
                else:
                    rem[mm] = nv
        else:
            out_rem[lm] = c
            del rem[lm]
    return R.from_dict(quot), Poly(R, out_rem)


def poly_to_str(f: Poly) -> str:
    if not f.terms:
        return "0"
    F = f.ring.field
    parts = []
    for e, c in f.sorted_terms():
        factors = [f"{f.ring.names[i]}^{x}" for i, x in enumerate(e) if x]
        cs = str(c)
        parts.append("*".join([cs] + factors))
    return "+".join(parts)


def evaluate(f: Poly, point: Sequence):
    R = f.ring
    F = R.field
    if len(point) != R.nvars:
        raise ValueError("point has the wrong number of coordinates")
    pt = [F.convert(v) for v in point]
    if getattr(F, "is_prime_field", False):
        p = F.p
        total = 0
        pows = [dict() for _ in pt]
        for e, c in f.terms.items():
            v = c
            for i, x in enumerate(e):
                if x:
                    cache = pows[i]
                    if x not in cache:
                        cache[x] = pow(pt[i], x, p)
                    v = v * cache[x] % p
            total += v
        return total % p
    total = F.zero
    for e, c in f.terms.items():
        v = c
        for i, x in enumerate(e):
            if x:
                v = v * pt[i] ** x
        total += v
    return total


def evaluate_many(polys: Sequence[Poly], points) -> np.ndarray:
    """Evaluate several polynomials at many points over F_p (vectorised).

    Returns an array of shape (len(points), len(polys)).
    """
    if not polys:
        return np.zeros((len(points), 0), dtype=np.int64)
    R = polys[0].ring
    F = R.field
    if not F.numpy_ok:
        return np.array([[evaluate(f, pt) for f in polys] for pt in points], dtype=object)
    p = F.p
    P = np.asarray(points, dtype=np.int64) % p
    if P.ndim == 1:
        P = P.reshape(1, -1)
    monos = sorted({e for f in polys for e in f.terms})
    index = {e: i for i, e in enumerate(monos)}
    maxdeg = max((max(e) for e in monos), default=0)
    # powers[k][:, i] = P[:, i]^k
    powers = [np.ones_like(P)]
    for _ in range(maxdeg):
        powers.append(powers[-1] * P % p)
    M = np.ones((P.shape[0], len(monos)), dtype=np.int64)
    for j, e in enumerate(monos):
        col = np.ones(P.shape[0], dtype=np.int64)
        for i, x in enumerate(e):
            if x:
                col = col * powers[x][:, i] % p
        M[:, j] = col
    C = np.zeros((len(monos), len(polys)), dtype=np.int64)
    for k, f in enumerate(polys):
        for e, c in f.terms.items():
            C[index[e], k] = c
    return linalg.matmul(F, M, C)


def compose(f: Poly, images: Sequence[Poly]) -> Poly:
    """f(images[0], ..., images[n-1]) in the ring of the images."""
    if len(images) != f.ring.nvars:
        raise ValueError("need one image per variable")
    if not images:
        raise ValueError("empty substitution")
    S = images[0].ring
    for g in images:
        if not g.ring.same_space(S):
            raise ValueError("substitution images from different rings")
    power_cache: dict = {}

    def power(i, k):
        key = (i, k)
        if key not in power_cache:
            if k == 0:
                power_cache[key] = S.one()
            elif k == 1:
                power_cache[key] = images[i]
            else:
                power_cache[key] = power(i, k - 1) * images[i]
        return power_cache[key]

    acc = S.zero()
    for e, c in f.terms.items():
        term = S.constant(c)
        for i, x in enumerate(e):
            if x:
                term = term * power(i, x)
        acc = acc + term
    return acc


def substitute_linear(f: Poly, matrix, target: PolyRing | None = None) -> Poly:
    """f(M y): variable i becomes sum_j M[i][j] y_j."""
    R = target or f.ring
    images = [R.linear_form(row) for row in matrix]
    return compose(f, images)


# --------------------------------------------------------------------------
# graded pieces


class GradedPiece:
    """Echelonised span of an ideal in one degree."""

    def __init__(self, ring: PolyRing, degree: int, monomials, matrix, pivots):
        self.ring = ring
        self.degree = degree
        self.monomials = monomials
        self.matrix = matrix
        self.pivots = pivots

    @property
    def dimension(self) -> int:
        return len(self.pivots)

    @property
    def codimension(self) -> int:
        """dim R_d - dim I_d, i.e. the Hilbert function value."""
        return len(self.monomials) - self.dimension

    def basis(self) -> list[Poly]:
        return [self.ring.from_vector(row, self.monomials) for row in self.matrix]

    def vector(self, f: Poly):
        idx = monomial_index(self.ring.nvars, self.degree)
        F = self.ring.field
        if F.numpy_ok:
            v = np.zeros(len(self.monomials), dtype=np.int64)
        else:
            v = [F.zero] * len(self.monomials)
        for e, c in f.terms.items():
            if sum(e) != self.degree:
                raise ValueError("polynomial is not homogeneous of the piece's degree")
            v[idx[e]] = c
        return v

    def contains(self, f: Poly) -> bool:
        if not f:
            return True
        if not f.is_homogeneous() or f.degree() != self.degree:
            return False
        r = linalg.reduce_against(self.ring.field, self.vector(f), self.matrix, self.pivots)
        return linalg.is_zero_vector(self.ring.field, r)

    def reduce(self, f: Poly) -> Poly:
        r = linalg.reduce_against(self.ring.field, self.vector(f), self.matrix, self.pivots)
        return self.ring.from_vector(r, self.monomials)


def macaulay_rows(gens: Iterable[Poly], d: int):
    """Rows m*g (deg m = d - deg g) as coefficient vectors in degree d."""
    gens = [g for g in gens if g]
    if not gens:
        return []
    R = gens[0].ring
    idx = monomial_index(R.nvars, d)
    F = R.field
    rows = []
    for g in gens:
        if not g.is_homogeneous():
            raise ValueError("graded pieces need homogeneous generators")
        dg = g.degree()
        if dg > d:
            continue
        for m in monomials_of_degree(R.nvars, d - dg):
            row = [F.zero] * len(idx)
            for e, c in g.terms.items():
                row[idx[mono_mul(e, m)]] = c
            rows.append(row)
    return rows


def graded_piece_basis(gens: Sequence[Poly], d: int, ring: PolyRing | None = None) -> GradedPiece:
    """Degree-d part of the ideal generated by homogeneous ``gens``."""
    if d < 0:
        raise ValueError("degree must be nonnegative")
    if ring is None:
        if not gens:
            raise ValueError("need a ring for an empty generator list")
        ring = gens[0].ring
    monos = monomials_of_degree(ring.nvars, d)
    rows = macaulay_rows(gens, d)
    if not rows:
        empty = np.zeros((0, len(monos)), dtype=np.int64) if ring.field.numpy_ok else []
        return GradedPiece(ring, d, monos, empty, [])
    M, piv = linalg.rref(ring.field, rows, len(monos))
    return GradedPiece(ring, d, monos, M, piv)


def forms_vanishing_on_points(ring: PolyRing, d: int, points) -> list[Poly]:
    """Basis of degree-d forms vanishing at every point (interpolation)."""
    monos = monomials_of_degree(ring.nvars, d)
    basis_polys = [ring.monomial(m) for m in monos]
    if ring.field.numpy_ok:
        A = evaluate_many(basis_polys, points)
    else:
        A = [[evaluate(m, pt) for m in basis_polys] for pt in points]
    null = linalg.nullspace(ring.field, A, len(monos))
    return [ring.from_vector(v, monos) for v in null]


def random_point(ring: PolyRing, rng: random.Random) -> list:
    return [ring.field.random(rng) for _ in range(ring.nvars)]


def qq_ring(nvars: int, order: MonomialOrder = GREVLEX) -> PolyRing:
    return PolyRing(nvars, QQ, order)
