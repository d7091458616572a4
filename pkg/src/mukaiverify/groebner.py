"""Groebner bases and the ideal operations built on them.

The engine packs exponent vectors into Python ints, 8 bits per variable
(exponents must stay below 128), so that monomial multiplication is integer
addition and divisibility is one subtraction and a mask test.  Every
supported monomial order is a *linear* functional on exponent vectors, so
order keys are additive as well.

Buchberger's algorithm runs with the Gebauer-Moeller criteria and the sugar
selection strategy; reductions are full and heap driven.
"""

from __future__ import annotations

import heapq
import random
import threading
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Iterable, Sequence

import numpy as np

from . import linalg
from .multipoly import (
    GREVLEX, GradedPiece, MonomialOrder, Poly, PolyRing, block_order,
    graded_piece_basis, macaulay_rows, mono_mul, monomials_of_degree,
)

BITS = 8
MAX_EXPONENT = 127
SWEEP_DEFAULT = 12


class _Packer:
    """Packing, unpacking and order keys for one (nvars, order) pair."""

    def __init__(self, nvars: int, order: MonomialOrder):
        self.n = nvars
        self.order = order
        self.high = sum(0x80 << (BITS * i) for i in range(nvars))
        B = 1 << BITS
        self.B = B
        self._key_cache: dict[int, int] = {}
        self._unpack_cache: dict[int, tuple] = {}
        n = nvars
        if order.kind == "grevlex":
            self.weights = [B ** n - B ** i for i in range(n)]
        elif order.kind == "lex":
            self.weights = [B ** (n - 1 - i) for i in range(n)]
        elif order.kind == "block":
            k = order.k
            n2 = n - k
            S = B ** (n2 + 2)
            w1 = [(B ** k - B ** i) * S for i in range(k)]
            w2 = [B ** n2 - B ** i for i in range(n2)]
            self.weights = w1 + w2
        else:
            S = B ** (n + 2)
            self.weights = [order.weights[i] * S + B ** n - B ** i for i in range(n)]

    def pack(self, e) -> int:
        m = 0
        for i, x in enumerate(e):
            if x > MAX_EXPONENT:
                raise OverflowError("exponent too large for packed monomials")
            m |= x << (BITS * i)
        return m

    def unpack(self, m: int) -> tuple:
        e = self._unpack_cache.get(m)
        if e is None:
            mask = (1 << BITS) - 1
            e = tuple((m >> (BITS * i)) & mask for i in range(self.n))
            self._unpack_cache[m] = e
        return e

    def key(self, m: int) -> int:
        k = self._key_cache.get(m)
        if k is None:
            k = sum(w * x for w, x in zip(self.weights, self.unpack(m)))
            self._key_cache[m] = k
        return k

    def divides(self, a: int, b: int) -> bool:
        return not ((b - a) & self.high)

    def lcm(self, a: int, b: int) -> int:
        ea, eb = self.unpack(a), self.unpack(b)
        return self.pack([max(x, y) for x, y in zip(ea, eb)])

    def degree(self, m: int) -> int:
        return sum(self.unpack(m))


@lru_cache(maxsize=64)
def _packer(nvars: int, order: MonomialOrder) -> _Packer:
    return _Packer(nvars, order)


class _Elem:
    """Basis element: monic, with its leading data split off."""

    __slots__ = ("lm", "lk", "tail", "sugar", "terms")

    def __init__(self, terms: dict, pk: _Packer, sugar: int):
        lm = max(terms, key=pk.key)
        self.lm = lm
        self.lk = pk.key(lm)
        self.terms = terms
        self.tail = [(m, pk.key(m), c) for m, c in terms.items() if m != lm]
        self.sugar = sugar


def _to_internal(f: Poly, pk: _Packer) -> dict:
    return {pk.pack(e): c for e, c in f.terms.items()}


def _to_poly(terms: dict, ring: PolyRing, pk: _Packer) -> Poly:
    return Poly(ring, {pk.unpack(m): c for m, c in terms.items()})


def _reduce(terms: dict, basis: Sequence[_Elem], pk: _Packer, p: int | None, F) -> dict:
    """Full reduction of ``terms`` by ``basis`` (all basis elements monic)."""
    f = dict(terms)
    if not f:
        return {}
    keymap = {}
    heap = []
    for m in f:
        k = pk.key(m)
        keymap[k] = m
        heap.append(-k)
    heapq.heapify(heap)
    rem = {}
    divides_mask = pk.high
    while heap:
        k = -heapq.heappop(heap)
        m = keymap[k]
        c = f.pop(m, None)
        if c is None:
            continue
        g = None
        for b in basis:
            if not ((m - b.lm) & divides_mask):
                g = b
                break
        if g is None:
            rem[m] = c
            continue
        shift = m - g.lm
        kshift = k - g.lk
        if p is not None:
            for gm, gk, gc in g.tail:
                mm = gm + shift
                old = f.get(mm)
                if old is None:
                    f[mm] = (-c * gc) % p
                    kk = gk + kshift
                    keymap[kk] = mm
                    heapq.heappush(heap, -kk)
                else:
                    nv = (old - c * gc) % p
                    if nv:
                        f[mm] = nv
                    else:
                        del f[mm]
        else:
            for gm, gk, gc in g.tail:
                mm = gm + shift
                old = f.get(mm)
                if old is None:
                    f[mm] = -c * gc
                    kk = gk + kshift
                    keymap[kk] = mm
                    heapq.heappush(heap, -kk)
                else:
                    nv = old - c * gc
                    if nv:
                        f[mm] = nv
                    else:
                        del f[mm]
    return rem


def _monic(terms: dict, pk: _Packer, F) -> dict:
    lm = max(terms, key=pk.key)
    inv = F.inv(terms[lm])
    return {m: F.mul(c, inv) for m, c in terms.items()}


def _spoly(a: _Elem, b: _Elem, lcm: int, pk: _Packer, F) -> dict:
    sa = lcm - a.lm
    sb = lcm - b.lm
    out = {}
    for m, _, c in a.tail:
        out[m + sa] = c
    for m, _, c in b.tail:
        mm = m + sb
        v = F.sub(out.get(mm, F.zero), c)
        if F.is_zero(v):
            out.pop(mm, None)
        else:
            out[mm] = v
    return out


def _buchberger(polys: Sequence[dict], pk: _Packer, F, sugars: Sequence[int]) -> list[_Elem]:
    p = F.p if getattr(F, "is_prime_field", False) else None
    G: list[_Elem] = []
    active: list[bool] = []
    pairs: list = []  # heap of (sugar, lcm key, i, j, lcm)
    live_pairs: set = set()

    def update(h: _Elem):
        nonlocal pairs
        idx = len(G)
        cands = []
        for i, g in enumerate(G):
            if active[i]:
                lcm = pk.lcm(g.lm, h.lm)
                cands.append((i, lcm, lcm == g.lm + h.lm))
        # Gebauer-Moeller: chain criterion on new pairs
        D = []
        for t, (i, lcm, coprime) in enumerate(cands):
            if coprime:
                D.append((i, lcm, coprime))
                continue
            dominated = False
            for s, (j, lcm2, _) in enumerate(cands):
                if s != t and pk.divides(lcm2, lcm) and (lcm2 != lcm or s < t):
                    dominated = True
                    break
            if not dominated:
                D.append((i, lcm, coprime))
        # drop old pairs made redundant by h
        keep = []
        for item in pairs:
            sug, lk, i, j, lcm = item
            if (i, j) not in live_pairs:
                continue
            if (pk.divides(h.lm, lcm) and pk.lcm(G[i].lm, h.lm) != lcm
                    and pk.lcm(G[j].lm, h.lm) != lcm):
                live_pairs.discard((i, j))
                continue
            keep.append(item)
        pairs = keep
        heapq.heapify(pairs)
        G.append(h)
        active.append(True)
        for i, lcm, coprime in D:
            if coprime:
                continue
            sug = max(G[i].sugar - pk.degree(G[i].lm), h.sugar - pk.degree(h.lm)) + pk.degree(lcm)
            heapq.heappush(pairs, (sug, pk.key(lcm), i, idx, lcm))
            live_pairs.add((i, idx))
        for i in range(idx):
            if active[i] and pk.divides(h.lm, G[i].lm):
                active[i] = False

    order = sorted(range(len(polys)), key=lambda i: (sugars[i], pk.key(max(polys[i], key=pk.key))))
    for i in order:
        basis = [g for g, a in zip(G, active) if a]
        r = _reduce(polys[i], basis, pk, p, F)
        if r:
            update(_Elem(_monic(r, pk, F), pk, sugars[i]))

    while pairs:
        sug, _, i, j, lcm = heapq.heappop(pairs)
        if (i, j) not in live_pairs:
            continue
        live_pairs.discard((i, j))
        s = _spoly(G[i], G[j], lcm, pk, F)
        basis = [g for g, a in zip(G, active) if a]
        r = _reduce(s, basis, pk, p, F)
        if r:
            update(_Elem(_monic(r, pk, F), pk, sug))

    minimal = [g for g, a in zip(G, active) if a]
    # remove duplicates of leading monomials then interreduce
    minimal.sort(key=lambda g: g.lk)
    chosen: list[_Elem] = []
    for g in minimal:
        if not any(pk.divides(h.lm, g.lm) for h in chosen):
            chosen.append(g)
    reduced = []
    for t, g in enumerate(chosen):
        others = chosen[:t] + chosen[t + 1:]
        tail = {m: c for m, _, c in g.tail}
        r = _reduce(tail, others, pk, p, F)
        r[g.lm] = F.one
        reduced.append(_Elem(r, pk, g.sugar))
    reduced.sort(key=lambda g: -g.lk)
    return reduced


def compute_groebner(polys: Sequence[Poly], order: MonomialOrder | None = None) -> list[Poly]:
    """Reduced Groebner basis of the ideal spanned by ``polys``."""
    polys = [f for f in polys if f]
    if not polys:
        return []
    ring = polys[0].ring
    order = order or ring.order
    pk = _packer(ring.nvars, order)
    F = ring.field
    internal = [_to_internal(f, pk) for f in polys]
    sugars = [f.degree() for f in polys]
    G = _buchberger(internal, pk, F, sugars)
    R = ring.with_order(order)
    return [_to_poly(g.terms, R, pk) for g in G]


def reduce_poly(f: Poly, basis: Sequence[Poly], order: MonomialOrder | None = None) -> Poly:
    """Full reduction of f by ``basis`` (need not be a Groebner basis)."""
    order = order or f.ring.order
    pk = _packer(f.ring.nvars, order)
    F = f.ring.field
    elems = [_Elem(_monic(_to_internal(g, pk), pk, F), pk, g.degree()) for g in basis if g]
    p = F.p if getattr(F, "is_prime_field", False) else None
    r = _reduce(_to_internal(f, pk), elems, pk, p, F)
    return _to_poly(r, f.ring, pk)


class Reducer:
    """Normal forms modulo a fixed Groebner basis (elements prepared once)."""

    def __init__(self, G: Sequence[Poly], order: MonomialOrder | None = None):
        G = [g for g in G if g]
        if not G:
            raise ValueError("empty basis")
        self.ring = G[0].ring
        self.order = order or self.ring.order
        self.pk = _packer(self.ring.nvars, self.order)
        F = self.ring.field
        self.field = F
        self.p = F.p if getattr(F, "is_prime_field", False) else None
        self.elems = [_Elem(_monic(_to_internal(g, self.pk), self.pk, F), self.pk, g.degree()) for g in G]
        self.lead = [self.pk.unpack(e.lm) for e in self.elems]

    def reduce_terms(self, terms: dict) -> dict:
        """Internal (packed) terms in, reduced packed terms out."""
        return _reduce(terms, self.elems, self.pk, self.p, self.field)

    def nf(self, f: Poly) -> Poly:
        r = self.reduce_terms(_to_internal(f, self.pk))
        return _to_poly(r, f.ring, self.pk)

    def standard_monomials(self, d: int) -> list[tuple]:
        return [m for m in monomials_of_degree(self.ring.nvars, d)
                if not any(all(a <= b for a, b in zip(L, m)) for L in self.lead)]


def s_polynomial(f: Poly, g: Poly, order: MonomialOrder | None = None) -> Poly:
    order = order or f.ring.order
    pk = _packer(f.ring.nvars, order)
    F = f.ring.field
    a = _Elem(_monic(_to_internal(f, pk), pk, F), pk, f.degree())
    b = _Elem(_monic(_to_internal(g, pk), pk, F), pk, g.degree())
    return _to_poly(_spoly(a, b, pk.lcm(a.lm, b.lm), pk, F), f.ring, pk)


def is_groebner_basis(G: Sequence[Poly], order: MonomialOrder | None = None) -> bool:
    """Buchberger's criterion: every S-polynomial reduces to zero."""
    G = [g for g in G if g]
    for i in range(len(G)):
        for j in range(i + 1, len(G)):
            if reduce_poly(s_polynomial(G[i], G[j], order), G, order):
                return False
    return True


# --------------------------------------------------------------------------
# ideals


class IdealHandle:
    """Generators plus cached reduced Groebner bases keyed by order."""

    def __init__(self, gens: Iterable[Poly], ring: PolyRing | None = None):
        gens = [g for g in gens if g]
        if ring is None:
            if not gens:
                raise ValueError("need a ring for the zero ideal")
            ring = gens[0].ring
        for g in gens:
            if not g.ring.same_space(ring):
                raise ValueError("generator from a different ring")
        self.ring = ring
        self.gens = [Poly(ring, g.terms) for g in gens]
        self._gb: dict[MonomialOrder, list[Poly]] = {}
        self._lock = threading.Lock()

    def __repr__(self):
        return f"IdealHandle({len(self.gens)} generators in {self.ring.nvars} variables)"

    def groebner_basis(self, order: MonomialOrder | None = None) -> list[Poly]:
        order = order or self.ring.order
        with self._lock:
            cached = self._gb.get(order)
        if cached is not None:
            return cached
        G = compute_groebner(self.gens, order)
        with self._lock:
            self._gb.setdefault(order, G)
            return self._gb[order]

    def normal_form(self, f: Poly, order: MonomialOrder | None = None) -> Poly:
        order = order or self.ring.order
        G = self.groebner_basis(order)
        r = reduce_poly(Poly(f.ring.with_order(order), f.terms), G, order)
        return Poly(f.ring, r.terms)

    def contains(self, f: Poly) -> bool:
        return not self.normal_form(f)

    def contains_ideal(self, other: "IdealHandle") -> bool:
        return all(self.contains(g) for g in other.gens)

    def equals(self, other: "IdealHandle") -> bool:
        return self.contains_ideal(other) and other.contains_ideal(self)

    def is_homogeneous(self) -> bool:
        return all(g.is_homogeneous() for g in self.gens)

    def is_unit(self) -> bool:
        G = self.groebner_basis()
        return any(g.degree() == 0 for g in G)

    def __add__(self, other: "IdealHandle") -> "IdealHandle":
        return IdealHandle(self.gens + [Poly(self.ring, g.terms) for g in other.gens], self.ring)

    def __mul__(self, other: "IdealHandle") -> "IdealHandle":
        return IdealHandle([f * Poly(self.ring, g.terms) for f in self.gens for g in other.gens], self.ring)

    def power(self, k: int) -> "IdealHandle":
        out = IdealHandle([self.ring.one()], self.ring)
        for _ in range(k):
            out = out * self
        return out

    def graded_piece(self, d: int) -> GradedPiece:
        return graded_piece_basis(self.gens, d, self.ring)

    def minimal_generators(self) -> list[Poly]:
        """Minimal homogeneous generators, degree by degree."""
        if not self.is_homogeneous():
            raise ValueError("minimal generators need a homogeneous ideal")
        by_deg: dict[int, list[Poly]] = {}
        for g in self.gens:
            by_deg.setdefault(g.degree(), []).append(g)
        chosen: list[Poly] = []
        for d in sorted(by_deg):
            piece = graded_piece_basis(chosen, d, self.ring) if chosen else None
            for g in by_deg[d]:
                if piece is None or not piece.contains(g):
                    chosen.append(g)
                    piece = graded_piece_basis(chosen, d, self.ring)
        return chosen


def groebner_basis(I: IdealHandle, order: MonomialOrder | None = None) -> list[Poly]:
    return I.groebner_basis(order)


def normal_form(f: Poly, I: IdealHandle, order: MonomialOrder | None = None) -> Poly:
    return I.normal_form(f, order)


def _tagged_ring(ring: PolyRing) -> PolyRing:
    return PolyRing(ring.nvars + 1, ring.field, block_order(1), ("_t",) + ring.names)


def _lift(f: Poly, T: PolyRing) -> Poly:
    return Poly(T, {(0,) + e: c for e, c in f.terms.items()})


def _drop(f: Poly, ring: PolyRing) -> Poly:
    return Poly(ring, {e[1:]: c for e, c in f.terms.items()})


def intersect(I: IdealHandle, J: IdealHandle) -> IdealHandle:
    """I ∩ J via (t I, (1 - t) J) ∩ k[x]."""
    R = I.ring
    T = _tagged_ring(R)
    t = T.gen(0)
    gens = [t * _lift(f, T) for f in I.gens] + [(T.one() - t) * _lift(g, T) for g in J.gens]
    G = compute_groebner(gens, T.order)
    return IdealHandle([_drop(g, R) for g in G if all(e[0] == 0 for e in g.terms)], R)


def _quotient_by_element(I: IdealHandle, h: Poly) -> IdealHandle:
    R = I.ring
    inter = intersect(I, IdealHandle([h], R))
    return IdealHandle([g.exact_divide(h) for g in inter.gens], R)


def ideal_quotient(I: IdealHandle, J: IdealHandle, seed: int | None = 0) -> IdealHandle:
    """(I : J) = {f : f J ⊆ I}.

    With a seed, first tries (I : h) for a random combination h of the
    lowest-degree generators of J.  Since (I : J) ⊆ (I : h) always, the
    shortcut is accepted only after checking (I : h) J ⊆ I.  Otherwise
    (or with ``seed=None``) intersects (I : j) over all generators j.
    """
    if not J.gens:
        raise ValueError("quotient by the zero ideal")
    R = I.ring
    jgens = [Poly(R, h.terms) for h in J.gens]
    if seed is not None and len(jgens) > 1:
        rng = random.Random(seed)
        dmin = min(h.degree() for h in jgens)
        low = [h for h in jgens if h.degree() == dmin]
        h = R.zero()
        for g in low:
            h = h + g.scale(R.field.random_nonzero(rng))
        if h:
            q = _quotient_by_element(I, h)
            if all(I.contains(f * j) for f in q.gens for j in jgens):
                return IdealHandle(q.groebner_basis(), R) if q.gens else q
    result = None
    for h in jgens:
        q = _quotient_by_element(I, h)
        result = q if result is None else intersect(result, q)
    return IdealHandle(result.groebner_basis(), R) if result.gens else result


def saturate(I: IdealHandle, J: IdealHandle, max_iterations: int = 20) -> IdealHandle:
    """I : J^∞ by iterated quotients until the ideal stops growing."""
    current = I
    for _ in range(max_iterations):
        nxt = ideal_quotient(current, J)
        if current.contains_ideal(nxt):
            return current
        current = nxt
    raise RuntimeError("saturation did not stabilise within the iteration bound")


def eliminate(I: IdealHandle, variables: Sequence[int], keep_ring: bool = False) -> IdealHandle:
    """I ∩ k[remaining variables].

    The result lives in a ring on the remaining variables (names kept),
    or in the original ring when ``keep_ring`` is set.
    """
    R = I.ring
    elim = sorted(set(variables))
    rest = [i for i in range(R.nvars) if i not in elim]
    perm = elim + rest
    names = [R.names[i] for i in perm]
    E = PolyRing(R.nvars, R.field, block_order(len(elim)), names)

    def permute(f):
        return Poly(E, {tuple(e[i] for i in perm): c for e, c in f.terms.items()})

    G = compute_groebner([permute(f) for f in I.gens], E.order)
    k = len(elim)
    kept = [g for g in G if all(not any(e[:k]) for e in g.terms)]
    if keep_ring:
        inv = {old: new for new, old in enumerate(perm)}
        out = []
        for g in kept:
            terms = {}
            for e, c in g.terms.items():
                full = [0] * R.nvars
                for pos, x in enumerate(e):
                    full[perm[pos]] = x
                terms[tuple(full)] = c
            out.append(Poly(R, terms))
        return IdealHandle(out, R)
    S = PolyRing(len(rest), R.field, GREVLEX, [R.names[i] for i in rest])
    return IdealHandle([Poly(S, {e[k:]: c for e, c in g.terms.items()}) for g in kept], S)


# --------------------------------------------------------------------------
# Hilbert series


def _poly_mul_int(a: list[int], b: list[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _poly_add_int(a: list[int], b: list[int]) -> list[int]:
    n = max(len(a), len(b))
    return [(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)]


def _trim(a: list[int]) -> list[int]:
    while len(a) > 1 and a[-1] == 0:
        a = a[:-1]
    return a


def _minimalize(monos: Iterable[tuple]) -> list[tuple]:
    out: list[tuple] = []
    for m in sorted(set(monos), key=sum):
        if not any(all(x <= y for x, y in zip(a, m)) for a in out):
            out.append(m)
    return out


def hilbert_numerator(monos: Sequence[tuple], nvars: int) -> list[int]:
    """Numerator N(t) with HS(R/M) = N(t) / (1 - t)^nvars for a monomial ideal M."""
    return _trim(_hn(tuple(_minimalize(monos))))


def _hn(gens: tuple) -> list[int]:
    if not gens:
        return [1]
    if any(sum(g) == 0 for g in gens):
        return [0]
    supports = [frozenset(i for i, x in enumerate(g) if x) for g in gens]
    if all(supports[i].isdisjoint(supports[j]) for i in range(len(gens)) for j in range(i)):
        out = [1]
        for g in gens:
            d = sum(g)
            out = _poly_mul_int(out, [1] + [0] * (d - 1) + [-1])
        return out
    # Bigatti-style pivot on the most frequent variable
    # pivot on a variable of a mixed generator: x_v^e with e <= that exponent
    # is never in the ideal, so both branches shrink
    n = len(gens[0])
    mixed = [g for g, s in zip(gens, supports) if len(s) > 1]
    counts = [sum(1 for g in mixed if g[i]) for i in range(n)]
    v = max(range(n), key=lambda i: counts[i])
    exps = sorted(g[v] for g in mixed if g[v])
    e = exps[len(exps) // 2]
    pivot = tuple(e if i == v else 0 for i in range(n))
    plus = tuple(_minimalize(list(gens) + [pivot]))
    colon = tuple(_minimalize(tuple(max(0, x - y) for x, y in zip(g, pivot)) for g in gens))
    return _poly_add_int(_hn(plus), [0] * e + _hn(colon))


def _binomial_poly(r: int, shift: int) -> list[Fraction]:
    """Coefficients (in d, lowest first) of C(d - shift + r, r)."""
    out = [Fraction(1)]
    for j in range(1, r + 1):
        # multiply by (d - shift + j) / j
        c0 = Fraction(j - shift, j)
        c1 = Fraction(1, j)
        nxt = [Fraction(0)] * (len(out) + 1)
        for i, a in enumerate(out):
            nxt[i] += a * c0
            nxt[i + 1] += a * c1
        out = nxt
    return out


@dataclass
class HilbertData:
    """Hilbert series, polynomial and the invariants read off from them."""

    nvars: int
    numerator: list[int]  # over (1 - t)^nvars
    h_vector: list[int] = dc_field(default_factory=list)  # over (1 - t)^(dim + 1)
    dimension: int = -1  # projective dimension, -1 for the empty scheme
    degree: int = 0
    hilbert_polynomial: list[Fraction] = dc_field(default_factory=list)

    @property
    def empty(self) -> bool:
        return self.dimension < 0

    @property
    def chi(self) -> Fraction:
        """Constant term of the Hilbert polynomial."""
        return self.hilbert_polynomial[0] if self.hilbert_polynomial else Fraction(0)

    @property
    def sectional_genus(self) -> Fraction | None:
        """Arithmetic genus of a curve section (dimension >= 1)."""
        if self.dimension < 1:
            return None
        P = list(self.hilbert_polynomial)
        for _ in range(self.dimension - 1):
            P = _difference(P)
        return 1 - P[0]

    def hilbert_polynomial_at(self, d: int) -> Fraction:
        return sum((c * d ** i for i, c in enumerate(self.hilbert_polynomial)), Fraction(0))

    def hilbert_function(self, d: int) -> int:
        if d < 0:
            return 0
        # expand numerator / (1 - t)^n at t^d
        n = self.nvars
        return sum(a * comb(d - i + n - 1, n - 1) for i, a in enumerate(self.numerator) if i <= d)

    @property
    def regularity_index(self) -> int:
        """HF(d) == HP(d) for every d >= this value."""
        return max(0, len(self.h_vector) - 1 - self.dimension)


def _difference(P: list[Fraction]) -> list[Fraction]:
    """Coefficients of P(d) - P(d - 1)."""
    out = [Fraction(0)] * max(1, len(P) - 1)
    for k, c in enumerate(P):
        # c * (d^k - (d-1)^k)
        for j in range(k):
            out[j] -= c * comb(k, j) * (-1) ** (k - j)
    return out


def hilbert_data_from_monomials(monos: Sequence[tuple], nvars: int) -> HilbertData:
    N = hilbert_numerator(monos, nvars)
    if N == [0]:
        return HilbertData(nvars, N, [], -1, 0, [])
    h = list(N)
    k = 0
    while k < nvars and sum(h) == 0:
        # divide by (1 - t)
        q = []
        acc = 0
        for a in h[:-1]:
            acc += a
            q.append(acc)
        h = _trim(q) if q else [0]
        k += 1
    r = nvars - k - 1
    if r < 0:
        return HilbertData(nvars, N, h, -1, 0, [])
    HP = [Fraction(0)] * (r + 1)
    for i, a in enumerate(h):
        for j, c in enumerate(_binomial_poly(r, i)):
            HP[j] += a * c
    return HilbertData(nvars, N, h, r, sum(h), HP)


def hilbert_data(I: IdealHandle) -> HilbertData:
    if not I.is_homogeneous():
        raise ValueError("Hilbert data needs a homogeneous ideal")
    G = I.groebner_basis(GREVLEX)
    return hilbert_data_from_monomials([g.lead_monomial(GREVLEX) for g in G], I.ring.nvars)


# --------------------------------------------------------------------------
# projective emptiness


@dataclass
class EmptinessResult:
    status: str  # "empty", "nonempty" or "inconclusive"
    witness_degree: int | None = None
    checked_up_to: int = 0

    @property
    def empty(self) -> bool:
        return self.status == "empty"

    def __bool__(self):
        return self.empty


def is_empty_projective(I: IdealHandle, bound: int = SWEEP_DEFAULT, groebner_fallback: bool = True,
                        start: int = 1, seed: int = 0, base: IdealHandle | None = None) -> EmptinessResult:
    """Is V(I) empty in projective space?

    Sweeps d = start..bound checking whether every monomial of degree d lies
    in I (Macaulay-matrix rank).  A found degree is a certificate.  If the
    sweep ends without one, ``groebner_fallback`` decides non-emptiness from
    the Hilbert polynomial; without it the answer is "inconclusive".
    """
    if not I.is_homogeneous():
        raise ValueError("projective emptiness needs a homogeneous ideal")
    R = I.ring
    gens = [g for g in I.gens if g]
    if any(g.degree() == 0 for g in gens):
        return EmptinessResult("empty", 0, 0)
    if base is not None:
        return _sweep_modulo(base, [g for g in gens if not base.contains(g)], bound, start, seed)
    for d in range(max(1, start), bound + 1):
        monos = monomials_of_degree(R.nvars, d)
        rows = _macaulay_matrix(gens, d, R)
        if rows is not None and linalg.full_column_rank(R.field, rows, len(monos), seed=seed + d):
            return EmptinessResult("empty", d, d)
    if groebner_fallback:
        hd = hilbert_data(I)
        if not hd.empty:
            return EmptinessResult("nonempty", None, bound)
        w = len(hd.numerator)
        # first degree where the (finite) Hilbert function vanishes for good
        w = next(d for d in range(0, w + R.nvars + 1)
                 if all(hd.hilbert_function(e) == 0 for e in range(d, d + R.nvars + 2)))
        return EmptinessResult("empty", max(w, 1), bound)
    return EmptinessResult("inconclusive", None, bound)


def _sweep_modulo(base: IdealHandle, extra: Sequence[Poly], bound: int, start: int,
                  seed: int) -> EmptinessResult:
    """Sweep in R / base: does (base + extra)_d fill R_d?

    Multiples m * g of the extra generators are reduced modulo a Groebner
    basis of ``base``; degree d is a witness when their normal forms span
    every standard monomial of degree d.  Normal forms are built
    incrementally: NF(x_i m g) = NF(x_i NF(m g)).
    """
    R = base.ring
    F = R.field
    red = Reducer(base.groebner_basis(GREVLEX), GREVLEX)
    pk = red.pk
    n = R.nvars
    unit = [pk.pack(tuple(1 if k == i else 0 for k in range(n))) for i in range(n)]
    # normal forms of multiples, keyed by (generator index, packed multiplier)
    cache: dict = {}
    for j, g in enumerate(extra):
        cache[(j, 0)] = red.reduce_terms(_to_internal(g, pk))
    layer = {j: [0] for j in range(len(extra))}
    cur_deg = {j: g.degree() for j, g in enumerate(extra)}
    for d in range(max(1, start), bound + 1):
        std = red.standard_monomials(d)
        if not std:
            return EmptinessResult("empty", d, d)
        # raise each generator's layer of multipliers to degree d
        for j in layer:
            while cur_deg[j] < d:
                nxt = []
                seen = set()
                for m in layer[j]:
                    e = pk.unpack(m)
                    start_var = max((i for i, x in enumerate(e) if x), default=0)
                    for i in range(start_var, n):
                        mm = m + unit[i]
                        if mm in seen:
                            continue
                        seen.add(mm)
                        prev = cache[(j, m)]
                        shifted = {t + unit[i]: c for t, c in prev.items()}
                        cache[(j, mm)] = red.reduce_terms(shifted)
                        nxt.append(mm)
                for m in layer[j]:
                    cache.pop((j, m), None)
                layer[j] = nxt
                cur_deg[j] += 1
        rows = []
        col = {pk.pack(m): k for k, m in enumerate(std)}
        for j in layer:
            if cur_deg[j] != d:
                continue
            for m in layer[j]:
                terms = cache[(j, m)]
                if terms:
                    rows.append(terms)
        if len(rows) < len(std):
            continue
        A = np.zeros((len(rows), len(std)), dtype=np.int64)
        for r, terms in enumerate(rows):
            for t, c in terms.items():
                A[r, col[t]] = c
        if linalg.full_column_rank(F, A, len(std), seed=seed + d):
            return EmptinessResult("empty", d, d)
    return EmptinessResult("inconclusive", None, bound)


def _macaulay_matrix(gens: Sequence[Poly], d: int, R: PolyRing):
    """Macaulay matrix of ``gens`` in degree d (native matrix type)."""
    from .multipoly import monomial_index
    idx = monomial_index(R.nvars, d)
    F = R.field
    usable = [g for g in gens if g.degree() <= d]
    if not usable:
        return None
    if not F.numpy_ok:
        return macaulay_rows(usable, d)
    nrows = sum(len(monomials_of_degree(R.nvars, d - g.degree())) for g in usable)
    A = np.zeros((nrows, len(idx)), dtype=np.int64)
    r = 0
    for g in usable:
        items = list(g.terms.items())
        cols_coeffs = [(e, c) for e, c in items]
        for m in monomials_of_degree(R.nvars, d - g.degree()):
            for e, c in cols_coeffs:
                A[r, idx[mono_mul(e, m)]] = c
            r += 1
    return A


# --------------------------------------------------------------------------
# syzygies and graded regularity


def regularity_bound(I: IdealHandle, seed: int = 0) -> int:
    """reg(I) from a grevlex basis in random coordinates (Bayer-Stillman).

    Valid with high probability over F_p for p much larger than the degrees
    involved; the random change of coordinates is seeded.
    """
    R = I.ring
    F = R.field
    rng = random.Random(seed)
    while True:
        M = [[F.random(rng) for _ in range(R.nvars)] for _ in range(R.nvars)]
        if not F.is_zero(linalg.determinant(F, M)):
            break
    images = [R.linear_form(row) for row in M]
    gens = [g.compose(images) for g in I.gens]
    G = compute_groebner(gens, GREVLEX)
    return max((g.degree() for g in G), default=0)


@dataclass
class FreeModuleMap:
    """Homogeneous map F -> G of graded free modules.

    ``columns[j]`` is the image of the j-th basis element of F, a list of
    polynomials (one per basis element of G).  ``source_degrees`` and
    ``target_degrees`` are the degree shifts.
    """

    ring: PolyRing
    columns: list[list[Poly]]
    source_degrees: list[int]
    target_degrees: list[int]


def _module_vector_index(target_degrees, d, nvars):
    index = {}
    pos = 0
    for k, a in enumerate(target_degrees):
        for m in monomials_of_degree(nvars, d - a):
            index[(k, m)] = pos
            pos += 1
    return index, pos


def _image_matrix(phi: FreeModuleMap, d: int):
    """Matrix (rows: target coords in degree d, cols: source basis in degree d)."""
    R = phi.ring
    n = R.nvars
    tindex, trows = _module_vector_index(phi.target_degrees, d, n)
    cols = []
    for j, b in enumerate(phi.source_degrees):
        for m in monomials_of_degree(n, d - b):
            cols.append((j, m))
    F = R.field
    if F.numpy_ok:
        A = np.zeros((trows, len(cols)), dtype=np.int64)
    else:
        A = [[F.zero] * len(cols) for _ in range(trows)]
    for c, (j, m) in enumerate(cols):
        for k, comp in enumerate(phi.columns[j]):
            for e, v in comp.terms.items():
                r = tindex[(k, mono_mul(e, m))]
                if F.numpy_ok:
                    A[r, c] = (A[r, c] + v) % F.p
                else:
                    A[r][c] += v
    return A, cols, trows


def _vector_from_columns(vec, cols, ring, nsource):
    """Kernel vector -> list of polynomials (one per source generator)."""
    F = ring.field
    comps: list[dict] = [dict() for _ in range(nsource)]
    for val, (j, m) in zip(vec, cols):
        v = int(val) if F.numpy_ok else val
        if not F.is_zero(v):
            comps[j][m] = F.convert(v)
    return [Poly(ring, c) for c in comps]


def minimal_kernel(phi: FreeModuleMap, max_degree: int) -> tuple[list[list[Poly]], list[int]]:
    """Minimal homogeneous generators of ker(phi) up to ``max_degree``.

    Works degree by degree: the kernel in degree d is a null space, and the
    new generators are a complement of the span of earlier generators times
    monomials.  Returns (generators, their degrees).
    """
    R = phi.ring
    F = R.field
    n = R.nvars
    gens: list[list[Poly]] = []
    degs: list[int] = []
    if not phi.source_degrees:
        return gens, degs
    lo = min(phi.source_degrees)
    for d in range(lo, max_degree + 1):
        A, cols, trows = _image_matrix(phi, d)
        if not cols:
            continue
        if trows == 0:
            null = linalg.nullspace(F, np.zeros((0, len(cols)), dtype=np.int64) if F.numpy_ok else [],
                                    len(cols))
        else:
            null = linalg.nullspace(F, A, len(cols))
        if not null:
            continue
        colindex = {c: i for i, c in enumerate(cols)}
        old_rows = []
        for s, e in zip(gens, degs):
            for m in monomials_of_degree(n, d - e):
                row = [F.zero] * len(cols)
                for j, comp in enumerate(s):
                    for mono, v in comp.terms.items():
                        row[colindex[(j, mono_mul(mono, m))]] = v
                old_rows.append(row)
        if old_rows:
            E, piv = linalg.rref(F, old_rows, len(cols))
            E = list(E) if not F.numpy_ok else E
            piv = list(piv)
        else:
            E, piv = (np.zeros((0, len(cols)), dtype=np.int64) if F.numpy_ok else []), []
        for v in null:
            r = linalg.reduce_against(F, v, E, piv)
            if linalg.is_zero_vector(F, r):
                continue
            gens.append(_vector_from_columns(v, cols, R, len(phi.source_degrees)))
            degs.append(d)
            stacked = (np.vstack([E, np.asarray(v, dtype=np.int64).reshape(1, -1)])
                       if F.numpy_ok else list(E) + [list(v)])
            E, piv = linalg.rref(F, stacked, len(cols))
            piv = list(piv)
    return gens, degs


def syzygies(gens: Sequence, degrees: Sequence[int] | None = None, target_degrees: Sequence[int] | None = None,
             max_degree: int | None = None) -> tuple[list[list[Poly]], list[int]]:
    """Minimal first syzygies of homogeneous elements.

    ``gens`` are polynomials (ideal generators) or lists of polynomials
    (elements of a free module with shifts ``target_degrees``).  Without
    ``max_degree`` the search bound comes from the regularity of the ideal
    (only available for ideal generators).
    """
    gens = list(gens)
    if not gens:
        return [], []
    if isinstance(gens[0], Poly):
        ring = gens[0].ring
        cols = [[g] for g in gens]
        tdeg = [0]
        sdeg = list(degrees) if degrees is not None else [g.degree() for g in gens]
        if max_degree is None:
            max_degree = regularity_bound(IdealHandle(gens, ring)) + 1
    else:
        ring = gens[0][0].ring
        cols = [list(v) for v in gens]
        if target_degrees is None or degrees is None or max_degree is None:
            raise ValueError("module syzygies need degrees, target_degrees and max_degree")
        tdeg = list(target_degrees)
        sdeg = list(degrees)
    phi = FreeModuleMap(ring, cols, sdeg, tdeg)
    return minimal_kernel(phi, max_degree)
