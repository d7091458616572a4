"""Geometric constructions over F_p.

Veronese and linked surfaces, Betti tables, rational maps and their images,
point sampling, and the jet computations used to build cubic sections of the
genus 7 Mukai fourfold.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from itertools import combinations
from typing import Sequence

import numpy as np

from . import linalg
from .exactalg import JetRing, PrimeField
from .groebner import (
    EmptinessResult, FreeModuleMap, HilbertData, IdealHandle, compute_groebner,
    hilbert_data, ideal_quotient, is_empty_projective, minimal_kernel, regularity_bound,
)
from .multipoly import (
    LEX, GradedPiece, Poly, PolyRing, evaluate_many, forms_vanishing_on_points,
    graded_piece_basis, monomial_index, monomials_of_degree,
)

MAX_RETRIES = 20


class ConstructionError(RuntimeError):
    """A construction produced something other than what was expected."""


# --------------------------------------------------------------------------
# rational maps


@dataclass
class RationalMap:
    """[forms[0] : ... : forms[m]] from P(source) to P(target)."""

    source: PolyRing
    forms: list[Poly]
    target: PolyRing | None = None
    source_ideal: IdealHandle | None = None

    def __post_init__(self):
        if not self.forms or not any(self.forms):
            raise ValueError("a rational map needs a nonzero form")
        degs = {f.degree() for f in self.forms if f}
        if len(degs) != 1 or not all(f.is_homogeneous() for f in self.forms):
            raise ValueError("map forms must be homogeneous of one degree")
        if self.target is None:
            self.target = PolyRing(len(self.forms), self.source.field)
        if self.target.nvars != len(self.forms):
            raise ValueError("target ring does not match the number of forms")

    @property
    def degree(self) -> int:
        return next(f.degree() for f in self.forms if f)

    def __call__(self, point) -> list:
        return [f.evaluate(point) for f in self.forms]

    def image_points(self, points) -> np.ndarray:
        return evaluate_many(self.forms, points)

    def pullback(self, f: Poly) -> Poly:
        """f composed with the map (a form on the source)."""
        return f.compose(self.forms)

    def after(self, other: "RationalMap") -> "RationalMap":
        """self ∘ other."""
        return RationalMap(other.source, [f.compose(other.forms) for f in self.forms], self.target)


# --------------------------------------------------------------------------
# surfaces


@dataclass
class SurfaceInvariants:
    """Numerical invariants of a smooth projective surface."""

    d: int
    pi: int
    chi: int
    K2: int | None = None
    e: int | None = None
    sources: dict = dc_field(default_factory=dict)

    @property
    def KH(self) -> int:
        return 2 * self.pi - 2 - self.d

    def noether_holds(self) -> bool:
        return self.K2 is not None and self.e is not None and 12 * self.chi == self.K2 + self.e

    def double_point_defect(self) -> int:
        """Left side of the double-point identity for surfaces in P^4."""
        return self.d ** 2 - 10 * self.d - 5 * self.KH - 2 * self.K2 + 12 * self.chi


def _to_int(x) -> int:
    x = Fraction(x)
    if x.denominator != 1:
        raise ConstructionError(f"expected an integer invariant, got {x}")
    return int(x)


def derive_surface_invariants(I: IdealHandle, ambient: str = "P4", calibration: dict | None = None,
                              hd: HilbertData | None = None) -> SurfaceInvariants:
    """d, pi, chi from the Hilbert polynomial; K^2 and e by one of:

    * ``"P4"``: double-point identity, then Noether;
    * ``"veronese"``: K = -(3/2) H (plane embedded by conics);
    * ``"anticanonical"``: K = -H (del Pezzo surfaces);
    * ``"calibrated"``: e solved from a known E^4 of the blow-up, using
      ``calibration = {"E4", "index", "c2F"}``, then Noether.
    """
    hd = hd or hilbert_data(I)
    if hd.dimension != 2:
        raise ConstructionError(f"expected a surface, got dimension {hd.dimension}")
    inv = SurfaceInvariants(hd.degree, _to_int(hd.sectional_genus), _to_int(hd.chi))
    inv.sources.update(d="hilbert", pi="hilbert", chi="hilbert")
    if ambient == "P4":
        if I.ring.nvars != 5:
            raise ValueError("the double-point identity needs a surface in P^4")
        K2 = Fraction(inv.d ** 2 - 10 * inv.d - 5 * inv.KH + 12 * inv.chi, 2)
        inv.K2 = _to_int(K2)
        inv.e = 12 * inv.chi - inv.K2
        inv.sources.update(K2="double-point identity", e="noether")
    elif ambient == "veronese":
        # K = -(3/2)H, so K^2 = (9/4) H^2 and K.H = -(3/2) d
        if Fraction(-3, 2) * inv.d != inv.KH:
            raise ConstructionError("K.H does not match the Veronese model")
        inv.K2 = _to_int(Fraction(9, 4) * inv.d)
        inv.e = 12 * inv.chi - inv.K2
        inv.sources.update(K2="veronese model", e="noether")
    elif ambient == "anticanonical":
        if inv.KH != -inv.d:
            raise ConstructionError("K.H does not match an anticanonical embedding")
        inv.K2 = inv.d
        inv.e = 12 * inv.chi - inv.K2
        inv.sources.update(K2="anticanonical model", e="noether")
    elif ambient == "calibrated":
        if not calibration:
            raise ValueError("calibrated invariants need E4, index and c2F")
        i = calibration["index"]
        # E^4 = -(i K.H + i^2 d - c2F + e)
        inv.e = -calibration["E4"] - i * inv.KH - i * i * inv.d + calibration["c2F"]
        inv.K2 = 12 * inv.chi - inv.e
        inv.sources.update(K2="noether (calibrated)", e="calibrated from E^4")
    else:
        raise ValueError(f"unknown ambient descriptor {ambient!r}")
    if not inv.noether_holds():
        raise ConstructionError("Noether's identity fails")
    return inv


def _conic_monomials(P2: PolyRing) -> list[Poly]:
    s = P2.gens()
    return [s[i] * s[j] for i in range(3) for j in range(i, 3)]


def veronese_parametrization(target: str = "P5", seed: int = 0, field=None) -> RationalMap:
    """P^2 -> P^5 by all conics, or -> P^4 by five random combinations."""
    F = field or PrimeField()
    P2 = PolyRing(3, F, names=("s0", "s1", "s2"))
    quads = _conic_monomials(P2)
    if target == "P5":
        return RationalMap(P2, quads)
    if target != "P4":
        raise ValueError("target must be 'P5' or 'P4'")
    rng = random.Random(seed)
    for _ in range(MAX_RETRIES):
        A = [[F.random(rng) for _ in range(6)] for _ in range(5)]
        forms = [_combine(quads, row, P2) for row in A]
        if any(not f for f in forms):
            continue
        phi = RationalMap(P2, forms)
        if _jacobian_rank_at(phi, [F.random(rng) for _ in range(3)]) == 3:
            return phi
    raise ConstructionError("could not find an isomorphic projection of the Veronese surface")


def _combine(polys: Sequence[Poly], coeffs: Sequence, ring: PolyRing) -> Poly:
    out = ring.zero()
    for f, c in zip(polys, coeffs):
        out = out + f.scale(c)
    return out


def _jacobian_rank_at(phi: RationalMap, u) -> int:
    F = phi.source.field
    rows = [[g.derivative(k).evaluate(u) for k in range(phi.source.nvars)] for g in phi.forms]
    return linalg.rank(F, rows, phi.source.nvars)


def veronese_surface(target: str = "P5", seed: int = 0, field=None) -> IdealHandle:
    """Ideal of the Veronese surface in P^5 or of a general projection to P^4."""
    F = field or PrimeField()
    if target == "P5":
        R = PolyRing(6, F)
        y = R.gens()
        M = [[y[0], y[1], y[2]], [y[1], y[3], y[4]], [y[2], y[4], y[5]]]
        minors = []
        for r in combinations(range(3), 2):
            for c in combinations(range(3), 2):
                m = M[r[0]][c[0]] * M[r[1]][c[1]] - M[r[0]][c[1]] * M[r[1]][c[0]]
                minors.append(m)
        return IdealHandle(graded_piece_basis(minors, 2, R).basis(), R)
    phi = veronese_parametrization("P4", seed, F)
    cubics = implicitize_by_interpolation(phi, 3, seed=seed)
    return IdealHandle(cubics.gens, cubics.ring)


def in_hyperplane(I: IdealHandle) -> IdealHandle:
    """The same scheme inside the hyperplane V(x_n) of a projective space one larger."""
    R = PolyRing(I.ring.nvars + 1, I.ring.field)
    gens = [R.gen(R.nvars - 1)] + [Poly(R, {e + (0,): c for e, c in g.terms.items()}) for g in I.gens]
    return IdealHandle(gens, R)


def veronese_in_p6(field=None) -> IdealHandle:
    """Veronese surface inside a hyperplane P^5 of P^6."""
    return in_hyperplane(veronese_surface("P5", field=field or PrimeField()))


def sextic_del_pezzo(field=None) -> IdealHandle:
    """P^2 blown up in the three coordinate points, embedded in P^6 by cubics."""
    F = field or PrimeField()
    P2 = PolyRing(3, F, names=("s0", "s1", "s2"))
    cubic_monos = [m for m in monomials_of_degree(3, 3) if max(m) < 3]
    phi = RationalMap(P2, [P2.monomial(m) for m in cubic_monos])
    return implicitize_by_interpolation(phi, 2, seed=0)


def sextic_del_pezzo_in_p7(field=None) -> IdealHandle:
    """The sextic del Pezzo surface inside a hyperplane P^6 of P^7."""
    return in_hyperplane(sextic_del_pezzo(field))


@dataclass
class LinkageData:
    genus: int
    surface: IdealHandle
    invariants: SurfaceInvariants
    veronese: IdealHandle
    complete_intersection: list[Poly]
    linking_degrees: tuple
    seed: int


def _random_element(piece: GradedPiece, rng: random.Random, ring: PolyRing) -> Poly:
    F = ring.field
    return _combine(piece.basis(), [F.random(rng) for _ in range(piece.dimension)], ring)


def _quadric_rank(q: Poly) -> int:
    R = q.ring
    n = R.nvars
    rows = [[q.derivative(i).derivative(j).evaluate([0] * n) for j in range(n)] for i in range(n)]
    return linalg.rank(R.field, rows, n)


def linkage_data(g: int, seed: int = 0, field=None) -> LinkageData:
    """Residual of a Veronese surface in a complete intersection.

    g=7: (3,4) in P^4.  g=8: (2,2,3) in P^5, the first quadric smooth,
    so the residual lies on a smooth quadric fourfold.
    """
    F = field or PrimeField()
    rng = random.Random(seed)
    if g == 7:
        V = veronese_surface("P4", seed, F)
        degrees = (3, 4)
    elif g == 8:
        V = veronese_surface("P5", seed, F)
        degrees = (2, 2, 3)
    else:
        raise ValueError("linked surfaces are built for g = 7, 8")
    R = V.ring
    pieces = {d: graded_piece_basis(V.gens, d, R) for d in set(degrees)}
    for _ in range(MAX_RETRIES):
        ci = [_random_element(pieces[d], rng, R) for d in degrees]
        if g == 8 and _quadric_rank(ci[0]) != R.nvars:
            continue
        CI = IdealHandle(ci, R)
        if hilbert_data(CI).dimension != R.nvars - 1 - len(degrees):
            continue
        residual = ideal_quotient(CI, V, seed=rng.randrange(1 << 30))
        S = IdealHandle(residual.minimal_generators(), R)
        hd = hilbert_data(S)
        if hd.dimension != 2:
            continue
        if g == 7:
            inv = derive_surface_invariants(S, "P4", hd=hd)
        else:
            inv = derive_surface_invariants(S, "calibrated", hd=hd,
                                            calibration={"E4": -77, "index": 4, "c2F": 7 * hd.degree})
        return LinkageData(g, S, inv, V, ci, degrees, seed)
    raise ConstructionError("no regular sequence found for the linkage")


def linked_surface(g: int, seed: int = 0, field=None) -> tuple[IdealHandle, SurfaceInvariants]:
    data = linkage_data(g, seed, field)
    return data.surface, data.invariants


# --------------------------------------------------------------------------
# Betti tables


class BettiTable:
    """Graded Betti numbers beta_{i,j}, displayed with row index j - i."""

    def __init__(self, entries: dict | None = None):
        self.entries = {k: v for k, v in (entries or {}).items() if v}

    def __getitem__(self, key):
        return self.entries.get(key, 0)

    def __eq__(self, other):
        return isinstance(other, BettiTable) and self.entries == other.entries

    def __repr__(self):
        return f"BettiTable({self.entries})"

    @property
    def length(self) -> int:
        return max((i for i, _ in self.entries), default=0)

    def rows(self) -> dict[int, list[int]]:
        """{row: [beta_{0,row}, beta_{1,row+1}, ...]} for every row up to the last."""
        if not self.entries:
            return {}
        top = max(j - i for i, j in self.entries)
        n = self.length + 1
        return {r: [self[(i, i + r)] for i in range(n)] for r in range(top + 1)}

    @classmethod
    def from_rows(cls, rows: dict[int, Sequence[int]]) -> "BettiTable":
        entries = {}
        for r, vals in rows.items():
            for i, v in enumerate(vals):
                if v:
                    entries[(i, i + r)] = v
        return cls(entries)

    def to_text(self) -> str:
        rows = self.rows()
        n = self.length + 1
        cells = {r: [str(v) if v else "." for v in vals] for r, vals in rows.items()}
        width = max([len(c) for vals in cells.values() for c in vals] + [len(str(n - 1))])
        lines = ["   " + " ".join(str(i).rjust(width) for i in range(n))]
        for r, vals in cells.items():
            lines.append(f"{r}: " + " ".join(c.rjust(width) for c in vals))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "BettiTable":
        rows = {}
        for line in text.strip().splitlines()[1:]:
            head, _, rest = line.partition(":")
            rows[int(head)] = [0 if c == "." else int(c) for c in rest.split()]
        return cls.from_rows(rows)

    def numerator(self) -> list[int]:
        """sum_{i,j} (-1)^i beta_{i,j} t^j."""
        top = max((j for _, j in self.entries), default=0)
        out = [0] * (top + 1)
        for (i, j), v in self.entries.items():
            out[j] += (-1) ** i * v
        while len(out) > 1 and out[-1] == 0:
            out.pop()
        return out


def betti_table(I: IdealHandle, max_length: int = 6, seed: int = 0) -> BettiTable:
    """Minimal graded Betti numbers of R/I.

    The resolution is built degree by degree by linear algebra.  Degrees are
    bounded by reg(I) (from a generic-coordinates grevlex basis):
    beta_{i,j} vanishes for j > reg(I) - 1 + i.
    """
    if not I.is_homogeneous():
        raise ValueError("Betti tables need a homogeneous ideal")
    R = I.ring
    gens = I.minimal_generators()
    entries = {(0, 0): 1}
    if not gens:
        return BettiTable(entries)
    reg = regularity_bound(I, seed=seed)
    for g in gens:
        entries[(1, g.degree())] = entries.get((1, g.degree()), 0) + 1
    cols = [[g] for g in gens]
    sdeg = [g.degree() for g in gens]
    tdeg = [0]
    i = 1
    while True:
        phi = FreeModuleMap(R, cols, sdeg, tdeg)
        kernel, kdeg = minimal_kernel(phi, reg + i)
        if not kernel:
            break
        i += 1
        if i > max_length:
            raise ConstructionError("resolution longer than the length cap")
        for d in kdeg:
            entries[(i, d)] = entries.get((i, d), 0) + 1
        cols, tdeg, sdeg = kernel, sdeg, kdeg
    return BettiTable(entries)


# --------------------------------------------------------------------------
# smoothness


def _det(M: list[list[Poly]], ring: PolyRing) -> Poly:
    n = len(M)
    if n == 1:
        return M[0][0]
    out = ring.zero()
    for j in range(n):
        if not M[0][j]:
            continue
        minor = [row[:j] + row[j + 1:] for row in M[1:]]
        term = M[0][j] * _det(minor, ring)
        out = out + term if j % 2 == 0 else out - term
    return out


def smoothness_certificate(I: IdealHandle, codim: int, seed: int = 0, max_minors: int = 60,
                           bound: int = 12) -> EmptinessResult:
    """Emptiness of V(I + J') with J' spanned by random Jacobian minors.

    The minors are taken after a random change of coordinates, grouped by
    degree and mixed by random combinations.  J' is contained in the full
    Jacobian ideal, so an "empty" answer certifies smoothness of V(I) (over
    the algebraic closure of F_p) in codimension ``codim``.
    """
    R = I.ring
    F = R.field
    rng = random.Random(seed)
    n = R.nvars
    while True:
        B = [[F.random(rng) for _ in range(n)] for _ in range(n)]
        if not F.is_zero(linalg.determinant(F, B)):
            break
    gens = list(I.gens)
    grads = [g.gradient() for g in gens]
    # derivatives along the columns of B: still homogeneous
    jac = [[_combine(gr, [B[k][c] for k in range(n)], R) for c in range(n)] for gr in grads]
    row_sets = list(combinations(range(len(gens)), codim))
    col_sets = list(combinations(range(n), codim))
    pairs = [(r, c) for r in row_sets for c in col_sets]
    rng.shuffle(pairs)
    minors = []
    for r, c in pairs[:max_minors]:
        m = _det([[jac[i][j] for j in c] for i in r], R)
        if m:
            minors.append(m)
    by_degree: dict[int, list[Poly]] = {}
    for m in minors:
        by_degree.setdefault(m.degree(), []).append(m)
    mixed = []
    for d, group in by_degree.items():
        for _ in range(min(len(group), 2 * n)):
            mixed.append(_combine(group, [F.random(rng) for _ in group], R))
    return is_empty_projective(IdealHandle(gens + [m for m in mixed if m], R), bound=bound)


# --------------------------------------------------------------------------
# point sampling


def roots_mod_p(coeffs: Sequence[int], p: int) -> list[int]:
    """Roots in F_p of sum coeffs[k] t^k (exhaustive vectorised evaluation)."""
    coeffs = [int(c) % p for c in coeffs]
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    if not coeffs:
        raise ValueError("the zero polynomial has every element as a root")
    if len(coeffs) == 1:
        return []
    if p > 10 ** 7:
        raise ValueError("exhaustive root finding needs p <= 10^7")
    t = np.arange(p, dtype=np.int64)
    acc = np.zeros(p, dtype=np.int64)
    for c in reversed(coeffs):
        acc = (acc * t + c) % p
    return [int(x) for x in np.flatnonzero(acc == 0)]


def _univariate(f: Poly, var: int, assignment: dict) -> list[int]:
    """Coefficients in x_var after substituting ``assignment``."""
    F = f.ring.field
    out: dict[int, int] = {}
    for e, c in f.terms.items():
        v = c
        for k, x in enumerate(e):
            if k != var and x:
                v = F.mul(v, F.pow(assignment[k], x))
        out[e[var]] = F.add(out.get(e[var], F.zero), v)
    top = max(out) if out else 0
    return [out.get(k, 0) for k in range(top + 1)]


def solve_zero_dimensional(polys: Sequence[Poly]) -> list[tuple]:
    """All F_p-rational solutions of an affine zero-dimensional system."""
    ring = polys[0].ring
    F = ring.field
    n = ring.nvars
    G = compute_groebner(polys, LEX)
    if any(g.degree() == 0 for g in G):
        return []
    sols: list[dict] = [{}]
    for var in reversed(range(n)):
        relevant = [g for g in G if all(not any(e[:var]) for e in g.terms)]
        new = []
        for partial in sols:
            unis = [_univariate(g, var, partial) for g in relevant]
            unis = [u for u in unis if any(F.convert(c) for c in u)]
            if not unis:
                raise ConstructionError("system is not zero-dimensional")
            roots = None
            for u in unis:
                r = set(roots_mod_p(u, F.p))
                roots = r if roots is None else roots & r
                if not roots:
                    break
            for r in sorted(roots or ()):
                d = dict(partial)
                d[var] = r
                new.append(d)
        sols = new
    return [tuple(s[k] for k in range(n)) for s in sols]


def _random_linear_section_points(I: IdealHandle, dim: int, rng: random.Random) -> list[list[int]]:
    """F_p-points of V(I) on a random linear space of complementary dimension."""
    R = I.ring
    F = R.field
    N = R.nvars - 1
    m = N - dim
    B = [[F.random(rng) for _ in range(R.nvars)] for _ in range(m + 1)]
    A = PolyRing(m, F, LEX) if m > 0 else None
    if A is None:
        pt = B[0]
        return [pt] if all(F.is_zero(g.evaluate(pt)) for g in I.gens) else []
    # chart s0 = 1, s_j = y_j
    lin = []
    for i in range(R.nvars):
        terms = {(0,) * m: B[0][i]}
        for j in range(1, m + 1):
            e = [0] * m
            e[j - 1] = 1
            terms[tuple(e)] = B[j][i]
        lin.append(A.from_dict(terms))
    restricted = [g.compose(lin) for g in I.gens]
    restricted = [f for f in restricted if f]
    if not restricted:
        return []
    out = []
    for sol in solve_zero_dimensional(restricted):
        s = (1,) + tuple(sol)
        out.append([sum(s[j] * B[j][i] for j in range(m + 1)) % F.p for i in range(R.nvars)])
    return out


def _interpolate_mod_p(values: Sequence[int], p: int) -> list[int]:
    """Coefficients of the polynomial of degree < n taking values[t] at t = 0..n-1."""
    n = len(values)
    # Newton divided differences, then expand to the monomial basis
    dd = [int(v) % p for v in values]
    for k in range(1, n):
        inv = pow(k, -1, p)
        for i in range(n - 1, k - 1, -1):
            dd[i] = (dd[i] - dd[i - 1]) * inv % p
    coeffs = [0] * n
    for k in range(n - 1, -1, -1):
        # coeffs = coeffs * (t - k) + dd[k]
        new = [0] * n
        for i, c in enumerate(coeffs):
            if c:
                if i + 1 < n:
                    new[i + 1] = (new[i + 1] + c) % p
                new[i] = (new[i] - k * c) % p
        new[0] = (new[0] + dd[k]) % p
        coeffs = new
    return coeffs


def _hypersurface_points(f: Poly, rng: random.Random) -> list[list[int]]:
    """All F_p-points of V(f) on the affine part {a + t b} of a random line."""
    R = f.ring
    F = R.field
    p = F.p
    a = np.array([F.random(rng) for _ in range(R.nvars)], dtype=np.int64)
    b = np.array([F.random(rng) for _ in range(R.nvars)], dtype=np.int64)
    d = f.degree()
    ts = np.arange(d + 1, dtype=np.int64).reshape(-1, 1)
    vals = evaluate_many([f], (a + ts * b) % p)[:, 0]
    coeffs = _interpolate_mod_p([int(v) for v in vals], p)
    if not any(coeffs):
        roots = range(p)  # the line lies on V(f)
    else:
        roots = roots_mod_p(coeffs, p)
    return [[int(x) for x in (a + t * b) % p] for t in roots]


def _normalise(pt, F) -> tuple:
    k = next((i for i, x in enumerate(pt) if x % F.p), None)
    if k is None:
        return tuple(pt)
    inv = F.inv(pt[k])
    return tuple(F.mul(x, inv) for x in pt)


def sample_points(X, count: int, seed: int = 0, max_rounds: int | None = None) -> list[list[int]]:
    """``count`` distinct F_p-points of X.

    X may be a :class:`RationalMap` (images of random points), a
    :class:`Poly` (hypersurface, via random lines) or an :class:`IdealHandle`
    (via random linear sections of complementary dimension).
    """
    rng = random.Random(seed)
    max_rounds = max_rounds or 50 * count + 100
    seen = set()
    out: list[list[int]] = []
    if isinstance(X, RationalMap):
        F = X.source.field
        for _ in range(max_rounds):
            u = [F.random(rng) for _ in range(X.source.nvars)]
            if X.source_ideal is not None:
                raise ValueError("sampling a map restricted to a subvariety is not supported")
            img = [int(v) for v in X.image_points([u])[0]]
            if not any(img):
                continue
            key = _normalise(img, F)
            if key not in seen:
                seen.add(key)
                out.append(img)
                if len(out) == count:
                    return out
        raise ConstructionError("point sampling failed")
    if isinstance(X, Poly):
        F = X.ring.field
        gen = lambda: _hypersurface_points(X, rng)  # noqa: E731
    elif isinstance(X, IdealHandle):
        F = X.ring.field
        dim = hilbert_data(X).dimension
        if dim < 0:
            raise ConstructionError("empty variety")
        gen = lambda: _random_linear_section_points(X, dim, rng)  # noqa: E731
    else:
        raise TypeError("cannot sample from this object")
    for _ in range(max_rounds):
        pts = gen()
        rng.shuffle(pts)
        for pt in pts:
            if not any(pt):
                continue
            key = _normalise(pt, F)
            if key not in seen:
                seen.add(key)
                out.append(pt)
                if len(out) == count:
                    return out
    raise ConstructionError("point sampling failed")


# --------------------------------------------------------------------------
# implicitisation and linear systems


def implicitize_by_interpolation(phi: RationalMap, d: int, samples: int | None = None,
                                  seed: int = 0) -> IdealHandle:
    """Degree-d forms vanishing on the image of ``phi``.

    The null space of the evaluation matrix at ``samples`` image points
    (default twice the number of monomials) must not shrink when the sample
    count doubles.
    """
    T = phi.target
    nmon = len(monomials_of_degree(T.nvars, d))
    samples = samples or 2 * nmon
    if samples < 2 * nmon:
        raise ValueError("need at least twice as many samples as monomials")
    rng = random.Random(seed)
    F = T.field
    src = [[F.random(rng) for _ in range(phi.source.nvars)] for _ in range(2 * samples)]
    img = phi.image_points(src)
    first = forms_vanishing_on_points(T, d, img[:samples])
    second = forms_vanishing_on_points(T, d, img)
    if len(first) != len(second):
        raise ConstructionError(f"interpolation did not stabilise ({len(first)} vs {len(second)})")
    return IdealHandle(second, T) if second else IdealHandle([], T)


def partials_vanish_on(I: IdealHandle, f: Poly) -> bool:
    return all(I.contains(g) for g in f.gradient() if g)


def double_point_linear_system(I_F: IdealHandle, degree: int, expected: int | None = None) -> RationalMap:
    """Forms of the given degree singular along V(I_F).

    f is singular along V(I_F) iff every partial derivative lies in I_F (for
    a prime ideal and p > degree this is the symbolic square, which the
    ordinary square may miss).  Solved as a linear system: the partials of f
    must reduce to zero modulo the degree-(degree-1) piece of I_F.
    """
    R = I_F.ring
    F = R.field
    n = R.nvars
    if degree <= 1:
        raise ValueError("degree must be at least 2")
    piece = graded_piece_basis(I_F.gens, degree - 1, R)
    low = monomials_of_degree(n, degree - 1)
    high = monomials_of_degree(n, degree)
    low_index = monomial_index(n, degree - 1)
    pivots = list(piece.pivots)
    pivot_set = set(pivots)
    free = [c for c in range(len(low)) if c not in pivot_set]
    free_pos = {c: k for k, c in enumerate(free)}
    p = F.p
    # residual of the unit vector e_c modulo the rref rows, in free coordinates
    E = np.asarray(piece.matrix, dtype=np.int64) if len(pivots) else np.zeros((0, len(low)), dtype=np.int64)
    residual = np.zeros((len(low), len(free)), dtype=np.int64)
    for r, c in enumerate(pivots):
        residual[c] = (-E[r, free]) % p
    for c in free:
        residual[c, free_pos[c]] = 1
    blocks = []
    for k in range(n):
        M = np.zeros((len(free), len(high)), dtype=np.int64)
        for j, m in enumerate(high):
            if m[k]:
                e = list(m)
                e[k] -= 1
                M[:, j] = residual[low_index[tuple(e)]] * m[k] % p
        blocks.append(M)
    A = np.vstack(blocks)
    null = linalg.nullspace(F, A, len(high))
    forms = [R.from_vector(v, high) for v in null]
    if expected is not None and len(forms) != expected:
        raise ConstructionError(f"double-point system has dimension {len(forms)}, expected {expected}")
    if not forms:
        raise ConstructionError("double-point system is empty")
    return RationalMap(R, forms)


def ordinary_square_dimension(I: IdealHandle, degree: int) -> int:
    gens = I.gens
    sq = [gens[a] * gens[b] for a in range(len(gens)) for b in range(a, len(gens))]
    return graded_piece_basis(sq, degree, I.ring).dimension


# --------------------------------------------------------------------------
# jets along a map


def map_jets(phi: RationalMap, u: Sequence[int], directions: Sequence[Sequence[int]], order: int):
    """Jets of phi(u + sum_j eps_j v_j) truncated above ``order``.

    Returns (jet ring, array with one coefficient row per form).
    """
    S = phi.source
    F = S.field
    J = JetRing(F, len(directions), order)
    n = S.nvars
    coords = [J.linear(u[k], [v[k] for v in directions]).coeffs for k in range(n)]
    D = phi.degree
    # monomial jets degree by degree
    jets = {(0,) * n: J.constant(1).coeffs}
    current = [(0,) * n]
    for _ in range(D):
        nxt = []
        left, right = [], []
        for m in current:
            start = max((i for i, x in enumerate(m) if x), default=0)
            for i in range(start, n):
                e = list(m)
                e[i] += 1
                e = tuple(e)
                if e not in jets:
                    nxt.append(e)
                    left.append(jets[m])
                    right.append(coords[i])
                    jets[e] = None
        prods = J.mul_many(left, right)
        for e, row in zip(nxt, prods):
            jets[e] = row
        current = nxt
    monos = monomials_of_degree(n, D)
    Mj = np.array([jets[m] for m in monos], dtype=np.int64)
    C = np.zeros((len(phi.forms), len(monos)), dtype=np.int64)
    idx = monomial_index(n, D)
    for r, f in enumerate(phi.forms):
        for e, c in f.terms.items():
            C[r, idx[e]] = c
    return J, linalg.matmul(F, C, Mj)


def _form_jets(J: JetRing, base, d: int, nvars: int):
    """Jets of every degree-d monomial in the given base jets."""
    monos = monomials_of_degree(nvars, d)
    cache = {(0,) * nvars: J.constant(1).coeffs}
    current = [(0,) * nvars]
    for _ in range(d):
        nxt, left, right = [], [], []
        for m in current:
            start = max((i for i, x in enumerate(m) if x), default=0)
            for i in range(start, nvars):
                e = list(m)
                e[i] += 1
                e = tuple(e)
                if e not in cache:
                    cache[e] = None
                    nxt.append(e)
                    left.append(cache[m])
                    right.append(base[i])
        for e, row in zip(nxt, J.mul_many(left, right)):
            cache[e] = row
        current = nxt
    return monos, np.array([cache[m] for m in monos], dtype=np.int64)


def _complement_directions(u, F, rng, count):
    """``count`` random vectors that together with u span the space."""
    n = len(u)
    while True:
        V = [[F.random(rng) for _ in range(n)] for _ in range(count)]
        if linalg.rank(F, [list(u)] + V, n) == count + 1:
            return V


@dataclass
class CubicSection:
    form: Poly
    kernel_dimension: int
    point: list
    rank: int


def _reduce_modulo(F, vec, piece: GradedPiece):
    return linalg.reduce_against(F, vec, piece.matrix, piece.pivots)


def local_parametrization(IX2: Sequence[Poly], x: Sequence[int], order: int, seed: int = 0,
                          codim: int | None = None):
    """Formal parametrization of X = V(IX2) at the smooth point x.

    Writes a point as x + sum t_j w_j + sum s_k n_k with w spanning the
    tangent directions and n a complement, then solves ``codim`` random
    combinations of the equations for s(t) by Newton iteration with the
    constant Jacobian at x (one order gained per step).  Returns (jet ring,
    coordinate jets), one row per ambient coordinate.
    """
    R = IX2[0].ring
    F = R.field
    p = F.p
    n = R.nvars
    rng = random.Random(seed)
    jac = [[q.derivative(k).evaluate(x) for k in range(n)] for q in IX2]
    c = codim if codim is not None else linalg.rank(F, jac, n)
    ker = linalg.nullspace(F, jac, n)  # affine tangent space, contains x
    tangent = []
    basis = [list(map(int, x))]
    for v in ker:
        cand = basis + [list(map(int, v))]
        if linalg.rank(F, cand, n) == len(cand):
            basis = cand
            tangent.append(list(map(int, v)))
    m = len(tangent)
    if m + c + 1 != n:
        raise ConstructionError("x is not a smooth point of the expected codimension")
    normals = []
    while len(normals) < c:
        v = [F.random(rng) for _ in range(n)]
        if linalg.rank(F, basis + normals + [v], n) == len(basis) + len(normals) + 1:
            normals.append(v)
    while True:
        combo = [[F.random(rng) for _ in IX2] for _ in range(c)]
        eqs = [_combine(IX2, row, R) for row in combo]
        # derivative of each equation along each normal direction at x
        J0 = [[sum(eq.derivative(k).evaluate(x) * nv[k] for k in range(n)) % p for nv in normals]
              for eq in eqs]
        if linalg.rank(F, J0, c) == c:
            break
    Jinv = _inverse(F, J0)
    J = JetRing(F, m, order)
    base = np.array([J.linear(x[k], [w[k] for w in tangent]).coeffs for k in range(n)], dtype=np.int64)
    Nmat = np.array(normals, dtype=np.int64)  # c x n
    S = np.zeros((c, J.size), dtype=np.int64)
    for _ in range(order + 1):
        coords = (base + (Nmat.T @ S) % p) % p
        vals = np.array([_eval_form_on_jets(J, eq, coords) for eq in eqs], dtype=np.int64)
        S = (S - linalg.matmul(F, np.array(Jinv, dtype=np.int64), vals)) % p
    coords = (base + (Nmat.T @ S) % p) % p
    return J, coords


def _inverse(F, M):
    n = len(M)
    aug = [list(row) + [1 if i == j else 0 for j in range(n)] for i, row in enumerate(M)]
    R, piv = linalg.rref(F, aug, 2 * n)
    return [[int(v) for v in row[n:]] for row in R]


def _eval_form_on_jets(J: JetRing, f: Poly, coords):
    d = f.degree()
    monos, cols = _form_jets(J, coords, d, f.ring.nvars)
    idx = {mm: k for k, mm in enumerate(monos)}
    vec = np.zeros(len(monos), dtype=np.int64)
    for e, v in f.terms.items():
        vec[idx[e]] = v
    return linalg.matmul(J.field, vec.reshape(1, -1), cols)[0]


def _section_from_jets(J: JetRing, coords, IX3: GradedPiece, T: PolyRing, expected_kernel: int,
                       point) -> CubicSection:
    F = T.field
    monos, cols = _form_jets(J, coords, 3, T.nvars)
    A = cols.T  # rows: jet coefficients, columns: cubic monomials
    null = linalg.nullspace(F, A, len(monos))
    rank = len(monos) - len(null)
    if len(null) != expected_kernel:
        raise ConstructionError(f"jet system kernel has dimension {len(null)}, expected {expected_kernel}")
    for v in null:
        r = _reduce_modulo(F, v, IX3)
        if not linalg.is_zero_vector(F, r):
            form = T.from_vector(r, monos).monic()
            return CubicSection(form, len(null), list(point), rank)
    raise ConstructionError("every jet solution vanishes on X")


def cubic_section_at_point(IX3: GradedPiece, phi: RationalMap, u: Sequence[int], seed: int = 0,
                           order: int = 6, expected_kernel: int | None = None,
                           IX2: Sequence[Poly] | None = None) -> CubicSection:
    """The cubic c whose restriction to X vanishes to order > ``order`` at phi(u).

    Where phi is a local immersion at u the jets are taken along phi;
    otherwise (u on a contracted locus) along a formal parametrization of X
    at phi(u), which needs the quadrics ``IX2``.  The answer is unique
    modulo the cubics through X (the graded piece ``IX3``) and is returned
    reduced against that piece.
    """
    S = phi.source
    F = S.field
    expected_kernel = expected_kernel if expected_kernel is not None else IX3.dimension + 1
    if _jacobian_rank_at(phi, u) == S.nvars:
        rng = random.Random(seed)
        V = _complement_directions(u, F, rng, S.nvars - 1)
        J, base = map_jets(phi, u, V, order)
        return _section_from_jets(J, base, IX3, phi.target, expected_kernel, u)
    if IX2 is None:
        raise ConstructionError("phi is not immersive at u; the quadrics of X are needed")
    x = [int(v) for v in phi.image_points([u])[0]]
    return cubic_section_on_x(IX2, x, IX3, seed=seed, order=order, expected_kernel=expected_kernel)


def cubic_section_on_x(IX2: Sequence[Poly], x: Sequence[int], IX3: GradedPiece, seed: int = 0,
                       order: int = 6, expected_kernel: int | None = None) -> CubicSection:
    """Same cubic section, computed from a formal parametrization of X at x."""
    T = IX2[0].ring
    expected_kernel = expected_kernel if expected_kernel is not None else IX3.dimension + 1
    J, coords = local_parametrization(IX2, x, order, seed=seed)
    return _section_from_jets(J, coords, IX3, T, expected_kernel, x)


@dataclass
class ContractedCubic:
    form: Poly
    scale: int
    kernel_dimension: int


def contracted_cubic(phi: RationalMap, d3: Poly, IX3: GradedPiece, samples: int = 500,
                     seed: int = 0, expected_kernel: int | None = None) -> ContractedCubic:
    """Cubic c on the target with c∘phi = lambda * d3^(deg phi), lambda != 0.

    Solved on ``samples`` random source points; c is reduced modulo the
    cubics through the image, normalised to be monic.
    """
    S = phi.source
    F = S.field
    T = phi.target
    power = phi.degree * 3 // d3.degree()
    if power * d3.degree() != 3 * phi.degree:
        raise ValueError("degrees of the map and of d3 are incompatible")
    nmon = len(monomials_of_degree(T.nvars, 3))
    if samples < nmon + 1:
        raise ValueError("too few samples for the linear solve")
    rng = random.Random(seed)
    pts = [[F.random(rng) for _ in range(S.nvars)] for _ in range(samples)]
    img = phi.image_points(pts)
    monos = monomials_of_degree(T.nvars, 3)
    cubic_vals = evaluate_many([T.monomial(m) for m in monos], img)
    dvals = evaluate_many([d3], pts)[:, 0]
    p = F.p
    rhs = np.array([pow(int(x), power, p) for x in dvals], dtype=np.int64)
    A = np.hstack([cubic_vals, (-rhs % p).reshape(-1, 1)])
    null = linalg.nullspace(F, A, nmon + 1)
    expected_kernel = expected_kernel if expected_kernel is not None else IX3.dimension + 1
    if len(null) != expected_kernel:
        raise ConstructionError(f"contracted cubic kernel has dimension {len(null)}, expected {expected_kernel}")
    for v in null:
        lam = int(v[-1])
        if lam:
            inv = F.inv(lam)
            coeffs = np.array(v[:-1], dtype=np.int64) * inv % p
            r = _reduce_modulo(F, coeffs, IX3)
            form = T.from_vector(r, monos)
            lead = form.lead_coeff()
            return ContractedCubic(form.scale(F.inv(lead)), F.inv(lead), len(null))
    raise ConstructionError("no solution with nonzero scale")


def jet_order_along(phi: RationalMap, c: Poly, u: Sequence[int], order: int, seed: int = 0) -> int | None:
    """Order of vanishing at u of c∘phi restricted to a transversal slice.

    Returns None when the jet vanishes up to ``order`` (order > ``order``).
    """
    F = phi.source.field
    rng = random.Random(seed)
    V = _complement_directions(u, F, rng, phi.source.nvars - 1)
    J, base = map_jets(phi, u, V, order)
    d = c.degree()
    monos, cols = _form_jets(J, base, d, phi.target.nvars)
    idx = {m: k for k, m in enumerate(monos)}
    vec = np.zeros(len(monos), dtype=np.int64)
    for e, v in c.terms.items():
        vec[idx[e]] = v
    jet = linalg.matmul(F, vec.reshape(1, -1), cols)[0]
    nz = np.flatnonzero(jet)
    if nz.size == 0:
        return None
    return int(J.degrees[nz[0]])


# --------------------------------------------------------------------------
# lines through a point


@dataclass
class TangentSection:
    hilbert: HilbertData
    ideal: IdealHandle
    tangent_basis: list
    contains_point: bool
    is_cone: bool


def lines_through_point(IX2: Sequence[Poly], x: Sequence[int]) -> TangentSection:
    """Intersect X with its embedded tangent space at x.

    The tangent space is the kernel of the Jacobian of the quadrics at x; the
    restricted ideal lives in coordinates s0..s4 with x = (1:0:0:0:0).
    """
    R = IX2[0].ring
    F = R.field
    n = R.nvars
    jac = [[q.derivative(k).evaluate(x) for k in range(n)] for q in IX2]
    ker = linalg.nullspace(F, jac, n)
    if len(ker) != 5:
        raise ConstructionError(f"tangent space has dimension {len(ker) - 1}, expected 4")
    basis = [list(map(int, x))]
    for v in ker:
        cand = basis + [list(map(int, v))]
        if linalg.rank(F, cand, n) == len(cand):
            basis = cand
        if len(basis) == 5:
            break
    S = PolyRing(5, F, names=tuple(f"s{j}" for j in range(5)))
    images = [S.linear_form([basis[j][i] for j in range(5)]) for i in range(n)]
    restricted = [q.compose(images) for q in IX2]
    I = IdealHandle([f for f in restricted if f], S)
    hd = hilbert_data(I)
    contains = all(F.is_zero(f.evaluate([1, 0, 0, 0, 0])) for f in I.gens)
    cone = all(e[0] == 0 for f in I.gens for e in f.terms)
    return TangentSection(hd, I, basis, contains, cone)
