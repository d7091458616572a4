"""Cremona transformations centred at a point and the affine-plane cylinder chart.

Both transformations used here have the shape

    Psi = (G * l_1, ..., G * l_4, F)

where l_1..l_4 cut out a point ``c``, G vanishes to order deg G at ``c`` and
F vanishes at ``c`` to order deg F - 1.  In coordinates z with ``c = e_4`` one
has F = z4 * Fa(z') + Fb(z') with Fa = (c . grad F), and the inverse is

    z' = Fa(w') w',   z4 = G(w') w4 - Fb(w').

Every inverse is certified by composing exactly: inverse o Psi = h * id as
polynomial identities, with the factor h split into its known components.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import linalg
from .exactalg import QQ, PrimeField
from .multipoly import Poly, PolyRing, evaluate_many, monomials_of_degree
from .report import Report
from .varieties import RationalMap, roots_mod_p, sample_points

SEGRE_TEMPLATE = (1, 1, 1, -1, -1, -1)


class DegenerateConfiguration(ValueError):
    """The chosen data do not satisfy a required genericity condition."""


# --------------------------------------------------------------------------
# small linear-algebra helpers working over F_p and QQ alike


def _rank(F, rows, ncols):
    return linalg.rank(F, rows, ncols) if len(rows) else 0


def _kernel(F, rows, ncols):
    return [[F.convert(int(x) if F.numpy_ok else x) for x in v] for v in linalg.nullspace(F, rows, ncols)]


def _inverse(F, M):
    n = len(M)
    aug = [list(M[i]) + [1 if i == j else 0 for j in range(n)] for i in range(n)]
    R, piv = linalg.rref(F, aug, 2 * n)
    if list(piv) != list(range(n)):
        raise DegenerateConfiguration("matrix is singular")
    return [[F.convert(int(R[i][n + j]) if F.numpy_ok else R[i][n + j]) for j in range(n)] for i in range(n)]


def _proportional(F, a, b) -> bool:
    """a and b are nonzero and equal up to a scalar."""
    return _rank(F, [list(a), list(b)], len(a)) == 1


def linear_form_vector(l: Poly) -> list:
    R = l.ring
    out = []
    for i in range(R.nvars):
        e = [0] * R.nvars
        e[i] = 1
        out.append(l.coefficient(tuple(e)))
    return out


def hessian_rank(f: Poly, point) -> int:
    R = f.ring
    F = R.field
    H = [[f.derivative(i).derivative(j).evaluate(point) for j in range(R.nvars)] for i in range(R.nvars)]
    return _rank(F, H, R.nvars)


def quadric_rank(q: Poly) -> int:
    """Rank of a quadratic form (characteristic != 2)."""
    return hessian_rank(q, [0] * q.ring.nvars)


def polar(f: Poly, point) -> Poly:
    """Directional derivative sum_i point_i * df/dx_i."""
    R = f.ring
    F = R.field
    acc = R.zero()
    for i, c in enumerate(point):
        c = F.convert(c)
        if not F.is_zero(c):
            acc = acc + f.derivative(i).scale(c)
    return acc


def forms_through_point(R: PolyRing, point) -> tuple[list[Poly], Poly]:
    """Linear forms l_1..l_{n-1} cutting out ``point`` and l_0 with l_0(point) = 1."""
    F = R.field
    n = R.nvars
    ker = _kernel(F, [list(point)], n)
    ls = [R.linear_form(v) for v in ker]
    k = next(i for i, x in enumerate(point) if not F.is_zero(F.convert(x)))
    coeffs = [0] * n
    coeffs[k] = F.inv(F.convert(point[k]))
    return ls, R.linear_form(coeffs)


def factor_support(h: Poly, candidates: Sequence[Poly]) -> tuple[list[int], Poly]:
    """Divide ``h`` by each candidate as often as possible.

    Returns the multiplicities and the cofactor; the zero set of ``h`` lies in
    the union of the candidates iff the cofactor is a nonzero constant.
    """
    mult = []
    for g in candidates:
        k = 0
        while h.degree() >= g.degree() > 0:
            try:
                h = h.exact_divide(g)
            except ValueError:
                break
            k += 1
        mult.append(k)
    return mult, h


# --------------------------------------------------------------------------
# nodal cubics


@dataclass
class NodalCubicInstance:
    f: Poly
    node: list
    linear_forms: list[Poly]
    hessian_rank: int
    nodes: list = dc_field(default_factory=list)

    @property
    def ring(self) -> PolyRing:
        return self.f.ring

    @property
    def field(self):
        return self.f.ring.field

    def tangent_cone(self) -> Poly:
        return polar(self.f, self.node)

    def is_node(self, point) -> bool:
        return self.f.evaluate(point) == 0 and all(d.evaluate(point) == 0 for d in self.f.gradient())


def segre_nodes(field) -> list[list]:
    """The ten nodes, in coordinates x0..x4 with x5 = -(x0 + ... + x4) dropped."""
    seen = set()
    out = []
    for perm in set(itertools.permutations(SEGRE_TEMPLATE)):
        v = perm[:5]
        key = v if v[next(i for i, x in enumerate(v) if x)] > 0 else tuple(-x for x in v)
        if key not in seen:
            seen.add(key)
            out.append([field.convert(x) for x in key])
    out.sort(key=lambda v: [int(x) if not isinstance(x, Fraction) else x for x in v])
    return out


def build_segre_cubic(field=None, node_index: int = 0) -> NodalCubicInstance:
    """sum x_i^3 - (sum x_i)^3 on P^4 (the cubic with ten nodes)."""
    F = field if field is not None else PrimeField()
    R = PolyRing(5, F)
    xs = R.gens()
    s = sum(xs[1:], xs[0])
    f = sum((x ** 3 for x in xs[1:]), xs[0] ** 3) - s ** 3
    nodes = segre_nodes(F)
    p = nodes[node_index]
    ls, _ = forms_through_point(R, p)
    return NodalCubicInstance(f, p, ls, hessian_rank(f, p), nodes)


# --------------------------------------------------------------------------
# point-centred Cremona transformations


@dataclass
class CremonaStep:
    forward: RationalMap
    inverse: RationalMap
    centre: list
    G: Poly
    F: Poly
    source_factor: Poly | None = None
    target_factor: Poly | None = None
    removed_source: dict = dc_field(default_factory=dict)
    removed_target: dict = dc_field(default_factory=dict)
    extras: dict = dc_field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return self.source_factor is not None and self.target_factor is not None


def centred_cremona(R: PolyRing, centre, G: Poly, F_form: Poly,
                    ls: Sequence[Poly] | None = None) -> tuple[RationalMap, RationalMap]:
    """(G l_1, .., G l_4, F) and its closed-form inverse."""
    Fd = R.field
    n = R.nvars
    if ls is None:
        ls, l0 = forms_through_point(R, centre)
    else:
        _, l0 = forms_through_point(R, centre)
    ls = list(ls)
    Lmat = [linear_form_vector(l) for l in ls] + [linear_form_vector(l0)]
    A = _inverse(Fd, Lmat)  # x = A z
    T = PolyRing(n, Fd, names=[f"y{i}" for i in range(n)])
    w = T.gens()
    # x as a function of z = (w', 0)
    X = [T.linear_form([A[j][i] for i in range(n - 1)] + [0]) for j in range(n)]
    Fa = polar(F_form, centre).compose(X)
    Fb = F_form.compose(X)
    Gt = G.compose(X)
    z = [Fa * w[i] for i in range(n - 1)] + [Gt * w[n - 1] - Fb]
    inv_forms = []
    for j in range(n):
        acc = T.zero()
        for i in range(n):
            if not Fd.is_zero(A[j][i]):
                acc = acc + z[i].scale(A[j][i])
        inv_forms.append(acc)
    forward = RationalMap(R, [G * l for l in ls] + [F_form], T)
    inverse = RationalMap(T, inv_forms, R)
    return forward, inverse


def composition_factor(outer: RationalMap, inner: RationalMap) -> Poly | None:
    """h with outer o inner = h * identity, or None when no such h exists."""
    comp = [f.compose(inner.forms) for f in outer.forms]
    xs = inner.source.gens()
    if len(comp) != len(xs):
        return None
    h = None
    for c, x in zip(comp, xs):
        if c:
            try:
                h = c.exact_divide(x)
            except ValueError:
                return None
            break
    if h is None or not h:
        return None
    for c, x in zip(comp, xs):
        if c != h * x:
            return None
    return h


def solve_inverse(phi: RationalMap, degree: int, seed: int = 0, samples: int | None = None) -> RationalMap | None:
    """Find forms G of the given degree with G(phi(x)) proportional to x.

    The linear conditions G_j(phi(x)) x_0 - G_0(phi(x)) x_j = 0 are imposed at
    random points; the candidate is returned only if the exact composition
    certificate holds.
    """
    R = phi.source
    T = phi.target
    F = R.field
    if not F.numpy_ok:
        raise ValueError("the sampled solver works over prime fields")
    n = R.nvars
    monos = monomials_of_degree(T.nvars, degree)
    m = len(monos)
    rng = random.Random(seed)
    samples = samples or (n * m) // (n - 1) + 40
    pts = np.array([[F.random(rng) for _ in range(n)] for _ in range(samples)], dtype=np.int64)
    imgs = phi.image_points(pts)
    mono_polys = [T.monomial(e) for e in monos]
    V = evaluate_many(mono_polys, imgs)  # samples x m
    p = F.p
    rows = []
    for j in range(1, n):
        blk = np.zeros((samples, n * m), dtype=np.int64)
        blk[:, j * m:(j + 1) * m] = V * pts[:, [0]] % p
        blk[:, 0:m] = (-V * pts[:, [j]]) % p
        rows.append(blk)
    A = np.vstack(rows)
    ker = linalg.nullspace(F, A, n * m)
    if len(ker) != 1:
        return None
    v = ker[0]
    forms = [T.from_vector(v[j * m:(j + 1) * m], monos) for j in range(n)]
    cand = RationalMap(T, forms, R)
    return cand if composition_factor(cand, phi) is not None else None


def maps_proportional(a: RationalMap, b: RationalMap) -> bool:
    """The two maps agree up to one global scalar."""
    F = a.source.field
    va, vb = [], []
    for fa, fb in zip(a.forms, b.forms):
        keys = sorted(set(fa.terms) | set(fb.terms))
        va += [fa.coefficient(k) for k in keys]
        vb += [fb.coefficient(k) for k in keys]
    return _proportional(F, va, vb)


def _line_span(F, points) -> list:
    """Linear forms vanishing on all points (kernel of the point matrix)."""
    n = len(points[0])
    return _kernel(F, [list(map(lambda x: F.convert(int(x) if F.numpy_ok else x), p)) for p in points], n)


def _hyperplane_section_points(hyperplane: Poly, other: Poly, count: int, seed: int) -> list[list]:
    """F_p-points on V(hyperplane) ∩ V(other)."""
    R = hyperplane.ring
    F = R.field
    n = R.nvars
    basis = _kernel(F, [linear_form_vector(hyperplane)], n)  # points of the hyperplane
    S = PolyRing(n - 1, F)
    embed = [S.linear_form([basis[k][j] for k in range(n - 1)]) for j in range(n)]
    restricted = other.compose(embed)
    pts = sample_points(restricted, count, seed=seed)
    return [[sum(F.mul(pt[k], basis[k][j]) for k in range(n - 1)) % F.p for j in range(n)] for pt in pts]


# --------------------------------------------------------------------------
# step 1


def step1_cubic_cremona(W: NodalCubicInstance, g: Poly | None = None, seed: int = 0,
                        certify: bool = True) -> CremonaStep:
    """Cubic transformation (g l_1, .., g l_4, f) centred at the node.

    ``g`` defaults to the tangent cone of W at the node; pass ``"random"`` for
    a random rank-4 quadric singular at the node.
    """
    R = W.ring
    F = R.field
    tc = W.tangent_cone()
    if isinstance(g, str) and g == "random":
        rng = random.Random(seed)
        for _ in range(20):
            coeffs = {}
            cand = R.zero()
            for a, b in itertools.combinations_with_replacement(range(4), 2):
                cand = cand + (W.linear_forms[a] * W.linear_forms[b]).scale(F.random(rng))
            if quadric_rank(cand) == 4:
                g = cand
                break
        else:
            raise DegenerateConfiguration("no rank-4 quadric found")
    elif g is None:
        g = tc
    if not all(d.evaluate(W.node) == 0 for d in g.gradient()):
        raise DegenerateConfiguration("the quadric must be singular at the node")
    fwd, inv = centred_cremona(R, W.node, g, W.f, W.linear_forms)
    step = CremonaStep(fwd, inv, list(W.node), g, W.f)
    T = fwd.target
    y = T.gens()
    # Q' is the tangent cone written in the target coordinates y'
    Qp = inv.forms[0].ring.zero()
    _, l0 = forms_through_point(R, W.node)
    Lmat = [linear_form_vector(l) for l in W.linear_forms] + [linear_form_vector(l0)]
    A = _inverse(F, Lmat)
    X = [T.linear_form([A[j][i] for i in range(4)] + [0]) for j in range(5)]
    Qp = tc.compose(X)
    step.extras.update(tangent_cone=tc, Qprime=Qp, PW=y[4])
    step.removed_source = {"W": W.f, "Q": g}
    step.removed_target = {"P_W": y[4], "Q'": Qp}
    if certify:
        step.source_factor = composition_factor(inv, fwd)
        step.target_factor = composition_factor(fwd, inv)
    return step


# --------------------------------------------------------------------------
# step 2


def sample_q(step1: CremonaStep, seed: int = 0) -> list:
    """A point of P_W ∩ Q' different from the vertex of Q'."""
    pts = _hyperplane_section_points(step1.extras["PW"], step1.extras["Qprime"], 1, seed)
    return pts[0]


def step2_quadric_cremona(step1: CremonaStep, q=None, seed: int = 0, certify: bool = True) -> CremonaStep:
    """Quadric transformation (h' l'_1, .., h' l'_4, g') centred at q ∈ P_W ∩ Q'."""
    gq = step1.extras["Qprime"]
    PW = step1.extras["PW"]
    T = gq.ring
    F = T.field
    if q is None:
        q = sample_q(step1, seed)
    q = [F.convert(x) for x in q]
    if gq.evaluate(q) != 0 or PW.evaluate(q) != 0:
        raise DegenerateConfiguration("q must lie on P_W and Q'")
    h = polar(gq, q)  # tangent hyperplane of Q' at q
    if not h:
        raise DegenerateConfiguration("q is a singular point of Q'")
    ls, l0 = forms_through_point(T, q)
    fwd, inv = centred_cremona(T, q, h, gq, ls)
    step = CremonaStep(fwd, inv, q, h, gq)
    # hyperplanes in the final coordinates: P1 = image of Q', P2 from the
    # target factor, P3 = image of P_W
    Lmat = [linear_form_vector(l) for l in ls] + [linear_form_vector(l0)]
    A = _inverse(F, Lmat)
    U = fwd.target
    X = [U.linear_form([A[j][i] for i in range(4)] + [0]) for j in range(5)]
    P1 = U.gen(4)
    P2 = h.compose(X)
    P3 = PW.compose(X)
    step.extras.update(P1=P1, P2=P2, P3=P3, Pprime=h, q=q)
    step.removed_source = {"P'": h, "P_W": PW, "Q'": gq}
    step.removed_target = {"P1": P1, "P2": P2, "P3": P3}
    if certify:
        step.source_factor = composition_factor(inv, fwd)
        step.target_factor = composition_factor(fwd, inv)
    return step


# --------------------------------------------------------------------------
# cylinder chart


@dataclass
class CylinderChart:
    """P^4 minus three hyperplanes through a line, as Z x A^2.

    Z is P^2 minus the three coordinate lines; the chart sends x to
    ((P1 : P2 : P3)(x), (u(x)/P1(x), v(x)/P1(x))).
    """

    field: object
    hyperplanes: list  # three coefficient vectors
    complement: list  # two more vectors completing a basis
    inverse_matrix: list
    line: list  # two points spanning P1 ∩ P2 ∩ P3

    def forms_at(self, x) -> list:
        F = self.field
        rows = self.hyperplanes + self.complement
        return [sum((F.mul(F.convert(r[i]), F.convert(x[i])) for i in range(len(x))), F.zero)
                if not F.numpy_ok else sum(int(r[i]) * int(x[i]) for i in range(len(x))) % F.p
                for r in rows]

    def in_domain(self, x) -> bool:
        v = self.forms_at(x)
        return all(not self.field.is_zero(c) for c in v[:3])

    def to_chart(self, x):
        F = self.field
        v = self.forms_at(x)
        if any(F.is_zero(c) for c in v[:3]):
            raise ValueError("point lies on one of the hyperplanes")
        inv = F.inv(v[0])
        base = (F.one, F.mul(v[1], inv), F.mul(v[2], inv))
        fibre = (F.mul(v[3], inv), F.mul(v[4], inv))
        return base, fibre

    def from_chart(self, base, fibre):
        F = self.field
        s0, s1, s2 = (F.convert(c) for c in base)
        if any(F.is_zero(c) for c in (s0, s1, s2)):
            raise ValueError("base point lies on a removed line")
        t1, t2 = (F.convert(c) for c in fibre)
        lin = [s0, s1, s2, F.mul(t1, s0), F.mul(t2, s0)]
        M = self.inverse_matrix
        return [sum((F.mul(M[j][i], lin[i]) for i in range(5)), F.zero) for j in range(5)]


def cylinder_chart(P1, P2, P3, field=None) -> CylinderChart:
    """Chart from three hyperplanes (forms or coefficient vectors) meeting in a line."""
    vecs = []
    for P in (P1, P2, P3):
        if isinstance(P, Poly):
            field = field or P.ring.field
            vecs.append(linear_form_vector(P))
        else:
            vecs.append(list(P))
    F = field if field is not None else PrimeField()
    vecs = [[F.convert(x) for x in v] for v in vecs]
    n = len(vecs[0])
    if _rank(F, vecs, n) != 3:
        raise DegenerateConfiguration("the three hyperplanes do not meet in a line")
    line = _kernel(F, vecs, n)
    comp = []
    for i in range(n):
        e = [F.zero] * n
        e[i] = F.one
        if _rank(F, vecs + comp + [e], n) == len(vecs) + len(comp) + 1:
            comp.append(e)
        if len(comp) == 2:
            break
    M = _inverse(F, vecs + comp)
    return CylinderChart(F, vecs, comp, M, line)


def _projectively_equal(F, a, b) -> bool:
    return _proportional(F, a, b)


def count_complement(forms: Sequence[Sequence[int]], p: int, dim: int = 4) -> int:
    """Number of points of P^dim(F_p) where none of the linear forms vanishes."""
    C = np.array(forms, dtype=np.int64) % p
    total = 0
    n = dim + 1
    for lead in range(n):
        free = n - lead - 1
        # x_lead = 1, earlier coordinates 0; enumerate the rest in slabs
        if free == 0:
            pts = np.zeros((1, n), dtype=np.int64)
            pts[0, lead] = 1
            total += int(np.all((pts @ C.T) % p != 0, axis=1).sum())
            continue
        inner = free - 1 if free > 1 else 0
        grid = np.array(list(itertools.product(range(p), repeat=inner)), dtype=np.int64) if inner else \
            np.zeros((1, 0), dtype=np.int64)
        if inner > 3:
            raise ValueError("dimension too large for exhaustive counting")
        base = np.zeros((grid.shape[0], n), dtype=np.int64)
        base[:, lead] = 1
        base[:, n - inner:] = grid
        partial = base @ C.T % p
        col = lead + 1
        for a in range(p):
            vals = (partial + a * C[:, col]) % p
            total += int(np.all(vals != 0, axis=1).sum())
    return total


# --------------------------------------------------------------------------
# verification reports


def _pts_images(phi: RationalMap, pts):
    return phi.image_points(pts)


def verify_step1(W: NodalCubicInstance, step: CremonaStep, samples: int = 200, seed: int = 0,
                 report: Report | None = None, factor_samples: int = 500) -> Report:
    rep = report or Report("cremona")
    F = W.field
    fwd, inv = step.forward, step.inverse
    loc = "cubic transformation centred at a node"
    rep.add("step1.degree", loc, [3, 5], [fwd.degree, len(fwd.forms)], source="reference")
    wpts = sample_points(W.f, samples, seed=seed)
    img = _pts_images(fwd, wpts)
    ker = _line_span(F, [r for r in img if np.any(r)])
    rep.add("step1.image_of_W_is_hyperplane", loc, 1, len(ker), detail="kernel dimension of image points")
    rep.add("step1.P_W", loc, [0, 0, 0, 0, 1], [int(x) for x in ker[0]] if len(ker) == 1 else None,
            source="derived")
    qpts = sample_points(step.G, samples, seed=seed + 1)
    qimg = [r for r in _pts_images(fwd, qpts) if np.any(r)]
    r = _rank(F, qimg, 5)
    pt = [int(x) for x in qimg[0]]
    rep.add("step1.image_of_Q_is_point", loc, 1, r, detail=f"{len(qimg)} images")
    rep.add("step1.image_point_off_P_W", loc, True, step.extras["PW"].evaluate(pt) != 0)
    Qp = step.extras["Qprime"]
    rep.add("step1.Q'_rank", loc, 4, quadric_rank(Qp))
    vertex = _kernel(F, [[int(x) for x in linear_form_vector(d)] for d in Qp.gradient()], 5)
    rep.add("step1.Q'_vertex_is_image_of_Q", loc, True, len(vertex) == 1 and _proportional(F, vertex[0], pt))
    qq = sample_points(Qp, samples, seed=seed + 2)
    back = [r for r in _pts_images(inv, qq) if np.any(r)]
    rep.add("step1.Q'_contracted_to_node", loc, True,
            bool(back) and all(_proportional(F, b, W.node) for b in back), source="derived",
            detail=f"{len(back)} of {len(qq)} images defined")
    mult, rest = factor_support(Qp.compose(fwd.forms), [step.G, W.f, W.tangent_cone()])
    rep.add("step1.Q'_pullback_on_base_locus", loc, 0, rest.degree(), source="derived",
            detail=f"multiplicities {mult}")
    # exact inverse certificate
    rep.add("step1.inverse_certificate", loc, True, step.source_factor is not None, source="identity")
    rep.add("step1.inverse_certificate_reverse", loc, True, step.target_factor is not None, source="identity")
    if step.source_factor is not None:
        mult, rest = factor_support(step.source_factor, [W.f, step.G])
        rep.add("step1.source_factor_support_in_W_union_Q", loc, 0, rest.degree(), source="identity",
                detail=f"multiplicities {mult}")
        hp = sample_points(step.source_factor, factor_samples, seed=seed + 3)
        ok = all(W.f.evaluate(x) == 0 or step.G.evaluate(x) == 0 for x in hp)
        rep.add("step1.factor_zero_set_sampled", loc, True, ok, source="derived",
                detail=f"{len(hp)} points")
    if step.target_factor is not None:
        mult, rest = factor_support(step.target_factor, [step.extras["PW"], Qp])
        rep.add("step1.target_factor_support_in_P_W_union_Q'", loc, 0, rest.degree(), source="identity",
                detail=f"multiplicities {mult}")
    if F.numpy_ok:
        solved = solve_inverse(fwd, 3, seed=seed)
        rep.add("step1.solved_inverse_matches", loc, True,
                solved is not None and maps_proportional(solved, inv), source="derived")
    return rep


def verify_step2(step1: CremonaStep, step: CremonaStep, samples: int = 200, seed: int = 0,
                 report: Report | None = None) -> Report:
    rep = report or Report("cremona")
    F = step.forward.source.field
    fwd, inv = step.forward, step.inverse
    loc = "quadric transformation centred at a point of P_W and Q'"
    rep.add("step2.degree", loc, [2, 5], [fwd.degree, len(fwd.forms)])
    ex = step.extras
    for name, src in (("P1", step1.extras["Qprime"]), ("P3", None)):
        if src is None:
            pts = _hyperplane_section_points(step1.extras["PW"], step1.extras["PW"].ring.random_form(
                1, random.Random(seed)), samples, seed + 5)
        else:
            pts = sample_points(src, samples, seed=seed + 4)
        img = [r for r in _pts_images(fwd, pts) if np.any(r)]
        ker = _line_span(F, img)
        label = "Q'" if name == "P1" else "P_W"
        ok = len(ker) == 1 and _proportional(F, ker[0], linear_form_vector(ex[name]))
        rep.add(f"step2.image_of_{label}_is_{name}", loc, True, ok, detail=f"{len(img)} images")
    # P2: the inverse sends it into the base locus P' ∩ Q'
    P2 = ex["P2"]
    other = P2.ring.random_form(2, random.Random(seed + 7))
    pts = _hyperplane_section_points(P2, other, samples, seed + 6)
    back = _pts_images(inv, pts)
    ok = all((not np.any(b)) or (ex["Pprime"].evaluate(b) == 0 and step1.extras["Qprime"].evaluate(b) == 0)
             for b in back)
    rep.add("step2.P2_contracted_to_base_locus", loc, True, ok, source="derived")
    rep.add("step2.inverse_certificate", loc, True, step.source_factor is not None, source="identity")
    rep.add("step2.inverse_certificate_reverse", loc, True, step.target_factor is not None, source="identity")
    if step.source_factor is not None:
        mult, rest = factor_support(step.source_factor, [ex["Pprime"], step1.extras["PW"], step1.extras["Qprime"]])
        rep.add("step2.source_factor_support", loc, 0, rest.degree(), source="identity",
                detail=f"multiplicities {mult}")
    if step.target_factor is not None:
        mult, rest = factor_support(step.target_factor, [ex["P1"], P2, ex["P3"]])
        rep.add("step2.target_factor_is_P2_cube", loc, [0, 3, 0], mult, source="identity")
    vecs = [linear_form_vector(ex[k]) for k in ("P1", "P2", "P3")]
    rep.add("step2.three_hyperplanes_meet_in_line", loc, 3, _rank(F, vecs, 5))
    if F.numpy_ok:
        solved = solve_inverse(fwd, 2, seed=seed)
        rep.add("step2.solved_inverse_matches", loc, True,
                solved is not None and maps_proportional(solved, inv), source="derived")
    return rep


def verify_chart(chart: CylinderChart, samples: int = 500, seed: int = 0,
                 report: Report | None = None, prefix: str = "chart") -> Report:
    rep = report or Report("cremona")
    F = chart.field
    rng = random.Random(seed)
    loc = "projection from the common line"
    ok_fwd = ok_back = True
    n_fwd = 0
    while n_fwd < samples:
        x = [F.random(rng) for _ in range(5)]
        if not chart.in_domain(x):
            continue
        n_fwd += 1
        b, t = chart.to_chart(x)
        if not _proportional(F, chart.from_chart(b, t), x):
            ok_fwd = False
    n_back = 0
    while n_back < samples:
        b = (F.one, F.random(rng), F.random(rng))
        if any(F.is_zero(c) for c in b):
            continue
        t = (F.random(rng), F.random(rng))
        n_back += 1
        x = chart.from_chart(b, t)
        if not chart.in_domain(x) or chart.to_chart(x) != (b, t):
            ok_back = False
    rep.add(f"{prefix}.round_trip_from_U", loc, True, ok_fwd, source="derived", detail=f"{samples} points")
    rep.add(f"{prefix}.round_trip_from_Z_x_A2", loc, True, ok_back, source="derived", detail=f"{samples} points")
    on_line = all(all(F.is_zero(sum((F.mul(F.convert(h[i]), F.convert(pt[i])) for i in range(5)), F.zero)
                                    if not F.numpy_ok else sum(int(h[i]) * int(pt[i]) for i in range(5)) % F.p)
                      for h in chart.hyperplanes) for pt in chart.line)
    rep.add(f"{prefix}.line_in_all_hyperplanes", loc, [2, True], [len(chart.line), on_line], source="identity")
    return rep


@dataclass
class PipelineResult:
    step1: CremonaStep
    step2: CremonaStep
    chart: CylinderChart
    P: Poly
    x: list
    attempts: int


def full_pipeline(W: NodalCubicInstance, x=(1, 1, 2, 3, 5), seed: int = 0, max_attempts: int = 20,
                  step1: CremonaStep | None = None) -> PipelineResult:
    """Steps 1 and 2 plus the chart, with q chosen so that x stays in the open set."""
    F = W.field
    x = [F.convert(c) for c in x]
    if W.f.evaluate(x) == 0:
        raise ValueError("x lies on W")
    s1 = step1 or step1_cubic_cremona(W, seed=seed)
    if s1.G.evaluate(x) == 0:
        raise DegenerateConfiguration("x lies on Q")
    y = s1.forward(x)
    for attempt in range(max_attempts):
        q = sample_q(s1, seed + 101 * attempt)
        s2 = step2_quadric_cremona(s1, q, certify=False)
        if s2.G.evaluate(y) == 0:
            continue  # y on the tangent hyperplane P': vary q
        z = s2.forward(y)
        chart = cylinder_chart(s2.extras["P1"], s2.extras["P2"], s2.extras["P3"])
        if not chart.in_domain(z):
            continue
        s2.source_factor = composition_factor(s2.inverse, s2.forward)
        s2.target_factor = composition_factor(s2.forward, s2.inverse)
        pull = s2.G.compose(s1.forward.forms)
        P = pull.exact_divide(s1.G)
        return PipelineResult(s1, s2, chart, P, x, attempt + 1)
    raise DegenerateConfiguration("no admissible q found")


def verify_pipeline(res: PipelineResult, W: NodalCubicInstance, report: Report | None = None) -> Report:
    rep = report or Report("cremona")
    F = W.field
    loc = "open set P^4 minus (P, Q, W)"
    x = res.x
    rep.add("pipeline.P_is_hyperplane", loc, 1, res.P.degree(), detail="pullback of P' divided by the Q equation")
    removed = [res.P, res.step1.G, W.f]
    rep.add("pipeline.removed_degrees", loc, [1, 2, 3], [h.degree() for h in removed])
    rep.add("pipeline.x_in_U", loc, True, all(h.evaluate(x) != 0 for h in removed), source="derived")
    z = res.step2.forward(res.step1.forward(x))
    b, t = res.chart.to_chart(z)
    back = res.step1.inverse(res.step2.inverse(res.chart.from_chart(b, t)))
    rep.add("pipeline.x_round_trip", loc, True, _proportional(F, back, x), source="derived")
    return rep


def coordinate_model_counts(p: int = 101) -> tuple[int, int]:
    """(|U(F_p)|, |Z(F_p)|) for U = P^4 minus V(x0 x1 x2), Z = P^2 minus the coordinate triangle."""
    U = count_complement([[1, 0, 0, 0, 0], [0, 1, 0, 0, 0], [0, 0, 1, 0, 0]], p, dim=4)
    Z = count_complement([[1, 0, 0], [0, 1, 0], [0, 0, 1]], p, dim=2)
    return U, Z


def run_cremona(prime: int = 10007, seed: int = 0, samples: int = 200, chart_samples: int = 500,
                x=(1, 1, 2, 3, 5), rational_check: bool = True, count_prime: int = 101,
                report: Report | None = None) -> Report:
    rep = report or Report("cremona", seed=seed, prime=prime)
    F = PrimeField(prime)
    W = build_segre_cubic(F)
    loc = "cubic threefold with ten nodes"
    rep.add("segre.node_count", loc, 10, len(W.nodes))
    rep.add("segre.nodes_singular", loc, True, all(W.is_node(p) for p in W.nodes), source="identity")
    rep.add("segre.hessian_rank_at_nodes", loc, [4] * 10, [hessian_rank(W.f, p) for p in W.nodes],
            source="derived", detail="homogeneous Hessian; full rank in the four local coordinates")
    s1 = step1_cubic_cremona(W, seed=seed)
    verify_step1(W, s1, samples, seed, rep)
    res = full_pipeline(W, x, seed=seed, step1=s1)
    verify_step2(s1, res.step2, samples, seed, rep)
    verify_chart(res.chart, chart_samples, seed, rep)
    verify_pipeline(res, W, rep)
    rg = step1_cubic_cremona(W, g="random", seed=seed)
    mult, rest = factor_support(rg.source_factor, [W.f, rg.G])
    rep.add("step1.random_quadric_factor_outside_W_union_Q", "cubic transformation with a random quadric",
            rest.degree(), 2, source="derived", status="info",
            detail="the tangent cone divides the factor; see README")
    loc_c = "coordinate model of the cylinder"
    with rep.check("count.U_equals_Z_times_p2", loc_c, True, source="derived") as c:
        U, Z = coordinate_model_counts(count_prime)
        c.set(U == Z * count_prime ** 2, detail=f"|U|={U}, |Z|={Z}, p={count_prime}")
    coord = [[0, 1, 0, 0, 0], [0, 0, 1, 0, 0], [1, 0, 0, 0, 0]]
    try:
        cylinder_chart([1, 0, 0, 0, 0], [0, 1, 0, 0, 0], [1, 1, 0, 0, 0], F)
        degenerate = False
    except DegenerateConfiguration:
        degenerate = True
    rep.add("chart.pencil_configuration_rejected", loc_c, True, degenerate, source="identity",
            detail="V(x0), V(x1), V(x0+x1) meet in a plane")
    verify_chart(cylinder_chart(*coord, field=F), chart_samples, seed, rep, prefix="chart.coordinate")
    if rational_check:
        verify_rational(rep)
    return rep


def verify_rational(report: Report | None = None) -> Report:
    """Exact certificates over QQ for both steps, with q taken from a second node."""
    rep = report or Report("cremona")
    W = build_segre_cubic(QQ)
    loc = "rational spot check"
    with rep.check("qq.step1_certificates", loc, True, source="identity") as c:
        s1 = step1_cubic_cremona(W)
        c.set(s1.certified)
    # the line through two nodes lies on W, so its direction lies on the tangent cone
    other = next(n for n in W.nodes if n != W.node and not _proportional(QQ, n, W.node))
    q = [l.evaluate(other) for l in W.linear_forms] + [0]
    with rep.check("qq.step2_certificates", loc, True, source="identity") as c:
        s2 = step2_quadric_cremona(s1, q)
        c.set(s2.certified)
    vecs = [linear_form_vector(s2.extras[k]) for k in ("P1", "P2", "P3")]
    rep.add("qq.three_hyperplanes_meet_in_line", loc, 3, _rank(QQ, vecs, 5))
    x = [QQ.convert(c) for c in (1, 1, 2, 3, 5)]
    y = s2.forward(s1.forward(x))
    back = s1.inverse(s2.inverse(y))
    rep.add("qq.point_round_trip", loc, True, _proportional(QQ, back, x), source="derived")
    return rep
