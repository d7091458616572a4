import itertools
import random

import pytest
import sympy
from conftest import P, to_sympy
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy.polys.matrices import DomainMatrix

from mukaiverify.cremona import (
    DegenerateConfiguration,
    NodalCubicInstance,
    _inverse,
    build_segre_cubic,
    centred_cremona,
    composition_factor,
    coordinate_model_counts,
    count_complement,
    cylinder_chart,
    factor_support,
    forms_through_point,
    full_pipeline,
    hessian_rank,
    linear_form_vector,
    maps_proportional,
    quadric_rank,
    sample_q,
    solve_inverse,
    step1_cubic_cremona,
    step2_quadric_cremona,
    verify_chart,
    verify_pipeline,
    verify_step1,
    verify_step2,
)
from mukaiverify.exactalg import QQ, PrimeField
from mukaiverify.multipoly import PolyRing
from mukaiverify.varieties import RationalMap


@pytest.fixture(scope="module")
def segre():
    return build_segre_cubic(PrimeField(P))


@pytest.fixture(scope="module")
def step1(segre):
    return step1_cubic_cremona(segre)


def random_nodal_cubic(seed: int) -> NodalCubicInstance:
    """x4 q(x') + c(x') in random coordinates: a node with a rank-4 tangent cone."""
    F = PrimeField(P)
    rng = random.Random(seed)
    R = PolyRing(5, F)
    x = R.gens()
    S = PolyRing(4, F)
    while True:
        q = S.random_form(2, rng)
        if quadric_rank(q) == 4:
            break
    c = S.random_form(3, rng)
    emb = x[:4]
    f = x[4] * q.compose(emb) + c.compose(emb)
    while True:
        M = [[F.random(rng) for _ in range(5)] for _ in range(5)]
        try:
            Minv = _inverse(F, M)
            break
        except DegenerateConfiguration:
            continue
    images = [R.linear_form(M[i]) for i in range(5)]
    g = f.compose(images)
    node = [Minv[i][4] for i in range(5)]  # M node = e4
    ls, _ = forms_through_point(R, node)
    return NodalCubicInstance(g, node, ls, hessian_rank(g, node))


# --- the cubic with ten nodes ------------------------------------------------


def test_segre_has_ten_nodes(segre):
    assert len(segre.nodes) == 10
    assert all(segre.is_node(p) for p in segre.nodes)
    assert [hessian_rank(segre.f, p) for p in segre.nodes] == [4] * 10
    assert quadric_rank(segre.tangent_cone()) == 4


def test_segre_equation_matches_symmetric_model():
    # derived: sum x_i^3 on the hyperplane sum x_i = 0 of P^5, via sympy
    W = build_segre_cubic(QQ)
    xs = sympy.symbols("x0:5")
    x5 = -sum(xs)
    want = sympy.expand(sum(v ** 3 for v in xs) + x5 ** 3)
    assert sympy.expand(to_sympy(W.f, xs) - want) == 0


# --- step 1 -------------------------------------------------------------------


def test_step1_certificates(segre, step1):
    # derived: deg(inverse o map) = 9 = 1 + deg h, and W maps onto P_W rather than being contracted
    assert step1.certified
    mult, rest = factor_support(step1.source_factor, [segre.f, step1.G])
    assert (mult, rest.degree()) == ([0, 4], 0)
    mult, rest = factor_support(step1.target_factor, [step1.extras["PW"], step1.extras["Qprime"]])
    assert (mult, rest.degree()) == ([0, 4], 0)


def test_step1_composition_matches_sympy_evaluation():
    # derived: evaluate map and inverse with sympy rationals at random points
    W = build_segre_cubic(QQ)
    s = step1_cubic_cremona(W)
    xs = sympy.symbols("x0:5")
    ys = sympy.symbols("y0:5")
    fwd = [sympy.lambdify(xs, to_sympy(f, xs)) for f in s.forward.forms]
    inv = [sympy.lambdify(ys, to_sympy(g, ys)) for g in s.inverse.forms]
    h = sympy.lambdify(xs, to_sympy(s.source_factor, xs))
    rng = random.Random(0)
    for _ in range(20):
        x = [sympy.Rational(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(5)]
        y = [f(*x) for f in fwd]
        back = [g(*y) for g in inv]
        assert all(sympy.simplify(b - h(*x) * xi) == 0 for b, xi in zip(back, x))


def test_step1_random_quadric_leaves_extra_factor(segre):
    s = step1_cubic_cremona(segre, g="random", seed=3)
    assert s.certified
    mult, rest = factor_support(s.source_factor, [segre.f, s.G])
    # the tangent cone survives in the factor
    assert rest.degree() == 2
    _, rest2 = factor_support(rest, [segre.tangent_cone()])
    assert rest2.degree() == 0


def test_step1_rejects_quadric_smooth_at_node(segre):
    R = segre.ring
    with pytest.raises(DegenerateConfiguration):
        step1_cubic_cremona(segre, g=R.parse("x0^2 + x1^2 + x2^2 + x3^2 + x4^2"))


@settings(max_examples=4)
@given(st.integers(0, 10**6))
def test_step1_on_random_nodal_cubics(seed):
    W = random_nodal_cubic(seed)
    assert W.is_node(W.node) and W.hessian_rank == 4
    s = step1_cubic_cremona(W)
    assert s.certified
    s2 = step2_quadric_cremona(s, sample_q(s, seed))
    assert s2.certified
    mult, _ = factor_support(s2.target_factor, [s2.extras["P1"], s2.extras["P2"], s2.extras["P3"]])
    assert mult == [0, 3, 0]


def test_solved_inverse_agrees_with_closed_form(step1):
    solved = solve_inverse(step1.forward, 3, seed=1)
    assert solved is not None and maps_proportional(solved, step1.inverse)


def test_verify_step1_rows_pass(segre, step1):
    rep = verify_step1(segre, step1, samples=60, factor_samples=60)
    assert [r.claim for r in rep.rows if r.status != "pass"] == []


# --- step 2 and the chart -----------------------------------------------------------


def test_step2_and_pipeline(segre, step1):
    res = full_pipeline(segre, step1=step1)
    s2 = res.step2
    assert s2.certified
    rep = verify_step2(step1, s2, samples=60)
    rep = verify_pipeline(res, segre, rep)
    assert [r.claim for r in rep.rows if r.status != "pass"] == []
    vecs = [linear_form_vector(s2.extras[k]) for k in ("P1", "P2", "P3")]
    assert DomainMatrix.from_list([[int(c) for c in v] for v in vecs], sympy.GF(P)).rank() == 3


def test_step2_rejects_point_off_base(step1):
    with pytest.raises(DegenerateConfiguration):
        step2_quadric_cremona(step1, [1, 2, 3, 4, 5])


def test_standard_quadratic_cremona():
    # trivial: (x1 x2 : x0 x2 : x0 x1) is its own inverse with factor x0 x1 x2
    R = PolyRing(3, PrimeField(P))
    x0, x1, x2 = R.gens()
    phi = RationalMap(R, [x1 * x2, x0 * x2, x0 * x1], R)
    assert composition_factor(phi, phi) == x0 * x1 * x2
    assert maps_proportional(solve_inverse(phi, 2), phi)


def test_composition_factor_rejects_non_inverse():
    R = PolyRing(3, PrimeField(P))
    x0, x1, x2 = R.gens()
    phi = RationalMap(R, [x0 * x0, x1 * x1, x2 * x2], R)
    assert composition_factor(phi, phi) is None


def test_centred_cremona_is_birational_over_rationals():
    R = PolyRing(5, QQ)
    W = build_segre_cubic(QQ)
    fwd, inv = centred_cremona(R, W.node, W.tangent_cone(), W.f)
    assert composition_factor(inv, fwd) is not None
    assert composition_factor(fwd, inv) is not None


@given(st.integers(1, P - 1), st.integers(1, P - 1), st.integers(0, P - 1), st.integers(0, P - 1))
def test_chart_round_trip_property(s1, s2, t1, t2):
    F = PrimeField(P)
    chart = cylinder_chart([0, 1, 0, 0, 0], [0, 0, 1, 0, 0], [1, 0, 0, 0, 0], F)
    x = chart.from_chart((1, s1, s2), (t1, t2))
    assert chart.to_chart(x) == ((1, s1, s2), (t1, t2))


def test_chart_from_pipeline_hyperplanes(segre, step1):
    res = full_pipeline(segre, step1=step1)
    rep = verify_chart(res.chart, samples=200)
    assert rep.status == "pass"


def test_degenerate_chart_rejected():
    with pytest.raises(DegenerateConfiguration):
        cylinder_chart([1, 0, 0, 0, 0], [0, 1, 0, 0, 0], [1, 1, 0, 0, 0], PrimeField(P))


def test_chart_refuses_points_on_hyperplanes():
    chart = cylinder_chart([1, 0, 0, 0, 0], [0, 1, 0, 0, 0], [0, 0, 1, 0, 0], PrimeField(P))
    with pytest.raises(ValueError):
        chart.to_chart([0, 1, 1, 1, 1])
    with pytest.raises(ValueError):
        chart.from_chart((1, 0, 1), (0, 0))


# --- counting ----------------------------------------------------------------


@pytest.mark.parametrize("p,dim", [(3, 2), (5, 2), (3, 3), (5, 3)])
def test_count_complement_matches_enumeration(p, dim):
    # derived: brute force over normalised projective points
    rng = random.Random(p * 10 + dim)
    forms = [[rng.randrange(p) for _ in range(dim + 1)] for _ in range(3)]
    forms = [f if any(f) else [1] + [0] * dim for f in forms]
    n = 0
    for v in itertools.product(range(p), repeat=dim + 1):
        lead = next((c for c in v if c), 0)
        if lead != 1:
            continue
        if all(sum(a * b for a, b in zip(f, v)) % p for f in forms):
            n += 1
    assert count_complement(forms, p, dim) == n


def test_coordinate_model_counts():
    U, Z = coordinate_model_counts(101)
    assert (U, Z) == (101 ** 2 * 100 ** 2, 100 ** 2)
    assert U == Z * 101 ** 2
