import random

import pytest
from conftest import P
from hypothesis import given
from hypothesis import strategies as st

from mukaiverify.exactalg import PrimeField
from mukaiverify.groebner import IdealHandle, hilbert_data
from mukaiverify.multipoly import PolyRing
from mukaiverify.reference import BETTI_DISPLAYS
from mukaiverify.varieties import (
    BettiTable,
    ConstructionError,
    RationalMap,
    _interpolate_mod_p,
    betti_table,
    derive_surface_invariants,
    double_point_linear_system,
    implicitize_by_interpolation,
    linkage_data,
    map_jets,
    ordinary_square_dimension,
    roots_mod_p,
    sample_points,
    sextic_del_pezzo,
    sextic_del_pezzo_in_p7,
    smoothness_certificate,
    solve_zero_dimensional,
    veronese_in_p6,
    veronese_surface,
)


@given(st.lists(st.integers(0, 100), min_size=2, max_size=5))
def test_roots_match_brute_force(coeffs):
    p = 101
    if not any(c % p for c in coeffs[1:]):
        return
    want = [t for t in range(p) if sum(c * t ** k for k, c in enumerate(coeffs)) % p == 0]
    assert roots_mod_p(coeffs, p) == want


def test_roots_of_zero_polynomial_rejected():
    with pytest.raises(ValueError):
        roots_mod_p([0, 0], 7)


@given(st.lists(st.integers(0, 100), min_size=1, max_size=6))
def test_newton_interpolation_recovers_coefficients(coeffs):
    p = 101
    values = [sum(c * t ** k for k, c in enumerate(coeffs)) % p for t in range(len(coeffs))]
    got = [c % p for c in _interpolate_mod_p(values, p)]
    n = max(len(got), len(coeffs))
    assert got + [0] * (n - len(got)) == [c % p for c in coeffs] + [0] * (n - len(coeffs))


def test_solve_zero_dimensional_matches_enumeration():
    R = PolyRing(2, PrimeField(31))
    f, g = R.parse("x0^2 + x1^2 - 1"), R.parse("x0 - 2*x1")
    want = [(a, b) for a in range(31) for b in range(31) if f.evaluate([a, b]) == 0 and g.evaluate([a, b]) == 0]
    assert sorted(solve_zero_dimensional([f, g])) == sorted(want)


def test_implicitize_twisted_cubic():
    S = PolyRing(2, PrimeField(P))
    s, t = S.gens()
    phi = RationalMap(S, [s ** 3, s * s * t, s * t * t, t ** 3])
    I = implicitize_by_interpolation(phi, 2)
    assert len(I.gens) == 3
    hd = hilbert_data(I)
    assert (hd.dimension, hd.degree) == (1, 3)


def test_sample_points_lie_on_variety():
    V = veronese_surface("P5")
    pts = sample_points(V, 10, seed=2)
    assert len({tuple(p) for p in pts}) == 10
    assert all(f.evaluate(p) == 0 for p in pts for f in V.gens)
    q = V.gens[0]
    assert all(q.evaluate(p) == 0 for p in sample_points(q, 10, seed=3))


def test_map_jets_first_order_is_jacobian():
    S = PolyRing(2, PrimeField(P))
    phi = RationalMap(S, [S.parse("x0^2"), S.parse("x0*x1"), S.parse("x1^2")])
    u, v = [3, 5], [[1, 2]]
    J, coeffs = map_jets(phi, u, v, 2)
    for k, f in enumerate(phi.forms):
        jet = J.from_array(coeffs[k]).to_dict()
        grad = sum(f.derivative(i).evaluate(u) * v[0][i] for i in range(2)) % P
        assert jet.get((0,), 0) == f.evaluate(u)
        assert jet.get((1,), 0) == grad


# --- surfaces ----------------------------------------------------------------


def test_veronese_surface_invariants():
    # trivial: the Veronese surface is P^2 embedded by conics
    for target in ("P4", "P5"):
        hd = hilbert_data(veronese_surface(target))
        assert (hd.dimension, hd.degree, hd.sectional_genus, hd.chi) == (2, 4, 0, 1)
    inv = derive_surface_invariants(veronese_in_p6(), "veronese")
    assert (inv.K2, inv.e) == (9, 3)


def test_del_pezzo_invariants():
    inv = derive_surface_invariants(sextic_del_pezzo(), "anticanonical")
    assert (inv.d, inv.pi, inv.chi, inv.K2, inv.e) == (6, 1, 1, 6, 6)
    assert sextic_del_pezzo_in_p7().ring.nvars == 8


def test_genus7_linkage_reference_values():
    data = linkage_data(7, seed=1)
    inv = data.invariants
    assert (inv.d, inv.pi, inv.chi, inv.K2, inv.e) == (8, 6, 1, -7, 19)
    assert inv.double_point_defect() == 0
    assert betti_table(data.surface) == BETTI_DISPLAYS[7]


def test_genus8_linkage_reference_values():
    data = linkage_data(8, seed=1)
    assert (data.invariants.d, data.invariants.pi) == (8, 4)
    assert betti_table(data.surface) == BETTI_DISPLAYS[8]


def test_genus9_betti_display():
    assert betti_table(veronese_in_p6()) == BETTI_DISPLAYS[9]


def test_genus10_betti_row_two_position():
    # derived: the Betti numerator must equal the Hilbert numerator
    I = sextic_del_pezzo_in_p7()
    bt = betti_table(I)
    assert bt.rows()[2][4:6] == [1, 1]
    hn = hilbert_data(I).numerator
    trim = lambda v: [x for x in v[:max(i for i, x in enumerate(v) if x) + 1]]  # noqa: E731
    assert trim(bt.numerator()) == trim(hn)
    assert trim(BETTI_DISPLAYS[10].numerator()) != trim(hn)


def test_unsupported_linkage_genus():
    with pytest.raises(ValueError):
        linkage_data(9)


def test_betti_text_round_trip():
    for bt in BETTI_DISPLAYS.values():
        assert BettiTable.from_text(bt.to_text()) == bt


def test_smoothness_certificate_detects_cone():
    # a quadric cone in P^3 is singular at its vertex: no certificate possible
    R = PolyRing(4, PrimeField(P))
    cone = IdealHandle([R.parse("x0*x1 - x2^2")], R)
    assert not smoothness_certificate(cone, 1).empty
    smooth = IdealHandle([R.parse("x0*x1 - x2*x3")], R)
    assert smoothness_certificate(smooth, 1).empty


def test_double_point_system_plane_example():
    # cubics singular at a point of P^2: 10 - 3 = 7
    R = PolyRing(3, PrimeField(P))
    point = IdealHandle([R.gen(1), R.gen(2)], R)
    phi = double_point_linear_system(point, 3)
    assert len(phi.forms) == 7
    assert ordinary_square_dimension(point, 3) == 7
    with pytest.raises(ConstructionError):
        double_point_linear_system(point, 3, expected=8)

