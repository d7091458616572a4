import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from mukaiverify.exactalg import QQ, FpElement, JetRing, PrimeField, extended_gcd, is_prime


def test_is_prime_matches_sympy():
    # derived: sympy's primality test
    assert [n for n in range(200) if is_prime(n)] == list(sympy.primerange(0, 200))
    assert is_prime(10007) and not is_prime(10007 * 3)


def test_prime_field_rejects_composites():
    with pytest.raises(ValueError):
        PrimeField(10005)


@given(st.integers(1, 10006), st.integers(0, 10006))
def test_fp_inverse_and_division(a, b):
    F = PrimeField(10007)
    assert F.mul(a, F.inv(a)) == 1
    assert F.mul(F.div(b, a), a) == b % 10007


def test_fp_inverse_of_zero():
    with pytest.raises(ZeroDivisionError):
        PrimeField(7).inv(0)


@given(st.integers(-10**6, 10**6), st.integers(-10**6, 10**6))
def test_fp_element_ring_laws(a, b):
    F = PrimeField(101)
    x, y = FpElement(F, a), FpElement(F, b)
    assert (x + y).value == (a + b) % 101
    assert (x * y).value == (a * b) % 101
    assert (x - y).value == (a - b) % 101


def test_fp_symmetric_representative():
    F = PrimeField(7)
    assert [F.symmetric(v) for v in range(7)] == [0, 1, 2, 3, -3, -2, -1]


@given(st.integers(-1000, 1000), st.integers(-1000, 1000))
def test_extended_gcd_bezout(a, b):
    g, s, t = extended_gcd(a, b)
    assert g == sympy.igcd(a, b)
    assert s * a + t * b == g


def test_rational_field_is_exact():
    a = QQ.convert(Fraction(1, 3))
    assert QQ.add(a, a) + a == 1
    assert QQ.inv(QQ.convert(Fraction(-2, 5))) == Fraction(-5, 2)


# --- jets -----------------------------------------------------------------

E1, E2 = sympy.symbols("e1 e2")


def _jet_to_sympy(j):
    return sum(sympy.Integer(c) * E1 ** m[0] * E2 ** m[1] for m, c in j.to_dict().items())


def _truncate(expr, order, p):
    poly = sympy.Poly(sympy.expand(expr), E1, E2)
    out = 0
    for (a, b), c in poly.terms():
        if a + b <= order and int(c) % p:
            out += (int(c) % p) * E1 ** a * E2 ** b
    return sympy.expand(out)


@st.composite
def jets(draw, ring):
    coeffs = {m: draw(st.integers(0, 100)) for m in ring.monomials}
    return ring.from_dict(coeffs)


@given(st.data(), st.integers(0, 5))
def test_jet_product_matches_truncated_expansion(data, order):
    # derived: sympy expansion, then truncation above the jet order
    R = JetRing(PrimeField(10007), 2, order)
    a, b = data.draw(jets(R)), data.draw(jets(R))
    want = _truncate(_jet_to_sympy(a) * _jet_to_sympy(b), order, 10007)
    assert sympy.expand(_jet_to_sympy(a * b) - want) == 0


@given(st.data(), st.integers(0, 4), st.integers(0, 5))
def test_jet_power_matches_truncated_expansion(data, order, e):
    R = JetRing(PrimeField(10007), 2, order)
    a = data.draw(jets(R))
    want = _truncate(_jet_to_sympy(a) ** e, order, 10007)
    assert sympy.expand(_jet_to_sympy(a ** e) - want) == 0


def test_jet_ring_over_rationals():
    R = JetRing(QQ, 1, 3)
    x = R.linear(1, [Fraction(1, 2)])  # 1 + e/2
    inv = R.from_dict({(0,): 1, (1,): Fraction(-1, 2), (2,): Fraction(1, 4), (3,): Fraction(-1, 8)})
    assert (x * inv).to_dict() == {(0,): 1}


def test_jet_order():
    R = JetRing(PrimeField(101), 2, 4)
    assert R.from_dict({(1, 1): 3, (3, 0): 1}).order() == 2
    assert R.from_dict({}).order() is None
    # a product of two order-3 jets vanishes in order 4
    a = R.from_dict({(3, 0): 1})
    assert (a * a).order() is None


def test_mixed_jet_rings_rejected():
    a = JetRing(PrimeField(101), 2, 2).constant(1)
    b = JetRing(PrimeField(101), 2, 3).constant(1)
    with pytest.raises(ValueError):
        a + b
