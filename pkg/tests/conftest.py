import random
import sys
from pathlib import Path

import pytest
import sympy
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from mukaiverify.exactalg import PrimeField
from mukaiverify.multipoly import PolyRing

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

sys.path.insert(0, str(Path(__file__).parent))

P = 10007


@pytest.fixture
def fp():
    return PrimeField(P)


def to_sympy(f, symbols):
    """Our polynomial as a sympy expression with integer coefficients."""
    expr = sympy.Integer(0)
    for e, c in f.terms.items():
        term = sympy.Integer(int(c) if not hasattr(c, "numerator") else sympy.Rational(c.numerator, c.denominator))
        for s, k in zip(symbols, e):
            term *= s ** k
        expr += term
    return expr


def from_sympy(expr, symbols, ring):
    """sympy expression (coefficients read mod p for prime fields) to our polynomial."""
    sp = sympy.Poly(expr, *symbols)
    terms = {}
    for e, c in sp.terms():
        v = ring.field.convert(int(c) if c.is_Integer else sympy.Rational(c))
        if not ring.field.is_zero(v):
            terms[tuple(e)] = v
    return ring.from_dict(terms)


def random_form(ring, d, rng, terms=4):
    monos = list(ring.monomials(d))
    chosen = rng.sample(monos, min(terms, len(monos)))
    return ring.from_dict({m: ring.field.convert(rng.randrange(1, 50)) for m in chosen})


@st.composite
def small_ideals(draw, nvars=3, max_gens=3, max_degree=3, homogeneous=True):
    """Seeded random small ideals over F_p."""
    seed = draw(st.integers(0, 10**6))
    n = draw(st.integers(2, nvars))
    k = draw(st.integers(1, max_gens))
    rng = random.Random(seed)
    R = PolyRing(n, PrimeField(P))
    gens = []
    for _ in range(k):
        d = rng.randint(1, max_degree)
        if homogeneous:
            gens.append(random_form(R, d, rng, terms=rng.randint(1, 4)))
        else:
            f = R.zero()
            for dd in range(d + 1):
                f = f + random_form(R, dd, rng, terms=rng.randint(0, 2))
            gens.append(f if f else R.one())
    return R, gens


# acceptance criterion number -> summary line, printed after the run
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
