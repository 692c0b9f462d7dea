import numpy as np
from hypothesis import strategies as st

from toricfact.symcalc import TrigLaurentFun, mono

small_int = st.integers(min_value=-2, max_value=2)
exponent = st.integers(min_value=0, max_value=3)
coeff = st.complex_numbers(min_magnitude=0.1, max_magnitude=2.0, allow_nan=False, allow_infinity=False)


@st.composite
def monomials(draw, laurent=False, modes=True):
    lo = -2 if laurent else 0
    e = st.integers(min_value=lo, max_value=3)
    n1, n2 = (draw(small_int), draw(small_int)) if modes else (0, 0)
    return mono(n1, n2, draw(e), draw(e), draw(e), draw(e), draw(coeff))


@st.composite
def ring_elements(draw, laurent=False, modes=True, max_terms=3):
    terms = draw(st.lists(monomials(laurent, modes), min_size=1, max_size=max_terms))
    out = TrigLaurentFun()
    for t in terms:
        out = out + t
    return out


# interior sample points of the quadrant, away from the edges
rng = np.random.default_rng(12345)
SAMPLE_PHI = rng.uniform(0.15, 1.4, 40)
SAMPLE_PSI = rng.uniform(-1.3, 1.3, 40)
SAMPLE_T1 = rng.uniform(0, 2 * np.pi, 40)
SAMPLE_T2 = rng.uniform(0, 2 * np.pi, 40)


def values(f, phi=SAMPLE_PHI, psi=SAMPLE_PSI, t1=SAMPLE_T1, t2=SAMPLE_T2):
    return f.evaluate(phi, psi, t1, t2)
