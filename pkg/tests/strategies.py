"""Hypothesis strategies shared by the property tests."""

from hypothesis import strategies as st

from fthresh.poly import Poly, PolyRing


def polys(ring: PolyRing, max_terms=4, max_exp=4, allow_constant=True):
    mono = st.tuples(*[st.integers(0, max_exp)] * ring.nvars)
    if not allow_constant:
        mono = mono.filter(any)
    terms = st.dictionaries(mono, st.integers(1, ring.p - 1), max_size=max_terms)
    return terms.map(lambda t: Poly(ring, t))


def maximal_polys(ring: PolyRing, **kw):
    return polys(ring, allow_constant=False, **kw).filter(lambda f: not f.is_zero())
