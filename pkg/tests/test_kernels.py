import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fthresh import kernels
from fthresh.poly import PolyRing, power_reduced

from strategies import polys

pytestmark = pytest.mark.skipif(not kernels.HAVE_NUMBA, reason="numba unavailable")

R = PolyRing(3, 3)


def _sorted(exps, coefs):
    order = np.lexsort(exps.T[::-1]) if len(exps) else np.arange(0)
    return exps[order].tolist(), coefs[order].tolist()


@given(polys(R, max_terms=8, max_exp=9), polys(R, max_terms=8, max_exp=9), st.sampled_from([None, 9, 27]))
def test_mul_terms_backends_agree(f, g, cap):
    ea, ca = f.arrays()
    eb, cb = g.arrays()
    with kernels.use_backend("numba"):
        a = kernels.mul_terms(ea, ca, eb, cb, 3, cap)
    with kernels.use_backend("numpy"):
        b = kernels.mul_terms(ea, ca, eb, cb, 3, cap)
    assert _sorted(*a) == _sorted(*b)


@given(polys(R, max_terms=10, max_exp=20), st.sampled_from([3, 9, 27]))
def test_root_terms_backends_agree(f, q):
    exps, coefs = f.arrays()
    with kernels.use_backend("numba"):
        a = kernels.root_terms(exps, coefs, q)
    with kernels.use_backend("numpy"):
        b = kernels.root_terms(exps, coefs, q)
    key = lambda r: sorted(zip(r[0].tolist(), map(tuple, r[1].tolist()), r[2].tolist()))
    assert key(a) == key(b)


@given(st.lists(st.tuples(st.integers(1, 5000), st.integers(1, 5000)), min_size=1, max_size=20), st.sampled_from([2, 3, 7]))
def test_orbit_backends_agree(pairs, q):
    num = np.array([a for a, _ in pairs], dtype=np.int64)
    den = np.array([b for _, b in pairs], dtype=np.int64)
    with kernels.use_backend("numba"):
        a = kernels.orbit_batch(num, den, q, 2, 1 << 20)
    with kernels.use_backend("numpy"):
        b = kernels.orbit_batch(num, den, q, 2, 1 << 20)
    for x, y in zip(a, b):
        assert np.array_equal(x, y)


def test_high_level_results_identical_across_backends():
    r = PolyRing(5, 3)
    f = r.parse("x^2+y^3+z^5+x*y*z")
    with kernels.use_backend("numba"):
        a = power_reduced(f, 120, 125)
    with kernels.use_backend("numpy"):
        b = power_reduced(f, 120, 125)
    assert a == b


def test_backend_switch_validation():
    with pytest.raises(ValueError):
        kernels.set_backend("fortran")
    before = kernels.get_backend()
    with kernels.use_backend("numpy"):
        assert kernels.get_backend() == "numpy"
    assert kernels.get_backend() == before


def test_env_flag_selects_numpy(monkeypatch):
    monkeypatch.setenv("FTHRESH_DISABLE_NUMBA", "1")
    assert kernels._initial_backend() == "numpy"
    monkeypatch.delenv("FTHRESH_DISABLE_NUMBA")
    monkeypatch.setenv("FTHRESH_BACKEND", "numpy")
    assert kernels._initial_backend() == "numpy"
    monkeypatch.setenv("FTHRESH_BACKEND", "gpu")
    with pytest.raises(ValueError):
        kernels._initial_backend()
