import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mpplan import _kernels_py as py

ext = pytest.importorskip("mpplan._kernels", reason="compiled extension not built")


@st.composite
def grids(draw):
    n_links = draw(st.integers(1, 4))
    n_slots = draw(st.integers(1, 60))
    owner = draw(arrays(np.int32, (n_links, 2, n_slots), elements=st.sampled_from([0, 0, 0, 1, -3])))
    links = draw(st.lists(st.integers(0, n_links - 1), min_size=1, max_size=n_links, unique=True))
    return owner, links, draw(st.integers(0, 1)), draw(st.integers(-1, n_slots + 2)), draw(st.integers(-2, n_slots))


@settings(max_examples=300, deadline=None)
@given(grids())
def test_first_fit_equivalent(case):
    owner, links, band, width, start = case
    got = ext.first_fit(owner, links, band, width, start)
    assert got == py.first_fit(owner, links, band, width, start)
    n = owner.shape[2]
    scan = [s for s in range(max(start, 0), n - width + 1)
            if width > 0 and not owner[links, band, s:s + width].any()]
    assert got == (scan[0] if scan else -1)


finite = st.floats(-5e12, 5e12, allow_nan=False)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 12).flatmap(lambda n: st.tuples(
    st.lists(finite, min_size=n, max_size=n),
    st.lists(st.floats(1e9, 2e11), min_size=n, max_size=n),
    st.lists(st.floats(0, 1e-3), min_size=n, max_size=n))),
    st.floats(-5e12, 5e12), st.floats(3e10, 1.5e11))
def test_xpm_psi_sum_equivalent(arrs, f_cut, b_cut):
    f, b, w = arrs
    beta2, l_asym = 21.7e-27, 10.9e3
    a = ext.xpm_psi_sum(f_cut, b_cut, np.array(f), np.array(b), np.array(w), beta2, l_asym)
    p = py.xpm_psi_sum(f_cut, b_cut, np.array(f), np.array(b), np.array(w), beta2, l_asym)
    # difference of two asinh values of size ~30: rounding is absolute, per unit weight
    assert a == pytest.approx(p, rel=1e-12, abs=1e-13 * sum(w) + 1e-300)


def test_force_fallback():
    env = dict(os.environ, MPPLAN_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import mpplan; print(mpplan.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True).stdout.strip()
    assert out == "python"


def test_compiled_selected_by_default():
    import mpplan

    if not os.environ.get("MPPLAN_PURE_PYTHON"):
        assert mpplan.BACKEND == "cython"
