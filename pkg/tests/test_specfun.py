import numpy as np
import pytest
from hypothesis import given, strategies as st

from qpscat.specfun import WindowSpec, bessel_j0j1y0y1, hankel1, window_chi


class TestBessel:
    def test_known_values_at_one(self):
        j0, j1, y0, y1 = bessel_j0j1y0y1(1.0)
        assert j0 == pytest.approx(0.7651976865579666, abs=1e-15)
        assert y0 == pytest.approx(0.08825696421567696, abs=1e-15)

    def test_hankel_combines_j_and_y(self):
        x = np.linspace(0.3, 20.0, 57)
        j0, j1, y0, y1 = bessel_j0j1y0y1(x)
        assert np.allclose(hankel1(0, x), j0 + 1j * y0, rtol=1e-14)
        assert np.allclose(hankel1(1, x), j1 + 1j * y1, rtol=1e-14)

    @given(st.floats(min_value=0.05, max_value=50.0))
    def test_wronskian(self, x):
        # J1 Y0 - J0 Y1 = 2/(pi x), the standard Wronskian identity
        j0, j1, y0, y1 = bessel_j0j1y0y1(x)
        assert j1 * y0 - j0 * y1 == pytest.approx(2.0 / (np.pi * x), rel=1e-11)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            bessel_j0j1y0y1(0.0)
        with pytest.raises(ValueError):
            hankel1(0, -1.0)

    def test_rejects_unsupported_order(self):
        with pytest.raises(ValueError):
            hankel1(2, 1.0)


class TestWindow:
    def test_plateau_and_support(self):
        spec = WindowSpec(c1=0.5)
        v, dv = window_chi(np.array([0.0, 0.25, 0.5]), spec)
        assert np.all(v == 1.0) and np.all(dv == 0.0)
        v, dv = window_chi(np.array([1.0, 1.5, 7.0]), spec)
        assert np.all(v == 0.0) and np.all(dv == 0.0)

    def test_monotone_transition(self):
        s = np.linspace(0.5, 1.0, 400)
        v, _ = window_chi(s)
        assert np.all(np.diff(v) <= 0)
        assert 0.0 < v[200] < 1.0

    @given(st.floats(min_value=0.505, max_value=0.995))
    def test_derivative_matches_finite_difference(self, s):
        h = 1e-6
        vp, _ = window_chi(s + h)
        vm, _ = window_chi(s - h)
        _, dv = window_chi(s)
        assert dv == pytest.approx((vp - vm) / (2 * h), rel=1e-4, abs=1e-9)

    def test_smooth_at_junctions(self):
        # all low-order one-sided derivatives vanish at s = c1 and s = 1
        for s0 in (0.5, 1.0):
            eps = np.array([1e-2, 1e-3])
            inner = np.clip(s0 + np.sign(0.75 - s0) * eps, 0.5, 1.0)
            v, dv = window_chi(inner)
            ref = 1.0 if s0 == 0.5 else 0.0
            assert abs(v[1] - ref) < abs(v[0] - ref) + 1e-300

    def test_invalid_c1(self):
        with pytest.raises(ValueError):
            WindowSpec(c1=0.0)
        with pytest.raises(ValueError):
            WindowSpec(c1=1.0)

    def test_scalar_roundtrip(self):
        v, dv = window_chi(0.75)
        assert isinstance(v, float) and isinstance(dv, float)
        assert dv < 0.0
