import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import gamma

from skdv_lab.fracint import (calibrate_prefactor, clear_prefactor_cache,
                              frac_derivative, frac_integral,
                              frac_integral_array, frac_integral_spectral,
                              riemann_liouville)
from skdv_lab.grid import TimeTrace


def _relative(a, b):
  return np.linalg.norm(a - b) / np.linalg.norm(b)


def _smooth(n=1025, T=10.0):
  t = np.linspace(0, T, n)
  return t, t[1] - t[0], t**3 * np.exp(-t)


class TestRiemannLiouville:

  def test_half_integrals_compose(self):
    _, dt, f = _smooth()
    twice = frac_integral_array(frac_integral_array(f, dt, 0.5), dt, 0.5)
    assert _relative(twice, frac_integral_array(f, dt, 1.0)) <= 1e-6

  def test_half_derivative_inverts_half_integral(self):
    _, dt, f = _smooth()
    back = frac_integral_array(frac_integral_array(f, dt, 0.5), dt, -0.5)
    assert _relative(back, f) <= 1e-6

  def test_first_derivative_of_square(self):
    t = np.linspace(0, 2, 257)
    out = frac_derivative(TimeTrace(t**2, t[1] - t[0]), 1.0).values
    assert np.allclose(out, 2 * t, atol=1e-10)

  def test_two_thirds_derivative_power_law(self):
    t = np.linspace(0, 2, 257)
    out = frac_derivative(TimeTrace(t**2 / 2, t[1] - t[0]), 2 / 3).values
    expected = t**(4 / 3) / gamma(7 / 3)
    assert _relative(out, expected) <= 1e-6

  @pytest.mark.parametrize("n", [2, 3])
  @pytest.mark.parametrize("alpha", [1 / 3, 1 / 2, 2 / 3])
  def test_power_law(self, n, alpha):
    t = np.linspace(0, 2, 257)
    f = t**n / gamma(n + 1)
    expected = t**(n + alpha) / gamma(n + 1 + alpha)
    result = frac_integral_array(f, t[1] - t[0], alpha)
    assert _relative(result, expected) <= 1e-6

  def test_reverse_matches_flip(self):
    _, dt, f = _smooth(257, 5.0)
    reverse = riemann_liouville(f, dt, 0.5, reverse=True)
    assert np.allclose(reverse, riemann_liouville(f[::-1], dt, 0.5)[::-1])

  def test_axis(self):
    _, dt, f = _smooth(129, 5.0)
    stacked = np.stack([f, 2 * f])
    out = frac_integral_array(stacked, dt, 0.5, axis=1)
    assert np.allclose(out[1], 2 * out[0])

  @settings(deadline=None, max_examples=20)
  @given(st.floats(min_value=-3, max_value=3),
         st.floats(min_value=-3, max_value=3),
         st.sampled_from([0.25, 0.5, 1.5]))
  def test_linear(self, a, b, alpha):
    t, dt, f = _smooth(129, 5.0)
    g = np.sin(t)**2
    lhs = frac_integral_array(a * f + b * g, dt, alpha)
    rhs = a * frac_integral_array(f, dt, alpha) + b * frac_integral_array(
        g, dt, alpha)
    assert np.allclose(lhs, rhs, atol=1e-10)

  def test_two_sided_trace_rejected(self):
    with pytest.raises(AssertionError):
      frac_integral(TimeTrace(np.zeros(16), 0.1, "two-sided"), 0.5)


class TestSpectral:

  def test_calibration_and_agreement(self):
    name, _ = calibrate_prefactor(0.5)
    assert name in ("exp(-i pi alpha/2)", "exp(-pi alpha/2)",
                    "exp(i pi alpha/2)", "1")
    dt = 40 / 4096
    t = dt * np.arange(4097)
    f = TimeTrace(t**3 * np.exp(-t), dt)
    spectral = frac_integral_spectral(f, 0.5).values
    assert _relative(spectral, frac_integral(f, 0.5).values) <= 1e-4

  def test_first_order_is_running_integral(self):
    dt = 40 / 4096
    t = dt * np.arange(4097)
    z = (t - 2.0)**2
    bump = np.where(z < 1, np.exp(-1 / np.clip(1 - z, 1e-300, None)), 0.0)
    f = TimeTrace(bump, dt)
    spectral = frac_integral_spectral(f, 1.0).values
    assert _relative(spectral, frac_integral(f, 1.0).values) <= 1e-4

  def test_calibration_survives_cache_reset(self):
    first = calibrate_prefactor(1 / 3)
    clear_prefactor_cache()
    assert calibrate_prefactor(1 / 3)[0] == first[0]


if __name__ == '__main__':
  pytest.main(['-s', 'test_fracint.py'])
