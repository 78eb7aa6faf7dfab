import math

import numpy as np
import pytest
from scipy.special import gamma

from skdv_lab.grid import make_grid, sobolev_norm
from skdv_lab.propagators import (airy_function, airy_function_derivative,
                                  airy_function_quadrature, damped_airy_kernel,
                                  duhamel_K, duhamel_S, evolve, evolve_times,
                                  kdv_residual, schrodinger_residual,
                                  trace_smoothing_constant)


class TestFreeGroups:

  def test_schrodinger_gaussian(self):
    grid = make_grid(16.0, 512, 1.0, 2)
    t = 0.5
    u = evolve("schrodinger", np.exp(-grid.x**2), t, grid)
    expected = np.exp(-grid.x**2 / (1 + 4j * t)) / np.sqrt(1 + 4j * t)
    assert np.abs(u - expected).max() <= 1e-8

  @pytest.mark.parametrize("kind", ["schrodinger", "airy"])
  def test_group_law_and_unitarity(self, kind):
    grid = make_grid(16.0, 256, 1.0, 2)
    phi = np.exp(-(grid.x - 1)**2) * (1 + 0.5j * grid.x)
    once = evolve(kind, phi, 0.7, grid)
    twice = evolve(kind, evolve(kind, phi, 0.3, grid), 0.4, grid)
    assert np.abs(once - twice).max() <= 1e-10
    assert math.isclose(sobolev_norm(once, 0, grid),
                        sobolev_norm(phi, 0, grid),
                        rel_tol=1e-10)

  def test_evolve_times_matches_evolve(self):
    grid = make_grid(16.0, 128, 1.0, 9)
    phi = np.exp(-grid.x**2)
    field = evolve_times("airy", phi, grid)
    assert field.shape == grid.shape
    assert np.isrealobj(field)
    assert np.allclose(field[:, 4], evolve("airy", phi, grid.t[4], grid))

  def test_airy_self_similar(self):
    grid = make_grid(48.0, 1536, 1.0, 2)
    eps = 1.0
    evolved = evolve("airy", damped_airy_kernel(grid.x, eps), 1.0, grid)
    c = 2**(-1 / 3)
    inner = np.abs(grid.x) <= 10
    expected = c * damped_airy_kernel(c * grid.x[inner], eps * c**2)
    assert np.abs(evolved[inner] - expected).max() <= 1e-6


class TestAiryFunction:

  def test_values_at_zero(self):
    assert math.isclose(airy_function(0.0), 1 / (3 * gamma(2 / 3)),
                        rel_tol=1e-8)
    assert math.isclose(airy_function_derivative(0.0),
                        -1 / (3 * gamma(1 / 3)),
                        rel_tol=1e-8)

  @pytest.mark.parametrize("x", [-3.0, -1.0, 0.0, 2.0])
  def test_quadrature_oracle(self, x):
    assert abs(airy_function_quadrature(x) - airy_function(x)) <= 1e-8

  def test_range(self):
    with pytest.raises(AssertionError):
      airy_function(60.0)


class TestDuhamel:

  def test_single_mode_schrodinger(self):
    grid = make_grid(8.0, 64, 1.0, 101)
    kappa = grid.xi[4]
    mode = np.exp(1j * kappa * grid.x)
    w = np.repeat(mode[:, None], grid.Nt, axis=1)
    out = duhamel_S(w, grid)
    factor = -(1 - np.exp(-1j * kappa**2 * grid.t)) / kappa**2
    assert np.abs(out - mode[:, None] * factor[None, :]).max() <= 1e-8

  def test_single_mode_kdv(self):
    grid = make_grid(8.0, 64, 1.0, 101)
    kappa = grid.xi[3]
    mode = np.exp(1j * kappa * grid.x)
    w = np.repeat(mode[:, None], grid.Nt, axis=1)
    out = duhamel_K(w, grid)
    factor = (np.exp(1j * kappa**3 * grid.t) - 1) / (1j * kappa**3)
    assert np.abs(out - mode[:, None] * factor[None, :]).max() <= 1e-8

  @pytest.mark.parametrize("kind", ["schrodinger", "airy"])
  def test_residual_decreases_with_dt(self, kind):
    norms = []
    for Nt in (65, 129):
      grid = make_grid(8.0, 64, 1.0, Nt)
      w = np.exp(-grid.x**2 / 4)[:, None] * np.cos(3 * grid.t)[None, :]
      if kind == "schrodinger":
        residual = schrodinger_residual(duhamel_S(w, grid), grid, w)
      else:
        residual = kdv_residual(duhamel_K(w, grid), grid, w)
      norms.append(np.sqrt(grid.dx * grid.dt) * np.linalg.norm(residual))
    assert norms[1] < norms[0] / 2


class TestTraceSmoothing:

  @pytest.mark.parametrize("kind,which", [("schrodinger", "value"),
                                          ("airy", "value"),
                                          ("airy", "derivative")])
  def test_finite(self, kind, which):
    grid = make_grid(16.0, 128, 1.0, 2)
    constant = trace_smoothing_constant(kind, 0.5, grid, samples=5,
                                        which=which)
    assert 0 < constant < 1e3


if __name__ == '__main__':
  pytest.main(['-s', 'test_propagators.py'])
