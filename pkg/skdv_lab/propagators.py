import logging
import math

import numpy as np
from scipy import integrate, special

from skdv_lab.grid import (SampledField, cutoff_psi, forward_transform,
                           inverse_transform, sobolev_norm_1d)

PROPAGATOR_KINDS = ("schrodinger", "airy")
AIRY_RANGE = 50.0

__etd_dict = {}


def _nyquist(grid):
  return grid.Nx // 2


def multiplier(kind, grid, t):
  """Unimodular symbol of the free group at time t, FFT ordered."""
  assert kind in PROPAGATOR_KINDS, f"Unknown propagator {kind}."
  xi = grid.xi
  if kind == "schrodinger":
    return np.exp(-1j * t * xi**2)
  m = np.exp(1j * t * xi**3)
  # Real data keep a real Nyquist coefficient.
  m[_nyquist(grid)] = math.cos(t * xi[_nyquist(grid)]**3)
  return m


def evolve(kind, phi, t, grid=None):
  grid = grid or phi.grid
  values = phi.values if isinstance(phi, SampledField) else np.asarray(phi)
  out = inverse_transform(
      multiplier(kind, grid, t) * forward_transform(values, grid), grid)
  if kind == "airy" and not np.iscomplexobj(values):
    out = out.real
  if isinstance(phi, SampledField):
    return phi.with_values(out)
  return out


def evolve_times(kind, phi, grid, times=None):
  """Free evolution sampled on every time node, shape (Nx, len(times))."""
  times = grid.t if times is None else np.asarray(times)
  values = phi.values if isinstance(phi, SampledField) else np.asarray(phi)
  coefficients = forward_transform(values, grid)
  symbols = np.stack([multiplier(kind, grid, t) for t in times], axis=1)
  out = inverse_transform(symbols * coefficients[:, None], grid)
  if kind == "airy" and not np.iscomplexobj(values):
    out = out.real
  return out


def spectral_derivative(values, grid, order=1):
  """d^order/dx^order along axis 0."""
  values = np.asarray(values)
  symbol = (1j * grid.xi)**order
  if order % 2 == 1:
    symbol[_nyquist(grid)] = 0
  symbol = symbol.reshape((-1,) + (1,) * (values.ndim - 1))
  out = np.fft.ifft(symbol * np.fft.fft(values, axis=0), axis=0)
  return out if np.iscomplexobj(values) else out.real


def fd_derivative(values, grid, order=1):
  """Periodic central differences along axis 0, orders 1 to 3."""
  u = np.asarray(values)
  r = lambda k: np.roll(u, -k, axis=0)
  if order == 1:
    return (r(1) - r(-1)) / (2 * grid.dx)
  if order == 2:
    return (r(1) - 2 * u + r(-1)) / grid.dx**2
  if order == 3:
    return (r(2) - 2 * r(1) + 2 * r(-1) - r(-2)) / (2 * grid.dx**3)
  raise NotImplementedError(f"Finite differences of order {order}.")


def airy_function(x):
  """A(x) = (1/2pi) int e^{ix xi + i xi^3} d xi = 3^(-1/3) Ai(3^(-1/3) x)."""
  x = np.asarray(x, dtype=np.float64)
  assert np.all(np.abs(x) <= AIRY_RANGE), \
      f"airy_function is limited to |x| <= {AIRY_RANGE}"
  c = 3**(-1 / 3)
  out = c * special.airy(c * x)[0]
  return float(out) if out.ndim == 0 else out


def airy_function_derivative(x):
  x = np.asarray(x, dtype=np.float64)
  assert np.all(np.abs(x) <= AIRY_RANGE), \
      f"airy_function is limited to |x| <= {AIRY_RANGE}"
  c = 3**(-1 / 3)
  out = c * c * special.airy(c * x)[1]
  return float(out) if out.ndim == 0 else out


def airy_function_quadrature(x):
  """A(x) on the ray xi = r e^{i pi/6}, where e^{i xi^3} = e^{-r^3}."""
  assert abs(x) <= AIRY_RANGE, \
      f"airy_function is limited to |x| <= {AIRY_RANGE}"
  rotation = np.exp(1j * np.pi / 6)

  def integrand(r):
    return rotation * np.exp(1j * x * r * rotation - r**3)

  re, _ = integrate.quad(lambda r: integrand(r).real, 0, np.inf,
                         epsabs=1e-13, epsrel=1e-12, limit=200)
  return re / np.pi


def damped_airy_kernel(x, eps):
  """Inverse transform of e^{i xi^3 - eps xi^2}."""
  x = np.asarray(x, dtype=np.float64)
  return np.exp(eps * x / 3 + 2 * eps**3 / 27) * airy_function(x +
                                                               eps**2 / 3)


def _phi_functions(z):
  phi1 = np.empty_like(z)
  phi2 = np.empty_like(z)
  small = np.abs(z) < 0.1
  zs = z[small]
  phi1[small] = sum(zs**j / math.factorial(j + 1) for j in range(8))
  phi2[small] = sum(zs**j / math.factorial(j + 2) for j in range(8))
  zl = z[~small]
  phi1[~small] = (np.exp(zl) - 1) / zl
  phi2[~small] = (np.exp(zl) - 1 - zl) / zl**2
  return phi1, phi2


def _etd_coefficients(kind, grid):
  key = (kind, grid.key())
  if key in __etd_dict:
    return __etd_dict[key]
  if kind == "schrodinger":
    mu = -1j * grid.xi**2
  else:
    mu = 1j * grid.xi**3
  z = mu * grid.dt
  phi1, phi2 = _phi_functions(z.astype(np.complex128))
  coefficients = (np.exp(z), grid.dt * (phi1 - phi2), grid.dt * phi2)
  __etd_dict[key] = coefficients
  return coefficients


def duhamel_spectral(kind, source_hat, grid):
  """Integrate d/dt c = mu c + source with c(0) = 0, source linear per step."""
  propagate, w_now, w_next = _etd_coefficients(kind, grid)
  out = np.zeros((grid.Nx, grid.Nt), dtype=np.complex128)
  for n in range(grid.Nt - 1):
    out[:, n + 1] = (propagate * out[:, n] + w_now * source_hat[:, n] +
                     w_next * source_hat[:, n + 1])
  return out


def duhamel_S(w, grid=None):
  """-i int_0^t e^{i(t-t')d_x^2} w(t') dt'."""
  grid = grid or w.grid
  values = w.values if isinstance(w, SampledField) else np.asarray(w)
  source = -1j * forward_transform(values, grid)
  out = inverse_transform(duhamel_spectral("schrodinger", source, grid), grid)
  if isinstance(w, SampledField):
    return SampledField(grid, out, "schrodinger-component")
  return out


def duhamel_K(w, grid=None):
  """int_0^t e^{-(t-t')d_x^3} w(t') dt'."""
  grid = grid or w.grid
  values = w.values if isinstance(w, SampledField) else np.asarray(w)
  source = forward_transform(values, grid)
  source[_nyquist(grid)] = 0
  out = inverse_transform(duhamel_spectral("airy", source, grid), grid)
  if not np.iscomplexobj(values):
    out = out.real
  if isinstance(w, SampledField):
    return SampledField(grid, out, w.kind)
  return out


def _x_derivative(values, grid, order, method):
  if method == "spectral":
    return spectral_derivative(values, grid, order)
  if method == "fd":
    return fd_derivative(values, grid, order)
  raise NotImplementedError(f"Unknown derivative method {method}.")


def schrodinger_residual(field, grid, source=None, method="spectral"):
  """(i d_t + d_x^2) u - w on every grid node."""
  u = np.asarray(field)
  residual = 1j * np.gradient(u, grid.dt, axis=1, edge_order=2) + \
      _x_derivative(u, grid, 2, method)
  if source is not None:
    residual = residual - source
  return residual


def kdv_residual(field, grid, source=None, method="spectral"):
  """(d_t + d_x^3) v - w on every grid node."""
  v = np.asarray(field)
  residual = np.gradient(v, grid.dt, axis=1, edge_order=2) + \
      _x_derivative(v, grid, 3, method)
  if source is not None:
    residual = residual - source
  return residual


def trace_smoothing_constant(kind, s, grid, samples=50, seed=0,
                             which="value"):
  """Largest ||psi(t) (e^{tA}phi)(0, t)||_{H^r(R_t)} over ||phi||_{H^s} = 1.

  r is (2s+1)/4 for schrodinger, (s+1)/3 for the airy value and s/3 for
  the airy derivative trace.
  """
  assert kind in PROPAGATOR_KINDS, f"Unknown propagator {kind}."
  if kind == "schrodinger":
    assert which == "value", "schrodinger traces only have a value part"
    order = (2 * s + 1) / 4
  else:
    order = (s + 1) / 3 if which == "value" else s / 3
  rng = np.random.default_rng(seed)
  t = np.linspace(-2.5, 2.5, 1025)
  dt = t[1] - t[0]
  xi = grid.xi
  phase = -1j * xi**2 if kind == "schrodinger" else 1j * xi**3
  factor = 1j * xi if which == "derivative" else np.ones_like(xi)
  power = 2 if kind == "schrodinger" else 3
  resolved = (np.pi / (2 * dt))**(1 / power)
  band = np.abs(xi) < min(np.abs(xi).max() / 4, resolved)
  weight = (1 + np.abs(xi))**(2 * s)
  worst = 0.0
  for _ in range(samples):
    coefficients = (rng.normal(size=grid.Nx) +
                    1j * rng.normal(size=grid.Nx)) * band
    norm = math.sqrt(
        np.sum(weight * np.abs(coefficients)**2) * grid.dxi / (2 * np.pi))
    coefficients = coefficients / norm
    trace = np.exp(np.outer(t, phase)) @ (coefficients * factor) * \
        grid.dxi / (2 * np.pi)
    value = sobolev_norm_1d(cutoff_psi(t) * trace, dt, order, pad=2)
    worst = max(worst, value)
  logging.info(f"Trace smoothing constant ({kind}, {which}, s={s}): "
               f"{worst:.4f}.")
  return worst
