import logging
import math

import numpy as np
from scipy.signal import fftconvolve
from scipy.special import erfc, gamma

from skdv_lab.fracint import frac_integral_array, riemann_liouville
from skdv_lab.grid import (SampledField, TimeTrace, inverse_transform,
                           left_cutoff, make_grid, one_sided_limit)
from skdv_lab.propagators import duhamel_spectral

# Jump of d_x^2 L f across x = 0 is DELTA_CONSTANT * I_{-1/2} f.
DELTA_CONSTANT = 2 * np.exp(0.75j * np.pi)
SIGNS = ("plus", "minus")
EQUATIONS = ("schrodinger", "kdv")
KDV_PAD = 4
KDV_LAMBDAS = (-0.5, -0.25, 0.0, 0.25, 0.5)

__kernel_dict = {}


class SingularConfigurationError(Exception):
  pass


class ForcingLambda:

  def __init__(self, lam, sign="plus", equation="schrodinger"):
    assert sign in SIGNS, f"Unknown forcing sign {sign}."
    assert equation in EQUATIONS, f"Unknown forcing equation {equation}."
    lower = -2 if equation == "schrodinger" else -3
    assert lam > lower, f"{equation} forcing classes need lambda > {lower}"
    self.lam = float(lam)
    self.sign = sign
    self.equation = equation


def _trace_values(f):
  if isinstance(f, TimeTrace):
    assert f.support == "nonnegative-support", \
        "boundary forcing needs a trace with nonnegative support"
    return f.values
  return np.asarray(f)


def _check_length(values, grid):
  assert len(values) == grid.Nt, \
      f"trace has {len(values)} samples, grid has {grid.Nt}"


# Schrodinger forcing: product integration against the Gaussian kernel.


def _antiderivatives(a, tau):
  """H, F1 and P at every (a, tau); a = x^2/4 along rows.

  H = int_0^tau s^(-1/2) e^{ia/s} ds, F1 = int_0^tau s^(1/2) e^{ia/s} ds and
  P = int_0^tau s^(-3/2) e^{ia/s} ds.
  """
  a = a[:, None]
  tau = tau[None, :]
  H = np.zeros((a.shape[0], tau.shape[1]), dtype=np.complex128)
  F1 = np.zeros_like(H)
  P = np.zeros_like(H)
  positive = tau[0] > 0
  t = tau[:, positive]
  H[0:1, positive] = 2 * np.sqrt(t)
  F1[0:1, positive] = 2 / 3 * t**1.5
  if a.shape[0] > 1:
    ar = a[1:]
    c = np.exp(-0.25j * np.pi) * np.sqrt(ar)
    phase = np.exp(1j * ar / t)
    tail = erfc(c / np.sqrt(t))
    h = 2 * np.sqrt(t) * phase + 2j * ar * math.sqrt(math.pi) / c * tail
    H[1:, positive] = h
    F1[1:, positive] = 2 / 3 * (t**1.5 * phase + 1j * ar * h)
    P[1:, positive] = math.sqrt(math.pi) / c * tail
  return H, F1, P


def _lag_weights(first, second, dt, tau):
  """Convolution weights for q linear per step, given kernel moments."""
  d0 = np.diff(first, axis=1)
  d1 = (np.diff(second, axis=1) - tau[None, :-1] * d0) / dt
  m1 = np.concatenate([np.zeros((d0.shape[0], 1)), d1], axis=1)
  step = d0 - d1
  W = step + m1[:, :-1]
  return W, step


def _kernel_tables(grid):
  key = grid.key()
  if key in __kernel_dict:
    return __kernel_dict[key]
  a = (grid.dx * np.arange(grid.origin + 1))**2 / 4
  tau = grid.dt * np.arange(grid.Nt + 1)
  H, F1, P = _antiderivatives(a, tau)
  value = _lag_weights(H, F1, grid.dt, tau)
  derivative = _lag_weights(P, H, grid.dt, tau)
  tables = {
      "value": tuple(w / math.sqrt(math.pi) for w in value),
      "derivative": derivative,
  }
  __kernel_dict[key] = tables
  return tables


def clear_kernel_cache():
  __kernel_dict.clear()


def _lag_convolve(q, tables, grid):
  W, step = tables
  q = np.asarray(q, dtype=np.complex128)
  rows = fftconvolve(W, q[None, :], axes=1)[:, :grid.Nt]
  rows -= step * q[0]
  rows[:, 0] = 0
  index = np.abs(np.arange(grid.Nx) - grid.origin)
  return rows[index]


def schrodinger_forcing_from_density(q, grid, derivative=0):
  """L acting through its density q = I_{-1/2} f."""
  _check_length(q, grid)
  tables = _kernel_tables(grid)
  if derivative == 0:
    return _lag_convolve(q, tables["value"], grid)
  assert derivative == 1, "only the first x-derivative is available"
  field = _lag_convolve(q, tables["derivative"], grid)
  field *= (1j * grid.x / (2 * math.sqrt(math.pi)))[:, None]
  field[grid.origin] = 0
  return field


def L_forcing(f, grid):
  values = _trace_values(f)
  _check_length(values, grid)
  q = frac_integral_array(values, grid.dt, -0.5)
  return SampledField(grid, schrodinger_forcing_from_density(q, grid),
                      "schrodinger-component")


def L_derivative(f, grid):
  """d_x L f off x = 0; the x = 0 node holds the mean of both limits, 0."""
  values = _trace_values(f)
  _check_length(values, grid)
  q = frac_integral_array(values, grid.dt, -0.5)
  return SampledField(grid,
                      schrodinger_forcing_from_density(q, grid, derivative=1),
                      "schrodinger-component")


def _power_profile(grid, exponent, sign):
  """x_-^exponent for plus, x_+^exponent for minus, zero at x = 0."""
  if sign == "plus":
    base = np.where(grid.x < 0, -grid.x, 0.0)
  else:
    base = np.where(grid.x > 0, grid.x, 0.0)
  out = np.zeros(grid.Nx)
  inside = base > 0
  out[inside] = base[inside]**exponent
  return out


def L_lambda(f, cfg, grid):
  """(x_-^{lam-1}/Gamma(lam)) * L(I_{-lam/2} f) for plus, x_+ for minus."""
  assert cfg.equation == "schrodinger", "L_lambda needs a schrodinger class"
  lam = cfg.lam
  assert -2 < lam <= 1, "L_lambda needs lambda in (-2, 1]"
  values = _trace_values(f)
  _check_length(values, grid)
  if lam == 0:
    return L_forcing(values, grid)
  reverse = cfg.sign == "plus"
  if lam > 0:
    q = frac_integral_array(values, grid.dt, -0.5 - lam / 2)
    base = schrodinger_forcing_from_density(q, grid)
    field = riemann_liouville(base, grid.dx, lam, axis=0, reverse=reverse,
                              kink=grid.origin)
  else:
    q = frac_integral_array(values, grid.dt, -1.5 - lam / 2)
    base = 1j * schrodinger_forcing_from_density(q, grid)
    field = -riemann_liouville(base, grid.dx, lam + 2, axis=0,
                               reverse=reverse, kink=grid.origin)
    density = frac_integral_array(values, grid.dt, -0.5 - lam / 2)
    profile = _power_profile(grid, lam + 1, cfg.sign) / gamma(lam + 2)
    field = field + DELTA_CONSTANT * profile[:, None] * density[None, :]
  return SampledField(grid, field, "schrodinger-component")


# KdV forcing: delta-sourced Airy flow with the d_x^2 jump subtracted.


def _corner_profile(x, derivative):
  """sigma = -x e^{-|x|}/4 and derivatives; sigma'' jumps by 1 at 0."""
  ax = np.abs(x)
  decay = np.exp(-ax)
  if derivative == 0:
    return -x * decay / 4
  if derivative == 1:
    return -(1 - ax) * decay / 4
  if derivative == 2:
    return np.sign(x) * (2 - ax) * decay / 4
  raise NotImplementedError(f"Corner profile derivative {derivative}.")


def _corner_limit(derivative, side):
  return {0: 0.0, 1: -0.25, 2: 0.5 if side == "right" else -0.5}[derivative]


def _airy_remainder(q, grid, derivative, pad):
  big = make_grid(pad * grid.L, pad * grid.Nx, grid.T_max, grid.Nt)
  xi = big.xi
  nyquist = big.Nx // 2
  source = np.broadcast_to(3 * np.asarray(q, dtype=np.complex128)[None, :],
                           (big.Nx, big.Nt)).copy()
  source[nyquist] = 0
  v_hat = duhamel_spectral("airy", source, big)
  corner_hat = 1j * xi / (1 + xi**2)**2
  v_hat -= corner_hat[:, None] * source
  if derivative:
    symbol = (1j * xi)**derivative
    symbol[nyquist] = 0
    v_hat *= symbol[:, None]
  start = big.origin - grid.origin
  full = inverse_transform(v_hat, big)
  return full[start:start + grid.Nx]


def kdv_forcing_from_density(q, grid, derivative=0, pad=KDV_PAD):
  """3 int_0^t e^{-(t-t')d_x^3} delta q(t') dt' and its x-derivatives."""
  _check_length(q, grid)
  q = np.asarray(q)
  remainder = _airy_remainder(q, grid, derivative, pad)
  field = remainder + 3 * _corner_profile(grid.x, derivative)[:, None] * q[
      None, :]
  if not np.iscomplexobj(q):
    field = field.real
  return field


def kdv_forcing_limit(q, grid, side, derivative=2, pad=KDV_PAD):
  """One-sided limit at x = 0 of the derivative-th x-derivative."""
  q = np.asarray(q)
  remainder = _airy_remainder(q, grid, derivative, pad)[grid.origin]
  out = remainder + 3 * _corner_limit(derivative, side) * q
  return out.real if not np.iscomplexobj(q) else out


def V_forcing(g, grid, derivative=0):
  values = _trace_values(g)
  _check_length(values, grid)
  q = frac_integral_array(values, grid.dt, -2 / 3)
  return SampledField(grid, kdv_forcing_from_density(q, grid, derivative),
                      "kdv-component" if not np.iscomplexobj(values) else
                      "generic")


def V_inv(g, grid):
  """d_x V I_{1/3} g."""
  values = _trace_values(g)
  _check_length(values, grid)
  q = frac_integral_array(values, grid.dt, -1 / 3)
  return SampledField(grid, kdv_forcing_from_density(q, grid, 1),
                      "kdv-component" if not np.iscomplexobj(values) else
                      "generic")


def V_lambda(g, cfg, grid):
  """V^lam_- = (x_+^{lam-1}/Gamma(lam)) * V(I_{-lam/3} g).

  V^lam_+ carries the phase e^{i pi lam} in front of the x_- convolution.
  For lam <= 0 the kernel derivatives move onto V: first derivative for
  lam in [-1, 0), second derivative minus its jump 3 q at x = 0 below -1.
  """
  assert cfg.equation == "kdv", "V_lambda needs a kdv class"
  lam = cfg.lam
  assert -2 < lam <= 1, "V_lambda needs lambda in (-2, 1]"
  values = _trace_values(g)
  _check_length(values, grid)
  reverse = cfg.sign == "plus"
  sgn = -1.0 if reverse else 1.0
  q = frac_integral_array(values, grid.dt, -2 / 3 - lam / 3)
  if lam == 0:
    field = kdv_forcing_from_density(q, grid)
  elif lam > 0:
    field = riemann_liouville(kdv_forcing_from_density(q, grid), grid.dx, lam,
                              axis=0, reverse=reverse, kink=grid.origin)
  elif lam == -1:
    field = sgn * kdv_forcing_from_density(q, grid, 1)
  elif lam > -1:
    field = sgn * riemann_liouville(kdv_forcing_from_density(q, grid, 1),
                                    grid.dx, lam + 1, axis=0, reverse=reverse,
                                    kink=grid.origin)
  else:
    second = kdv_forcing_from_density(q, grid, 2)
    step = (grid.x < 0) if reverse else (grid.x > 0)
    step = step.astype(np.float64)
    step[grid.origin] = 0.5
    jump = 3 * sgn * np.asarray(q)
    continuous = second - step[:, None] * jump[None, :]
    field = riemann_liouville(continuous, grid.dx, lam + 2, axis=0,
                              reverse=reverse, kink=grid.origin)
    profile = _power_profile(grid, lam + 2, cfg.sign) / gamma(lam + 3)
    field = field + profile[:, None] * jump[None, :]
  if cfg.sign == "plus":
    return SampledField(grid, np.exp(1j * np.pi * lam) * field, "generic")
  kind = "kdv-component" if not np.iscomplexobj(field) else "generic"
  return SampledField(grid, field, kind)


def kdv_lambda_traces(lam, sign):
  """Coefficients (value, I_{1/3} d_x value) of V^lam_{sign} g at x = 0."""
  if sign == "minus":
    return (2 * math.sin(math.pi * lam / 3 + math.pi / 6),
            2 * math.sin(math.pi * lam / 3 - math.pi / 6))
  return (np.exp(1j * np.pi * lam), None)


def left_kdv_constant_matrix():
  return np.array([[2.0, -1.0], [-1.0, -1.0]]) / 3


def left_kdv_lambda_matrix(lam2, lam3):
  """Inverse of the trace matrix of (V^{lam2}_-, V^{lam3}_-)."""
  determinant = 2 * math.sqrt(3) * math.sin(math.pi * (lam3 - lam2) / 3)
  if abs(determinant) < 1e-12:
    raise SingularConfigurationError(
        f"determinant vanishes for lambda2={lam2}, lambda3={lam3}")
  M = 2 * np.array([
      [math.sin(math.pi * lam2 / 3 + math.pi / 6),
       math.sin(math.pi * lam3 / 3 + math.pi / 6)],
      [math.sin(math.pi * lam2 / 3 - math.pi / 6),
       math.sin(math.pi * lam3 / 3 - math.pi / 6)],
  ])
  return M, np.linalg.inv(M)


def _defects(g_target, h_target, v0_trace, v0_dtrace):
  dt = g_target.dt
  value = g_target.values - v0_trace.values
  slope = frac_integral_array(h_target.values - v0_dtrace.values, dt, 1 / 3)
  return dt, value, slope


def assemble_left_kdv_constant(g_target, h_target, v0_trace, v0_dtrace):
  """(h1, h2) such that V h1 + V^{-1} h2 meets the value and slope defects."""
  dt, value, slope = _defects(g_target, h_target, v0_trace, v0_dtrace)
  A = left_kdv_constant_matrix()
  h1 = A[0, 0] * value + A[0, 1] * slope
  h2 = A[1, 0] * value + A[1, 1] * slope
  return TimeTrace(h1, dt), TimeTrace(h2, dt)


def assemble_left_kdv_lambda(lam2, lam3, g_target, h_target, v0_trace,
                             v0_dtrace):
  assert -1 < lam2 < 1 and -1 < lam3 < 1, \
      "left KdV forcing orders must lie in (-1, 1)"
  _, A = left_kdv_lambda_matrix(lam2, lam3)
  dt, value, slope = _defects(g_target, h_target, v0_trace, v0_dtrace)
  h2 = A[0, 0] * value + A[0, 1] * slope
  h3 = A[1, 0] * value + A[1, 1] * slope
  logging.info(f"Left KdV data assembled for lambda2={lam2:.4f}, "
               f"lambda3={lam3:.4f}.")
  return TimeTrace(h2, dt), TimeTrace(h3, dt)


# Trace and jump identities


def _relative(values, target, floor=0.0):
  """Error relative to the target, or to floor when the target is smaller."""
  scale = max(np.linalg.norm(target), floor)
  return float(np.linalg.norm(values - target) / scale) if scale > 0 else \
      float(np.linalg.norm(values))


def sample_trace(grid, power=3, rate=4.0):
  """t^power e^{-rate t}, flattened next to t = 0 by the left cutoff."""
  t = grid.t
  return TimeTrace(left_cutoff(t**power * np.exp(-rate * t), grid.dt),
                   grid.dt)


def trace_identity_suite(grid, f=None):
  """Relative errors of the boundary trace and jump identities.

  Rows are (identity, relative error), evaluated on the sample trace f.
  """
  f = f or sample_trace(grid)
  values = f.values
  scale = np.linalg.norm(values)
  dt = grid.dt
  rows = []
  L = L_forcing(f, grid).values
  rows.append(("L trace", _relative(L[grid.origin], values)))
  dL = L_derivative(f, grid).values
  half = np.exp(-0.25j * np.pi) * frac_integral_array(values, dt, -0.5)
  rows.append(("dxL left limit",
               _relative(one_sided_limit(dL, grid, "left",
                                         include_origin=False), half)))
  rows.append(("dxL right limit",
               _relative(one_sided_limit(dL, grid, "right",
                                         include_origin=False), -half)))
  for lam in (-0.5, -0.25, 0.25, 0.5):
    for sign in SIGNS:
      field = L_lambda(f, ForcingLambda(lam, sign), grid).values
      rows.append((f"L^{lam:g}_{sign} trace",
                   _relative(field[grid.origin],
                             np.exp(0.25j * np.pi * lam) * values, scale)))
  rows.append(("V trace", _relative(V_forcing(f, grid).values[grid.origin],
                                    values)))
  third = frac_integral_array(values, dt, -1 / 3)
  dV = V_forcing(f, grid, derivative=1).values
  rows.append(("dxV trace", _relative(dV[grid.origin], -third)))
  inverse = V_inv(f, grid).values
  rows.append(("V^-1 trace", _relative(inverse[grid.origin], -values)))
  q = frac_integral_array(values, dt, -1 / 3)
  rows.append(("dxV^-1 left limit",
               _relative(kdv_forcing_limit(q, grid, "left"), -2 * third)))
  rows.append(("dxV^-1 right limit",
               _relative(kdv_forcing_limit(q, grid, "right"), third)))
  q = frac_integral_array(values, dt, -2 / 3)
  rows.append(("dx2V right limit",
               _relative(kdv_forcing_limit(q, grid, "right"),
                         frac_integral_array(values, dt, -2 / 3))))
  for lam in KDV_LAMBDAS:
    for sign in SIGNS:
      field = V_lambda(f, ForcingLambda(lam, sign, "kdv"), grid).values
      coefficient = kdv_lambda_traces(lam, sign)[0]
      rows.append((f"V^{lam:g}_{sign} trace",
                   _relative(field[grid.origin], coefficient * values,
                             scale)))
  worst = max(error for _, error in rows)
  logging.info(f"Trace identities on Nx={grid.Nx}, Nt={grid.Nt}: worst "
               f"relative error {worst:.3e}.")
  return rows
