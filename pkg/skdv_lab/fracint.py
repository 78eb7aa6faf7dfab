import logging
import math

import numpy as np
from scipy.signal import fftconvolve
from scipy.special import beta, gamma

from skdv_lab.grid import TimeTrace

# Stencils are offsets from the left node k of the interval [k, k+1].
STANDARD_STENCIL = (-2, -1, 0, 1)
FORWARD_STENCIL = (0, 1, 2, 3)
SHIFTED_STENCIL = (-1, 0, 1, 2)
MAX_ORDER = 4

__moment_dict = {}
__prefactor_dict = {}


class BranchConfigurationError(Exception):
  pass


def _moments(n, alpha):
  """mu_p(m) = int_0^1 (m - s)^(alpha-1) s^p ds for m = 1..n, p = 0..3."""
  key = (n, float(alpha))
  if key in __moment_dict:
    return __moment_dict[key]
  mu = np.zeros((n + 1, 4))
  p = np.arange(4)
  mu[1] = beta(p + 1, alpha)
  if n >= 2:
    nodes, weights = np.polynomial.legendre.leggauss(20)
    s = 0.5 * (nodes + 1)
    m = np.arange(2, n + 1)[:, None]
    kernel = (m - s[None, :])**(alpha - 1) * (0.5 * weights)[None, :]
    mu[2:] = kernel @ (s[:, None]**p[None, :])
  __moment_dict[key] = mu
  return mu


def _stencil_weights(mu, stencil):
  vandermonde = np.vander(np.asarray(stencil, dtype=np.float64), 4,
                          increasing=True)
  return mu @ np.linalg.inv(vandermonde)


def _interval(values, k, stencil, mu):
  """Contribution of interval [k, k+1] to every I_n, n > k."""
  n = values.shape[0]
  out = np.zeros_like(values)
  if k + max(stencil) > n - 1 or k + min(stencil) < 0 or k + 1 > n - 1:
    return out
  weights = _stencil_weights(mu[1:n - k], stencil)
  for i, o in enumerate(stencil):
    w = weights[:, i].reshape((-1,) + (1,) * (values.ndim - 1))
    out[k + 1:] += w * values[k + o]
  return out


def _forward_rl(values, spacing, alpha, kink):
  n = values.shape[0]
  assert n >= 4, "riemann_liouville needs at least four samples"
  mu = _moments(n, alpha)
  result = np.zeros_like(values)

  standard = _stencil_weights(mu, STANDARD_STENCIL)
  standard[0] = 0
  for i, o in enumerate(STANDARD_STENCIL):
    shifted = np.zeros_like(values)
    lo, hi = 2, n - 1 - max(o, 0)
    shifted[lo:hi + 1] = values[lo + o:hi + 1 + o]
    kernel = standard[:n, i].reshape((-1,) + (1,) * (values.ndim - 1))
    result += fftconvolve(kernel, shifted, axes=0)[:n]

  result += _interval(values, 0, FORWARD_STENCIL, mu)
  result += _interval(values, 1, SHIFTED_STENCIL, mu)
  if kink is not None and kink >= 2:
    for k, stencil in ((kink, FORWARD_STENCIL), (kink + 1, SHIFTED_STENCIL)):
      if k >= 2:
        result += _interval(values, k, stencil, mu)
        result -= _interval(values, k, STANDARD_STENCIL, mu)
  result[0] = 0
  return spacing**alpha / gamma(alpha) * result


def riemann_liouville(values, spacing, alpha, axis=-1, reverse=False,
                      kink=None):
  """Product integration of (1/Gamma(alpha)) int (t-s)^(alpha-1) f(s) ds.

  The integral runs from the first sample along axis, or from the last one
  when reverse is set. On every interval f is replaced by its cubic
  interpolant and the kernel moments are exact. kink is a node index where
  f is only continuous; stencils do not straddle it.
  """
  assert alpha > 0, "riemann_liouville needs a positive order"
  values = np.moveaxis(np.asarray(values), axis, 0)
  is_complex = np.iscomplexobj(values)
  values = values.astype(np.complex128 if is_complex else np.float64)
  if reverse:
    values = values[::-1]
    if kink is not None:
      kink = values.shape[0] - 1 - kink
  result = _forward_rl(values, spacing, alpha, kink)
  if reverse:
    result = result[::-1]
  return np.moveaxis(result, 0, axis)


def fd_time_derivative(values, spacing, axis=-1):
  """Fourth order finite differences with one-sided closures."""
  f = np.moveaxis(np.asarray(values), axis, 0)
  assert f.shape[0] >= 5, "derivative needs at least five samples"
  d = np.empty_like(f)
  d[2:-2] = (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / 12
  d[0] = (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / 12
  d[1] = (-3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]) / 12
  d[-1] = (25 * f[-1] - 48 * f[-2] + 36 * f[-3] - 16 * f[-4] + 3 * f[-5]) / 12
  d[-2] = (3 * f[-1] + 10 * f[-2] - 18 * f[-3] + 6 * f[-4] - f[-5]) / 12
  return np.moveaxis(d / spacing, 0, axis)


def _vanishes_at_origin(values, spacing, order, axis):
  f = np.moveaxis(np.asarray(values), axis, 0)
  scale = np.abs(f).max()
  if scale == 0:
    return True
  derivative = f
  for _ in range(order):
    if np.abs(derivative[0]).max() > 1e-8 * scale:
      return False
    derivative = np.moveaxis(
        fd_time_derivative(np.moveaxis(derivative, 0, axis), spacing, axis),
        axis, 0)
    scale = max(np.abs(derivative).max(), 1e-300)
  return True


def frac_integral_array(values, spacing, alpha, axis=-1):
  if alpha == 0:
    return np.array(values, copy=True)
  if alpha < 0:
    return frac_derivative_array(values, spacing, -alpha, axis)
  assert alpha <= MAX_ORDER, f"|alpha| must not exceed {MAX_ORDER}"
  return riemann_liouville(values, spacing, alpha, axis)


def frac_derivative_array(values, spacing, alpha, axis=-1):
  """I_{-alpha} along axis for data vanishing at the first sample."""
  assert 0 < alpha <= MAX_ORDER, f"|alpha| must not exceed {MAX_ORDER}"
  k = int(math.ceil(alpha))
  if _vanishes_at_origin(values, spacing, k, axis):
    derivative = np.asarray(values)
    for _ in range(k):
      derivative = fd_time_derivative(derivative, spacing, axis)
    if k == alpha:
      return derivative
    return riemann_liouville(derivative, spacing, k - alpha, axis)
  logging.warning(
      f"Fractional derivative of order {alpha} applied to data that does "
      f"not vanish to order {k} at t=0; accuracy degrades near t=0.")
  integrated = np.asarray(values) if k == alpha else riemann_liouville(
      values, spacing, k - alpha, axis)
  for _ in range(k):
    integrated = fd_time_derivative(integrated, spacing, axis)
  return integrated


def frac_integral(f, alpha):
  assert f.support == "nonnegative-support", \
      "frac_integral needs a trace with nonnegative support"
  return f.with_values(frac_integral_array(f.values, f.dt, alpha))


def frac_derivative(f, alpha):
  assert f.support == "nonnegative-support", \
      "frac_derivative needs a trace with nonnegative support"
  return f.with_values(frac_derivative_array(f.values, f.dt, alpha))


def _candidate_prefactors(alpha):
  return {
      "exp(-i pi alpha/2)": np.exp(-0.5j * np.pi * alpha),
      "exp(-pi alpha/2)": np.exp(-0.5 * np.pi * alpha),
      "exp(i pi alpha/2)": np.exp(0.5j * np.pi * alpha),
      "1": 1.0,
  }


def _spectral_apply(values, dt, alpha, prefactor, pad=16):
  n = len(values)
  m = pad * n
  eps = 3 / (n * dt)
  t = dt * np.arange(m)
  damped = np.zeros(m, dtype=np.complex128)
  damped[:n] = values * np.exp(-eps * t[:n])
  tau = 2 * np.pi * np.fft.fftfreq(m, dt)
  symbol = prefactor * (tau - 1j * eps)**(-alpha)
  out = np.fft.ifft(symbol * np.fft.fft(damped))[:n]
  return out * np.exp(eps * t[:n])


def calibrate_prefactor(alpha):
  """Pick the symbol prefactor that reproduces the time-domain integral."""
  key = float(alpha)
  if key in __prefactor_dict:
    return __prefactor_dict[key]
  dt = 40 / 4096
  t = dt * np.arange(4097)
  smoke = t**3 * np.exp(-t)
  reference = frac_integral_array(smoke, dt, alpha)
  errors = {}
  for name, prefactor in _candidate_prefactors(alpha).items():
    candidate = _spectral_apply(smoke, dt, alpha, prefactor)
    errors[name] = np.linalg.norm(candidate - reference) / np.linalg.norm(
        reference)
  name = min(errors, key=errors.get)
  if errors[name] > 1e-4:
    raise BranchConfigurationError(
        f"No symbol prefactor reproduces I_{alpha}: relative errors {errors}.")
  logging.info(f"Spectral I_{alpha} calibrated with prefactor {name} "
               f"(relative error {errors[name]:.2e}).")
  __prefactor_dict[key] = (name, _candidate_prefactors(alpha)[name])
  return __prefactor_dict[key]


def clear_prefactor_cache():
  __prefactor_dict.clear()


def frac_integral_spectral(f, alpha):
  """I_alpha through the temporal symbol (tau - i0)^(-alpha)."""
  assert f.support == "nonnegative-support", \
      "frac_integral_spectral needs a trace with nonnegative support"
  assert -3 < alpha <= MAX_ORDER, "spectral order must lie in (-3, 4]"
  if alpha == 0:
    return f.with_values(np.array(f.values, copy=True))
  scale = np.abs(f.values).max()
  if scale > 0 and np.abs(f.values[-1]) > 1e-6 * scale:
    logging.warning("Trace does not decay before the end of the time grid; "
                    "the spectral fractional integral wraps around.")
  _, prefactor = calibrate_prefactor(alpha)
  out = _spectral_apply(f.values, f.dt, alpha, prefactor)
  if not np.iscomplexobj(f.values):
    out = out.real
  return f.with_values(out)
