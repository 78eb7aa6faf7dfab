import logging
import math

import numpy as np

FIELD_KINDS = ("schrodinger-component", "kdv-component", "generic")
TRACE_SUPPORTS = ("nonnegative-support", "two-sided")
SIDES = ("right", "left")


class SpaceTimeGrid:
  """Periodic box [-L, L) sampled at Nx nodes times a uniform axis [0, T_max].

  Spatial nodes are x_j = -L + j dx, so x = 0 sits at index Nx // 2.
  Frequencies are kept in FFT order, xi = pi m / L.
  """

  def __init__(self, L, Nx, T_max, Nt):
    self.L = float(L)
    self.Nx = int(Nx)
    self.T_max = float(T_max)
    self.Nt = int(Nt)
    self.dx = 2 * self.L / self.Nx
    self.dt = self.T_max / (self.Nt - 1)
    self.origin = self.Nx // 2

    self.x = -self.L + self.dx * np.arange(self.Nx)
    self.x[self.origin] = 0.0
    self.t = self.dt * np.arange(self.Nt)
    self.xi = 2 * np.pi * np.fft.fftfreq(self.Nx, self.dx)
    self.dxi = np.pi / self.L
    for a in (self.x, self.t, self.xi):
      a.setflags(write=False)

  @property
  def shape(self):
    return (self.Nx, self.Nt)

  def key(self):
    return (self.L, self.Nx, self.T_max, self.Nt)

  def refine(self, factor=2):
    return make_grid(self.L, self.Nx * factor, self.T_max,
                     (self.Nt - 1) * factor + 1)

  def __eq__(self, other):
    return isinstance(other, SpaceTimeGrid) and self.key() == other.key()

  def __hash__(self):
    return hash(self.key())

  def __repr__(self):
    return (f"SpaceTimeGrid(L={self.L}, Nx={self.Nx}, T_max={self.T_max}, "
            f"Nt={self.Nt})")


class SampledField:

  def __init__(self, grid, values, kind="generic"):
    assert kind in FIELD_KINDS, f"Unknown field kind {kind}."
    values = np.asarray(values)
    assert values.shape in (grid.shape, (grid.Nx,)), \
        f"Field shape {values.shape} does not match grid {grid.shape}."
    if kind == "kdv-component":
      scale = np.abs(values).max() if values.size else 0.0
      assert np.abs(values.imag).max(initial=0.0) <= 1e-10 * max(scale, 1e-300), \
          "kdv-component field is not real."
      values = values.real.astype(np.float64)
    self.grid = grid
    self.values = values
    self.kind = kind

  def with_values(self, values):
    return SampledField(self.grid, values, self.kind)


class TimeTrace:

  def __init__(self, values, dt, support="nonnegative-support"):
    assert support in TRACE_SUPPORTS, f"Unknown trace support {support}."
    assert dt > 0, "dt must be positive."
    self.values = np.asarray(values)
    assert self.values.ndim == 1, "TimeTrace values must be one dimensional."
    self.dt = float(dt)
    self.support = support

  @property
  def t(self):
    return self.dt * np.arange(len(self.values))

  def with_values(self, values):
    return TimeTrace(values, self.dt, self.support)

  def __len__(self):
    return len(self.values)


def make_grid(L, Nx, T_max, Nt):
  assert Nx % 2 == 0, "Nx must be even"
  assert Nx >= 16, "Nx must be at least 16"
  assert Nt >= 2, "Nt must be at least 2"
  assert L > 0, "L must be positive"
  assert T_max > 0, "T_max must be positive"
  return SpaceTimeGrid(L, Nx, T_max, Nt)


def _values(profile):
  return profile.values if isinstance(profile, SampledField) else np.asarray(
      profile)


def _mode_signs(n):
  return 1.0 - 2.0 * (np.arange(n) % 2)


def forward_transform(profile, grid=None):
  """Continuum transform int e^{-i xi x} phi(x) dx on the FFT-ordered xi grid.

  Works along axis 0, so (space, time) arrays transform slice by slice.
  """
  grid = grid or profile.grid
  values = _values(profile)
  signs = _mode_signs(grid.Nx).reshape((-1,) + (1,) * (values.ndim - 1))
  return grid.dx * signs * np.fft.fft(values, axis=0)


def inverse_transform(coefficients, grid):
  coefficients = np.asarray(coefficients)
  signs = _mode_signs(grid.Nx).reshape((-1,) + (1,) *
                                       (coefficients.ndim - 1))
  return np.fft.ifft(signs * coefficients, axis=0) / grid.dx


def sobolev_norm(profile, s, grid=None):
  grid = grid or profile.grid
  values = _values(profile)
  assert values.ndim == 1, "sobolev_norm expects a spatial slice."
  coefficients = forward_transform(values, grid)
  weight = (1 + np.abs(grid.xi))**(2 * s)
  return math.sqrt(
      np.sum(weight * np.abs(coefficients)**2) * grid.dxi / (2 * np.pi))


def sobolev_norm_1d(values, spacing, s, pad=1):
  """H^s norm of samples on a uniform axis, zero padded by a factor pad."""
  values = np.asarray(values)
  n = len(values) * pad
  coefficients = spacing * np.fft.fft(values, n=n)
  freq = 2 * np.pi * np.fft.fftfreq(n, spacing)
  dfreq = 2 * np.pi / (n * spacing)
  weight = (1 + np.abs(freq))**(2 * s)
  return math.sqrt(
      np.sum(weight * np.abs(coefficients)**2) * dfreq / (2 * np.pi))


def trace_norm(trace, s):
  """Trace space norm on (0, T_max) after a smooth taper at the far end."""
  t = trace.t
  tapered = trace.values * cutoff_psi_T(t, t[-1] / 2)
  return sobolev_norm_1d(tapered, trace.dt, s, pad=2)


def _smooth_step(x):
  x = np.asarray(x, dtype=np.float64)
  out = np.zeros_like(x)
  pos = x > 0
  out[pos] = np.exp(-1 / x[pos])
  return out


def cutoff_psi(t):
  t = np.asarray(t, dtype=np.float64)
  a = _smooth_step(2 - np.abs(t))
  b = _smooth_step(np.abs(t) - 1)
  psi = a / (a + b)
  if psi.ndim == 0:
    return float(psi)
  return psi


def cutoff_psi_T(t, T):
  assert T > 0, "T must be positive"
  return cutoff_psi(np.asarray(t, dtype=np.float64) / T)


def restrict_half_line(profile, side, grid=None):
  assert side in SIDES, f"Unknown side {side}."
  grid = grid or profile.grid
  values = _values(profile)
  if side == "right":
    return values[grid.origin:].copy()
  return values[:grid.origin + 1].copy()


def _reflect(half, count):
  # half[0] is the x = 0 sample, half[j] the sample at distance j dx
  out = np.zeros((count,) + half.shape[1:], dtype=half.dtype)
  j = np.arange(1, count + 1)
  for coefficient, scale in ((6, 1), (-8, 2), (3, 3)):
    idx = scale * j
    ok = idx < len(half)
    out[j[ok] - 1] += coefficient * half[idx[ok]]
  return out


def extend_half_line(half_values, side, grid, s=0):
  """Whole-line field agreeing with half_values on its side.

  The missing side is 6u(-x) - 8u(-2x) + 3u(-3x), tapered by psi(4x/L).
  That reflection matches two derivatives at x = 0, so the operator is
  bounded on H^s for |s| <= 2.
  """
  assert side in SIDES, f"Unknown side {side}."
  assert abs(s) <= 2, "extension is only bounded for |s| <= 2"
  half = np.asarray(half_values)
  values = np.zeros((grid.Nx,) + half.shape[1:], dtype=half.dtype)
  if side == "right":
    assert len(half) == grid.Nx - grid.origin, "right half has wrong length"
    values[grid.origin:] = half
    mirrored = _reflect(half, grid.origin)
    taper = cutoff_psi_T(grid.x[grid.origin - 1::-1], grid.L / 4)
    values[grid.origin - 1::-1] = mirrored * taper.reshape(
        (-1,) + (1,) * (half.ndim - 1))
  else:
    assert len(half) == grid.origin + 1, "left half has wrong length"
    values[:grid.origin + 1] = half
    count = grid.Nx - grid.origin - 1
    mirrored = _reflect(half[::-1], count)
    taper = cutoff_psi_T(grid.x[grid.origin + 1:], grid.L / 4)
    values[grid.origin + 1:] = mirrored * taper.reshape(
        (-1,) + (1,) * (half.ndim - 1))
  return values


def half_line_sobolev_norm(half_values, side, grid, s):
  """Discrete H^s norm on the half-line.

  Integer orders sum one-sided finite-difference L2 norms, fractional
  orders interpolate between neighbours, negative orders use the zero
  extension.
  """
  half = np.asarray(half_values)
  if side == "left":
    half = half[::-1]
  if s < 0:
    full = np.zeros(grid.Nx, dtype=half.dtype)
    full[grid.origin:grid.origin + len(half)] = half
    return sobolev_norm(full, s, grid)

  def integer_norm(m):
    total = 0.0
    derivative = half
    for order in range(m + 1):
      total += grid.dx * np.sum(np.abs(derivative)**2)
      derivative = np.gradient(derivative, grid.dx, edge_order=2)
    return math.sqrt(total)

  lower = int(math.floor(s))
  theta = s - lower
  if theta == 0:
    return integer_norm(lower)
  return integer_norm(lower)**(1 - theta) * integer_norm(lower + 1)**theta


def measure_extension_constant(grid, side, s, samples=100, seed=0):
  """Largest observed ratio ||extension||_{H^s} / ||u||_{H^s(half-line)}."""
  rng = np.random.default_rng(seed)
  half_x = np.abs(restrict_half_line(grid.x, side, grid))
  worst = 0.0
  for _ in range(samples):
    centers = rng.uniform(0, grid.L / 4, size=3)
    widths = rng.uniform(0.5, 2.0, size=3)
    amplitudes = rng.normal(size=3) + 1j * rng.normal(size=3)
    half = sum(
        a * np.exp(-((half_x - c) / w)**2)
        for a, c, w in zip(amplitudes, centers, widths))
    denominator = half_line_sobolev_norm(half, side, grid, s)
    if denominator == 0:
      continue
    full = extend_half_line(half, side, grid, s)
    worst = max(worst, sobolev_norm(full, s, grid) / denominator)
  logging.info(f"Extension constant on the {side} half-line at s={s}: "
               f"{worst:.4f} over {samples} samples.")
  return worst


def one_sided_limit(values, grid, side, derivative=0, include_origin=True,
                    nodes=None):
  """Polynomial extrapolation to x = 0 from one side.

  values is indexed (space, ...); the result drops the spatial axis.
  """
  assert side in SIDES, f"Unknown side {side}."
  nodes = nodes or derivative + 3
  values = np.asarray(values)
  start = 0 if include_origin else 1
  offsets = np.arange(start, start + nodes)
  direction = 1 if side == "right" else -1
  positions = direction * offsets.astype(np.float64)
  vandermonde = np.vander(positions, nodes, increasing=True)
  weights = math.factorial(derivative) * np.linalg.inv(vandermonde)[
      derivative] / grid.dx**derivative
  samples = values[grid.origin + direction * offsets]
  return np.tensordot(weights, samples, axes=(0, 0))


def left_cutoff(values, dt, axis=-1):
  """Multiply by 1 - psi(t / 4dt), pushing numerical support off t = 0."""
  values = np.asarray(values)
  t = dt * np.arange(values.shape[axis])
  window = 1 - cutoff_psi_T(t, 4 * dt)
  shape = [1] * values.ndim
  shape[axis] = -1
  return values * window.reshape(shape)
