import logging
import math

import numpy as np
from scipy.integrate import trapezoid

from skdv_lab.bourgain import (classify_region, default_params,
                               linear_estimate_constants)
from skdv_lab.forcing import (ForcingLambda, L_forcing, L_lambda, V_forcing,
                              V_inv, V_lambda, assemble_left_kdv_constant,
                              assemble_left_kdv_lambda)
from skdv_lab.grid import (SIDES, SampledField, TimeTrace, cutoff_psi,
                           cutoff_psi_T, extend_half_line,
                           half_line_sobolev_norm, one_sided_limit,
                           restrict_half_line, trace_norm)
from skdv_lab.propagators import (duhamel_K, duhamel_S, evolve_times,
                                  fd_derivative, spectral_derivative)

CONSTRUCTIONS = ("auto", "standard", "small-data")
FORCING_ORDERS = ("default", "params")
NONLINEAR_TERMS = ("coupling alpha*u*v", "cubic beta*|u|^2*u",
                   "kdv self-interaction", "coupling gamma*d_x|u|^2")
COMPATIBILITY_TOL = 1e-8
# Consecutive non-decreasing Picard steps that count as divergence.
STALL_LIMIT = 5


class ValidationError(Exception):
  pass


class NonContractionError(Exception):

  def __init__(self, term, message):
    super(NonContractionError, self).__init__(message)
    self.term = term


class IBVPData:
  """Half-line data of the coupled Schrodinger-KdV boundary problem.

  u0, v0 are samples on the half-line nodes of the side (x = 0 included),
  f, g, h are boundary traces on the time axis. h is the slope datum of
  the left problem and must be absent on the right.
  """

  def __init__(self, side, u0, v0, f, g, h=None, alpha_c=0.0, beta_c=0.0,
               gamma_c=0.0, reg=None):
    self.side = side
    self.u0 = np.asarray(u0, dtype=np.complex128)
    self.v0 = np.asarray(v0, dtype=np.float64)
    self.f = _trace(f)
    self.g = _trace(g)
    self.h = None if h is None else _trace(h)
    self.alpha_c = float(alpha_c)
    self.beta_c = float(beta_c)
    self.gamma_c = float(gamma_c)
    self.reg = reg
    self.region = None

  def boundary_value(self, profile):
    return profile[0] if self.side == "right" else profile[-1]


class SolverConfig:

  def __init__(self, grid, T_local=None, tol=1e-8, max_iter=50, params=None,
               delta=0.1, construction="auto", forcing_orders="default",
               calibration_samples=5, max_halvings=10, seed=0):
    self.grid = grid
    self.T_local = grid.T_max / 4 if T_local is None else float(T_local)
    assert 0 < self.T_local <= grid.T_max / 4, "T_local must lie in (0, T_max/4]"
    assert tol > 0, "tol must be positive"
    assert construction in CONSTRUCTIONS, f"Unknown construction {construction}."
    assert forcing_orders in FORCING_ORDERS, \
        f"Unknown forcing orders {forcing_orders}."
    self.tol = tol
    self.max_iter = max_iter
    self.params = params
    self.delta = delta
    self.construction = construction
    self.forcing_orders = forcing_orders
    self.calibration_samples = calibration_samples
    self.max_halvings = max_halvings
    self.seed = seed


class IterationReport:

  def __init__(self):
    self.iterates = 0
    self.residual_history = []
    self.contraction_ratio = 0.0
    self.trace_errors = {}
    self.pde_residuals = {}
    self.M1 = 0.0
    self.M2 = 0.0
    self.converged = False
    self.T_local = None
    self.halvings = 0
    self.region = None
    self.construction = None
    self.dominant_term = None
    self.constants = {}
    self.whole_u = None
    self.whole_v = None

  def to_dict(self):
    return {
        "iterates": self.iterates,
        "residual_history": [float(r) for r in self.residual_history],
        "contraction_ratio": float(self.contraction_ratio),
        "trace_errors": {k: float(v) for k, v in self.trace_errors.items()},
        "pde_residuals": {k: float(v) for k, v in self.pde_residuals.items()},
        "M1": float(self.M1),
        "M2": float(self.M2),
        "converged": bool(self.converged),
        "T_local": self.T_local,
        "halvings": self.halvings,
        "region": self.region,
        "construction": self.construction,
        "dominant_term": self.dominant_term,
        "constants": {k: float(v) for k, v in self.constants.items()},
    }


class HalfLineField:
  """Restriction of a whole-line field to one half-line and to [0, T]."""

  def __init__(self, values, x, t, side, kind):
    self.values = values
    self.x = x
    self.t = t
    self.side = side
    self.kind = kind


def _trace(values):
  if isinstance(values, TimeTrace):
    return values.values
  return np.asarray(values)


# Validation


def validate(data, grid=None):
  if data.side not in SIDES:
    raise ValidationError(f"side must be one of {SIDES}, got {data.side}")
  if data.side == "left" and data.h is None:
    raise ValidationError("left side requires the boundary datum h")
  if data.side == "right" and data.h is not None:
    raise ValidationError("right side takes no boundary datum h")
  if data.reg is None:
    raise ValidationError("regularity pair (s, k) is missing")
  if grid is not None:
    half = grid.Nx - grid.origin if data.side == "right" else grid.origin + 1
    for name, profile in (("u0", data.u0), ("v0", data.v0)):
      if len(profile) != half:
        raise ValidationError(
            f"{name} has {len(profile)} samples, the {data.side} half-line "
            f"has {half}")
    for name, trace in (("f", data.f), ("g", data.g), ("h", data.h)):
      if trace is not None and len(trace) != grid.Nt:
        raise ValidationError(
            f"{name} has {len(trace)} samples, the time axis has {grid.Nt}")
  s, k = data.reg.s, data.reg.k
  if s > 1 / 2 and abs(data.boundary_value(data.u0) - data.f[0]) > \
      COMPATIBILITY_TOL:
    raise ValidationError(
        f"compatibility u0(0)=f(0) fails: u0(0)={data.boundary_value(data.u0)}"
        f", f(0)={data.f[0]}")
  if k > 1 / 2 and abs(data.boundary_value(data.v0) - data.g[0]) > \
      COMPATIBILITY_TOL:
    raise ValidationError(
        f"compatibility v0(0)=g(0) fails: v0(0)={data.boundary_value(data.v0)}"
        f", g(0)={data.g[0]}")
  region = classify_region(data.side, s, k)
  if region.beta_zero_required and data.beta_c != 0:
    raise ValidationError(
        f"region {region.tag} requires beta=0, got beta={data.beta_c}")
  data.region = region
  logging.info(f"Validated {data.side} data at (s, k) = ({s}, {k}): region "
               f"{region.tag}; trace exponents "
               f"{data.reg.schrodinger_trace:.4f}, {data.reg.kdv_trace:.4f}, "
               f"{data.reg.kdv_dtrace:.4f}.")
  return data


# Pieces of the contraction map


def _side_taper(grid, side):
  """1 on the kept side, a smooth cutoff of width L/4 on the other."""
  x = grid.x
  taper = cutoff_psi_T(x, grid.L / 4)
  keep = x >= 0 if side == "right" else x <= 0
  taper[keep] = 1.0
  return taper[:, None]


def _dealias(values, grid):
  spectrum = np.fft.fft(values, axis=0)
  m = np.abs(np.fft.fftfreq(grid.Nx) * grid.Nx)
  spectrum[m > grid.Nx / 3] = 0
  out = np.fft.ifft(spectrum, axis=0)
  return out if np.iscomplexobj(values) else out.real


def nonlinear_terms(u, v, data, grid, T_local, construction="standard"):
  """The four nonlinear pieces, each already cut off in time."""
  window = cutoff_psi_T(grid.t, T_local)[None, :]
  small = construction == "small-data"
  if small and data.side == "right":
    density = np.abs(window * u)**2
    gamma_window = 1.0
  else:
    density = np.abs(u)**2
    gamma_window = window
  v_window = 1.0 if small else window
  pieces = (
      window * _dealias(data.alpha_c * u * v, grid),
      window * _dealias(data.beta_c * np.abs(u)**2 * u, grid),
      -0.5 * v_window * spectral_derivative(_dealias(v * v, grid), grid),
      data.gamma_c * gamma_window *
      spectral_derivative(_dealias(density, grid), grid),
  )
  return dict(zip(NONLINEAR_TERMS, pieces))


def _sources(terms):
  coupling, cubic, self_interaction, density = (
      terms[name] for name in NONLINEAR_TERMS)
  return coupling + cubic, self_interaction + density


def _left_formulation(data):
  if data.side == "right":
    return None
  if data.region is not None and data.region.tag.startswith("Et"):
    return "lambda"
  return "constant"


def reconstruct_boundary_defect(data, lin_u, lin_v, grid, params,
                                formulation=None, forcing_orders="default"):
  """Boundary defects left by the free and Duhamel parts, as forcing data.

  lin_u and lin_v are the whole-line fields before the boundary forcing is
  added. Compatible data make every defect vanish at t = 0.
  """
  psi = cutoff_psi(grid.t)
  lambda1 = params.lambda1 if forcing_orders == "params" else 0.0
  value_u = psi * (data.f - lin_u[grid.origin])
  defects = {
      "h1":
          TimeTrace(np.exp(-0.25j * np.pi * lambda1) * value_u, grid.dt)
  }
  value_v = psi * (data.g - lin_v[grid.origin])
  if data.side == "right":
    defects["h2"] = TimeTrace(value_v, grid.dt)
    return defects
  slope_v = one_sided_limit(lin_v, grid, "left", derivative=1)
  zero = TimeTrace(np.zeros(grid.Nt), grid.dt)
  g_defect = TimeTrace(value_v, grid.dt)
  h_defect = TimeTrace(psi * (data.h - slope_v), grid.dt)
  if formulation == "lambda":
    h2, h3 = assemble_left_kdv_lambda(params.lambda2, params.lambda3,
                                      g_defect, h_defect, zero, zero)
  else:
    h2, h3 = assemble_left_kdv_constant(g_defect, h_defect, zero, zero)
  defects["h2"] = h2
  defects["h3"] = h3
  return defects


def _real_kdv(field):
  values = np.asarray(field)
  if np.iscomplexobj(values):
    scale = max(np.abs(values).max(initial=0.0), 1e-300)
    assert np.abs(values.imag).max(initial=0.0) <= 1e-8 * scale, \
        "KdV forcing field lost realness"
    values = values.real
  return values


def boundary_forcing(defects, data, grid, params, formulation=None,
                     forcing_orders="default"):
  """Whole-line forcing fields whose traces cancel the defects."""
  sign = "plus" if data.side == "right" else "minus"
  use_params = forcing_orders == "params"
  lambda1 = params.lambda1 if use_params else 0.0
  if lambda1 == 0:
    u_force = L_forcing(defects["h1"], grid).values
  else:
    u_force = L_lambda(defects["h1"], ForcingLambda(lambda1, sign),
                       grid).values
  if data.side == "right":
    lambda2 = params.lambda2 if use_params else 0.0
    if lambda2 == 0:
      v_force = V_forcing(defects["h2"], grid).values
    else:
      field = V_lambda(defects["h2"], ForcingLambda(lambda2, "plus", "kdv"),
                       grid).values
      v_force = _real_kdv(np.exp(-1j * np.pi * lambda2) * field)
  elif formulation == "lambda":
    v_force = (
        V_lambda(defects["h2"], ForcingLambda(params.lambda2, "minus", "kdv"),
                 grid).values +
        V_lambda(defects["h3"], ForcingLambda(params.lambda3, "minus", "kdv"),
                 grid).values)
  else:
    v_force = V_forcing(defects["h2"], grid).values + V_inv(
        defects["h3"], grid).values
  taper = _side_taper(grid, data.side)
  return taper * u_force, taper * _real_kdv(v_force)


class _Problem:
  """Whole-line pieces of one solve that do not change between iterates."""

  def __init__(self, data, grid, params, construction, forcing_orders):
    self.data = data
    self.grid = grid
    self.params = params
    self.construction = construction
    self.forcing_orders = forcing_orders
    self.formulation = _left_formulation(data)
    s, k = data.reg.s, data.reg.k
    u0 = extend_half_line(data.u0, data.side, grid, s)
    v0 = extend_half_line(data.v0, data.side, grid, k)
    self.psi = cutoff_psi(grid.t)[None, :]
    self.free_u = evolve_times("schrodinger", u0, grid)
    self.free_v = evolve_times("airy", v0, grid)

  def apply(self, u, v, T_local):
    grid = self.grid
    terms = nonlinear_terms(u, v, self.data, grid, T_local, self.construction)
    source_u, source_v = _sources(terms)
    lin_u = self.free_u + duhamel_S(source_u, grid)
    lin_v = self.free_v + duhamel_K(source_v, grid)
    defects = reconstruct_boundary_defect(self.data, lin_u, lin_v, grid,
                                          self.params, self.formulation,
                                          self.forcing_orders)
    u_force, v_force = boundary_forcing(defects, self.data, grid,
                                        self.params, self.formulation,
                                        self.forcing_orders)
    return self.psi * (lin_u + u_force), self.psi * (lin_v + v_force)


def _pair_norm(u, v, grid):
  return math.sqrt(grid.dx * grid.dt *
                   (np.sum(np.abs(u)**2) + np.sum(np.abs(v)**2)))


def _dominant_term(u, v, data, grid, T_local, construction):
  terms = nonlinear_terms(u, v, data, grid, T_local, construction)
  sizes = {name: np.linalg.norm(values) for name, values in terms.items()}
  return max(sizes, key=sizes.get)


def _contraction_ratio(history):
  positive = [h for h in history if h > 0]
  if len(positive) < 2:
    return 0.0
  ratios = np.array(positive[1:]) / np.array(positive[:-1])
  return float(np.exp(np.mean(np.log(ratios))))


def _picard(problem, config, T_local, trial):
  """Picard iteration from (0, 0).

  With trial set, returns None when the first two steps do not contract.
  """
  grid = config.grid
  u = np.zeros(grid.shape, dtype=np.complex128)
  v = np.zeros(grid.shape)
  history = []
  stalled = 0
  for it in range(1, config.max_iter + 1):
    u_next, v_next = problem.apply(u, v, T_local)
    diff = _pair_norm(u_next - u, v_next - v, grid)
    scale = max(1.0, _pair_norm(u_next, v_next, grid))
    history.append(diff)
    u, v = u_next, v_next
    logging.info(f"Picard step {it}: successive difference {diff:.3e}.")
    if diff <= config.tol * scale:
      return u, v, history, True
    if trial and it == 2 and history[1] >= history[0]:
      return None
    if len(history) >= 2 and history[-1] >= history[-2]:
      stalled += 1
    else:
      stalled = 0
    if stalled >= STALL_LIMIT:
      term = _dominant_term(u, v, problem.data, grid, T_local,
                            problem.construction)
      raise NonContractionError(
          term, f"Picard iteration stopped contracting for {STALL_LIMIT} "
          f"steps at T={T_local:.4g}; largest nonlinear term: {term}")
  logging.warning(f"Picard iteration hit max_iter={config.max_iter} without "
                  f"reaching tol={config.tol}.")
  return u, v, history, False


def _data_norms(data, grid):
  s, k = data.reg.s, data.reg.k
  reg = data.reg
  dt = grid.dt
  schrodinger = half_line_sobolev_norm(data.u0, data.side, grid, s) + \
      trace_norm(TimeTrace(data.f, dt), reg.schrodinger_trace)
  kdv = half_line_sobolev_norm(data.v0, data.side, grid, k) + \
      trace_norm(TimeTrace(data.g, dt), reg.kdv_trace)
  if data.h is not None:
    kdv += trace_norm(TimeTrace(data.h, dt), reg.kdv_dtrace)
  return schrodinger, kdv


def _resolve_construction(config, region):
  if config.construction != "auto":
    return config.construction
  return "small-data" if region.smallness_required else "standard"


def _local_steps(grid, T):
  return min(int(round(T / grid.dt)), grid.Nt - 1)


def _relative_error(values, target):
  scale = np.linalg.norm(target)
  error = np.linalg.norm(values - target)
  return error / scale if scale > 0 else error


def boundary_trace_errors(u, v, data, grid, T):
  n = _local_steps(grid, T) + 1
  errors = {
      "f": _relative_error(u[grid.origin, :n], data.f[:n]),
      "g": _relative_error(v[grid.origin, :n], data.g[:n]),
  }
  if data.h is not None:
    slope = one_sided_limit(v, grid, "left", derivative=1)
    errors["h"] = _relative_error(slope[:n], data.h[:n])
  return errors


def _interior_window(grid, side):
  quarter = grid.Nx // 4
  if side == "right":
    return slice(grid.origin + 4, grid.origin + quarter)
  return slice(grid.origin - quarter, grid.origin - 3)


def interior_residuals(u, v, data, grid, T):
  """RMS residuals of both equations on the half-line interior, t <= T.

  Finite differences in x keep the kink of the forcing at x = 0 local.
  """
  n = _local_steps(grid, T) + 1
  rows = _interior_window(grid, data.side)
  u_t = np.gradient(u[:, :n], grid.dt, axis=1, edge_order=2)
  v_t = np.gradient(v[:, :n], grid.dt, axis=1, edge_order=2)
  res_u = 1j * u_t + fd_derivative(u[:, :n], grid, 2) - (
      data.alpha_c * u[:, :n] * v[:, :n] +
      data.beta_c * np.abs(u[:, :n])**2 * u[:, :n])
  res_v = v_t + fd_derivative(v[:, :n], grid, 3) + 0.5 * fd_derivative(
      v[:, :n]**2, grid, 1) - data.gamma_c * fd_derivative(
          np.abs(u[:, :n])**2, grid, 1)
  weight = math.sqrt(grid.dx * grid.dt)
  return {
      "schrodinger": weight * float(np.linalg.norm(res_u[rows])),
      "kdv": weight * float(np.linalg.norm(res_v[rows])),
  }


def _restrict(values, grid, side, T, kind):
  n = _local_steps(grid, T) + 1
  x = restrict_half_line(grid.x, side, grid)
  return HalfLineField(
      restrict_half_line(values[:, :n], side, grid), x, grid.t[:n], side,
      kind)


def solve(data, config):
  """Fixed point of the boundary-forced Duhamel map on the whole line.

  Returns the half-line restrictions of (u, v) on [0, T_local] and the
  iteration report; the whole-line iterates ride along on the report.
  """
  grid = config.grid
  validate(data, grid)
  region = data.region
  if region.tag == "none":
    raise ValidationError(
        f"(s, k) = ({data.reg.s}, {data.reg.k}) lies in no admissibility "
        f"region on the {data.side} half-line")
  params = config.params or default_params(region, data.reg.s, data.reg.k)
  schrodinger_norm, kdv_norm = _data_norms(data, grid)
  if region.smallness_required and kdv_norm > config.delta:
    raise ValidationError(
        f"smallness: region {region.tag} needs KdV data norm <= "
        f"{config.delta}, got {kdv_norm:.4g}")
  construction = _resolve_construction(config, region)

  report = IterationReport()
  report.region = region.tag
  report.construction = construction
  report.constants = linear_estimate_constants(
      grid, data.reg.s, data.reg.k, params,
      samples=config.calibration_samples, seed=config.seed)
  c = max([1.0] + list(report.constants.values()))
  report.M1 = 2 * c * schrodinger_norm
  report.M2 = 2 * c * kdv_norm

  problem = _Problem(data, grid, params, construction, config.forcing_orders)
  T_local = config.T_local
  outcome = None
  for halving in range(config.max_halvings + 1):
    outcome = _picard(problem, config, T_local,
                      trial=halving < config.max_halvings)
    if outcome is not None:
      break
    T_local /= 2
    report.halvings = halving + 1
    logging.warning(f"First Picard steps do not contract; T_local halved "
                    f"to {T_local:.4g}.")
  u, v, history, converged = outcome

  report.T_local = T_local
  report.iterates = len(history)
  report.residual_history = history
  report.contraction_ratio = _contraction_ratio(history)
  report.converged = converged
  report.trace_errors = boundary_trace_errors(u, v, data, grid, T_local)
  report.pde_residuals = interior_residuals(u, v, data, grid, T_local)
  report.dominant_term = _dominant_term(u, v, data, grid, T_local,
                                        construction)
  report.whole_u = SampledField(grid, u, "schrodinger-component")
  report.whole_v = SampledField(grid, v, "kdv-component")
  logging.info(f"Solve finished after {report.iterates} steps, contraction "
               f"ratio {report.contraction_ratio:.3g}, trace errors "
               f"{report.trace_errors}.")
  return (_restrict(u, grid, data.side, T_local, "schrodinger-component"),
          _restrict(v, grid, data.side, T_local, "kdv-component"), report)


def solve_linear(side, equation, data, grid):
  """Linear boundary problem by superposition of free evolution and forcing."""
  assert side in SIDES, f"Unknown side {side}."
  assert equation in ("schrodinger", "kdv"), f"Unknown equation {equation}."
  validate(data, grid)
  s, k = data.reg.s, data.reg.k
  report = IterationReport()
  report.region = data.region.tag
  report.construction = "linear"
  n = grid.Nt
  if equation == "schrodinger":
    u0 = extend_half_line(data.u0, side, grid, s)
    free = evolve_times("schrodinger", u0, grid)
    defect = TimeTrace(data.f - free[grid.origin], grid.dt)
    field = free + _side_taper(grid, side) * L_forcing(defect, grid).values
    report.trace_errors = {"f": _relative_error(field[grid.origin], data.f)}
    residual = 1j * np.gradient(field, grid.dt, axis=1, edge_order=2) + \
        fd_derivative(field, grid, 2)
    kind = "schrodinger-component"
  else:
    v0 = extend_half_line(data.v0, side, grid, k)
    free = evolve_times("airy", v0, grid)
    value = TimeTrace(data.g - free[grid.origin], grid.dt)
    if side == "right":
      forced = V_forcing(value, grid).values
    else:
      slope = one_sided_limit(free, grid, "left", derivative=1)
      h_defect = TimeTrace(data.h - slope, grid.dt)
      zero = TimeTrace(np.zeros(n), grid.dt)
      h1, h2 = assemble_left_kdv_constant(value, h_defect, zero, zero)
      forced = V_forcing(h1, grid).values + V_inv(h2, grid).values
    field = free + _side_taper(grid, side) * forced
    report.trace_errors = {"g": _relative_error(field[grid.origin], data.g)}
    if side == "left":
      report.trace_errors["h"] = _relative_error(
          one_sided_limit(field, grid, "left", derivative=1), data.h)
    residual = np.gradient(field, grid.dt, axis=1, edge_order=2) + \
        fd_derivative(field, grid, 3)
    kind = "kdv-component"
  rows = _interior_window(grid, side)
  report.pde_residuals = {
      equation:
          math.sqrt(grid.dx * grid.dt) * float(np.linalg.norm(residual[rows]))
  }
  report.iterates = 1
  report.converged = True
  report.T_local = grid.T_max
  return SampledField(grid, field, kind), report


# Boundary flux identities


class FluxReport:

  def __init__(self, lhs, rhs):
    self.lhs = lhs
    self.rhs = rhs

  @property
  def defect(self):
    scale = max(abs(self.lhs), abs(self.rhs))
    return abs(self.lhs - self.rhs) / scale if scale > 0 else 0.0


def _half_integral(density, grid, side):
  half = restrict_half_line(density, side, grid)
  return float(trapezoid(half, dx=grid.dx))


def flux_identity_check(v, grid, side, T=None):
  """int v(T)^2 - int v(0)^2 over the half-line against the boundary flux.

  The flux is +int_0^T [2 v v_xx - v_x^2](0, t) dt on the right and the
  negative of it on the left.
  """
  values = v.values if isinstance(v, SampledField) else np.asarray(v)
  n = _local_steps(grid, grid.T_max if T is None else T)
  lhs = _half_integral(values[:, n]**2, grid, side) - _half_integral(
      values[:, 0]**2, grid, side)
  limits = [
      one_sided_limit(values[:, :n + 1], grid, side, derivative=d)
      for d in range(3)
  ]
  flux = 2 * limits[0] * limits[2] - limits[1]**2
  rhs = float(trapezoid(flux, dx=grid.dt))
  if side == "left":
    rhs = -rhs
  return FluxReport(lhs, rhs)


def schrodinger_flux_check(u, grid, side, T=None):
  """Mass identity: int |u(T)|^2 - int |u(0)|^2 = +-2 int Im(conj(u) u_x)(0)."""
  values = u.values if isinstance(u, SampledField) else np.asarray(u)
  n = _local_steps(grid, grid.T_max if T is None else T)
  lhs = _half_integral(np.abs(values[:, n])**2, grid, side) - _half_integral(
      np.abs(values[:, 0])**2, grid, side)
  value = one_sided_limit(values[:, :n + 1], grid, side, derivative=0)
  slope = one_sided_limit(values[:, :n + 1], grid, side, derivative=1)
  rhs = 2 * float(trapezoid(np.imag(np.conj(value) * slope), dx=grid.dt))
  if side == "left":
    rhs = -rhs
  return FluxReport(lhs, rhs)

