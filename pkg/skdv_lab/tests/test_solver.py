import numpy as np
import pytest

from skdv_lab.bourgain import RegularityPair, default_params
from skdv_lab.grid import extend_half_line, make_grid, restrict_half_line
from skdv_lab.propagators import evolve_times
from skdv_lab.solver import (NONLINEAR_TERMS, IBVPData, NonContractionError,
                             SolverConfig, ValidationError,
                             flux_identity_check, nonlinear_terms,
                             schrodinger_flux_check, solve, solve_linear,
                             validate)


def _poly_exp(x, amplitude=0.01, rate=1.0):
  r = np.abs(x)
  return amplitude * r**3 * np.exp(-rate * r)


def _data(side, grid, s, k, amplitude=0.0, **coefficients):
  x = restrict_half_line(grid.x, side, grid)
  trace = _poly_exp(grid.t, amplitude, rate=4.0)
  h = trace if side == "left" else None
  return IBVPData(side, _poly_exp(x, amplitude), _poly_exp(x, amplitude),
                  trace, trace, h=h, reg=RegularityPair(s, k),
                  **coefficients)


def _smooth_data(side, grid, s, k, **coefficients):
  """Profiles flat to fifth order at x = 0 and traces vanishing at t = 0."""
  x = np.abs(restrict_half_line(grid.x, side, grid))
  profile = 0.01 * x**5 * np.exp(-3 * x)
  trace = 0.1 * grid.t**2 * np.exp(-grid.t)
  h = trace if side == "left" else None
  return IBVPData(side, profile, profile, trace, trace, h=h,
                  reg=RegularityPair(s, k), **coefficients)


def _solve_smooth(side, s, k, Nx, tol=1e-8, **overrides):
  grid = make_grid(16.0, Nx, 1.0, Nx + 1)
  coefficients = dict(alpha_c=1.0, beta_c=1.0, gamma_c=1.0)
  coefficients.update(overrides)
  data = _smooth_data(side, grid, s, k, **coefficients)
  config = SolverConfig(grid, tol=tol, calibration_samples=2,
                        params=default_params(
                            validate(data, grid).region, s, k))
  return solve(data, config)


@pytest.fixture(scope="module", params=[("right", 0.0, -0.6),
                                        ("left", 0.3, 0.2)],
                ids=["right-D", "left-E"])
def refined_solves(request):
  side, s, k = request.param
  return {Nx: _solve_smooth(side, s, k, Nx) for Nx in (256, 512)}


class TestValidation:

  def test_left_needs_h(self):
    grid = make_grid(8.0, 64, 1.0, 65)
    data = _data("left", grid, 0.3, 0.2)
    data.h = None
    with pytest.raises(ValidationError, match="requires the boundary datum"):
      validate(data, grid)

  def test_right_rejects_h(self):
    grid = make_grid(8.0, 64, 1.0, 65)
    data = _data("right", grid, 0.0, -0.6)
    data.h = np.zeros(grid.Nt)
    with pytest.raises(ValidationError, match="no boundary datum h"):
      validate(data, grid)

  def test_compatibility(self):
    grid = make_grid(8.0, 64, 1.0, 65)
    data = _data("right", grid, 0.75, 0.0)
    data.u0 = data.u0 + 1.0
    with pytest.raises(ValidationError, match="compatibility u0\\(0\\)=f\\(0\\)"):
      validate(data, grid)

  def test_beta_zero(self):
    grid = make_grid(8.0, 64, 1.0, 65)
    data = _data("right", grid, 0.75, 0.0, beta_c=1.0)
    with pytest.raises(ValidationError, match="requires beta=0"):
      validate(data, grid)

  def test_length(self):
    grid = make_grid(8.0, 64, 1.0, 65)
    data = _data("right", grid, 0.0, -0.6)
    data.f = data.f[:10]
    with pytest.raises(ValidationError, match="time axis"):
      validate(data, grid)

  def test_region_recorded(self):
    grid = make_grid(8.0, 64, 1.0, 65)
    data = validate(_data("left", grid, 0.3, 0.2), grid)
    assert data.region == "E"

  def test_region_none(self):
    grid = make_grid(8.0, 64, 1.0, 65)
    with pytest.raises(ValidationError, match="no admissibility region"):
      solve(_data("right", grid, 1.5, 0.0), SolverConfig(grid))

  def test_smallness_gate(self):
    grid = make_grid(8.0, 64, 1.0, 65)
    data = _data("right", grid, 0.4, 0.8, amplitude=10.0)
    with pytest.raises(ValidationError, match="smallness"):
      solve(data, SolverConfig(grid, delta=1e-3))

  def test_config_asserts(self):
    grid = make_grid(8.0, 64, 1.0, 65)
    with pytest.raises(AssertionError):
      SolverConfig(grid, T_local=0.5)
    with pytest.raises(AssertionError):
      SolverConfig(grid, construction="other")


class TestNonlinearTerms:

  def test_names_and_zero(self):
    grid = make_grid(8.0, 64, 1.0, 65)
    data = _data("right", grid, 0.0, -0.6, alpha_c=1.0, beta_c=1.0,
                 gamma_c=1.0)
    u = np.zeros(grid.shape, dtype=np.complex128)
    v = np.zeros(grid.shape)
    terms = nonlinear_terms(u, v, data, grid, 0.25)
    assert tuple(terms) == NONLINEAR_TERMS
    assert all(not np.any(t) for t in terms.values())

  def test_small_data_matches_standard_locally(self):
    grid = make_grid(8.0, 64, 1.0, 65)
    data = _data("right", grid, 0.0, -0.6, alpha_c=1.0, beta_c=1.0,
                 gamma_c=1.0)
    rng = np.random.default_rng(0)
    u = rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape)
    v = rng.normal(size=grid.shape)
    standard = nonlinear_terms(u, v, data, grid, 0.25, "standard")
    small = nonlinear_terms(u, v, data, grid, 0.25, "small-data")
    n = int(round(0.25 / grid.dt))
    for name in NONLINEAR_TERMS:
      assert np.allclose(standard[name][:, :n], small[name][:, :n])


class TestSolve:

  def test_zero_data(self):
    grid = make_grid(8.0, 64, 1.0, 65)
    u, v, report = solve(_data("right", grid, 0.0, -0.6),
                         SolverConfig(grid, calibration_samples=1))
    assert report.converged
    assert report.iterates <= 2
    assert not np.any(u.values) and not np.any(v.values)
    assert report.region == "D"

  def test_small_data_converges(self, refined_solves):
    u, v, report = refined_solves[512]
    assert report.converged
    assert report.contraction_ratio < 0.9
    assert v.kind == "kdv-component"
    assert set(report.to_dict()) >= {"iterates", "residual_history",
                                      "trace_errors", "M1", "M2"}
    expected = {"f", "g", "h"} if u.side == "left" else {"f", "g"}
    assert set(report.trace_errors) == expected
    assert max(report.trace_errors.values()) <= 1e-2, report.trace_errors

  def test_interior_residual_order(self, refined_solves):
    coarse = refined_solves[256][2].pde_residuals
    fine = refined_solves[512][2].pde_residuals
    for equation in ("schrodinger", "kdv"):
      assert fine[equation] <= coarse[equation] / 2, (equation, coarse, fine)

  def test_decoupled_kdv_matches_standalone(self):
    _, v, _ = _solve_smooth("right", 0.0, -0.6, 256, tol=1e-12, alpha_c=0.0,
                            gamma_c=0.0)
    grid = make_grid(16.0, 256, 1.0, 257)
    data = _smooth_data("right", grid, 0.0, -0.6, beta_c=1.0)
    data.u0 = np.zeros_like(data.u0)
    data.f = np.zeros_like(data.f)
    config = SolverConfig(grid, tol=1e-12, calibration_samples=2,
                          params=default_params(
                              validate(data, grid).region, 0.0, -0.6))
    u_alone, v_alone, _ = solve(data, config)
    assert not np.any(u_alone.values)
    assert np.linalg.norm(v.values - v_alone.values) <= \
        1e-6 * np.linalg.norm(v_alone.values)

  def test_non_contraction_error_carries_term(self):
    error = NonContractionError("cubic beta*|u|^2*u", "stalled")
    assert error.term == "cubic beta*|u|^2*u"


class TestLinear:

  def test_right_vanishing(self):
    grid = make_grid(16.0, 256, 1.0, 257)
    field, report = solve_linear("right", "kdv", _data("right", grid, 0.0,
                                                       -0.6), grid)
    right = restrict_half_line(field.values, "right", grid)
    assert np.abs(right).max() <= 1e-8

  def test_left_nonvanishing(self):
    grid = make_grid(16.0, 256, 1.0, 257)
    data = _data("left", grid, 0.3, 0.2)
    data.h = _poly_exp(grid.t, 50.0, rate=4.0)
    field, report = solve_linear("left", "kdv", data, grid)
    left = restrict_half_line(field.values, "left", grid)
    assert np.abs(left).max() > 1e-2
    assert report.trace_errors["g"] >= 0

  @pytest.mark.parametrize("side,equation,s,k",
                           [("right", "schrodinger", 0.0, -0.6),
                            ("right", "kdv", 0.0, -0.6),
                            ("left", "kdv", 0.3, 0.2)])
  def test_traces_on_reference_grid(self, side, equation, s, k):
    grid = make_grid(16.0, 512, 1.0, 513)
    field, report = solve_linear(side, equation,
                                 _smooth_data(side, grid, s, k), grid)
    assert report.trace_errors
    assert max(report.trace_errors.values()) <= 1e-2, report.trace_errors

  def test_free_evolution_trace_adds_no_forcing(self):
    grid = make_grid(16.0, 256, 1.0, 257)
    data = _smooth_data("right", grid, 0.0, -0.6)
    free = evolve_times("schrodinger",
                        extend_half_line(data.u0, "right", grid), grid)
    data.f = free[grid.origin]
    field, report = solve_linear("right", "schrodinger", data, grid)
    assert np.abs(field.values - free).max() <= 1e-6
    assert report.trace_errors["f"] <= 1e-6

class TestFlux:

  @pytest.mark.parametrize("side", ["right", "left"])
  def test_kdv_flux(self, side):
    grid = make_grid(32.0, 2048, 0.5, 1025)
    v = evolve_times("airy", np.exp(-(grid.x - 2)**2), grid)
    report = flux_identity_check(v, grid, side)
    assert report.defect <= 1e-2

  @pytest.mark.parametrize("side", ["right", "left"])
  def test_kdv_flux_refines(self, side):
    defects = []
    for Nx, Nt in ((1024, 513), (2048, 1025)):
      grid = make_grid(32.0, Nx, 0.5, Nt)
      v = evolve_times("airy", np.exp(-(grid.x - 2)**2), grid)
      defects.append(flux_identity_check(v, grid, side).defect)
    coarse, fine = defects
    assert fine <= max(coarse / 2, 1e-8), defects

  @pytest.mark.parametrize("side", ["right", "left"])
  def test_schrodinger_mass(self, side):
    grid = make_grid(32.0, 2048, 0.5, 1025)
    u0 = np.exp(-(grid.x - 1)**2 + 2j * grid.x)
    u = evolve_times("schrodinger", u0, grid)
    report = schrodinger_flux_check(u, grid, side)
    assert report.defect <= 1e-2


if __name__ == '__main__':
  pytest.main(['-s', 'test_solver.py'])
