import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from skdv_lab.bourgain import (INTEGRALS, INVOKED_ESTIMATES, EstimateParams,
                               Region, RegularityPair, bourgain_norm,
                               classify_region, classify_region_symbolic,
                               default_params, integral_bound_check,
                               linear_estimate_constants,
                               time_localization_check, verify_estimate)
from skdv_lab.estimates import HypothesisViolation
from skdv_lab.grid import make_grid

REPRESENTATIVES = {
    "D": ("right", 0.0, -0.6),
    "D0": ("right", 0.75, 0.0),
    "Dt": ("right", 0.4, 0.8),
    "Dt0": ("right", 0.75, 0.9),
    "E": ("left", 0.3, 0.2),
    "E0": ("left", 0.75, 0.25),
    "Et1": ("left", 0.2, -0.2),
    "Et2": ("left", 0.4, 0.8),
    "Et10": ("left", 0.75, -0.1),
    "Et20": ("left", 0.75, 0.9),
}


class TestRegularityPair:

  def test_trace_exponents(self):
    reg = RegularityPair(0.5, 0.5)
    assert reg.schrodinger_trace == 0.5
    assert reg.kdv_trace == 0.5
    assert math.isclose(reg.kdv_dtrace, 1 / 6)


class TestClassifier:

  def test_printed_region(self):
    assert str(classify_region("right", 0, -0.7)) == \
        "D, smallness: no, beta-zero: no"

  @pytest.mark.parametrize("tag", sorted(REPRESENTATIVES))
  def test_representatives(self, tag):
    side, s, k = REPRESENTATIVES[tag]
    region = classify_region(side, s, k)
    assert region == tag
    assert region.side == side

  def test_flags(self):
    assert Region("Dt0").smallness_required
    assert Region("Dt0").beta_zero_required
    assert not Region("E").smallness_required
    assert Region("none").side is None

  def test_outside(self):
    assert classify_region("right", 1.5, 0.0) == "none"
    assert classify_region("left", 0.0, 0.3) == "none"

  @pytest.mark.parametrize("side", ["right", "left"])
  def test_two_implementations_agree(self, side):
    disagreements = []
    for s in np.linspace(-0.1, 1.1, 100):
      for k in np.linspace(-1.0, 1.6, 100):
        if classify_region(side, s, k) != classify_region_symbolic(
            side, s, k):
          disagreements.append((s, k))
    assert not disagreements, disagreements[:5]

  @settings(deadline=None, max_examples=200)
  @given(st.floats(min_value=-0.1, max_value=1.1),
         st.floats(min_value=-1.0, max_value=1.6))
  def test_smallness_regions_need_high_k(self, s, k):
    for side in ("right", "left"):
      region = classify_region(side, s, k)
      if region.smallness_required and region.tag in ("Dt", "Dt0"):
        assert k > 0.5


class TestDefaultParams:

  def test_region_d(self):
    params = default_params(Region("D"), 0.0, -0.6)
    assert (params.a, params.b) == (0.48, 0.49)
    assert math.isclose(params.alpha, 0.56)

  def test_fine_steps(self):
    params = default_params(Region("D"), 0.0, -0.7)
    assert (params.a, params.b) == (0.498, 0.499)

  def test_left_lambdas(self):
    params = default_params(Region("E"), 0.3, 0.2)
    assert math.isclose(params.lambda2, -0.5)
    assert abs(params.lambda3) < 1e-12

  @pytest.mark.parametrize("tag", sorted(REPRESENTATIVES))
  def test_meets_invoked_estimates(self, tag):
    _, s, k = REPRESENTATIVES[tag]
    params = default_params(Region(tag), s, k)
    assert params.a < params.b < 0.5
    checked = {which for which, _, ok in params.report if ok}
    assert set(INVOKED_ESTIMATES[tag]) <= checked

  def test_none_rejected(self):
    with pytest.raises(AssertionError):
      default_params(Region("none"), 1.5, 0.0)


class TestHarness:

  def test_deterministic(self):
    params = default_params(Region("D"), 0.0, -0.6)
    first = verify_estimate("prop-5.1", 0.0, -0.6, params, trials=3,
                            seed=7, size=8)
    second = verify_estimate("prop-5.1", 0.0, -0.6, params, trials=3,
                             seed=7, size=8)
    assert first.to_row() == second.to_row()
    assert first.maxima == second.maxima

  def test_row_columns(self):
    params = default_params(Region("D"), 0.0, -0.6)
    row = verify_estimate("trilinear-5.1", 0.0, -0.6, params, trials=2,
                          size=8).to_row()
    assert list(row) == ["which", "params", "trials", "max_ratio", "growth",
                         "seed"]

  def test_refuses_violating_params(self):
    with pytest.raises(HypothesisViolation, match="3/8<b<1/2"):
      verify_estimate("trilinear-5.1", 0.0, 0.0, EstimateParams(0.2, 0.3, 0.75),
                      trials=1)

  @pytest.mark.parametrize("tag", sorted(REPRESENTATIVES))
  def test_bounded_under_cutoff_doubling(self, tag):
    side, s, k = REPRESENTATIVES[tag]
    params = default_params(Region(tag), s, k)
    for which in INVOKED_ESTIMATES[tag]:
      report = verify_estimate(which, s, k, params, trials=200, seed=0,
                               size=16)
      assert report.which == which
      assert np.isfinite(report.max_ratio)
      assert report.growth <= 2.0, (which, report.maxima)

  def test_report_uses_canonical_id(self):
    params = default_params(Region("D"), 0.0, -0.6)
    report = verify_estimate("coupling-x", 0.0, -0.6, params, trials=1,
                             size=8)
    assert report.to_row()["which"] == "prop-5.1"


class TestIntegrals:

  @pytest.mark.parametrize("which,exponents", [
      ("quadratic-2.5", {"b": 0.6}),
      ("cubic-2.5", {"b": 0.4}),
      ("gtv-2.7", {"b1": 0.4, "b2": 0.4}),
      ("holmer-2.8", {"b": 0.4}),
  ])
  def test_bounded(self, which, exponents):
    report = integral_bound_check(which, exponents, samples=10, seed=1)
    assert not report.flagged
    assert 0 < report.sup_ratio < 50

  def test_hypothesis_rejected(self):
    with pytest.raises(HypothesisViolation, match="b1\\+b2>1/2"):
      integral_bound_check("gtv-2.7", {"b1": 0.2, "b2": 0.2})

  def test_cubic_refusal_names_bound(self):
    with pytest.raises(HypothesisViolation, match="cubic-2.5 requires b>1/3"):
      integral_bound_check("cubic-2.5", {"b": 0.3})

  def test_names(self):
    assert INTEGRALS == ("quadratic-2.5", "cubic-2.5", "gtv-2.7", "holmer-2.8")

  @pytest.mark.parametrize("alias,which,exponents", [
      ("quadratic", "quadratic-2.5", {"b": 0.6}),
      ("two-weight", "gtv-2.7", {"b1": 0.4, "b2": 0.4}),
      ("truncated-singular", "holmer-2.8", {"b": 0.4}),
  ])
  def test_descriptive_alias(self, alias, which, exponents):
    report = integral_bound_check(alias, exponents, samples=2, seed=1)
    assert report.which == which


class TestNorms:

  def test_homogeneous(self):
    grid = make_grid(8.0, 64, 1.0, 65)
    w = np.exp(-grid.x**2)[:, None] * np.sin(np.pi * grid.t)[None, :]
    one = bourgain_norm(w, "X", 0.5, 0.4, grid)
    assert one > 0
    assert math.isclose(bourgain_norm(2 * w, "X", 0.5, 0.4, grid), 2 * one)

  def test_zero(self):
    grid = make_grid(8.0, 64, 1.0, 65)
    assert bourgain_norm(np.zeros(grid.shape), "Y", 0.0, 0.4, grid) == 0

  def test_time_localization_ordering(self):
    grid = make_grid(8.0, 64, 1.0, 65)
    with pytest.raises(AssertionError):
      time_localization_check(np.zeros(grid.shape), 0.0, 0.3, 0.4, grid=grid)

  def test_time_localization_report(self):
    grid = make_grid(8.0, 64, 2.0, 257)
    w = np.exp(-grid.x**2)[:, None] * np.ones(grid.Nt)[None, :]
    report = time_localization_check(w, 0.0, 0.4, 0.1, grid=grid)
    assert len(report.norms) == 6
    assert np.isfinite(report.slope)

  def test_linear_constants(self):
    grid = make_grid(8.0, 64, 1.0, 65)
    params = EstimateParams(0.48, 0.49, 0.56)
    constants = linear_estimate_constants(grid, 0.0, -0.6, params, samples=2)
    assert sorted(constants) == sorted([
        "group", "group-C", "duhamel-S", "duhamel-S-C", "duhamel-K",
        "duhamel-K-C"
    ])
    assert all(np.isfinite(v) and v > 0 for v in constants.values())


if __name__ == '__main__':
  pytest.main(['-s', 'test_bourgain.py'])
