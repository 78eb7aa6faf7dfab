import math

from skdv_lab.estimates import (EstimateChecker, product_spectrum, real_field,
                                space_norm, strictly_between, x_derivative)


class KdvBilinearEstimateChecker(EstimateChecker):
  """||d_x(v1 v2)||_{Y^{k,-b}} <= c ||v1||_{Y^{k,b} cap V^alpha} ||v2||."""

  which = "kdv-bilinear-5.2"

  def __init__(self):
    super(KdvBilinearEstimateChecker, self).__init__()

  def hypotheses(self, s, k, params):
    lower = max(5 / 12 - k / 9, 1 / 4 - k / 3, 3 / 10 - k / 15, 1 / 4)
    return [
        ("k>-3/4", k > -3 / 4),
        ("alpha>1/2", params.alpha > 1 / 2),
        ("max{5/12-k/9, 1/4-k/3, 3/10-k/15, 1/4}<b<1/2",
         strictly_between(params.b, lower, 1 / 2)),
    ]

  def sample(self, size, cutoff, generator):
    return [
        real_field(u)
        for u in super(KdvBilinearEstimateChecker, self).sample(
            size, cutoff, generator)
    ]

  def input_norm(self, spectrum, s, k, params):
    return math.hypot(space_norm(spectrum, "Y", k, params.b),
                      space_norm(spectrum, "Valpha", 0, params.alpha))

  def output_norm(self, spectra, s, k, params):
    square = x_derivative(product_spectrum(spectra, (False, False)))
    return space_norm(square, "Y", k, -params.b)
