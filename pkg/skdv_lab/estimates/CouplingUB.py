from skdv_lab.estimates import (EstimateChecker, at_most, product_spectrum,
                                space_norm, strictly_between, x_derivative)


class CouplingUBEstimateChecker(EstimateChecker):
  """||d_x(u1 conj(u2))||_{U^{k,-a}} for k <= 0."""

  which = "prop-5.4b"

  def __init__(self):
    super(CouplingUBEstimateChecker, self).__init__()

  def hypotheses(self, s, k, params):
    a, b = params.a, params.b
    return [
        ("1/4<b<1/2", strictly_between(b, 1 / 4, 1 / 2)),
        ("1-2b<s<=3a-1/2", s > 1 - 2 * b and at_most(s, 3 * a - 1 / 2)),
        ("k<=0", at_most(k, 0)),
    ]

  def input_norm(self, spectrum, s, k, params):
    return space_norm(spectrum, "X", s, params.b)

  def output_norm(self, spectra, s, k, params):
    density = x_derivative(product_spectrum(spectra, (False, True)))
    return space_norm(density, "U", k, -params.a)
