from skdv_lab.estimates import (EstimateChecker, at_least, at_most,
                                product_spectrum, space_norm, strictly_between,
                                x_derivative)


class CouplingUAEstimateChecker(EstimateChecker):
  """||d_x(u1 conj(u2))||_{U^{k,-a}} for k >= 0.

  No lower bound on a alone is imposed beyond the listed inequalities.
  """

  which = "prop-5.4a"

  def __init__(self):
    super(CouplingUAEstimateChecker, self).__init__()

  def hypotheses(self, s, k, params):
    a, b = params.a, params.b
    return [
        ("1/4<b<1/2", strictly_between(b, 1 / 4, 1 / 2)),
        ("s>1/4", s > 1 / 4),
        ("0<=k<=min{3a, 2s+6b+3a-7/2}",
         at_least(k, 0) and at_most(k, min(3 * a,
                                           2 * s + 6 * b + 3 * a - 7 / 2))),
    ]

  def input_norm(self, spectrum, s, k, params):
    return space_norm(spectrum, "X", s, params.b)

  def output_norm(self, spectra, s, k, params):
    density = x_derivative(product_spectrum(spectra, (False, True)))
    return space_norm(density, "U", k, -params.a)
