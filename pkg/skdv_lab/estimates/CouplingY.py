from skdv_lab.estimates import (EstimateChecker, at_least, at_most,
                                product_spectrum, space_norm, x_derivative)


class CouplingYEstimateChecker(EstimateChecker):
  """||d_x(u1 conj(u2))||_{Y^{k,-a}} <= c ||u1||_{X^{s,b}} ||u2||_{X^{s,b}}."""

  which = "prop-5.3"

  def __init__(self):
    super(CouplingYEstimateChecker, self).__init__()

  def hypotheses(self, s, k, params):
    a, b = params.a, params.b
    upper = min(s + 6 * b + 3 * a - 7 / 2, s + 3 * b - 1,
                4 * s + 2 * a - 3 / 2, 4 * s + 3 * a + 6 * b - 7 / 2)
    return [
        ("s>=0", at_least(s, 0)),
        ("k<=min{s+6b+3a-7/2, s+3b-1, 4s+2a-3/2, 4s+3a+6b-7/2}",
         at_most(k, upper)),
        ("3/8<a<=b<1/2", a > 3 / 8 and at_most(a, b) and b < 1 / 2),
    ]

  def input_norm(self, spectrum, s, k, params):
    return space_norm(spectrum, "X", s, params.b)

  def output_norm(self, spectra, s, k, params):
    density = x_derivative(product_spectrum(spectra, (False, True)))
    return space_norm(density, "Y", k, -params.a)
