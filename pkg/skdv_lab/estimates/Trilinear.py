from skdv_lab.estimates import (EstimateChecker, product_spectrum, space_norm,
                                strictly_between, at_least)


class TrilinearEstimateChecker(EstimateChecker):
  """||u1 u2 conj(u3)||_{X^{s,-a}} <= c prod ||ui||_{X^{s,b}}."""

  which = "trilinear-5.1"
  arity = 3

  def __init__(self):
    super(TrilinearEstimateChecker, self).__init__()

  def hypotheses(self, s, k, params):
    return [
        ("3/8<b<1/2", strictly_between(params.b, 3 / 8, 1 / 2)),
        ("s>=0", at_least(s, 0)),
        ("0<a<1/2", strictly_between(params.a, 0, 1 / 2)),
    ]

  def input_norm(self, spectrum, s, k, params):
    return space_norm(spectrum, "X", s, params.b)

  def output_norm(self, spectra, s, k, params):
    cubic = product_spectrum(spectra, (False, False, True))
    return space_norm(cubic, "X", s, -params.a)
