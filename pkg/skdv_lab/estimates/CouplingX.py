from skdv_lab.estimates import (EstimateChecker, at_most, product_spectrum,
                                real_field, space_norm)


class CouplingXEstimateChecker(EstimateChecker):
  """||u v||_{X^{s,-a}} <= c ||u||_{X^{s,b}} ||v||_{Y^{k,b}}."""

  which = "prop-5.1"

  def __init__(self):
    super(CouplingXEstimateChecker, self).__init__()

  def hypotheses(self, s, k, params):
    a, b = params.a, params.b
    return [
        ("k-|s|>max{2-6b, 5/2-9a}", k - abs(s) > max(2 - 6 * b, 5 / 2 - 9 * a)),
        ("7/18<2b-1/2", 7 / 18 < 2 * b - 1 / 2),
        ("2b-1/2<=a", at_most(2 * b - 1 / 2, a)),
        ("a<b", a < b),
    ]

  def sample(self, size, cutoff, generator):
    u, v = super(CouplingXEstimateChecker, self).sample(size, cutoff,
                                                         generator)
    return [u, real_field(v)]

  def ratio(self, spectra, s, k, params):
    u, v = spectra
    nu = space_norm(u, "X", s, params.b)
    nv = space_norm(v, "Y", k, params.b)
    if nu == 0 or nv == 0:
      return None
    lhs = space_norm(product_spectrum(spectra, (False, False)), "X", s,
                     -params.a)
    return lhs / (nu * nv)
