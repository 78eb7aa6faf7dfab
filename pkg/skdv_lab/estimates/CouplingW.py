from skdv_lab.estimates import (EstimateChecker, at_most, product_spectrum,
                                real_field, space_norm, strictly_between)


class CouplingWEstimateChecker(EstimateChecker):
  """||u v||_{W^{s,-a}} <= c ||u||_{X^{s,b}} ||v||_{Y^{k,b}}."""

  which = "prop-5.2"

  def __init__(self):
    super(CouplingWEstimateChecker, self).__init__()

  def hypotheses(self, s, k, params):
    a, b = params.a, params.b
    return [
        ("1/2<s<=2a", s > 1 / 2 and at_most(s, 2 * a)),
        ("1/3<a<b<1/2", strictly_between(a, 1 / 3, b) and b < 1 / 2),
        ("k>s-2a", k > s - 2 * a),
    ]

  def sample(self, size, cutoff, generator):
    u, v = super(CouplingWEstimateChecker, self).sample(size, cutoff,
                                                         generator)
    return [u, real_field(v)]

  def ratio(self, spectra, s, k, params):
    u, v = spectra
    nu = space_norm(u, "X", s, params.b)
    nv = space_norm(v, "Y", k, params.b)
    if nu == 0 or nv == 0:
      return None
    lhs = space_norm(product_spectrum(spectra, (False, False)), "W", s,
                     -params.a)
    return lhs / (nu * nv)
