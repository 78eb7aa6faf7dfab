import importlib
import logging

import torch

__all__ = [
    "ESTIMATES", "HypothesisViolation", "canonical_estimate", "clear_estimate",
    "get_estimate", "space_weight"
]

SPACES = ("X", "Y", "W", "U", "Valpha")
# Canonical estimate ids and the checker modules they resolve to; the
# descriptive module names are accepted as aliases.
ESTIMATE_MODULES = {
    "trilinear-5.1": "trilinear",
    "kdv-bilinear-5.2": "kdv-bilinear",
    "prop-5.1": "coupling-x",
    "prop-5.2": "coupling-w",
    "prop-5.3": "coupling-y",
    "prop-5.4a": "coupling-u-a",
    "prop-5.4b": "coupling-u-b",
}
ESTIMATES = tuple(ESTIMATE_MODULES)
# Slack on non-strict inequalities, so 2 * 0.49 - 0.5 <= 0.48 holds.
TOL = 1e-12


class HypothesisViolation(Exception):
  pass


def at_most(x, bound):
  return x <= bound + TOL


def at_least(x, bound):
  return x >= bound - TOL


def strictly_between(x, lower, upper):
  return lower < x < upper


def bracket(x):
  return 1 + abs(x)


def space_weight(space, xi, tau, index, exponent):
  """Fourier weight of a Bourgain-type space.

  Works on numpy arrays and torch tensors alike. index is s (X, W) or k
  (Y, U); exponent is b, or alpha for Valpha.
  """
  if space == "X":
    return bracket(xi)**index * bracket(tau + xi**2)**exponent
  if space == "Y":
    return bracket(xi)**index * bracket(tau - xi**3)**exponent
  if space == "W":
    return bracket(tau)**(index / 2) * bracket(tau + xi**2)**exponent
  if space == "U":
    return bracket(tau)**(index / 3) * bracket(tau - xi**3)**exponent
  if space == "Valpha":
    return bracket(tau)**exponent
  raise NotImplementedError(f"Unknown space {space}.")


class EstimateChecker:
  """A nonlinear estimate ||N(inputs)||_out <= c prod ||input||_in.

  Subclasses name their hypotheses and evaluate the left-hand side on
  integer-frequency spectra of shape (M, M), FFT ordered, axis 0 being xi.
  """

  which = None
  arity = 2

  def __init__(self):
    self.name = self.__class__.__name__.replace("EstimateChecker", "")

  def hypotheses(self, s, k, params):
    raise NotImplementedError

  def check(self, s, k, params):
    violated = [text for text, ok in self.hypotheses(s, k, params) if not ok]
    if violated:
      raise HypothesisViolation(f"{self.which} requires {violated[0]}")

  def is_feasible(self, s, k, params):
    return all(ok for _, ok in self.hypotheses(s, k, params))

  def input_norm(self, spectrum, s, k, params):
    raise NotImplementedError

  def output_norm(self, spectra, s, k, params):
    raise NotImplementedError

  def ratio(self, spectra, s, k, params):
    """Left norm over the product of input norms; None for a zero input."""
    norms = [self.input_norm(u, s, k, params) for u in spectra]
    if any(n == 0 for n in norms):
      return None
    lhs = self.output_norm(spectra, s, k, params)
    product = 1.0
    for n in norms:
      product *= n
    return lhs / product

  def sample(self, size, cutoff, generator):
    mask = band_mask(size, cutoff)
    return [
        torch.randn((size, size), dtype=torch.complex128,
                    generator=generator) * mask for _ in range(self.arity)
    ]


def frequencies(size):
  m = torch.fft.fftfreq(size, dtype=torch.float64) * size
  xi, tau = torch.meshgrid(m, m, indexing="ij")
  return xi, tau


def band_mask(size, cutoff):
  xi, tau = frequencies(size)
  return ((xi.abs() < cutoff) & (tau.abs() < cutoff)).to(torch.complex128)


def weighted_norm(spectrum, weight):
  return float(torch.sqrt(torch.sum(weight**2 * spectrum.abs()**2)))


def physical(spectrum, conjugate=False):
  u = torch.fft.ifft2(spectrum)
  return u.conj() if conjugate else u


def product_spectrum(spectra, conjugates):
  """Spectrum of the pointwise product, the discrete convolution of inputs."""
  size = spectra[0].shape[0]
  field = None
  for spectrum, conjugate in zip(spectra, conjugates):
    u = physical(spectrum, conjugate) * size**2
    field = u if field is None else field * u
  return torch.fft.fft2(field) / size**2


def real_field(spectrum):
  """Hermitian part of a spectrum, the transform of a real field."""
  return torch.fft.fft2(torch.fft.ifft2(spectrum).real.to(torch.complex128))


def x_derivative(spectrum):
  xi, _ = frequencies(spectrum.shape[0])
  return 1j * xi * spectrum


def space_norm(spectrum, space, index, exponent):
  xi, tau = frequencies(spectrum.shape[0])
  return weighted_norm(spectrum, space_weight(space, xi, tau, index,
                                              exponent))


__estimate_dict = {}


def canonical_estimate(which):
  for canonical, module in ESTIMATE_MODULES.items():
    if which == module:
      return canonical
  return which


def get_estimate(which, **kwargs):
  module = ESTIMATE_MODULES.get(canonical_estimate(which), which)
  name = module.title().replace("-", "")
  checker_name = f"{name}EstimateChecker"
  if checker_name in __estimate_dict:
    return __estimate_dict[checker_name]
  mod = globals().get(name, None)
  if mod is None:
    try:
      mod = importlib.import_module(f"{__name__}.{name}")
    except ImportError:
      logging.warning(f"No estimate checker named {which}.")
      return None
  __estimate_dict[checker_name] = getattr(mod, checker_name)(**kwargs)
  return __estimate_dict[checker_name]


def clear_estimate():
  __estimate_dict.clear()
