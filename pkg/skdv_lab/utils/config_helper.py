import argparse
import inspect
import os

import numpy as np
import yaml

from skdv_lab.propagators import AIRY_RANGE, airy_function

PROFILE_KEYS = {
    "gaussian": ("amplitude", "center", "width"),
    "sech": ("amplitude", "center", "width"),
    "airy-bump": ("amplitude", "center", "scale"),
    "poly-exp": ("amplitude", "power", "rate"),
    "zero": (),
    "samples": ("path",),
}
SUBCOMMANDS = ("simulate", "linear", "classify", "verify-operators",
               "verify-estimates", "identities", "sweep")
FORMATS = ("csv", "json", "svg")


class ConfigError(Exception):
  pass


class GridParam:

  def __init__(self, L=16.0, Nx=512, T_max=1.0, Nt=513):
    self.L = float(L)
    self.Nx = int(Nx)
    self.T_max = float(T_max)
    self.Nt = int(Nt)


class ProblemParam:

  def __init__(self,
               side="right",
               s=0.0,
               k=-0.6,
               alpha=0.0,
               beta=0.0,
               gamma=0.0,
               equation="schrodinger",
               u0=None,
               v0=None,
               f=None,
               g=None,
               h=None):
    self.side = side
    self.s = float(s)
    self.k = float(k)
    self.alpha = float(alpha)
    self.beta = float(beta)
    self.gamma = float(gamma)
    self.equation = equation
    self.u0 = u0 or {"profile": "zero"}
    self.v0 = v0 or {"profile": "zero"}
    self.f = f or {"profile": "zero"}
    self.g = g or {"profile": "zero"}
    self.h = h


class SolverParam:

  def __init__(self,
               tol=1e-8,
               max_iter=50,
               delta=0.1,
               T_local=None,
               construction="auto",
               forcing_orders="default",
               calibration_samples=5):
    self.tol = float(tol)
    self.max_iter = int(max_iter)
    self.delta = float(delta)
    self.T_local = T_local
    self.construction = construction
    self.forcing_orders = forcing_orders
    self.calibration_samples = int(calibration_samples)


class HarnessParam:

  def __init__(self, which="prop-5.1", trials=200, seed=None, size=32, a=None,
               b=None):
    self.which = which
    self.trials = int(trials)
    self.seed = seed
    self.size = int(size)
    self.a = a
    self.b = b


class OutputParam:

  def __init__(self, directory="skdv_output", formats=("csv", "json")):
    self.directory = directory
    self.formats = tuple(formats)


class SweepParam:

  def __init__(self, task="classify", side="right", s_values=None,
               k_values=None):
    self.task = task
    self.side = side
    self.s_values = list(s_values or np.linspace(0, 1, 11))
    self.k_values = list(k_values or np.linspace(-1, 1.5, 11))


BLOCKS = {
    "grid": GridParam,
    "problem": ProblemParam,
    "solver": SolverParam,
    "harness": HarnessParam,
    "output": OutputParam,
    "sweep": SweepParam,
}


class RunConfig:

  def __init__(self, subcommand=None, grid=None, problem=None, solver=None,
               harness=None, output=None, sweep=None):
    self.subcommand = subcommand
    self.grid = grid or GridParam()
    self.problem = problem or ProblemParam()
    self.solver = solver or SolverParam()
    self.harness = harness or HarnessParam()
    self.output = output or OutputParam()
    self.sweep = sweep or SweepParam()

  @property
  def seed(self):
    if self.harness.seed is not None:
      return int(self.harness.seed)
    return int(os.environ.get("SKDV_SEED", 0))


def _accepted(cls):
  return [p for p in inspect.signature(cls).parameters]


def _check_keys(block, allowed, path):
  if not isinstance(block, dict):
    raise ConfigError(f"{path} must be a mapping, got {type(block).__name__}")
  for key in block:
    if key not in allowed:
      raise ConfigError(f"Unknown key {path}.{key}")


def _check_profile(spec, path):
  if spec is None:
    return
  _check_keys(spec, ("profile",) + sum(PROFILE_KEYS.values(), ()), path)
  profile = spec.get("profile")
  if profile not in PROFILE_KEYS:
    raise ConfigError(f"{path}.profile must be one of "
                      f"{sorted(PROFILE_KEYS)}, got {profile}")
  for key in spec:
    if key != "profile" and key not in PROFILE_KEYS[profile]:
      raise ConfigError(f"Unknown key {path}.{key} for profile {profile}")


def _validate_values(config):
  if config.subcommand is not None and config.subcommand not in SUBCOMMANDS:
    raise ConfigError(f"subcommand must be one of {SUBCOMMANDS}")
  if config.problem.side not in ("right", "left"):
    raise ConfigError(f"problem.side must be right or left, got "
                      f"{config.problem.side}")
  if config.problem.equation not in ("schrodinger", "kdv"):
    raise ConfigError(f"problem.equation must be schrodinger or kdv, got "
                      f"{config.problem.equation}")
  for fmt in config.output.formats:
    if fmt not in FORMATS:
      raise ConfigError(f"output.formats entries must be in {FORMATS}, got "
                        f"{fmt}")
  if config.sweep.task not in ("classify", "verify-estimates", "simulate"):
    raise ConfigError(f"sweep.task must be classify, verify-estimates or "
                      f"simulate, got {config.sweep.task}")


def parse_run_config(raw):
  raw = raw or {}
  _check_keys(raw, ("subcommand",) + tuple(BLOCKS), "config")
  blocks = {}
  for name, cls in BLOCKS.items():
    block = raw.get(name) or {}
    _check_keys(block, _accepted(cls), name)
    if name == "problem":
      for key in ("u0", "v0", "f", "g", "h"):
        _check_profile(block.get(key), f"problem.{key}")
    try:
      blocks[name] = cls(**block)
    except (TypeError, ValueError) as e:
      raise ConfigError(f"{name}: {e}")
  config = RunConfig(subcommand=raw.get("subcommand"), **blocks)
  _validate_values(config)
  return config


def load_run_config(path=None, overrides=None):
  """YAML run configuration; overrides are (block.key, value) pairs."""
  raw = {}
  if path is not None:
    if not os.path.isfile(path):
      raise ConfigError(f"Config file {path} does not exist.")
    with open(path, "r") as f:
      raw = yaml.safe_load(f) or {}
  for dotted, value in (overrides or {}).items():
    if value is None:
      continue
    if "." not in dotted:
      raw[dotted] = value
      continue
    block, key = dotted.split(".", 1)
    if not isinstance(raw.get(block), dict):
      raw[block] = {}
    raw[block][key] = value
  return parse_run_config(raw)


def evaluate_profile(spec, points, base_dir="."):
  """Sample a named analytic profile at the given points."""
  points = np.asarray(points, dtype=np.float64)
  spec = spec or {"profile": "zero"}
  profile = spec["profile"]
  if profile == "zero":
    return np.zeros_like(points)
  if profile == "samples":
    path = spec["path"]
    if not os.path.isabs(path):
      path = os.path.join(base_dir, path)
    columns = np.loadtxt(path, ndmin=2)
    values = np.interp(points, columns[:, 0], columns[:, 1], left=0, right=0)
    if columns.shape[1] > 2:
      values = values + 1j * np.interp(
          points, columns[:, 0], columns[:, 2], left=0, right=0)
    return values
  amplitude = spec.get("amplitude", 1.0)
  if profile == "poly-exp":
    r = np.abs(points)
    return amplitude * r**spec.get("power", 3) * np.exp(
        -spec.get("rate", 1.0) * r)
  if profile == "airy-bump":
    z = (points - spec.get("center", 0.0)) / spec.get("scale", 1.0)
    envelope = np.exp(-(z / 4)**2)
    return amplitude * airy_function(np.clip(z, -AIRY_RANGE,
                                             AIRY_RANGE)) * envelope
  z = (points - spec.get("center", 0.0)) / spec.get("width", 1.0)
  if profile == "gaussian":
    return amplitude * np.exp(-z**2)
  return amplitude / np.cosh(z)


def _plain(value):
  if isinstance(value, (tuple, list, np.ndarray)):
    return [_plain(v) for v in value]
  if isinstance(value, np.generic):
    return value.item()
  return value


def dump_run_config(config, path):
  raw = {"subcommand": config.subcommand}
  for name in BLOCKS:
    raw[name] = {
        key: _plain(value) for key, value in vars(getattr(config, name)).items()
    }
  with open(path, "w") as f:
    f.write(yaml.safe_dump(raw, sort_keys=False))


def main():
  parser = argparse.ArgumentParser()
  parser.add_argument("--config", type=str, help="Run config file path.")
  parser.add_argument("--output", type=str, help="Normalized config path.")
  args = parser.parse_args()
  dump_run_config(load_run_config(args.config), args.output)


if __name__ == '__main__':
  main()
