import argparse
import json
import logging
import os
import shutil
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np
import torch

from skdv_lab.bourgain import (INTEGRALS, INVOKED_ESTIMATES, EstimateParams,
                               RegularityPair, alpha_for, classify_region,
                               default_params, integral_bound_check,
                               linear_estimate_constants, verify_estimate)
from skdv_lab.estimates import HypothesisViolation
from skdv_lab.forcing import (SingularConfigurationError, sample_trace,
                              trace_identity_suite)
from skdv_lab.grid import make_grid, restrict_half_line
from skdv_lab.propagators import evolve_times
from skdv_lab.report_template import ReportTemplate
from skdv_lab.solver import (IBVPData, NonContractionError, SolverConfig,
                             ValidationError, flux_identity_check,
                             schrodinger_flux_check, solve, solve_linear)
from skdv_lab.utils.config_helper import (SUBCOMMANDS, ConfigError,
                                          evaluate_profile, load_run_config)

# Relative tolerance of the operator and flux diagnostics.
DIAGNOSTIC_TOL = 1e-2
# Growth of the harness maxima under cutoff doubling counted as bounded.
GROWTH_LIMIT = 2.0
DEMO_REGULARITY = {"right": (0.0, -0.6), "left": (0.3, 0.2)}
ESTIMATE_COLUMNS = ("which", "params", "trials", "max_ratio", "growth", "seed")
FLAGS = {
    "side": ("problem.side", str),
    "s": ("problem.s", float),
    "k": ("problem.k", float),
    "equation": ("problem.equation", str),
    "L": ("grid.L", float),
    "Nx": ("grid.Nx", int),
    "T_max": ("grid.T_max", float),
    "Nt": ("grid.Nt", int),
    "tol": ("solver.tol", float),
    "max_iter": ("solver.max_iter", int),
    "delta": ("solver.delta", float),
    "construction": ("solver.construction", str),
    "which": ("harness.which", str),
    "trials": ("harness.trials", int),
    "seed": ("harness.seed", int),
    "size": ("harness.size", int),
    "a": ("harness.a", float),
    "b": ("harness.b", float),
    "output_dir": ("output.directory", str),
    "task": ("sweep.task", str),
}


class DiagnosticFailure(Exception):
  pass


def _output_dir(config, subcommand, overwrite):
  path = os.path.join(config.output.directory, subcommand)
  if os.path.exists(path) and os.listdir(path):
    assert overwrite, f"Output dir {path} is not empty, pass --overwrite."
    shutil.rmtree(path)
  os.makedirs(path, exist_ok=True)
  return path


def _write(directory, name, text):
  with open(os.path.join(directory, name), "w") as f:
    f.write(text)


def _write_json(directory, name, payload):
  _write(directory, name, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _grid(config):
  g = config.grid
  return make_grid(g.L, g.Nx, g.T_max, g.Nt)


def build_data(config, grid, base_dir="."):
  """IBVPData from the problem block, profiles sampled on the grid."""
  p = config.problem
  x = restrict_half_line(grid.x, p.side, grid)
  sample = lambda spec, points: evaluate_profile(spec, points, base_dir)
  h = None
  if p.side == "left":
    h = sample(p.h or {"profile": "zero"}, grid.t).real
  return IBVPData(p.side,
                  sample(p.u0, x),
                  sample(p.v0, x).real,
                  sample(p.f, grid.t),
                  sample(p.g, grid.t).real,
                  h=h,
                  alpha_c=p.alpha,
                  beta_c=p.beta,
                  gamma_c=p.gamma,
                  reg=RegularityPair(p.s, p.k))


def _params(config):
  p, harness = config.problem, config.harness
  if harness.a is not None and harness.b is not None:
    return EstimateParams(harness.a, harness.b, alpha_for(harness.b))
  region = classify_region(p.side, p.s, p.k)
  assert region.tag != "none", \
      f"(s, k) = ({p.s}, {p.k}) lies in no region on the {p.side} half-line"
  return default_params(region, p.s, p.k)


def _emit_field(directory, name, field, formats):
  _write(directory, f"fields_{name}.csv",
         ReportTemplate.field_csv(field.x, field.t, field.values))
  if "svg" in formats:
    _write(directory, f"fields_{name}.svg",
           ReportTemplate.heatmap(f"|{name}| on the {field.side} half-line",
                                  field.values))


def run_simulate(config, directory, base_dir):
  grid = _grid(config)
  data = build_data(config, grid, base_dir)
  p = config.problem
  region = classify_region(p.side, p.s, p.k)
  params = default_params(region, p.s, p.k) if region.tag != "none" else None
  s = config.solver
  solver_config = SolverConfig(grid,
                               T_local=s.T_local,
                               tol=s.tol,
                               max_iter=s.max_iter,
                               params=params,
                               delta=s.delta,
                               construction=s.construction,
                               forcing_orders=s.forcing_orders,
                               calibration_samples=s.calibration_samples,
                               seed=config.seed)
  u, v, report = solve(data, solver_config)
  n = len(u.t)
  _emit_field(directory, "u", u, config.output.formats)
  _emit_field(directory, "v", v, config.output.formats)
  u_trace = data.boundary_value(u.values)
  traces = {
      "u_re": u_trace.real,
      "u_im": u_trace.imag,
      "v": data.boundary_value(v.values),
      "f_re": data.f[:n].real,
      "f_im": data.f[:n].imag,
      "g": data.g[:n],
  }
  _write(directory, "traces.csv", ReportTemplate.traces_csv(u.t, traces))
  payload = report.to_dict()
  payload["params"] = params.to_dict()
  _write_json(directory, "report.json", payload)
  if "svg" in config.output.formats and report.residual_history:
    _write(directory, "residuals.svg",
           ReportTemplate.line("Picard residuals (log10)",
                               np.arange(report.iterates),
                               np.log10(np.maximum(report.residual_history,
                                                   1e-300))))
  if not report.converged:
    raise DiagnosticFailure(
        f"Picard iteration stopped after {report.iterates} steps without "
        f"reaching tol {s.tol}.")


def run_linear(config, directory, base_dir):
  grid = _grid(config)
  data = build_data(config, grid, base_dir)
  p = config.problem
  field, report = solve_linear(p.side, p.equation, data, grid)
  name = "u" if p.equation == "schrodinger" else "v"
  half = restrict_half_line(field.values, p.side, grid)
  x = restrict_half_line(grid.x, p.side, grid)
  _write(directory, f"fields_{name}.csv",
         ReportTemplate.field_csv(x, grid.t, half))
  if "svg" in config.output.formats:
    _write(directory, f"fields_{name}.svg",
           ReportTemplate.heatmap(f"|{name}| on the {p.side} half-line", half))
  _write_json(directory, "report.json", report.to_dict())


def run_classify(config, directory, base_dir):
  p = config.problem
  region = classify_region(p.side, p.s, p.k)
  print(str(region))
  _write_json(directory, "report.json", {
      "side": p.side,
      "s": p.s,
      "k": p.k,
      "region": region.tag,
      "smallness": region.smallness_required,
      "beta_zero": region.beta_zero_required,
  })


def _integral_exponents(params):
  return {
      "quadratic-2.5": {"b": params.alpha},
      "cubic-2.5": {"b": params.b},
      "gtv-2.7": {"b1": params.b, "b2": params.b},
      "holmer-2.8": {"b": params.b},
  }


def run_verify_operators(config, directory, base_dir):
  grid = _grid(config)
  fine = make_grid(grid.L, 2 * grid.Nx, grid.T_max, 2 * grid.Nt - 1)
  coarse_rows = trace_identity_suite(grid)
  fine_rows = trace_identity_suite(fine)
  rows = []
  failures = []
  for (name, coarse), (_, refined) in zip(coarse_rows, fine_rows):
    rows.append(("trace", name, coarse))
    rows.append(("trace-refined", name, refined))
    if coarse > DIAGNOSTIC_TOL:
      failures.append(name)
  p = config.problem
  params = _params(config)
  constants = linear_estimate_constants(grid, p.s, p.k, params,
                                        seed=config.seed)
  for name in sorted(constants):
    rows.append(("linear-constant", name, constants[name]))
  exponents = _integral_exponents(params)
  for which in INTEGRALS:
    report = integral_bound_check(which, exponents[which], seed=config.seed)
    rows.append(("integral", which, report.sup_ratio))
    if report.flagged:
      failures.append(which)
  _write(directory, "operators.csv",
         ReportTemplate.csv(("suite", "name", "value"), rows))
  if failures:
    raise DiagnosticFailure(f"Operator checks failed: {', '.join(failures)}.")


def _estimate_rows(config, params, which_list):
  p, harness = config.problem, config.harness
  rows = []
  for which in which_list:
    report = verify_estimate(which, p.s, p.k, params, trials=harness.trials,
                             seed=config.seed, size=harness.size,
                             progress=sys.stderr.isatty())
    rows.append(report)
  return rows


def run_verify_estimates(config, directory, base_dir):
  p, harness = config.problem, config.harness
  params = _params(config)
  if harness.which == "all":
    region = classify_region(p.side, p.s, p.k)
    which_list = list(INVOKED_ESTIMATES[region.tag])
  else:
    which_list = [harness.which]
  reports = _estimate_rows(config, params, which_list)
  rows = [[str(r.to_row()[c]) for c in ESTIMATE_COLUMNS] for r in reports]
  _write(directory, "estimates.csv", ReportTemplate.csv(ESTIMATE_COLUMNS,
                                                        rows))
  unbounded = [
      r.which for r in reports
      if not np.isfinite(r.max_ratio) or r.growth > GROWTH_LIMIT
  ]
  if unbounded:
    raise DiagnosticFailure(
        f"Ratios grow beyond {GROWTH_LIMIT}x under cutoff doubling: "
        f"{', '.join(unbounded)}.")


def _demo_data(side, grid, v0=None, h=None):
  s, k = DEMO_REGULARITY[side]
  x = restrict_half_line(grid.x, side, grid)
  zeros_t = np.zeros(grid.Nt)
  return IBVPData(side, np.zeros(len(x)),
                  np.zeros(len(x)) if v0 is None else v0, zeros_t, zeros_t,
                  h=(zeros_t if h is None else h) if side == "left" else None,
                  reg=RegularityPair(s, k))


def run_identities(config, directory, base_dir):
  grid = _grid(config)
  p = config.problem
  u0 = evaluate_profile(p.u0, grid.x, base_dir)
  v0 = evaluate_profile(p.v0, grid.x, base_dir).real
  if not np.any(u0):
    u0 = evaluate_profile({"profile": "gaussian", "width": 1.0}, grid.x)
  if not np.any(v0):
    v0 = evaluate_profile({"profile": "gaussian", "width": 1.0}, grid.x)
  u = evolve_times("schrodinger", u0, grid)
  v = evolve_times("airy", v0, grid).real
  rows = []
  for side in ("right", "left"):
    for name, report in (("kdv-flux", flux_identity_check(v, grid, side)),
                         ("schrodinger-mass",
                          schrodinger_flux_check(u, grid, side))):
      rows.append((f"{name}-{side}", report.lhs, report.rhs, report.defect))

  field, _ = solve_linear("right", "kdv", _demo_data("right", grid), grid)
  vanishing = float(np.max(np.abs(restrict_half_line(field.values, "right",
                                                     grid))))
  rows.append(("right-vanishing", vanishing, 0.0, vanishing))
  h = sample_trace(grid).values
  field, report = solve_linear("left", "kdv", _demo_data("left", grid, h=h),
                               grid)
  size = float(np.max(np.abs(restrict_half_line(field.values, "left", grid))))
  rows.append(("left-nonvanishing", size, report.trace_errors["h"], 0.0))
  _write(directory, "identities.csv",
         ReportTemplate.csv(("identity", "lhs", "rhs", "defect"), rows))
  failures = [r[0] for r in rows[:4] if r[3] > DIAGNOSTIC_TOL]
  if vanishing > 1e-8:
    failures.append("right-vanishing")
  if size <= 10 * DIAGNOSTIC_TOL:
    failures.append("left-nonvanishing")
  if failures:
    raise DiagnosticFailure(f"Identity checks failed: {', '.join(failures)}.")


def _sweep_point(job):
  """One isolated sweep run; returns a row keyed by (s, k)."""
  task, side, s, k, trials, size, seed = job
  region = classify_region(side, s, k)
  row = {"s": s, "k": k, "region": region.tag, "status": "ok", "value": ""}
  if task == "classify" or region.tag == "none":
    return row
  try:
    params = default_params(region, s, k)
    if task == "verify-estimates":
      growth = [
          verify_estimate(which, s, k, params, trials=trials, seed=seed,
                          size=size).growth
          for which in INVOKED_ESTIMATES[region.tag]
      ]
      row["value"] = f"{max(growth):.10e}"
    else:
      grid = make_grid(16.0, 256, 1.0, 257)
      data = _demo_data(side, grid)
      data.reg = RegularityPair(s, k)
      _, _, report = solve(data, SolverConfig(grid, params=params, seed=seed))
      row["value"] = f"{report.contraction_ratio:.10e}"
  except (HypothesisViolation, ValidationError, NonContractionError,
          AssertionError) as e:
    row["status"] = type(e).__name__
    logging.warning(f"Sweep point (s, k) = ({s}, {k}): {e}")
  return row


def _threads():
  return max(1, int(os.environ.get("SKDV_THREADS", os.cpu_count() or 1)))


def _init_worker(threads):
  torch.set_num_threads(threads)


def run_sweep(config, directory, base_dir):
  sweep = config.sweep
  jobs = [(sweep.task, sweep.side, float(s), float(k), config.harness.trials,
           config.harness.size, config.seed)
          for s in sweep.s_values
          for k in sweep.k_values]
  workers = min(_threads(), len(jobs))
  with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker,
                           initargs=(1,)) as executor:
    rows = list(executor.map(_sweep_point, jobs))
  rows.sort(key=lambda r: (r["s"], r["k"]))
  columns = ("s", "k", "region", "status", "value")
  _write(directory, "sweep.csv",
         ReportTemplate.csv(columns, [[
             f"{r['s']:.6f}", f"{r['k']:.6f}", r["region"], r["status"],
             r["value"]
         ] for r in rows]))


RUNNERS = {
    "simulate": run_simulate,
    "linear": run_linear,
    "classify": run_classify,
    "verify-operators": run_verify_operators,
    "verify-estimates": run_verify_estimates,
    "identities": run_identities,
    "sweep": run_sweep,
}


def build_parser():
  common = argparse.ArgumentParser(add_help=False)
  common.add_argument("config",
                      nargs="?",
                      default=None,
                      type=str,
                      help="YAML run config file path.")
  common.add_argument("--log_level",
                      default="INFO",
                      type=str,
                      help="Logging level.")
  common.add_argument("--overwrite",
                      default=False,
                      action="store_true",
                      help="Should overwrite the output dir.")
  for flag, (dotted, kind) in FLAGS.items():
    common.add_argument(f"--{flag}",
                        default=None,
                        type=kind,
                        help=f"Overrides {dotted}.")
  parser = argparse.ArgumentParser(prog="skdv-lab")
  subparsers = parser.add_subparsers(dest="subcommand", required=True)
  for name in SUBCOMMANDS:
    subparsers.add_parser(name, parents=[common])
  return parser


def dispatch(argv):
  """Run one subcommand; returns the process exit code."""
  args = build_parser().parse_args(argv)
  logging.basicConfig(level=getattr(logging, args.log_level.upper(),
                                    logging.INFO),
                      format="%(levelname)s %(message)s")
  overrides = {"subcommand": args.subcommand}
  for flag, (dotted, _) in FLAGS.items():
    overrides[dotted] = getattr(args, flag)
  base_dir = os.path.dirname(os.path.abspath(args.config)) \
      if args.config else os.getcwd()
  try:
    config = load_run_config(args.config, overrides)
    directory = _output_dir(config, args.subcommand, args.overwrite)
    RUNNERS[args.subcommand](config, directory, base_dir)
  except (ValidationError, ConfigError, HypothesisViolation,
          SingularConfigurationError, AssertionError) as e:
    logging.error(f"{type(e).__name__}: {e}")
    return 1
  except NonContractionError as e:
    logging.error(f"Non-contraction dominated by {e.term}: {e}")
    return 2
  except DiagnosticFailure as e:
    logging.error(str(e))
    return 2
  logging.info(f"{args.subcommand} finished.")
  return 0


def main():
  sys.exit(dispatch(sys.argv[1:]))


if __name__ == '__main__':
  main()
