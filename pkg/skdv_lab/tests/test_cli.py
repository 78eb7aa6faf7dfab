import json
import os
from tempfile import TemporaryDirectory

import pytest
import yaml

from skdv_lab.cli import dispatch

SMALL_GRID = ["--L", "8", "--Nx", "64", "--Nt", "65"]


def _read(path):
  with open(path, "r") as f:
    return f.read()


class TestClassify:

  def test_region_d(self, capsys):
    with TemporaryDirectory() as tmpdir:
      code = dispatch(["classify", "--side", "right", "--s", "0", "--k",
                       "-0.7", "--output_dir", tmpdir])
      assert code == 0
      assert "D, smallness: no, beta-zero: no" in capsys.readouterr().out
      report = json.loads(_read(os.path.join(tmpdir, "classify",
                                             "report.json")))
      assert report["region"] == "D"


class TestSimulate:

  def test_zero_data(self):
    with TemporaryDirectory() as tmpdir:
      code = dispatch(["simulate", "--output_dir", tmpdir] + SMALL_GRID)
      assert code == 0
      out = os.path.join(tmpdir, "simulate")
      for name in ("fields_u.csv", "fields_v.csv", "traces.csv",
                   "report.json"):
        assert os.path.isfile(os.path.join(out, name))
      report = json.loads(_read(os.path.join(out, "report.json")))
      assert report["converged"] and report["iterates"] <= 2
      rows = _read(os.path.join(out, "fields_v.csv")).splitlines()
      assert rows[0] == "x,t,re,im"
      assert all(float(r.split(",")[2]) == 0 for r in rows[1:])

  def test_existing_output_needs_overwrite(self):
    with TemporaryDirectory() as tmpdir:
      args = ["classify", "--output_dir", tmpdir]
      assert dispatch(args) == 0
      assert dispatch(args) == 1
      assert dispatch(args + ["--overwrite"]) == 0


class TestErrors:

  def test_unknown_key(self):
    with TemporaryDirectory() as tmpdir:
      path = os.path.join(tmpdir, "run.yaml")
      with open(path, "w") as f:
        f.write(yaml.dump({"solver": {"tolerance": 1e-6}}))
      assert dispatch(["simulate", path, "--output_dir", tmpdir]) == 1

  def test_region_none(self):
    with TemporaryDirectory() as tmpdir:
      code = dispatch(["simulate", "--s", "1.5", "--k", "0", "--output_dir",
                       tmpdir] + SMALL_GRID)
      assert code == 1

  def test_violated_hypothesis(self):
    with TemporaryDirectory() as tmpdir:
      code = dispatch(["verify-estimates", "--which", "trilinear-5.1", "--a",
                       "0.2", "--b", "0.3", "--trials", "1", "--output_dir",
                       tmpdir])
      assert code == 1


class TestVerifyEstimates:

  def test_deterministic(self):
    outputs = []
    for _ in range(2):
      with TemporaryDirectory() as tmpdir:
        code = dispatch(["verify-estimates", "--side", "right", "--s", "0",
                         "--k", "-0.6", "--which", "prop-5.1", "--trials",
                         "200", "--size", "8", "--seed", "7", "--output_dir",
                         tmpdir])
        assert code in (0, 2)
        outputs.append(
            _read(os.path.join(tmpdir, "verify-estimates", "estimates.csv")))
    assert outputs[0] == outputs[1]
    assert outputs[0].splitlines()[0] == \
        "which,params,trials,max_ratio,growth,seed"
    assert outputs[0].splitlines()[1].startswith("prop-5.1,")

  def test_descriptive_alias(self):
    with TemporaryDirectory() as tmpdir:
      code = dispatch(["verify-estimates", "--s", "0", "--k", "-0.6",
                       "--which", "coupling-x", "--trials", "2", "--size",
                       "8", "--output_dir", tmpdir])
      assert code in (0, 2)
      rows = _read(os.path.join(tmpdir, "verify-estimates",
                                "estimates.csv")).splitlines()
      assert rows[1].startswith("prop-5.1,")


class TestSweep:

  def test_classify_sweep(self, monkeypatch):
    monkeypatch.setenv("SKDV_THREADS", "2")
    with TemporaryDirectory() as tmpdir:
      path = os.path.join(tmpdir, "run.yaml")
      with open(path, "w") as f:
        f.write(
            yaml.dump({
                "sweep": {
                    "task": "classify",
                    "side": "right",
                    "s_values": [0.0, 0.75],
                    "k_values": [-0.6, 0.0]
                }
            }))
      assert dispatch(["sweep", path, "--output_dir", tmpdir]) == 0
      rows = _read(os.path.join(tmpdir, "sweep", "sweep.csv")).splitlines()
      assert rows[0] == "s,k,region,status,value"
      assert rows[1].startswith("0.000000,-0.600000,D,ok")
      assert len(rows) == 5


if __name__ == '__main__':
  pytest.main(['-s', 'test_cli.py'])
