import io
import json
import math

import numpy as np
import pytest

from joycekit.cli import (
    SuiteConfig,
    load_config,
    main,
    parse_complex,
    run_suite,
    strip_timing,
    to_plain,
)
from joycekit.errors import ConfigError


def run(argv):
    out = io.StringIO()
    code = main(argv, out=out)
    return code, out.getvalue()


def records(text):
    return [json.loads(line) for line in text.splitlines() if line.strip()]


def test_parse_complex():
    assert parse_complex("inf") == math.inf
    assert parse_complex("-0.5") == -0.5
    assert parse_complex("0.3-0.2j") == 0.3 - 0.2j
    assert parse_complex("2i") == 2j
    with pytest.raises(ConfigError):
        parse_complex("abc")


def test_to_plain_formats_numbers():
    assert to_plain(1 / 3) == 0.333333333333333
    assert to_plain(1 + 2j) == [1.0, 2.0]
    assert to_plain(np.array([1j])) == [[0.0, 1.0]]
    assert to_plain(math.inf) == "inf"


def test_suite_flat_passes(tmp_path):
    out_file = tmp_path / "report.json"
    code, text = run(["suite", "--model", "flat", "--out", str(out_file)])
    assert code == 0
    lines = records(text)
    assert lines[-1] == {"model": "flat", "summary": "pass"}
    assert all(r["anchor"] for r in lines[:-1])
    doc = json.loads(out_file.read_text())
    assert doc["passed"] and doc["config"]["model"] == "flat"
    assert all("wall_clock" in c for c in doc["checks"])


def test_suite_counterexample_fails():
    code, text = run(["suite", "--model", "synthetic-counterexample", "--format", "text"])
    assert code == 1
    assert "FAIL heavenly" in text and "SUMMARY FAIL" in text


def test_suite_a2_deterministic():
    cfg = SuiteConfig(model="a2", seed=42, samples=3)
    a = strip_timing(run_suite(cfg))
    b = strip_timing(run_suite(SuiteConfig(model="a2", seed=42, samples=3)))
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
    assert a["passed"]


def test_suite_tolerance_flag_changes_outcome():
    code, text = run(["suite", "--model", "a1", "--samples", "3", "--tol-parallel", "1e-30"])
    assert code == 1
    rec = {r["name"]: r for r in records(text)[:-1]}
    assert not rec["parallel"]["passed"] and rec["parallel"]["tolerance_used"] == 1e-30


def test_config_file(tmp_path):
    cfg_path = tmp_path / "suite.cfg"
    cfg_path.write_text("[suite]\nmodel = a1\nsamples = 2\nseed = 9\neps = 1, 1j\ntol.parallel = 1e-5\n")
    cfg = load_config(str(cfg_path))
    assert (cfg.model, cfg.samples, cfg.seed, cfg.eps) == ("a1", 2, 9, (1.0, 1j))
    assert cfg.tolerances["parallel"] == 1e-5
    code, _ = run(["suite", "--config", str(cfg_path)])
    assert code == 0


@pytest.mark.parametrize("body", ["[suite]\nmodel = nope\n", "[suite]\ncolour = red\n", "model = a1\n",
                                  "[suite]\nsamples = x\n", "[suite]\ntol.unknown = 1\n"])
def test_bad_config_exit_two(tmp_path, body):
    path = tmp_path / "bad.cfg"
    path.write_text(body)
    code, text = run(["suite", "--config", str(path)])
    assert code == 2
    assert records(text)[0]["error"] == "ConfigError"


def test_bad_model_flag_exit_two():
    assert run(["suite", "--model", "nope"])[0] == 2


def test_periods_record():
    code, text = run(["periods", "--a", "-1", "--b", "0"])
    assert code == 0
    rec = records(text)[0]
    assert rec["omega"][0] == [2.62205755429212, 0.0] or abs(rec["omega"][0][0] - 2.62205755429212) < 1e-13
    assert rec["legendre_residual"] < 1e-9


def test_periods_degenerate_error_record():
    code, text = run(["periods", "--a", "-3", "--b", "2"])
    assert code == 1
    assert records(text)[0]["error"] == "DegenerateCurve"


def test_monodromy_loop_around_q():
    code, text = run(["monodromy", "--loop-around", "q"])
    assert code == 0
    M = np.array(records(text)[0]["matrix"])
    M = M[..., 0] + 1j * M[..., 1]
    assert np.max(np.abs(M + np.eye(2))) < 1e-6


def test_theta_and_twistor_commands():
    code, text = run(["theta", "--a", "-1", "--b", "0", "--q", "2", "--r", "0"])
    assert code == 0 and abs(records(text)[0]["theta_a"][0] + 0.584082841677152) < 1e-12
    code, text = run(["twistor-line", "--model", "a1", "--eps", "2j", "--format", "text"])
    assert code == 0 and "max_abs" in text


def test_hamiltonian_command_flat():
    code, text = run(["hamiltonian", "--model", "flat", "--eps", "2"])
    assert code == 0
    assert records(text)[0]["flow_mismatch"] < 1e-8


def test_hamiltonian_command_rejects_model():
    code, text = run(["hamiltonian", "--model", "a1"])
    assert code == 2
