import importlib
import io
import json
import math
import os

import numpy as np
import pytest

from softcov import cli
from softcov.channel import binary_erasure, binary_symmetric, dump_channel, noiseless
from softcov.checks import CHECKS
from softcov.errors import NonPositiveMean
from softcov.fit import ExperimentConfig, default_trials, fit_scaling


def test_fit_recovers_coefficients():
    n = np.arange(4, 13)
    means = np.exp(1.0 - 0.5 * n - 0.5 * np.log(n))
    f = fit_scaling(n, means, -0.5, -0.5, "kl")
    np.testing.assert_allclose(f.coefficients, [1.0, -0.5, -0.5], atol=1e-10)
    assert f.residual_rms < 1e-10
    assert f.c1_relative_error == pytest.approx(0.0, abs=1e-10)
    assert f.condition_number > 1


def test_fit_errors():
    with pytest.raises(NonPositiveMean):
        fit_scaling([1, 2, 3, 4], [1.0, 0.5, 0.0, 0.1])
    with pytest.raises(ValueError):
        fit_scaling([1, 2, 3], [1.0, 0.5, 0.2])


def test_default_trials_and_config(tmp_path):
    assert default_trials(4) == 1250 and default_trials(12) == 200
    ch = binary_symmetric(0.1)
    with pytest.raises(ValueError):
        ExperimentConfig("x", 0.55, (4, 5), 50, "fixed", 0, ".").validate(ch)


def _write(tmp_path, name, ch):
    p = tmp_path / name
    dump_channel(ch, p)
    return str(p)


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.main(argv, out, err)
    return code, out.getvalue(), err.getvalue()


def test_cli_exponents_identity(tmp_path):
    path = _write(tmp_path, "id.json", noiseless(2))
    code, out, _ = run(["exponents", "--channel", path, "--rate", "1.0"])
    assert code == 0
    d = json.loads(out)
    assert d["tau_star"] == 1.0 and d["rho_star"] == 0.5 and d["singular"] is True
    assert d["kl_exponent"] == pytest.approx(1 - math.log(2), abs=1e-12)
    assert d["tv_exponent"] == pytest.approx(0.5 * (1 - math.log(2)), abs=1e-12)
    assert d["alpha_mutual_information"]["2"] == pytest.approx(math.log(2), abs=1e-12)


def test_cli_errors(tmp_path):
    path = _write(tmp_path, "bsc.json", binary_symmetric(0.11))
    code, _, err = run(["exponents", "--channel", path, "--rate", "0.1"])
    assert code == 2 and "I(X;Y)" in err
    bad = tmp_path / "bad.json"
    bad.write_text('{\n "input_dist": [0.5, 0.5],\n "transition": [[0.9, 0.1],\n       [0.2, 0.7]]\n}\n')
    code, _, err = run(["exponents", "--channel", str(bad), "--rate", "1"])
    assert code == 2 and "bad.json:4" in err
    code, _, _ = run(["simulate", "--channel", path, "--rate", "0.6", "--n", "2,3", "--trials", "10"])
    assert code == 2  # fewer than 100 trials
    code, _, _ = run(["nonsense"])
    assert code == 2


def test_cli_simulate_deterministic(tmp_path):
    path = _write(tmp_path, "bsc.json", binary_symmetric(0.11))
    outs = []
    for k in range(2):
        d = tmp_path / f"run{k}"
        code, _, _ = run(["simulate", "--channel", path, "--rate", "0.6", "--n", "2-4",
                          "--trials", "150", "--seed", "5", "--out", str(d)])
        assert code == 0
        outs.append({f: (d / f).read_bytes() for f in sorted(os.listdir(d))})
    assert outs[0] == outs[1]
    assert set(outs[0]) == {"summary.csv", "trials_n2.csv", "trials_n3.csv", "trials_n4.csv"}
    header = outs[0]["summary.csv"].decode().splitlines()[0]
    assert header == "n,mean_kl,stderr_kl,mean_tv,stderr_tv,M,mode,effective_rate"


def test_cli_scaling(tmp_path):
    path = _write(tmp_path, "bsc.json", binary_symmetric(0.11))
    code, out, _ = run(["scaling", "--channel", path, "--rate", "0.55", "--n", "3-6",
                        "--trials", "200", "--out", str(tmp_path), "--target", "tv"])
    assert code == 0
    d = json.loads(out)
    assert d["target"] == "tv" and "c1" in d and "condition_number" in d
    assert (tmp_path / "scaling_tv.csv").exists()


@pytest.mark.parametrize("ch", [noiseless(2), binary_erasure(0.5)], ids=["identity", "erasure"])
def test_cli_verify_passes(tmp_path, ch):
    path = _write(tmp_path, "c.json", ch)
    code, out, _ = run(["verify", "--channel", path])
    assert code == 0, out
    assert out.strip().splitlines()[-1].startswith("PASS")


def test_cli_verify_bad_file(tmp_path):
    p = tmp_path / "c.json"
    p.write_text('{"input_dist": [1.0], "transition": [[0.5, 0.6]]}')
    assert run(["verify", "--channel", str(p)])[0] == 2


def test_check_registry_resolves():
    for name, (op, fn) in CHECKS.items():
        mod, attr = op.split(".")
        assert callable(getattr(importlib.import_module(f"softcov.{mod}"), attr)), name
        assert callable(fn)
