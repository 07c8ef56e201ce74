import json

import numpy as np
import pytest

from mlkcalc.cli import format_csv, load_config, main
from mlkcalc.errors import ValidationError
from mlkcalc.specialfn import gamma


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def _csv(text):
    lines = text.strip().splitlines()
    return lines[0], np.array([[float(x) for x in ln.split(",")] for ln in lines[1:]])


def test_verify_inverse_suite(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "inverse", "--alpha", "0.4", "--f", "t")
    assert code == 0
    rep = json.loads(out)
    assert rep["passed"]
    assert len(rep["checks"]) == 6
    assert all(c["value"] < 1e-8 for c in rep["checks"])


def test_ab_int_closed_form(capsys):
    code, out, _ = run(capsys, "ab-int", "--alpha", "0.6667", "--f", "t")
    assert code == 0
    head, rows = _csv(out)
    assert head == "t,value"
    a = 0.6667
    t = rows[:, 0]
    np.testing.assert_allclose(rows[:, 1], (1 - a) * t + a / gamma(2 + a) * t ** (1 + a), rtol=1e-14, atol=1e-16)


def test_ab_deriv_series_has_tail_column(capsys):
    code, out, _ = run(capsys, "ab-deriv", "--alpha", "0.5", "--f", "t^2", "--n", "5")
    assert code == 0
    head, rows = _csv(out)
    assert head == "t,value,tail_estimate"
    assert np.all(rows[:, 2] < 1e-14)
    code, out2, _ = run(capsys, "ab-deriv", "--alpha", "0.5", "--f", "t^2", "--n", "5", "--path", "ml")
    np.testing.assert_allclose(_csv(out2)[1][:, 1], rows[:, 1], atol=1e-13)


def test_csv_is_round_trip_exact():
    x = 0.1 + 0.2
    text = format_csv([x], [np.pi], [1e-300])
    vals = [float(v) for v in text.splitlines()[1].split(",")]
    assert vals == [x, np.pi, 1e-300]


def test_malformed_json_exits_2_without_output(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text('{"command": "ode", ')
    out = tmp_path / "o.csv"
    code, _, err = run(capsys, "run", str(cfg))
    assert code == 2
    assert "malformed JSON" in err
    assert not out.exists()


def test_schema_violation_exits_2(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    out = tmp_path / "o.csv"
    cfg.write_text(json.dumps({"command": "ab-int", "alpha": 1.5, "f": "t", "out": str(out)}))
    code, _, err = run(capsys, "run", str(cfg))
    assert code == 2 and "alpha" in err
    assert not out.exists()
    with pytest.raises(ValidationError):
        load_config(json.dumps({"command": "ab-int", "colour": "red"}))


def test_ode_config_writes_csv(tmp_path, capsys):
    out = tmp_path / "o.csv"
    cfg = {
        "command": "ode",
        "spec": {"family": "ODE5", "alpha": 0.5, "A": -1, "g": {"kind": "exp", "rate": 1}, "f0": 1,
                 "grid": {"a": 0, "b": 2, "n": 513}},
        "out": str(out),
    }
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg))
    code, stdout, _ = run(capsys, "run", str(path))
    assert code == 0 and stdout == ""
    head, rows = _csv(out.read_text())
    assert rows.shape == (513, 2)
    assert rows[0, 1] == pytest.approx(1.0)


def test_svg_output(tmp_path, capsys):
    out = tmp_path / "p.svg"
    spec = json.dumps({"family": "ODE5", "alpha": 0.5, "A": -1, "g": "e^t", "f0": 1})
    code, _, _ = run(capsys, "ode", "--spec", spec, "--format", "svg", "--out", str(out))
    assert code == 0
    text = out.read_text()
    assert text.startswith("<svg") and len(text.encode()) < 200_000


def test_numerical_failure_exits_3(capsys):
    spec = json.dumps({"type": "riccati", "P": -1, "Q": 1, "alpha": 0.5})
    code, out, err = run(capsys, "ode", "--spec", spec)
    assert code == 3
    assert out == "" and "DenominatorZero" in err


def test_validation_exit_codes(capsys):
    assert run(capsys, "ab-deriv", "--alpha", "1.5", "--f", "t")[0] == 2
    assert run(capsys, "ab-deriv", "--alpha", "0.5", "--f", "sin(t)")[0] == 2
    assert run(capsys, "nonsense")[0] == 2
    assert run(capsys, "rl", "--f", "t", "--mu", "0.5", "--norm", "weird")[0] == 2


@pytest.mark.parametrize(
    "argv",
    [
        ["mlf", "--alpha", "0.5", "--n", "5"],
        ["rl", "--f", "t^2", "--mu", "0.5", "--op", "derivative", "--n", "5"],
        ["rl", "--f", "e^t", "--mu", "0.5", "--op", "caputo", "--n", "33"],
        ["rule", "product", "--alpha", "0.3", "--a", "0.1", "--n", "5"],
        ["rule", "chain", "--alpha", "0.3", "--n", "5", "--N", "16"],
        ["semigroup", "defect", "--n", "5"],
        ["semigroup", "residual", "--n", "5"],
        ["semigroup", "solution", "--a", "0", "--b", "0.2", "--n", "5"],
        ["ode", "--spec", '{"type": "nonlinear", "alpha": 0.5, "A": 1, "g": {"kind": "powersum", "terms": [[-1, 1]]}, "f0": 1}', "--n", "65"],
        ["ode", "--spec", '{"type": "sequential", "family": "SEQ3", "alpha": [0.5, 0.5], "A": [1, -1], "g": "t"}', "--n", "65"],
    ],
)
def test_subcommands_run(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    head, rows = _csv(out)
    assert head.startswith("t,value")
    assert np.all(np.isfinite(rows[1:, 1]))


def test_mlf_values(capsys):
    code, out, _ = run(capsys, "mlf", "--alpha", "1", "--beta", "1", "--c", "1", "--n", "3")
    # alpha = 1 is outside the AB order range but fine for the ML table
    assert code == 0
    rows = _csv(out)[1]
    np.testing.assert_allclose(rows[:, 1], np.exp(rows[:, 0]), rtol=1e-14)


def test_verify_is_deterministic(capsys):
    a = run(capsys, "verify", "--suite", "riccati")[1]
    b = run(capsys, "verify", "--suite", "riccati")[1]
    assert a == b and json.loads(a)["passed"]
