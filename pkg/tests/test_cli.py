import csv
import io
import json
import subprocess
import sys
from fractions import Fraction as F

import pytest

from leibniz.cli import ConfigError, load_config, main, parse_rational

X2 = {"dist": {"kind": "f_dmu", "f": "x^2"}, "epsilon": 1e-4}


def run(capsys, tmp_path, cfg, *argv):
    path = tmp_path / "cfg.json"
    path.write_text(cfg if isinstance(cfg, str) else json.dumps(cfg))
    code = main([*argv, "--config", str(path)])
    out, err = capsys.readouterr()
    return code, out, err


def test_integrate_certifies(capsys, tmp_path):
    code, out, _ = run(capsys, tmp_path, X2, "integrate")
    assert code == 0
    doc = json.loads(out)
    assert abs(doc["value"] - 1 / 3) <= 1e-4
    assert list(doc)[:4] == ["value", "epsilon", "certifiedDepth", "mode"]


def test_floats_use_17_significant_digits(capsys, tmp_path):
    _, out, _ = run(capsys, tmp_path, X2, "integrate")
    low = json.loads(out)["lowerTotal"]
    assert f'"lowerTotal": {format(low, ".17g")}' in out
    for line in out.splitlines():
        token = line.strip().rstrip(",").split(": ")[-1]
        if token[:1].isdigit() and "." in token:
            digits = token.split("e")[0].replace(".", "").lstrip("0")
            assert len(digits) <= 17 and float(token) == float(format(float(token), ".17g"))


def test_byte_identical_across_processes(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"dist": {"kind": "f_dmu", "f": "sin(x)"}, "epsilon": 1e-6}))
    outs = [subprocess.run([sys.executable, "-m", "leibniz", "integrate", "--config", str(path)],
                           capture_output=True, check=True).stdout for _ in range(2)]
    assert outs[0] == outs[1] and outs[0]


def test_not_certified_exit_code(capsys, tmp_path):
    code, out, _ = run(capsys, tmp_path, X2, "integrate", "--depth", "3")
    assert code == 2 and json.loads(out)["certified"] is False


@pytest.mark.parametrize("cfg,needle", [
    ("{not json", "invalid JSON"),
    ({"dist": {"kind": "bogus"}}, "$.dist.kind"),
    ({"dist": {"kind": "f_dmu", "f": "x^2"}, "maxDepth": 99}, "$.maxDepth"),
    ({"dist": {"kind": "f_dmu", "f": "log("}}, "position 4"),
    ({"dist": {"kind": "f_dmu"}}, "needs 'f'"),
    ({"domain": [1, 0], "dist": {"kind": "differential"}}, "domain"),
])
def test_usage_errors_exit_1(capsys, tmp_path, cfg, needle):
    code, out, err = run(capsys, tmp_path, cfg, "integrate")
    assert code == 1 and out == ""
    assert needle in err


def test_argparse_errors_exit_1(capsys):
    assert main(["integrate", "--format", "xml"]) == 1
    assert main(["frobnicate"]) == 1
    assert main(["integrate", "--config", "/nonexistent/cfg.json"]) == 1
    capsys.readouterr()


def test_csv_and_out_file(capsys, tmp_path):
    target = tmp_path / "levels.csv"
    code, out, _ = run(capsys, tmp_path, X2, "integrate", "--format", "csv", "--out", str(target))
    assert code == 0 and out == ""
    rows = list(csv.reader(io.StringIO(target.read_text())))
    assert rows[0] == ["level", "lowerSum", "upperSum", "gap"]
    assert float(rows[-1][3]) <= 2e-4


def test_table(capsys, tmp_path):
    code, out, _ = run(capsys, tmp_path, X2, "table", "--depth", "4")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0 and len(rows) == 6
    assert rows[1] == ["0", "0.0", "1.0", "1.0"]
    assert rows[2] == ["1", "0.125", "0.625", "0.5"]
    code, out, _ = run(capsys, tmp_path, X2, "table", "--depth", "1", "--format", "json")
    assert json.loads(out)[1] == {"level": 1, "lowerSum": 0.125, "upperSum": 0.625, "gap": 0.5}


def test_witness(capsys, tmp_path):
    cfg = {"mu1": {"kind": "length"},
           "mu2": {"kind": "sum", "terms": [{"kind": "length"}, {"kind": "atom", "x0": "1/3"}]},
           "depth": 20}
    code, out, _ = run(capsys, tmp_path, cfg, "witness")
    chain = json.loads(out)
    assert code == 0 and len(chain) == 21
    assert all(F(c["lo"]) <= F(1, 3) <= F(c["hi"]) for c in chain)
    code, out, _ = run(capsys, tmp_path, {"mu1": {"kind": "length"}, "mu2": {"kind": "length"}},
                       "witness")
    assert code == 1


def test_verify(capsys, tmp_path):
    code, out, _ = run(capsys, tmp_path, {"f": "x^3", "fprime": "3*x^2"}, "verify", "newton-leibniz")
    assert code == 0 and out.rstrip().endswith("PASS")
    code, out, _ = run(capsys, tmp_path, {"f": "x^3", "fprime": "x"}, "verify", "newton-leibniz",
                       "--format", "json")
    assert code == 2 and json.loads(out)["passed"] is False


def test_config_numbers_are_exact():
    cfg = load_config('{"domain": [0.1, "pi/2"], "epsilon": 1e-3}')
    assert parse_rational(cfg["domain"][0]) == F(1, 10)
    assert parse_rational("3/7") == F(3, 7)
    assert parse_rational(" 0.25 ") == F(1, 4)
    with pytest.raises(ConfigError):
        parse_rational(True)
