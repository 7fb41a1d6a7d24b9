import io
import json

import pytest
from numpy.testing import assert_allclose

from tronquee.asymptotics import predict_poles
from tronquee.cli import RunConfig, UsageError, main, run, selftest_checks


def _json_out(capsys, argv):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_predict_matches_library(capsys):
    code, out, _ = _json_out(capsys, ["predict", "--case", "PIII_ii", "--A", "1", "--C", "1", "--side", "upper",
                                      "--n", "1..20"])
    assert code == 0
    rep = json.loads(out)
    got = [complex(*p["w_pred"]) for p in rep["w_pred"]]
    # PIII_ii with beta = 0: beta1 = 1/2, single singularity of F0 at xi = 6
    ref = [p.w_pred for p in predict_poles(0.5, 1, 6, "upper", range(1, 21))]
    assert_allclose(got, ref, rtol=1e-14)


def test_predict_c_zero_reports_no_poles(capsys):
    code, out, _ = _json_out(capsys, ["predict", "--C", "0"])
    assert code == 0
    assert json.loads(out)["w_pred"] == []


def test_empty_range_is_usage_error(capsys):
    code, out, err = _json_out(capsys, ["predict", "--C", "1", "--n", ","])
    assert code == 2 and out == ""
    msg = json.loads(err)
    assert msg["error"] == "usage" and "empty" in msg["message"]


def test_bad_inputs(capsys):
    assert main(["sum", "--C", "1"]) == 2
    assert main(["predict", "--C", "not-a-number"]) == 2
    assert main(["nonsense"]) == 2
    # A that violates the branch constraint is a usage error
    assert main(["predict", "--case", "PIII_ii", "--A", "2", "--C", "1"]) == 2
    capsys.readouterr()


def test_reruns_are_byte_identical(tmp_path):
    outs = []
    for k in range(2):
        d = tmp_path / str(k)
        assert main(["sum", "--case", "PIV_2", "--alpha", "-0.75", "--C", "0.2", "--w", "20-3i", "--w", "30",
                     "--out", str(d)]) == 0
        outs.append((d / "sum.json").read_bytes())
    assert outs[0] == outs[1]


def test_sum_c_zero_side_swap(capsys):
    vals = {}
    for side in ("upper", "lower"):
        code, out, _ = _json_out(capsys, ["sum", "--case", "PIV_2", "--alpha", "-0.75", "--C", "0", "--side", side,
                                          "--w", "25"])
        assert code == 0
        row = json.loads(out)["values"][0]
        vals[side] = (complex(*row["h"]), row["side_gap_bound"])
    gap = abs(vals["upper"][0] - vals["lower"][0])
    assert gap < 10 * vals["upper"][1]


def test_csv_output(capsys):
    code, out, _ = _json_out(capsys, ["predict", "--C", "1", "--n", "1,2,3", "--format", "csv"])
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].startswith("n,") and len(lines) == 4


def test_config_roundtrip(tmp_path):
    cfg = RunConfig(case="PIV_1", alpha=0.3, beta=0.2, C=1 - 2j, w=[20 - 1j], n=[1, 4])
    again = RunConfig.from_json(json.loads(json.dumps(cfg.to_json())))
    assert again == cfg
    with pytest.raises(UsageError):
        RunConfig.from_json({"bogus": 1})


def test_config_file_overrides_flags(tmp_path, capsys):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"C": [1, 0], "n": [3]}))
    code, out, _ = _json_out(capsys, ["predict", "--C", "5", "--config", str(p)])
    assert code == 0
    rep = json.loads(out)
    assert [r["n"] for r in rep["w_pred"]] == [3]
    assert rep["C"] == [1, 0]


def test_integrate_small_path():
    buf = io.StringIO()
    cfg = RunConfig(case="PIII_ii", beta=0.7, A=1, C=0.2, waypoints=[30 - 5j, 20 - 5j])
    assert run("integrate", cfg, stdout=buf) == 0
    rep = json.loads(buf.getvalue())
    assert not rep["blowup"] and rep["end"]["w"] == [20, -5]


def test_selftest(capsys):
    checks = selftest_checks()
    assert all(ok for _, ok, _ in checks)
    assert main(["selftest"]) == 0
    assert "PASS" in capsys.readouterr().err
