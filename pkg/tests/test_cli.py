"""End-to-end CLI runs on tiny problems, exit codes, artifact checks."""

import json

import numpy as np
import pytest

from tubalmap import read_mask, read_tensor
from tubalmap.cli import main


def run_synth(outdir, *extra):
    args = ["synth", "--dims", "12x12x6", "--rank", "2", "--range", "0:50",
            "--seed", "7", "--out", str(outdir)]
    assert main(args + list(extra)) == 0


def test_synth_clean(tmp_path):
    run_synth(tmp_path)
    t, header = read_tensor(tmp_path / "truth.tns")
    assert t.shape == (12, 12, 6)
    assert t.min() >= -1e-9 and t.max() <= 50.0 + 1e-9
    assert "seed=7" in header["seed-provenance"]
    meta = json.loads((tmp_path / "meta.json").read_text())
    assert meta["rank_measured"] in (2, 3)
    assert meta["anomaly"] is None
    assert not (tmp_path / "corrupted.tns").exists()


def test_synth_with_anomalies_additive(tmp_path):
    run_synth(tmp_path, "--anomaly-ratio", "0.1", "--anomaly-mag", "40")
    truth, _ = read_tensor(tmp_path / "truth.tns")
    anomaly, _ = read_tensor(tmp_path / "anomaly.tns")
    corrupted, _ = read_tensor(tmp_path / "corrupted.tns")
    np.testing.assert_array_equal(corrupted, truth + anomaly)
    meta = json.loads((tmp_path / "meta.json").read_text())
    assert meta["anomaly"]["ratio"] == 0.1


def test_synth_determinism(tmp_path):
    d1, d2 = tmp_path / "a", tmp_path / "b"
    run_synth(d1)
    run_synth(d2)
    assert (d1 / "truth.tns").read_bytes() == (d2 / "truth.tns").read_bytes()


def test_sample_writes_mask(tmp_path):
    assert main(["sample", "--dims", "10x10x4", "--rate", "0.3", "--seed", "4",
                 "--out", str(tmp_path)]) == 0
    mask = read_mask(tmp_path / "mask.json")
    assert mask.flags.shape == (10, 10)
    assert mask.count == 30


def test_recover_end_to_end(tmp_path, capsys):
    run_synth(tmp_path)
    assert main(["sample", "--dims", "12x12x6", "--rate", "0.5", "--seed", "1",
                 "--out", str(tmp_path)]) == 0
    out = tmp_path / "rec"
    assert main(["recover", "--input", str(tmp_path / "truth.tns"),
                 "--mask", str(tmp_path / "mask.json"),
                 "--truth", str(tmp_path / "truth.tns"),
                 "--out", str(out)]) == 0
    stdout = capsys.readouterr().out
    assert "NSE:" in stdout
    x_hat, _ = read_tensor(out / "x_hat.tns")
    assert x_hat.shape == (12, 12, 6)
    assert (out / "y_hat.tns").exists()
    assert (out / "convergence.png").stat().st_size > 0
    report = json.loads((out / "recover.json").read_text())
    assert report["method"] == "tcwa"
    assert report["nse"] < 0.5
    assert report["iterations"] >= 1


def test_recover_with_rate_flag(tmp_path):
    run_synth(tmp_path)
    out = tmp_path / "rec"
    assert main(["recover", "--input", str(tmp_path / "truth.tns"),
                 "--rate", "0.6", "--method", "stc", "--out", str(out)]) == 0
    assert not (out / "y_hat.tns").exists()
    report = json.loads((out / "recover.json").read_text())
    assert report["nse"] is None


def test_recover_full_rate_has_no_nse(tmp_path, capsys):
    run_synth(tmp_path)
    out = tmp_path / "rec"
    assert main(["recover", "--input", str(tmp_path / "truth.tns"),
                 "--rate", "1.0", "--truth", str(tmp_path / "truth.tns"),
                 "--out", str(out)]) == 0
    assert "n/a" in capsys.readouterr().out


def test_recover_needs_mask_or_rate(tmp_path):
    run_synth(tmp_path)
    with pytest.raises(SystemExit) as exc:
        main(["recover", "--input", str(tmp_path / "truth.tns"),
              "--out", str(tmp_path / "rec")])
    assert exc.value.code == 2


def test_recover_oracle_needs_anomaly_truth(tmp_path):
    run_synth(tmp_path)
    with pytest.raises(SystemExit) as exc:
        main(["recover", "--input", str(tmp_path / "truth.tns"), "--rate", "0.5",
              "--method", "oracle", "--out", str(tmp_path / "rec")])
    assert exc.value.code == 2


def test_recover_oracle_with_truth(tmp_path):
    run_synth(tmp_path, "--anomaly-ratio", "0.1")
    out = tmp_path / "rec"
    assert main(["recover", "--input", str(tmp_path / "corrupted.tns"),
                 "--rate", "0.5", "--method", "oracle",
                 "--anomaly-truth", str(tmp_path / "anomaly.tns"),
                 "--truth", str(tmp_path / "truth.tns"), "--out", str(out)]) == 0
    report = json.loads((out / "recover.json").read_text())
    assert report["method"] == "oracle"


def test_recover_missing_input_exits_one(tmp_path, capsys):
    assert main(["recover", "--input", str(tmp_path / "absent.tns"),
                 "--rate", "0.5", "--out", str(tmp_path / "rec")]) == 1
    assert "error:" in capsys.readouterr().err


def test_mask_shape_mismatch_exits_two(tmp_path):
    run_synth(tmp_path)
    assert main(["sample", "--dims", "9x9x4", "--rate", "0.5",
                 "--out", str(tmp_path)]) == 0
    with pytest.raises(SystemExit) as exc:
        main(["recover", "--input", str(tmp_path / "truth.tns"),
              "--mask", str(tmp_path / "mask.json"), "--out", str(tmp_path / "rec")])
    assert exc.value.code == 2


def test_curve_command(tmp_path):
    assert main(["curve", "--dims", "8x8x4", "--rank", "2", "--trials", "1",
                 "--max-iters", "120", "--out", str(tmp_path)]) == 0
    for name in ("curve.csv", "curve_trials.csv", "curve.json", "curve.png"):
        assert (tmp_path / name).stat().st_size > 0
    lines = (tmp_path / "curve.csv").read_text().splitlines()
    assert len(lines) == 1 + 9 * 3


def test_fig1_command(tmp_path):
    assert main(["fig1", "--dims", "8x8x4", "--rank", "2", "--trials", "2",
                 "--rate", "0.5", "--max-iters", "120", "--out", str(tmp_path)]) == 0
    for name in ("fig1.csv", "fig1.json", "fig1.png"):
        assert (tmp_path / name).stat().st_size > 0


def test_localize_command(tmp_path, capsys):
    assert main(["localize", "--dims", "8x8x4", "--rank", "2", "--trials", "1",
                 "--rate", "0.5", "--k", "2", "--test-points", "8",
                 "--max-iters", "120", "--out", str(tmp_path)]) == 0
    for name in ("localize_points.csv", "localize_summary.csv",
                 "localize_cdf.csv", "localize.json", "cdf.png"):
        assert (tmp_path / name).stat().st_size > 0
    assert "80th-percentile" in capsys.readouterr().out


def test_bad_dims_exits_two():
    with pytest.raises(SystemExit) as exc:
        main(["synth", "--dims", "6x5", "--out", "/tmp/x"])
    assert exc.value.code == 2


@pytest.mark.parametrize("cmd", ["synth", "sample", "recover", "curve", "fig1",
                                 "localize"])
def test_help_exits_zero(cmd):
    with pytest.raises(SystemExit) as exc:
        main([cmd, "--help"])
    assert exc.value.code == 0
