"""End-to-end tests for the command-line front end."""
import json

import numpy as np
import pytest

from stlmc.cli import build_parser, main


def write_config(tmp_path, **overrides):
    cfg = {
        "target": {
            "weights": [0.5, 0.5],
            "means": [[-1.5], [1.5]],
            "sigma2": 1.0,
        },
        "run": {"eta": 0.1, "T": 0.5, "t": 80, "seed": 5},
        "n_samples": 200,
    }
    cfg.update(overrides)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return path


def test_parser_requires_subcommand(capsys):
    with pytest.raises(SystemExit) as exc:
        build_parser().parse_args([])
    assert exc.value.code == 2


def test_sample_without_config_is_usage_error(capsys):
    assert main(["sample"]) == 2
    assert "--config" in capsys.readouterr().err


def test_sample_without_seed_is_usage_error(tmp_path, capsys):
    cfg = write_config(tmp_path, run={"eta": 0.1, "T": 0.5, "t": 80})
    assert main(["sample", "--config", str(cfg)]) == 2
    assert "seed" in capsys.readouterr().err


def test_unparseable_config_is_usage_error(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    assert main(["sample", "--config", str(path)]) == 2
    assert "JSON" in capsys.readouterr().err


def test_unknown_run_option_is_usage_error(tmp_path, capsys):
    cfg = write_config(tmp_path, run={"eta": 0.1, "T": 0.5, "t": 80,
                                      "seed": 5, "step_count": 3})
    assert main(["sample", "--config", str(cfg)]) == 2
    assert "step_count" in capsys.readouterr().err


def test_missing_target_field_is_usage_error(tmp_path, capsys):
    cfg = write_config(tmp_path, target={"weights": [1.0], "means": [[0.0]]})
    assert main(["sample", "--config", str(cfg)]) == 2
    assert "sigma2" in capsys.readouterr().err


def test_oversized_step_is_usage_error(tmp_path, capsys):
    cfg = write_config(tmp_path)
    assert main(["sample", "--config", str(cfg), "--eta", "0.6"]) == 2
    assert "sigma2" in capsys.readouterr().err


def test_analyze_rejects_high_dimension(tmp_path, capsys):
    cfg = write_config(tmp_path, target={
        "weights": [1.0], "means": [[0.0, 0.0, 0.0]], "sigma2": 1.0,
    })
    assert main(["analyze", "--config", str(cfg)]) == 2
    assert "d <= 2" in capsys.readouterr().err


def test_verify_unknown_suite(capsys):
    assert main(["verify", "--suite", "bogus"]) == 2
    assert "unknown suite" in capsys.readouterr().err


def test_verify_single_suite_passes(capsys):
    assert main(["verify", "--suite", "tempering-bounds"]) == 0
    out = capsys.readouterr().out
    assert "[PASS] tempering-bounds:" in out
    assert "[FAIL]" not in out
    assert out.strip().endswith("checks passed")


def test_sample_end_to_end(tmp_path, capsys):
    cfg = write_config(tmp_path)
    out = tmp_path / "run"
    code = main(["sample", "--config", str(cfg), "--out", str(out), "--trace"])
    assert code == 0

    samples = (out / "samples.csv").read_text().splitlines()
    assert samples[0] == "# stlmc samples v1"
    assert samples[1] == "sample,x_1"
    assert len(samples) == 2 + 200
    xs = np.array([float(r.split(",")[1]) for r in samples[2:]])
    assert np.abs(xs).max() < 8.0

    est = json.loads((out / "estimates.json").read_text())
    assert est["format"] == "stlmc-estimates-v1"
    assert est["seed"] == 5
    assert est["log_zhat"][0] == 0.0
    assert len(est["betas"]) == len(est["log_zhat"])

    summary = (out / "summary.txt").read_text()
    assert summary.startswith("# stlmc sample summary v1")
    assert "mode fractions" in summary
    assert "TV distance" in summary

    trace = (out / "trace.csv").read_text().splitlines()
    assert trace[0] == "# stlmc trace v1"
    assert trace[1] == "step,level,move_type,accepted,x_1"

    stdout = capsys.readouterr().out
    assert "gradient evaluations" in stdout


def test_sample_is_deterministic(tmp_path):
    cfg = write_config(tmp_path)
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert main(["sample", "--config", str(cfg), "--out", str(out_a)]) == 0
    assert main(["sample", "--config", str(cfg), "--out", str(out_b)]) == 0
    assert (out_a / "samples.csv").read_bytes() == (out_b / "samples.csv").read_bytes()
    assert (out_a / "estimates.json").read_bytes() == (out_b / "estimates.json").read_bytes()


def test_estimate_z_reports_deviations(tmp_path, capsys):
    cfg = write_config(tmp_path)
    out = tmp_path / "z"
    assert main(["estimate-z", "--config", str(cfg), "--out", str(out)]) == 0
    report = (out / "estimate_z.txt").read_text()
    assert report.startswith("# stlmc estimate-z report v1")
    assert "max |deviation|" in report
    assert (out / "estimates.json").exists()
    worst = float(report.strip().splitlines()[-1].split("=")[1])
    assert worst < 1.0


def test_analyze_reports_spectra(tmp_path, capsys):
    cfg = write_config(tmp_path)
    out = tmp_path / "an"
    assert main(["analyze", "--config", str(cfg), "--out", str(out),
                 "--cells", "200"]) == 0
    report = (out / "analyze.txt").read_text()
    assert report.startswith("# stlmc analyze report v1")
    assert "eigenvalues of minus the generator" in report
    assert "adjacent-level overlap" in report
    assert "partition-ratio margins" in report


def test_compare_writes_both_methods(tmp_path, capsys):
    cfg = write_config(tmp_path)
    out = tmp_path / "cmp"
    assert main(["compare", "--config", str(cfg), "--out", str(out),
                 "--skip-demo", "--n-samples", "150"]) == 0
    report = (out / "compare.txt").read_text()
    assert report.startswith("# stlmc compare v1")
    assert "tempering" in report
    assert "plain-langevin" in report
    assert "grad_evals" in report
