"""CLI subcommands are thin shells over the library: equality, exit codes."""

import json

import numpy as np
import pytest
from click.testing import CliRunner

from samic.cli import main, run
from samic.heatmap import encode_prompts, extract_peaks
from samic.heatmap_io import load_png
from samic.types import PointPrompt


@pytest.fixture
def runner():
    return CliRunner()


def test_encode_matches_direct_call(tmp_path, runner):
    out = tmp_path / "enc"
    result = runner.invoke(main, ["encode", "--points", "12,20",
                                  "--size", "48x32", "--out", str(out)])
    assert result.exit_code == 0
    stored = load_png(out / "heatmap.png")
    direct = encode_prompts([PointPrompt(12, 20)], 32, 48)
    assert np.abs(stored.grid - direct.grid).max() <= 0.5 / 65535 + 1e-12
    manifest = json.loads((out / "run_manifest.json").read_text())
    assert manifest["subcommand"] == "encode"
    assert {"inputs", "config_sha256", "versions"} <= set(manifest)


def test_peaks_matches_direct_call(tmp_path, runner):
    out = tmp_path / "enc"
    runner.invoke(main, ["encode", "--points", "10,10", "--points", "40,40",
                         "--size", "64x64", "--out", str(out)])
    result = runner.invoke(main, ["peaks", "--in", str(out / "heatmap.png"),
                                  "--tau", "0.5"])
    assert result.exit_code == 0
    payload = json.loads(result.output)
    direct = extract_peaks(load_png(out / "heatmap.png"))
    assert payload["fallback"] is False
    assert len(payload["points"]) == len(direct.points) == 2
    for got, want in zip(payload["points"], direct.points):
        assert got == [want.x, want.y]


def test_usage_error_exit_code():
    assert run(["frobnicate"]) == 2
    assert run(["encode", "--size", "oops", "--points", "1,1",
                "--out", "/tmp/x"]) == 2


def test_runtime_error_exit_code(tmp_path):
    bogus = tmp_path / "bogus.bin"
    bogus.write_bytes(b"\x00" * 12)
    assert run(["peaks", "--in", str(bogus)]) == 1


def test_eval_oracle_path(tmp_path, runner):
    out = tmp_path / "report"
    result = runner.invoke(main, ["eval", "--synthetic", "24", "--image-size",
                                  "64", "--out", str(out)])
    assert result.exit_code == 0
    report = json.loads((out / "report.json").read_text())
    assert report["mean_iou"] == pytest.approx(1.0)


def test_train_writes_checkpoint_and_manifest(tmp_path, runner):
    out = tmp_path / "train"
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "net": {"input_size": [64, 64], "num_4dconv_layers": 1,
                "conv4d_mode": "center_pivot"},
        "train": {"max_epochs": 2, "patience": 1, "subsample_fraction": 1.0}}))
    result = runner.invoke(main, ["train", "--config", str(cfg),
                                  "--synthetic", "8", "--image-size", "64",
                                  "--seed", "1", "--out", str(out)])
    assert result.exit_code == 0, result.output
    assert (out / "model.samic-ckpt").exists()
    assert (out / "training_log.jsonl").exists()
    manifest = json.loads((out / "run_manifest.json").read_text())
    assert manifest["config"]["train"]["seed"] == 1
