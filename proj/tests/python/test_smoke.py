"""Smoke tests for the _amds extension module."""

import json
import math
import os
import shutil
import subprocess

import pytest

import _amds


def test_entropy_matches_closed_forms():
    assert _amds.entropy([1.0, 0.0, 0.0]) == pytest.approx(0.0, abs=1e-12)
    uniform = [1.0 / 7.0] * 7
    assert _amds.entropy(uniform) == pytest.approx(math.log(7.0), abs=1e-12)


def test_disagreement_identical_rows_is_zero():
    rows = [[0.2, 0.5, 0.3]] * 6
    assert _amds.disagreement(rows) == pytest.approx(0.0, abs=1e-15)


def test_auc_pair_counting():
    assert _amds.auc([0.1, 0.4], [0.3, 0.5]) == pytest.approx(0.75)
    assert _amds.auc([0.3, 0.3], [0.3, 0.3]) == pytest.approx(0.5)


def test_ads_and_confidence_formulas():
    assert _amds.ads(1.0, 0.0, 1.0, 0.2, 0.3, 0.5) == pytest.approx(0.7)
    assert _amds.category_confidence(0.56) == pytest.approx(0.5)
    assert _amds.category_confidence(0.62) == pytest.approx(1.0)


def test_model_weights_and_blend():
    v = _amds.model_category_weights([1.0, 0.5, 0.5, 0.5, 0.5, 0.5])
    assert v[0] == pytest.approx(1.0 / 1.625)
    blended = _amds.blend([1.0, 0.0, 0.0, 0.0, 0.0, 0.0], 0.2)
    assert blended[0] == pytest.approx(0.5 + 0.5 / 6.0)
    unblended = _amds.blend([1.0, 0.0, 0.0, 0.0, 0.0, 0.0], 0.75)
    assert unblended[0] == pytest.approx(1.0)


def test_synth_generate_shape_and_determinism():
    a = _amds.synth_generate(3, 6, 10, 4.0, 5)
    b = _amds.synth_generate(3, 6, 10, 4.0, 5)
    assert a["class_count"] == 3
    assert len(a["features"]) == 30
    assert a["features"] == b["features"]


MINI_CONFIG = {
    "seed": 7,
    "output_dir": "/tmp/amds_py_smoke",
    "dataset": {"kind": "synth", "classes": 4, "dims": 8, "per_class": 200,
                "separation": 6.0},
    "split": {"train": 0.7, "val": 0.15, "test": 0.15},
    "gates": {"model_accuracy": 0.5, "asr": 0.0},
    "attacks": [
        {"kind": "fgsm", "epsilon": 1.0},
        {"kind": "morphing", "scale": 3.0},
    ],
    "weight_learning": {"attack_samples": 120, "exclude_below_asr_gate": False},
    "evaluation": {"clean_samples": 100, "attack_samples": 60, "baselines": False,
                   "ablations": False, "adaptive": False, "bootstrap_iters": 100},
}


@pytest.fixture(scope="module")
def trained_manifest(tmp_path_factory):
    manifest_dir = str(tmp_path_factory.mktemp("manifest"))
    summary = _amds.train_from_config(json.dumps(MINI_CONFIG), manifest_dir)
    return manifest_dir, summary


def test_train_and_infer_roundtrip(trained_manifest):
    manifest_dir, summary = trained_manifest
    assert summary["tau_detect"] > 0.0
    assert len(summary["model_val_accuracy"]) == 6

    manifest = _amds.Manifest.load(manifest_dir)
    assert manifest.class_count == 4
    assert manifest.feature_count == 8

    x = [0.0] * 8
    out = manifest.infer(x)
    assert set(out) == {"y_detect", "y_class", "conf_detect", "conf_class",
                        "category", "stage"}
    assert out["y_detect"] in (0, 1)
    assert 0.0 <= out["conf_detect"] <= 1.0
    assert out["category"] in ("gradient", "distribution")

    results, instrumentation = manifest.infer_batch([x, [0.1] * 8])
    assert len(results) == 2
    assert instrumentation["stage1"] + instrumentation["stage2"] == 2

    signals = manifest.signals(x)
    assert 0.0 <= signals["anomaly_n"] <= 1.0


def _cli():
    cli = os.environ.get("AMDS_CLI")
    if not cli or not os.path.exists(cli):
        pytest.skip("AMDS_CLI not available")
    return cli


def test_cli_infer_on_empty_csv_writes_empty_jsonl(trained_manifest, tmp_path):
    cli = _cli()
    manifest_dir, _ = trained_manifest
    scaler = json.load(open(os.path.join(manifest_dir, "scaler.json")))
    empty_csv = tmp_path / "empty.csv"
    empty_csv.write_text(",".join(scaler["schema"]) + "\n")
    out = tmp_path / "out.jsonl"
    proc = subprocess.run(
        [cli, "infer", "--manifest", manifest_dir, "--input", str(empty_csv),
         "--output", str(out)],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert out.read_text() == ""


def test_cli_evaluate_without_attacks_names_missing_batches(trained_manifest, tmp_path):
    cli = _cli()
    manifest_dir, _ = trained_manifest
    config = dict(MINI_CONFIG)
    config["output_dir"] = str(tmp_path / "fresh")
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(config))
    proc = subprocess.run(
        [cli, "evaluate", "--config", str(cfg_path), "--manifest", manifest_dir],
        capture_output=True, text=True)
    assert proc.returncode == 3
    assert "attack" in proc.stderr


def test_cli_help_runs():
    cli = os.environ.get("AMDS_CLI")
    if not cli or not shutil.which(cli) and not os.path.exists(cli):
        pytest.skip("AMDS_CLI not available")
    proc = subprocess.run([cli, "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "train" in proc.stdout
