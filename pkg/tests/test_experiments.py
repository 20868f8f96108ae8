"""Unit tests for the experiment harnesses (small configurations)."""

import numpy as np
import pytest

from pkbss.experiments import (ExperimentConfig, RunManifest,
                               basic_wave_sources, run_audio, run_radar_sweep,
                               run_validation, run_waves, speech_surrogates)
from pkbss.signals import covariance


def test_experiment_config_validation():
    cfg = ExperimentConfig("waves", ("pka",), (0, 1))
    assert cfg.seeds == (0, 1)
    with pytest.raises(ValueError):
        ExperimentConfig("unknown", ("pka",), (0,))
    with pytest.raises(ValueError):
        ExperimentConfig("waves", (), (0,))
    with pytest.raises(ValueError):
        ExperimentConfig("waves", ("pka",), ())


def test_run_manifest_round_trip():
    m = RunManifest(config={"experiment": "waves"}, n_rows=4, wall_clock_s=1.5)
    d = m.as_dict()
    assert d["n_rows"] == 4
    assert d["version"] == m.version


def test_basic_wave_sources_covariance():
    src = basic_wave_sources()
    cov = covariance(src)
    assert abs(cov[0, 1] - 0.64) < 0.02
    assert abs(cov[0, 2] - 0.03) < 0.02
    assert abs(cov[1, 2] - 0.11) < 0.02


def test_speech_surrogates_shape():
    src = speech_surrogates()
    assert src.n == 4
    assert len(src.signals[0]) == 16000
    for sig in src.signals:
        assert abs(sig.samples.mean()) < 1e-12
        assert abs(sig.samples.std() - 1.0) < 1e-12
    again = speech_surrogates()
    assert np.array_equal(src.as_matrix(), again.as_matrix())


def test_run_validation_row_structure():
    rows = run_validation(n_tensors=3, dim=3,
                          thresholds=(0.5, 0.9, 1 - 1e-3), seed=0)
    assert len(rows) == 3 * 3  # 3 algorithms x 3 thresholds
    for alg in ("pka", "fixed_point", "cfastica"):
        counts = [r["successes"] for r in rows if r["algorithm"] == alg]
        attempted = [r["attempted"] for r in rows if r["algorithm"] == alg]
        assert attempted == [9, 9, 9]
        # success counts are non-increasing as the threshold tightens
        assert counts == sorted(counts, reverse=True)
    with pytest.raises(ValueError):
        run_validation(n_tensors=1, thresholds=(1.5,))
    with pytest.raises(ValueError):
        run_validation(n_tensors=1, algorithms=("nope",))


def test_run_waves_rows():
    rows = run_waves(seeds=(0, 1), algorithms=("pka", "jade"))
    assert len(rows) == 4
    for row in rows:
        assert row["experiment"] == "waves"
        assert {"isi", "acc", "sdr_mean", "sdr_min", "mixing_cond",
                "cov_01", "cov_02", "cov_12"} <= set(row)
    again = run_waves(seeds=(0, 1), algorithms=("pka", "jade"))
    assert rows == again


def test_run_audio_rows():
    rows = run_audio(seeds=(0,), algorithms=("pka", "cfastica"))
    assert len(rows) == 2
    for row in rows:
        assert row["experiment"] == "audio"
        assert np.isfinite(row["isi"])
        assert row["mixing_cond"] > 1.0


def test_run_radar_sweep_rows():
    rows = run_radar_sweep("isrj", values=(1.0,), seeds=(0, 1),
                           algorithms=("pka", "jade"))
    assert len(rows) == 4
    for row in rows:
        assert row["experiment"] == "radar"
        assert row["kind"] == "isrj"
        assert row["value"] == 1.0
        assert np.isfinite(row["sir_improvement_db"])
    with pytest.raises(ValueError):
        run_radar_sweep("isrj", values=())
    with pytest.raises(ValueError):
        run_radar_sweep("isrj", values=(1.0,), seeds=(0,),
                        algorithms=("nope",))
