"""Unit tests for signal construction, mixing, noise, and WAV I/O."""

import numpy as np
import pytest

from pkbss.signals import (ComplexDataMatrix, MixingMatrix, Signal, SourceSet,
                           add_noise, covariance, export_sources_csv, gen_sine,
                           gen_square, ingest_wav, mix, random_mixing_matrix,
                           write_wav)


def test_signal_validation():
    with pytest.raises(ValueError):
        Signal(np.array([1.0]), 100.0)
    with pytest.raises(ValueError):
        Signal(np.array([1.0, np.nan]), 100.0)
    with pytest.raises(ValueError):
        Signal(np.array([1.0, 2.0]), 0.0)
    s = Signal(np.array([1.0, 2.0, 3.0]), 10.0)
    assert len(s) == 3
    with pytest.raises(ValueError):
        s.samples[0] = 9.0


def test_gen_sine_matches_formula():
    s = gen_sine(9.0, 1000.0, 0.5, phase=0.3)
    t = np.arange(500) / 1000.0
    assert np.allclose(s.samples, np.sin(2 * np.pi * 9.0 * t + 0.3))
    with pytest.raises(ValueError):
        gen_sine(600.0, 1000.0, 0.5)  # above Nyquist


def test_gen_square_shape():
    s = gen_square(10.0, 1000.0, 0.5)
    assert set(np.unique(s.samples)) == {-1.0, 1.0}
    assert s.samples[0] == 1.0
    # 50% duty cycle over an integer number of 100-sample periods
    assert abs(np.mean(s.samples)) < 1e-12


def test_source_set_validation():
    a = gen_sine(9.0, 1000.0, 0.5)
    b = gen_sine(10.0, 1000.0, 0.4)
    with pytest.raises(ValueError):
        SourceSet((a, b), ("a", "b"))  # unequal lengths
    with pytest.raises(ValueError):
        SourceSet((a,), ("a",))  # one source
    c = gen_sine(10.0, 1000.0, 0.5)
    with pytest.raises(ValueError):
        SourceSet((a, c), ("a",))  # label count
    ss = SourceSet((a, c), ("a", "c"))
    assert ss.n == 2
    assert ss.as_matrix().shape == (2, 500)


def test_mixing_matrix_rejects_singular():
    with pytest.raises(ValueError):
        MixingMatrix(np.array([[1.0, 2.0], [2.0, 4.0]]))
    with pytest.raises(ValueError):
        MixingMatrix(np.ones((2, 3)))


def test_random_mixing_matrix_deterministic():
    a = random_mixing_matrix(3, rng_seed=7)
    b = random_mixing_matrix(3, rng_seed=7)
    assert np.array_equal(a.entries, b.entries)
    c = random_mixing_matrix(3, complex=True, rng_seed=7)
    assert np.iscomplexobj(c.entries)


def test_mix_is_matrix_product():
    ss = SourceSet((gen_sine(9.0, 1000.0, 0.5), gen_sine(11.0, 1000.0, 0.5)),
                   ("a", "b"))
    a = random_mixing_matrix(2, rng_seed=0)
    x = mix(ss, a)
    assert np.allclose(x.entries, a.entries @ ss.as_matrix())
    assert x.sample_rate == 1000.0
    with pytest.raises(ValueError):
        mix(ss, random_mixing_matrix(3, rng_seed=0))


def test_add_noise_hits_requested_snr():
    rng = np.random.default_rng(0)
    x = ComplexDataMatrix(rng.standard_normal((3, 20000)))
    y = add_noise(x, 10.0, rng_seed=1)
    noise = y.entries - x.entries
    snr = 10 * np.log10(np.mean(np.abs(x.entries) ** 2)
                        / np.mean(np.abs(noise) ** 2))
    assert abs(snr - 10.0) < 0.2
    assert add_noise(x, None) is x
    z = add_noise(x, 10.0, complex=True, rng_seed=1)
    assert np.iscomplexobj(z.entries)


def test_complex_data_matrix_validation():
    with pytest.raises(ValueError):
        ComplexDataMatrix(np.zeros((5, 3)))  # more channels than samples
    with pytest.raises(ValueError):
        ComplexDataMatrix(np.zeros(4))


def test_wav_round_trip(tmp_path):
    path = tmp_path / "t.wav"
    s = gen_sine(100.0, 8000.0, 0.25)
    write_wav(path, s)
    back = ingest_wav(path)
    assert back.sample_rate == 8000.0
    # standardized on ingest; correlate instead of comparing amplitudes
    c = np.corrcoef(s.samples, back.samples)[0, 1]
    assert c > 0.999
    assert abs(back.samples.mean()) < 1e-12
    assert abs(back.samples.std() - 1.0) < 1e-12
    resampled = ingest_wav(path, target_rate=4000.0)
    assert len(resampled) == 1000


def test_covariance_properties():
    ss = SourceSet((gen_sine(9.0, 1000.0, 1.0), gen_sine(9.0, 1000.0, 1.0)),
                   ("a", "a2"))
    c = covariance(ss)
    assert np.allclose(np.diag(c), 1.0)
    assert abs(c[0, 1] - 1.0) < 1e-9  # identical channels fully correlated


def test_export_sources_csv(tmp_path):
    ss = SourceSet((gen_sine(9.0, 1000.0, 0.1), gen_sine(11.0, 1000.0, 0.1)),
                   ("a", "b"))
    path = tmp_path / "s.csv"
    export_sources_csv(ss, path)
    lines = path.read_text().strip().splitlines()
    assert len(lines) == 1 + 100
    assert "a" in lines[0] and "b" in lines[0]
