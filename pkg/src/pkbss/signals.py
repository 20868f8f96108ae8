"""Multichannel test-signal construction, mixing, and corruption.

Generators for the synthetic sources used throughout the toolkit (sines,
square waves), random mixing matrices, additive receiver noise, and WAV
ingestion.  All generators are pure functions of their arguments and seed.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.io import wavfile

__all__ = [
    "Signal",
    "SourceSet",
    "MixingMatrix",
    "ComplexDataMatrix",
    "gen_sine",
    "gen_square",
    "random_mixing_matrix",
    "mix",
    "add_noise",
    "ingest_wav",
    "write_wav",
    "covariance",
    "export_sources_csv",
]


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Signal:
    """A single uniformly sampled channel (real or complex amplitudes)."""

    samples: np.ndarray
    sample_rate: float

    def __post_init__(self):
        s = _freeze(np.asarray(self.samples))
        object.__setattr__(self, "samples", s)
        if s.ndim != 1 or s.size < 2:
            raise ValueError("a signal needs at least 2 samples")
        if not self.sample_rate > 0:
            raise ValueError("sample_rate must be positive")
        if not np.all(np.isfinite(s)):
            raise ValueError("signal contains non-finite samples")

    def __len__(self) -> int:
        return self.samples.size


@dataclass(frozen=True)
class SourceSet:
    """A bundle of equal-length, equal-rate source channels."""

    signals: tuple
    labels: tuple

    def __post_init__(self):
        sigs = tuple(self.signals)
        labels = tuple(self.labels)
        object.__setattr__(self, "signals", sigs)
        object.__setattr__(self, "labels", labels)
        if len(sigs) < 2:
            raise ValueError("need at least 2 sources")
        if len(labels) != len(sigs):
            raise ValueError("one label per signal required")
        lengths = {len(s) for s in sigs}
        rates = {s.sample_rate for s in sigs}
        if len(lengths) != 1 or len(rates) != 1:
            raise ValueError("all sources must share length and sample rate")

    @property
    def n(self) -> int:
        return len(self.signals)

    @property
    def sample_rate(self) -> float:
        return self.signals[0].sample_rate

    def as_matrix(self) -> np.ndarray:
        """Stack channels into an N x L array (rows are channels)."""
        return np.vstack([s.samples for s in self.signals])


@dataclass(frozen=True)
class MixingMatrix:
    """Square nonsingular mixing matrix applied to stacked sources."""

    entries: np.ndarray

    def __post_init__(self):
        a = _freeze(np.asarray(self.entries))
        object.__setattr__(self, "entries", a)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("mixing matrix must be square")
        n = a.shape[0]
        scale = np.linalg.norm(a, 2) ** n
        if abs(np.linalg.det(a)) <= 1e-10 * scale:
            raise ValueError("mixing matrix is numerically singular")

    @property
    def n(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class ComplexDataMatrix:
    """N x L observation matrix (rows = channels, columns = samples)."""

    entries: np.ndarray
    sample_rate: float = 1.0

    def __post_init__(self):
        x = _freeze(np.asarray(self.entries))
        object.__setattr__(self, "entries", x)
        if x.ndim != 2:
            raise ValueError("data matrix must be 2-D")
        n, l = x.shape
        if n > l:
            raise ValueError(f"more channels ({n}) than samples ({l})")
        if not np.all(np.isfinite(x)):
            raise ValueError("data matrix contains non-finite entries")

    @property
    def n_channels(self) -> int:
        return self.entries.shape[0]

    @property
    def n_samples(self) -> int:
        return self.entries.shape[1]


def _check_band(freq: float, sample_rate: float) -> None:
    if not 0 < freq < sample_rate / 2:
        raise ValueError(
            f"frequency {freq} Hz outside (0, Nyquist={sample_rate / 2}) Hz"
        )


def gen_sine(freq, sample_rate, duration, phase=0.0) -> Signal:
    """Real sine wave sin(2*pi*f*t + phase) sampled at ``sample_rate``."""
    _check_band(freq, sample_rate)
    n = int(round(duration * sample_rate))
    t = np.arange(n) / sample_rate
    return Signal(np.sin(2.0 * np.pi * freq * t + phase), sample_rate)


def gen_square(freq, sample_rate, duration) -> Signal:
    """Square wave in {+1, -1} with 50% duty cycle, starting high."""
    _check_band(freq, sample_rate)
    n = int(round(duration * sample_rate))
    frac = (freq * np.arange(n) / sample_rate) % 1.0
    return Signal(np.where(frac < 0.5, 1.0, -1.0), sample_rate)


def random_mixing_matrix(n, complex=False, rng_seed=0) -> MixingMatrix:
    """Draw an n x n Gaussian mixing matrix, resampled until nonsingular."""
    if n < 2:
        raise ValueError("need n >= 2")
    rng = np.random.default_rng(rng_seed)
    for _ in range(100):
        if complex:
            a = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
            a /= np.sqrt(2.0)
        else:
            a = rng.standard_normal((n, n))
        try:
            return MixingMatrix(a)
        except ValueError:
            continue
    raise RuntimeError("could not draw a nonsingular mixing matrix in 100 tries")


def mix(sources: SourceSet, a: MixingMatrix) -> ComplexDataMatrix:
    """Instantaneous mixture X = A @ S of the stacked sources."""
    s = sources.as_matrix()
    if a.n != sources.n:
        raise ValueError(f"mixing matrix is {a.n}x{a.n}, sources have {sources.n} rows")
    return ComplexDataMatrix(a.entries @ s, sources.sample_rate)


def add_noise(x: ComplexDataMatrix, snr_db, complex=False, rng_seed=0) -> ComplexDataMatrix:
    """Add white Gaussian noise at the requested total SNR (dB).

    ``snr_db=None`` (or +inf) returns the input unchanged.  The noise is
    drawn independently per channel; when ``complex`` is set it is circular
    complex Gaussian.
    """
    if snr_db is None or np.isposinf(snr_db):
        return x
    if not np.isfinite(snr_db):
        raise ValueError("snr_db must be finite (or None for no noise)")
    sig_power = np.mean(np.abs(x.entries) ** 2)
    if sig_power == 0:
        raise ValueError("cannot set an SNR on a zero-power signal")
    noise_var = sig_power / 10.0 ** (snr_db / 10.0)
    rng = np.random.default_rng(rng_seed)
    shape = x.entries.shape
    if complex:
        noise = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
        noise *= np.sqrt(noise_var / 2.0)
    else:
        noise = rng.standard_normal(shape) * np.sqrt(noise_var)
    return ComplexDataMatrix(x.entries + noise, x.sample_rate)


def ingest_wav(path, offset=0.0, duration=None, target_rate=None) -> Signal:
    """Read a 16-bit PCM WAV segment, standardize, optionally resample.

    The first channel is taken for multi-channel files.  The returned signal
    has zero mean and unit variance; resampling is linear interpolation.
    """
    rate, data = wavfile.read(path)
    if data.dtype != np.int16:
        raise ValueError(f"only 16-bit PCM WAV is supported, got dtype {data.dtype}")
    if data.ndim > 1:
        data = data[:, 0]
    start = int(round(offset * rate))
    stop = data.size if duration is None else start + int(round(duration * rate))
    seg = data[start:stop].astype(np.float64)
    if seg.size < 2:
        raise ValueError("requested segment is empty")
    if target_rate is not None and target_rate != rate:
        t_old = np.arange(seg.size) / rate
        n_new = int(round(seg.size * target_rate / rate))
        t_new = np.arange(n_new) / target_rate
        seg = np.interp(t_new, t_old, seg)
        rate = target_rate
    std = seg.std()
    if std == 0:
        raise ValueError("segment has zero variance")
    return Signal((seg - seg.mean()) / std, rate)


def write_wav(path, signal: Signal) -> None:
    """Write a real signal as 16-bit PCM, scaled to 90% full range."""
    s = np.real(signal.samples)
    peak = np.max(np.abs(s))
    if peak == 0:
        raise ValueError("refusing to write an all-zero signal")
    pcm = np.round(s / peak * 0.9 * 32767).astype(np.int16)
    wavfile.write(path, int(signal.sample_rate), pcm)


def covariance(sources: SourceSet) -> np.ndarray:
    """Sample correlation-coefficient matrix of the source channels."""
    s = sources.as_matrix()
    s = s - s.mean(axis=1, keepdims=True)
    norms = np.sqrt(np.mean(np.abs(s) ** 2, axis=1))
    if np.any(norms == 0):
        raise ValueError("zero-variance source channel")
    s = s / norms[:, None]
    c = (s @ s.conj().T).real / s.shape[1]
    np.fill_diagonal(c, 1.0)
    return c


def export_sources_csv(sources: SourceSet, path) -> None:
    """One column per channel; header carries labels and the sample rate."""
    mat = sources.as_matrix()
    header = [f"{lab} (sample_rate={sources.sample_rate})" for lab in sources.labels]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for col in mat.T:
            writer.writerow([repr(v) for v in col.tolist()])
