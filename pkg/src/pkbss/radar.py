"""Array-radar scene construction: chirp target, jamming, steering, noise.

Scenes carry per-component ground truth (target, interference, noise,
pre-mixing but post-steering) so oracle SIR evaluation never has to
re-separate anything.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from .signals import ComplexDataMatrix, Signal

__all__ = [
    "UlaConfig",
    "RadarScene",
    "gen_lfm",
    "gen_csi",
    "gen_isrj",
    "steering_vector",
    "beamwidth_3db",
    "build_scenario",
    "export_scene",
]

#: Desk-scale waveform defaults.  Chosen so the interrupted-sampling
#: repeater stays strongly correlated with the chirp (bandwidth x delay
#: well below 1) while sweeps stay fast; the interference bandwidth spans
#: the chirp band.
DEFAULT_SAMPLE_RATE = 10e6
DEFAULT_PULSE_WIDTH = 800e-6
DEFAULT_BANDWIDTH = 500e3
DEFAULT_CSI_TEETH = 8
DEFAULT_CSI_SPACING = 62.5e3
DEFAULT_SLICE_PERIOD = 2e-6
DEFAULT_DUTY = 0.25
DEFAULT_DELAY = 0.5e-6
#: Jammer platform motion over one pulse, as a fraction of the 3 dB
#: beamwidth.  The linear angle sweep spreads the interference over a thin
#: angular cone, so no single spatial vector can null it perfectly; this
#: bounds the attainable SIR improvement identically for every algorithm.
DEFAULT_JAMMER_DRIFT = 0.08


@dataclass(frozen=True)
class UlaConfig:
    """Uniform linear array geometry."""

    n_elements: int = 4
    spacing_over_lambda: float = 0.5

    def __post_init__(self):
        if self.n_elements < 2:
            raise ValueError("need at least 2 array elements")
        if not 0 < self.spacing_over_lambda <= 0.5:
            raise ValueError("element spacing must be in (0, 0.5] wavelengths")


@dataclass(frozen=True)
class RadarScene:
    """Mixed array snapshot with exact per-component ground truth."""

    mixed: ComplexDataMatrix
    target_component: ComplexDataMatrix
    interference_component: ComplexDataMatrix
    noise_component: ComplexDataMatrix
    sir_in_db: float
    snr_in_db: float
    delta_theta: float
    theta_3db: float
    kind: str = ""
    params: dict = None

    def __post_init__(self):
        total = (self.target_component.entries
                 + self.interference_component.entries
                 + self.noise_component.entries)
        if not np.array_equal(self.mixed.entries, total):
            raise ValueError("scene components do not sum to the mixture")
        pt = np.mean(np.abs(self.target_component.entries) ** 2)
        pi = np.mean(np.abs(self.interference_component.entries) ** 2)
        pn = np.mean(np.abs(self.noise_component.entries) ** 2)
        if pi > 0 and abs(10 * np.log10(pt / pi) - self.sir_in_db) > 0.1:
            raise ValueError("measured SIR deviates from declared value")
        if pn > 0 and abs(10 * np.log10(pt / pn) - self.snr_in_db) > 0.1:
            raise ValueError("measured SNR deviates from declared value")


def gen_lfm(bandwidth: float, pulse_width: float, sample_rate: float) -> Signal:
    """Unit-modulus complex chirp exp(j pi (B/T) t^2), t in [-T/2, T/2)."""
    if bandwidth > sample_rate:
        raise ValueError("chirp bandwidth exceeds complex sample rate (aliasing)")
    n = int(round(pulse_width * sample_rate))
    t = (np.arange(n) - n / 2) / sample_rate
    rate = bandwidth / pulse_width
    return Signal(np.exp(1j * np.pi * rate * t ** 2), sample_rate)


def gen_csi(n_teeth: int, tooth_spacing: float, sample_rate: float,
            duration: float, rng_seed=0) -> Signal:
    """Comb of equal-amplitude tones with random phases, unit power."""
    if n_teeth < 1:
        raise ValueError("need at least one comb tooth")
    if n_teeth * tooth_spacing >= sample_rate:
        raise ValueError("comb span exceeds the complex sample rate (aliasing)")
    n = int(round(duration * sample_rate))
    t = np.arange(n) / sample_rate
    rng = np.random.default_rng(rng_seed)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=n_teeth)
    freqs = (np.arange(n_teeth) - (n_teeth - 1) / 2.0) * tooth_spacing
    s = np.zeros(n, dtype=complex)
    for f, ph in zip(freqs, phases):
        s += np.exp(1j * (2.0 * np.pi * f * t + ph))
    s /= np.sqrt(np.mean(np.abs(s) ** 2))
    return Signal(s, sample_rate)


def gen_isrj(base: Signal, slice_period: float, duty: float, delay: float) -> Signal:
    """Interrupted-sampling repeat of the base chirp, unit power.

    Slices of ``duty`` fraction of each sampling period are copied and
    retransmitted ``delay`` seconds later; the output is zero outside the
    repeat windows.
    """
    if not 0 < duty <= 1:
        raise ValueError("duty must lie in (0, 1]")
    fs = base.sample_rate
    n = len(base)
    if slice_period <= 0 or slice_period > n / fs:
        raise ValueError("slice period must be positive and within the pulse")
    if delay < 0 or delay >= n / fs:
        raise ValueError("repeat delay overruns the pulse")
    degenerate = duty >= 1.0 and delay == 0.0
    if not degenerate and delay < slice_period * duty:
        raise ValueError("delay must cover the sampled slice (delay >= period*duty)")
    period_n = int(round(slice_period * fs))
    slice_n = int(round(slice_period * duty * fs))
    delay_n = int(round(delay * fs))
    out = np.zeros(n, dtype=complex)
    for start in range(0, n, period_n):
        seg = base.samples[start:start + slice_n]
        dst = start + delay_n
        seg = seg[: max(0, n - dst)]
        out[dst:dst + seg.size] = seg
    power = np.mean(np.abs(out) ** 2)
    if power == 0:
        raise ValueError("repeat windows fell entirely outside the pulse")
    return Signal(out / np.sqrt(power), fs)


def steering_vector(theta: float, ula: UlaConfig) -> np.ndarray:
    """Unit-norm array response a_n = exp(j 2 pi (d/lambda) n sin(theta))/sqrt(N)."""
    if not abs(theta) < np.pi / 2:
        raise ValueError("arrival angle must satisfy |theta| < pi/2")
    n = np.arange(ula.n_elements)
    a = np.exp(2j * np.pi * ula.spacing_over_lambda * n * np.sin(theta))
    return a / np.sqrt(ula.n_elements)


def beamwidth_3db(ula: UlaConfig) -> float:
    """Broadside half-power beamwidth, 0.886 / (N * d/lambda) radians."""
    return 0.886 / (ula.n_elements * ula.spacing_over_lambda)


def _scaled_outer(a: np.ndarray, s: np.ndarray, power: float) -> np.ndarray:
    comp = a[:, None] * s[None, :]
    measured = np.mean(np.abs(comp) ** 2)
    return comp * np.sqrt(power / measured)


def build_scenario(kind: str, delta_theta: float, snr_db: float, sir_db: float,
                   ula: UlaConfig | None = None, rng_seed=0,
                   sample_rate: float = DEFAULT_SAMPLE_RATE,
                   pulse_width: float = DEFAULT_PULSE_WIDTH,
                   bandwidth: float = DEFAULT_BANDWIDTH,
                   csi_teeth: int = DEFAULT_CSI_TEETH,
                   csi_spacing: float = DEFAULT_CSI_SPACING,
                   slice_period: float = DEFAULT_SLICE_PERIOD,
                   duty: float = DEFAULT_DUTY,
                   delay: float = DEFAULT_DELAY,
                   jammer_drift: float = DEFAULT_JAMMER_DRIFT) -> RadarScene:
    """Target chirp at broadside plus jamming at delta_theta beamwidths.

    Component powers are calibrated exactly to the requested SIR (target
    over interference) and SNR (target over noise), both measured at the
    array.  The jammer platform drifts linearly by ``jammer_drift``
    beamwidths across the pulse, centred on its nominal angle.
    """
    if kind not in ("csi", "isrj"):
        raise ValueError("kind must be 'csi' or 'isrj'")
    if delta_theta <= 0:
        raise ValueError("delta_theta must be positive")
    ula = ula or UlaConfig()
    theta3 = beamwidth_3db(ula)
    theta_i = delta_theta * theta3

    chirp = gen_lfm(bandwidth, pulse_width, sample_rate)
    rng = np.random.default_rng(rng_seed)
    if kind == "csi":
        interf = gen_csi(csi_teeth, csi_spacing, sample_rate, pulse_width,
                         rng.integers(1 << 32))
    else:
        interf = gen_isrj(chirp, slice_period, duty, delay)

    a_t = steering_vector(0.0, ula)
    target = _scaled_outer(a_t, chirp.samples, 1.0)
    l = len(interf)
    sweep = jammer_drift * theta3 * (np.arange(l) / max(l - 1, 1) - 0.5)
    angles = theta_i + sweep
    if not np.all(np.abs(angles) < np.pi / 2):
        raise ValueError("jammer drift sweeps past endfire")
    elem = np.arange(ula.n_elements)
    a_i = np.exp(2j * np.pi * ula.spacing_over_lambda
                 * elem[:, None] * np.sin(angles)[None, :])
    a_i /= np.sqrt(ula.n_elements)
    interference = a_i * interf.samples[None, :]
    measured = np.mean(np.abs(interference) ** 2)
    interference *= np.sqrt(10.0 ** (-sir_db / 10.0) / measured)
    shape = target.shape
    noise = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    noise *= np.sqrt(10.0 ** (-snr_db / 10.0) / np.mean(np.abs(noise) ** 2))
    mixed = target + interference + noise
    fs = sample_rate
    params = {
        "kind": kind, "delta_theta": delta_theta, "snr_db": snr_db,
        "sir_db": sir_db, "n_elements": ula.n_elements,
        "spacing_over_lambda": ula.spacing_over_lambda,
        "sample_rate": sample_rate, "pulse_width": pulse_width,
        "bandwidth": bandwidth, "csi_teeth": csi_teeth,
        "csi_spacing": csi_spacing, "slice_period": slice_period,
        "duty": duty, "delay": delay, "jammer_drift": jammer_drift,
        "rng_seed": int(rng_seed)
        if np.isscalar(rng_seed) else str(rng_seed),
    }
    return RadarScene(
        mixed=ComplexDataMatrix(mixed, fs),
        target_component=ComplexDataMatrix(target, fs),
        interference_component=ComplexDataMatrix(interference, fs),
        noise_component=ComplexDataMatrix(noise, fs),
        sir_in_db=sir_db, snr_in_db=snr_db,
        delta_theta=delta_theta, theta_3db=theta3,
        kind=kind, params=params,
    )


def _write_component_csv(x: np.ndarray, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"ch{i}_{p}" for i in range(x.shape[0])
                         for p in ("re", "im")])
        for col in x.T:
            row = []
            for v in col:
                v = complex(v)
                row += [repr(v.real), repr(v.imag)]
            writer.writerow(row)


def export_scene(scene: RadarScene, out_dir) -> None:
    """One CSV per component plus a JSON descriptor of every parameter."""
    import os

    os.makedirs(out_dir, exist_ok=True)
    comps = {
        "mixed": scene.mixed, "target": scene.target_component,
        "interference": scene.interference_component,
        "noise": scene.noise_component,
    }
    for name, comp in comps.items():
        _write_component_csv(comp.entries, os.path.join(out_dir, f"{name}.csv"))
    with open(os.path.join(out_dir, "scene.json"), "w") as fh:
        json.dump(scene.params, fh, indent=2, sort_keys=True)
