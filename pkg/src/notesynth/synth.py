"""Harmonic-plus-noise synthesis engine.

Renders frame-wise synthesis parameters (fundamental frequency, amplitude,
harmonic distribution, noise band magnitudes) into audio at 16 kHz. All
operations are pure functions of their inputs; the filtered-noise source is
seeded, so identical inputs give bit-identical buffers.

Conventions:
  * 250 frames/s, 64 samples/frame, 60 harmonics, 65 noise bands.
  * Frame values are anchored at sample ``i*64 + 32`` and linearly
    interpolated to the sample grid (ends held).
  * Oscillator phase is the cumulative sum of the per-sample frequency:
    ``phi_k(n) = 2*pi*k*sum_{m<=n} f0(m)/sr``.
  * Harmonics whose instantaneous frequency exceeds the Nyquist limit
    contribute nothing (masked per sample).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import signal as sp_signal

from .score import FRAME_SIZE, SAMPLE_RATE

N_HARMONICS = 60
N_NOISE_BANDS = 65

#: Floor applied before any log/exp-sigmoid output; -140 dB.
AMP_FLOOR = 1e-7

_NOISE_FIR_TAPS = 257  # odd -> type-I linear phase, delay (taps-1)/2


def amplitude_to_db(a: np.ndarray | float) -> np.ndarray | float:
    """20*log10(a) with the synthesis floor (1e-7 -> -140 dB), no -inf."""
    return 20.0 * np.log10(np.maximum(a, AMP_FLOOR))


def db_to_amplitude(db: np.ndarray | float) -> np.ndarray | float:
    return 10.0 ** (np.asarray(db, dtype=float) / 20.0)


def exp_sigmoid(x: np.ndarray | float) -> np.ndarray | float:
    """Exponentiated sigmoid nonlinearity: ``2.0 * sigmoid(x)**ln(10) + 1e-7``.

    Monotone increasing from 1e-7 to 2.0 + 1e-7; used to map unconstrained
    values to strictly positive amplitudes.
    """
    x = np.asarray(x, dtype=float)
    sig = np.where(x >= 0, 1.0 / (1.0 + np.exp(-np.abs(x))),
                   np.exp(-np.abs(x)) / (1.0 + np.exp(-np.abs(x))))
    out = 2.0 * sig ** np.log(10.0) + 1e-7
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class SynthParams:
    """Frame-wise synthesizer state: (f0, a, h[60], eta[65]) per frame.

    Invariants (checked on construction): all streams share length T,
    f0 and amplitude non-negative, harmonic rows sum to 1 with entries
    above Nyquist zeroed, noise magnitudes at or above the 1e-7 floor.
    """

    f0: np.ndarray
    amplitude: np.ndarray
    harmonic_distribution: np.ndarray
    noise_magnitudes: np.ndarray
    sample_rate: int = SAMPLE_RATE

    def __post_init__(self):
        f0 = np.asarray(self.f0, dtype=float)
        a = np.asarray(self.amplitude, dtype=float)
        h = np.asarray(self.harmonic_distribution, dtype=float)
        eta = np.asarray(self.noise_magnitudes, dtype=float)
        object.__setattr__(self, "f0", f0)
        object.__setattr__(self, "amplitude", a)
        object.__setattr__(self, "harmonic_distribution", h)
        object.__setattr__(self, "noise_magnitudes", eta)
        T = len(f0)
        if not (len(a) == T and h.shape[:1] == (T,) and eta.shape[:1] == (T,)):
            raise ValueError("synth param streams disagree on frame count")
        if h.ndim != 2 or h.shape[1] != N_HARMONICS:
            raise ValueError(f"harmonic_distribution must be (T,{N_HARMONICS})")
        if eta.ndim != 2 or eta.shape[1] != N_NOISE_BANDS:
            raise ValueError(f"noise_magnitudes must be (T,{N_NOISE_BANDS})")
        if T == 0:
            return
        if np.any(f0 < 0):
            raise ValueError("negative f0")
        if np.any(a < 0):
            raise ValueError("negative amplitude")
        if np.any(h < 0):
            raise ValueError("negative harmonic distribution entry")
        sums = h.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > 1e-6):
            bad = int(np.argmax(np.abs(sums - 1.0)))
            raise ValueError(
                f"harmonic distribution at frame {bad} sums to {sums[bad]:.8f}")
        k = np.arange(1, N_HARMONICS + 1)
        above = k[None, :] * f0[:, None] > self.sample_rate / 2
        if np.any(h[above] != 0.0):
            raise ValueError("nonzero harmonic above Nyquist")
        if np.any(eta < AMP_FLOOR):
            raise ValueError(f"noise magnitude below floor {AMP_FLOOR}")

    @property
    def n_frames(self) -> int:
        return len(self.f0)


@dataclass(frozen=True)
class AudioBuffer:
    """Mono sample stream; nominal range [-1, 1]."""

    samples: np.ndarray
    sample_rate: int = SAMPLE_RATE

    def __post_init__(self):
        object.__setattr__(
            self, "samples", np.asarray(self.samples, dtype=float).reshape(-1))

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


REVERB_IR_LENGTH = 48000


def _identity_ir() -> np.ndarray:
    ir = np.zeros(REVERB_IR_LENGTH)
    ir[0] = 1.0
    return ir


@dataclass(frozen=True)
class ReverbConfig:
    """Convolution reverb with an exponential tail decay.

    The decay multiplies the impulse response by
    ``exp(-decay_rate * (t - decay_onset_sample) / sr)`` past the onset,
    taming long tails without touching the early response.
    """

    impulse_response: np.ndarray = field(default_factory=_identity_ir)
    decay_enabled: bool = True
    decay_onset_sample: int = 16000
    decay_rate: float = 4.0  # nepers per second
    emit_tail: bool = False

    def __post_init__(self):
        ir = np.asarray(self.impulse_response, dtype=float).reshape(-1)
        object.__setattr__(self, "impulse_response", ir)
        if len(ir) != REVERB_IR_LENGTH:
            raise ValueError(
                f"impulse response must have length {REVERB_IR_LENGTH}, "
                f"got {len(ir)}")

    def effective_ir(self, sample_rate: int = SAMPLE_RATE) -> np.ndarray:
        ir = self.impulse_response
        if not self.decay_enabled:
            return ir.copy()
        t = np.arange(len(ir))
        tail = t > self.decay_onset_sample
        out = ir.copy()
        out[tail] *= np.exp(
            -self.decay_rate * (t[tail] - self.decay_onset_sample) / sample_rate)
        return out


def upsample_controls(frames: np.ndarray, factor: int = FRAME_SIZE,
                      mode: str = "linear") -> np.ndarray:
    """Expand a frame-rate stream to the sample grid.

    Linear mode interpolates between anchors at ``i*factor + factor//2``,
    holding the first/last values at the edges; hold mode repeats each frame.
    Works on 1-D streams or (T, K) stacks (interpolated per column).
    """
    frames = np.asarray(frames, dtype=float)
    if factor < 1:
        raise ValueError("factor must be >= 1")
    if frames.shape[0] == 0:
        raise ValueError("empty control stream")
    if mode == "hold":
        return np.repeat(frames, factor, axis=0)
    if mode != "linear":
        raise ValueError(f"unknown upsample mode: {mode!r}")
    T = frames.shape[0]
    anchors = np.arange(T) * factor + factor // 2
    grid = np.arange(T * factor)
    if frames.ndim == 1:
        return np.interp(grid, anchors, frames)
    out = np.empty((T * factor,) + frames.shape[1:])
    for col in range(frames.shape[1]):
        out[:, col] = np.interp(grid, anchors, frames[:, col])
    return out


def normalize_harmonics(raw: np.ndarray, f0: np.ndarray | float,
                        sample_rate: int = SAMPLE_RATE) -> np.ndarray:
    """Zero harmonics above Nyquist and rescale the rest to sum to 1.

    Accepts one frame (``raw`` shape (K,), scalar ``f0``) or a stack
    (``(T, K)`` with ``f0`` shape (T,)). Raises if a frame has no audible
    harmonic mass left after masking.
    """
    raw = np.asarray(raw, dtype=float)
    single = raw.ndim == 1
    rows = raw[None, :] if single else raw
    f0s = np.atleast_1d(np.asarray(f0, dtype=float))
    if len(f0s) != len(rows):
        raise ValueError("f0 / harmonic row count mismatch")
    if np.any(rows < 0):
        raise ValueError("negative harmonic amplitude")
    k = np.arange(1, rows.shape[1] + 1)
    masked = np.where(k[None, :] * f0s[:, None] > sample_rate / 2, 0.0, rows)
    sums = masked.sum(axis=1)
    if np.any(sums <= 0):
        bad = int(np.argmax(sums <= 0))
        raise ValueError(f"no audible harmonics at frame {bad} "
                         f"(f0={f0s[bad]:g} Hz)")
    out = masked / sums[:, None]
    return out[0] if single else out


def render_harmonic(f0: np.ndarray, amplitude: np.ndarray,
                    harmonic_distribution: np.ndarray,
                    sample_rate: int = SAMPLE_RATE) -> AudioBuffer:
    """Additive oscillator bank: ``A(n) * sum_k H_k(n) * sin(phi_k(n))``.

    All frame streams are linearly upsampled; the phase of harmonic k is
    ``2*pi*k*cumsum(f0)/sr``, so chirps stay phase-continuous. Per-sample
    Nyquist masking keeps the output alias-free for any f0 trajectory.
    """
    f0 = np.asarray(f0, dtype=float)
    amplitude = np.asarray(amplitude, dtype=float)
    h = np.asarray(harmonic_distribution, dtype=float)
    T = len(f0)
    if len(amplitude) != T or h.shape[:1] != (T,):
        raise ValueError("stream lengths disagree")
    if T == 0:
        return AudioBuffer(np.zeros(0), sample_rate)
    if np.any(f0 < 0):
        raise ValueError("negative f0")

    f0_s = upsample_controls(f0, FRAME_SIZE)
    amp_s = upsample_controls(amplitude, FRAME_SIZE)
    h_s = upsample_controls(h, FRAME_SIZE)

    base_phase = 2.0 * np.pi * np.cumsum(f0_s) / sample_rate
    k = np.arange(1, h.shape[1] + 1)
    out = np.empty(T * FRAME_SIZE)
    # chunked so the (samples x harmonics) workspace stays bounded
    chunk = 65536
    for lo in range(0, len(out), chunk):
        hi = min(lo + chunk, len(out))
        weights = np.where(
            k[None, :] * f0_s[lo:hi, None] <= sample_rate / 2,
            h_s[lo:hi], 0.0)
        out[lo:hi] = np.einsum(
            "nk,nk->n", np.sin(base_phase[lo:hi, None] * k[None, :]), weights)
    return AudioBuffer(amp_s * out, sample_rate)


def _noise_fir(band_magnitudes: np.ndarray, sample_rate: int) -> np.ndarray:
    """Zero-phase FIR whose amplitude response linearly interpolates the
    band magnitudes over [0, Nyquist]."""
    freqs = np.linspace(0.0, 1.0, len(band_magnitudes))
    return sp_signal.firwin2(_NOISE_FIR_TAPS, freqs, band_magnitudes,
                             window="hann")


def render_noise(noise_magnitudes: np.ndarray,
                 sample_rate: int = SAMPLE_RATE, seed: int = 0) -> AudioBuffer:
    """Filtered uniform noise: per-frame FIR from the 65 linear bands,
    Hann-windowed 50%-overlap-add at the frame hop.

    The noise source is ``default_rng(seed)`` uniform in [-1, 1]; the same
    seed always yields the same buffer.
    """
    eta = np.asarray(noise_magnitudes, dtype=float)
    T = eta.shape[0]
    if T == 0:
        return AudioBuffer(np.zeros(0), sample_rate)
    if eta.ndim != 2:
        raise ValueError("noise_magnitudes must be (T, bands)")
    if np.any(eta <= 0):
        raise ValueError("noise magnitudes must be positive")

    n_out = T * FRAME_SIZE
    block = 2 * FRAME_SIZE
    rng = np.random.default_rng(seed)
    # extra pre-roll block so the first frame is fully windowed (COLA = 1)
    noise = rng.uniform(-1.0, 1.0, n_out + block)
    w = 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(block) / block)

    out = np.zeros(n_out)
    half = (_NOISE_FIR_TAPS - 1) // 2
    for t in range(-1, T):
        fir = _noise_fir(eta[max(t, 0)], sample_rate)
        seg = noise[(t + 1) * FRAME_SIZE:(t + 1) * FRAME_SIZE + block] * w
        y = sp_signal.fftconvolve(seg, fir)  # len block + taps - 1
        start = t * FRAME_SIZE - half  # delay-compensated (zero phase)
        lo = max(start, 0)
        hi = min(start + len(y), n_out)
        if lo < hi:
            out[lo:hi] += y[lo - start:hi - start]
    return AudioBuffer(out, sample_rate)


def apply_reverb(dry: AudioBuffer, cfg: ReverbConfig) -> AudioBuffer:
    """Frequency-domain convolution with the (optionally decayed) IR.

    Output is truncated to the dry length unless ``cfg.emit_tail``.
    """
    ir = cfg.effective_ir(dry.sample_rate)
    if len(dry.samples) == 0:
        return AudioBuffer(np.zeros(0), dry.sample_rate)
    wet = sp_signal.fftconvolve(dry.samples, ir)
    if not cfg.emit_tail:
        wet = wet[:len(dry.samples)]
    return AudioBuffer(wet, dry.sample_rate)


def synthesize(params: SynthParams, reverb: ReverbConfig | None = None,
               seed: int = 0) -> AudioBuffer:
    """Full render: harmonic + filtered noise, then optional reverb."""
    harm = render_harmonic(params.f0, params.amplitude,
                           params.harmonic_distribution, params.sample_rate)
    noise = render_noise(params.noise_magnitudes, params.sample_rate, seed)
    mix = AudioBuffer(harm.samples + noise.samples, params.sample_rate)
    if reverb is not None:
        mix = apply_reverb(mix, reverb)
    return mix
