"""Per-note expression extraction from synthesis parameters.

Six scalar controls are read back from the frame window a note occupies:
average log-amplitude (volume), its spread (fluctuation), where it peaks
(peak position), pitch-modulation depth at vibrato rates (vibrato), the
harmonic centroid (brightness), and early noise level (attack noise).
Each raw value is mapped onto [0, 1] by the shared NormalizationSpec.

Amplitude and noise go through ``20*log10`` with a 1e-7 floor first, so a
silent stream reads -140 dB rather than -inf.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .score import (
    DEFAULT_NORMALIZATION,
    FRAME_RATE,
    FRAME_SIZE,
    ExpressionControls,
    NormalizationSpec,
    Note,
    normalize_control,
)
from .synth import AudioBuffer, SynthParams, amplitude_to_db

#: Vibrato is only meaningful for notes at least this long (200 ms).
VIBRATO_MIN_FRAMES = 50
#: Modulation outside this rate band does not count as vibrato.
VIBRATO_RATE_BAND_HZ = (3.0, 9.0)
#: Short notes' pitch deviation is zero-padded to this many frames for the DFT.
VIBRATO_DFT_FRAMES = 1000

#: Attack noise is averaged over the first 40 ms of a note.
ATTACK_FRAMES = 10

LOUDNESS_WINDOW = 256
LOUDNESS_FLOOR_DB = -120.0


@dataclass(frozen=True)
class NoteWindow:
    """View of the synthesis parameters restricted to one note's frames."""

    f0: np.ndarray
    log_amplitude: np.ndarray  # a'(tau) = 20*log10 a, floored
    harmonic_distribution: np.ndarray
    log_noise: np.ndarray  # eta'(tau), per bin, floored

    def __post_init__(self):
        if len(self.f0) < 1:
            raise ValueError("note window must cover at least one frame")

    @property
    def n_frames(self) -> int:
        return len(self.f0)

    @classmethod
    def from_params(cls, params: SynthParams, note: Note) -> "NoteWindow":
        if not (0 <= note.onset_frame < note.offset_frame
                <= params.n_frames):
            raise ValueError(
                f"note frames [{note.onset_frame},{note.offset_frame}) "
                f"outside params length {params.n_frames}")
        sl = slice(note.onset_frame, note.offset_frame)
        return cls(
            f0=params.f0[sl],
            log_amplitude=np.asarray(amplitude_to_db(params.amplitude[sl])),
            harmonic_distribution=params.harmonic_distribution[sl],
            log_noise=np.asarray(amplitude_to_db(params.noise_magnitudes[sl])),
        )


def extract_volume(w: NoteWindow,
                   spec: NormalizationSpec = DEFAULT_NORMALIZATION,
                   raw: bool = False) -> float:
    """Mean log-amplitude over the note, in dB (raw) or [0,1]."""
    value = float(np.mean(w.log_amplitude))
    return value if raw else normalize_control(value, "volume", spec)


def extract_volume_fluctuation(w: NoteWindow,
                               spec: NormalizationSpec = DEFAULT_NORMALIZATION,
                               raw: bool = False) -> float:
    """Population standard deviation of the log-amplitude, in dB or [0,1]."""
    value = float(np.std(w.log_amplitude))
    return value if raw else normalize_control(
        value, "volume_fluctuation", spec)


def extract_volume_peak_position(w: NoteWindow) -> float:
    """Relative position of the amplitude maximum: argmax / T_n.

    Ties break to the first maximum, so a flat note reads 0.
    """
    return int(np.argmax(w.log_amplitude)) / w.n_frames


def semitone_deviation(f0: np.ndarray) -> np.ndarray:
    """Mean-removed pitch contour on the semitone scale."""
    f0 = np.asarray(f0, dtype=float)
    if np.any(f0 <= 0):
        raise ValueError("f0 must be positive for vibrato analysis")
    semitones = 69.0 + 12.0 * np.log2(f0 / 440.0)
    return semitones - semitones.mean()


def vibrato_depth_from_deviation(deviation: np.ndarray,
                                 frame_rate: int = FRAME_RATE) -> float:
    """Peak-reading DFT vibrato depth of a mean-removed semitone contour.

    Zero-pads to 1000 frames, finds the globally dominant bin, and returns
    its magnitude scaled by 2/T_n (a pure sinusoid of depth d reads d) if the
    dominant rate lies in the 3-9 Hz band; otherwise 0. Contours shorter than
    200 ms always read 0.
    """
    dev = np.asarray(deviation, dtype=float)
    t_n = len(dev)
    if t_n < VIBRATO_MIN_FRAMES:
        return 0.0
    n = max(VIBRATO_DFT_FRAMES, t_n)
    mags = np.abs(np.fft.rfft(dev, n=n))
    mags[0] = 0.0  # mean already removed; never pick DC
    peak = int(np.argmax(mags))
    peak_hz = peak * frame_rate / n
    lo, hi = VIBRATO_RATE_BAND_HZ
    if not lo <= peak_hz <= hi:
        return 0.0
    return float(2.0 * mags[peak] / t_n)


def extract_vibrato(w: NoteWindow, frame_rate: int = FRAME_RATE,
                    spec: NormalizationSpec = DEFAULT_NORMALIZATION,
                    raw: bool = False) -> float:
    """Vibrato depth in semitones (raw) or [0,1]; gated as described above."""
    value = vibrato_depth_from_deviation(semitone_deviation(w.f0), frame_rate)
    return value if raw else normalize_control(value, "vibrato", spec)


def extract_brightness(w: NoteWindow,
                       spec: NormalizationSpec = DEFAULT_NORMALIZATION,
                       raw: bool = False) -> float:
    """Mean harmonic centroid sum_k k*h_k averaged over the note."""
    k = np.arange(1, w.harmonic_distribution.shape[1] + 1)
    value = float(np.mean(w.harmonic_distribution @ k))
    return value if raw else normalize_control(value, "brightness", spec)


def extract_attack_noise(w: NoteWindow,
                         spec: NormalizationSpec = DEFAULT_NORMALIZATION,
                         raw: bool = False) -> float:
    """Per-bin average noise level (dB) over the first 10 frames (or fewer
    for shorter notes)."""
    m = min(ATTACK_FRAMES, w.n_frames)
    value = float(np.mean(w.log_noise[:m]))
    return value if raw else normalize_control(value, "attack_noise", spec)


def extract_note_expression(params: SynthParams, note: Note,
                            spec: NormalizationSpec = DEFAULT_NORMALIZATION,
                            ) -> ExpressionControls:
    """All six controls for one note, each normalized into [0,1]."""
    w = NoteWindow.from_params(params, note)
    return ExpressionControls(
        volume=extract_volume(w, spec),
        volume_fluctuation=extract_volume_fluctuation(w, spec),
        volume_peak_position=extract_volume_peak_position(w),
        vibrato=extract_vibrato(w, spec=spec),
        brightness=extract_brightness(w, spec),
        attack_noise=extract_attack_noise(w, spec),
    )


def a_weighting_db(frequency_hz: np.ndarray | float) -> np.ndarray | float:
    """IEC 61672 analytic A-weighting curve in dB (0 dB at 1 kHz)."""
    f2 = np.square(np.asarray(frequency_hz, dtype=float))
    with np.errstate(divide="ignore"):
        ra = (12194.0 ** 2 * f2 ** 2) / (
            (f2 + 20.6 ** 2)
            * np.sqrt((f2 + 107.7 ** 2) * (f2 + 737.9 ** 2))
            * (f2 + 12194.0 ** 2))
        out = 20.0 * np.log10(ra) + 2.0
    return out


def compute_loudness(audio: AudioBuffer,
                     frame_size: int = FRAME_SIZE) -> np.ndarray:
    """A-weighted frame loudness in dB, one value per 4 ms frame.

    Hann window of 256 samples centered on each frame, power spectrum,
    per-bin A-weighting, power sum. Magnitudes are scaled so a sine's main
    bin reads its amplitude; output is floored at -120 dB.
    """
    x = audio.samples
    if len(x) == 0:
        raise ValueError("empty audio")
    n_frames = len(x) // frame_size
    win = np.hanning(LOUDNESS_WINDOW)
    pad = LOUDNESS_WINDOW  # generous zero padding for centered windows
    padded = np.concatenate([np.zeros(pad), x, np.zeros(pad + LOUDNESS_WINDOW)])
    centers = np.arange(n_frames) * frame_size + frame_size // 2 + pad
    starts = centers - LOUDNESS_WINDOW // 2
    frames = np.stack([padded[s:s + LOUDNESS_WINDOW] for s in starts])
    spec = np.fft.rfft(frames * win, axis=1)
    # |X| scaled so a unit-amplitude sine puts magnitude 1.0 in its bin
    mags = np.abs(spec) / (win.sum() / 2.0)
    freqs = np.fft.rfftfreq(LOUDNESS_WINDOW, d=1.0 / audio.sample_rate)
    weights = 10.0 ** (a_weighting_db(freqs) / 10.0)
    weights[0] = 0.0  # DC carries no loudness
    power = np.sum(mags ** 2 * weights, axis=1)
    floor = 10.0 ** (LOUDNESS_FLOOR_DB / 10.0)
    return 10.0 * np.log10(np.maximum(power, floor))
