"""Evaluation metrics: multi-scale spectral loss, expression RMSE, Pearson
correlation, and the control-sweep harness.

The spectral loss is used here as a distance between renders, not a training
objective. L1 terms are means over matrix entries, so values are comparable
across audio lengths and FFT-size counts (but not to implementations that
sum instead).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .score import (
    CONTROL_NAMES,
    DEFAULT_NORMALIZATION,
    ExpressionControls,
    NormalizationSpec,
    NoteSequence,
)
from .synth import AudioBuffer
from .features import extract_note_expression
from .performance import (
    DEFAULT_CONFIG,
    PerformanceModelConfig,
    generate_synth_params,
)

DEFAULT_FFT_SIZES = (2048, 1024, 512, 256, 128, 64)


@dataclass(frozen=True)
class SpectralLossConfig:
    fft_sizes: tuple[int, ...] = DEFAULT_FFT_SIZES
    beta: float = 1.0  # weight of the log-magnitude term
    log_epsilon: float = 1e-7

    def __post_init__(self):
        for n in self.fft_sizes:
            if n < 2 or n & (n - 1):
                raise ValueError(f"fft size {n} is not a power of two")
        if self.beta < 0:
            raise ValueError("beta must be >= 0")

    def hop(self, fft_size: int) -> int:
        return fft_size // 4


DEFAULT_SPECTRAL_CONFIG = SpectralLossConfig()


def stft_magnitude(audio: AudioBuffer | np.ndarray, fft_size: int,
                   hop: int | None = None,
                   window: str = "hann") -> np.ndarray:
    """Magnitude STFT, frames centered at multiples of the hop with
    zero-padded edges. Returns (n_frames, fft_size//2 + 1)."""
    x = audio.samples if isinstance(audio, AudioBuffer) else np.asarray(
        audio, dtype=float)
    if hop is None:
        hop = fft_size // 4
    if len(x) < fft_size:
        raise ValueError(
            f"audio length {len(x)} shorter than one frame ({fft_size})")
    if window == "hann":
        n = np.arange(fft_size)
        win = 0.5 - 0.5 * np.cos(2.0 * np.pi * n / fft_size)
    else:
        raise ValueError(f"unsupported window {window!r}")
    pad = fft_size // 2
    padded = np.concatenate([np.zeros(pad), x, np.zeros(pad)])
    n_frames = 1 + (len(x) - 1) // hop
    starts = np.arange(n_frames) * hop  # window center = start in x coords
    frames = np.stack([padded[s:s + fft_size] for s in starts])
    return np.abs(np.fft.rfft(frames * win, axis=1))


def multi_scale_spectral_loss(
        a: AudioBuffer, b: AudioBuffer,
        cfg: SpectralLossConfig = DEFAULT_SPECTRAL_CONFIG,
) -> tuple[float, dict[int, float]]:
    """Summed linear + log L1 STFT distance over all configured FFT sizes.

    Returns (total, per-size dict). Mismatched lengths are allowed: the
    shorter buffer is zero-padded to the longer.
    """
    xa, xb = a.samples, b.samples
    if len(xa) == 0 or len(xb) == 0:
        raise ValueError("empty audio")
    n = max(len(xa), len(xb))
    xa = np.pad(xa, (0, n - len(xa)))
    xb = np.pad(xb, (0, n - len(xb)))
    per_size: dict[int, float] = {}
    for size in cfg.fft_sizes:
        sa = stft_magnitude(xa, size, cfg.hop(size))
        sb = stft_magnitude(xb, size, cfg.hop(size))
        lin = float(np.mean(np.abs(sa - sb)))
        log = float(np.mean(np.abs(
            np.log(sa + cfg.log_epsilon) - np.log(sb + cfg.log_epsilon))))
        per_size[size] = lin + cfg.beta * log
    return float(sum(per_size.values())), per_size


def expression_rmse(a: list[ExpressionControls],
                    b: list[ExpressionControls]) -> float:
    """Root mean square error over all 6*N control scalars."""
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)}")
    if not a:
        raise ValueError("empty expression lists")
    va = np.array([[getattr(e, n) for n in CONTROL_NAMES] for e in a])
    vb = np.array([[getattr(e, n) for n in CONTROL_NAMES] for e in b])
    return float(np.sqrt(np.mean((va - vb) ** 2)))


class ZeroVarianceError(ValueError):
    """Pearson correlation is undefined when an input has no variance."""


def pearson_correlation(xs: np.ndarray, ys: np.ndarray) -> float:
    """Sample Pearson r; raises ZeroVarianceError when undefined."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if len(xs) != len(ys):
        raise ValueError("length mismatch")
    if len(xs) < 2:
        raise ValueError("need at least two points")
    dx = xs - xs.mean()
    dy = ys - ys.mean()
    vx = float(np.dot(dx, dx))
    vy = float(np.dot(dy, dy))
    if vx == 0.0 or vy == 0.0:
        raise ZeroVarianceError(
            "undefined correlation: input with zero variance")
    return float(np.dot(dx, dy) / np.sqrt(vx * vy))


SWEEP_VALUES = tuple(np.round(np.arange(0.0, 1.0001, 0.1), 10))


@dataclass(frozen=True)
class SweepResult:
    control: str
    inputs: tuple[float, ...]
    extracted: tuple[float, ...]  # mean over notes, per input value
    r: float | None
    error: str | None = None


def control_sweep(seq: NoteSequence, base_expr: ExpressionControls,
                  control_id: str,
                  cfg: PerformanceModelConfig = DEFAULT_CONFIG,
                  spec: NormalizationSpec = DEFAULT_NORMALIZATION,
                  ) -> SweepResult:
    """Interpolate one control 0.0 to 1.0 in steps of 0.1 over all notes,
    regenerate, re-extract, and correlate input with mean extracted value.

    A degenerate sweep (extracted value constant, e.g. gated vibrato on
    short notes) reports the zero-variance condition instead of raising.
    """
    if control_id not in CONTROL_NAMES:
        raise ValueError(f"unknown control_id: {control_id!r}")
    extracted_means: list[float] = []
    for v in SWEEP_VALUES:
        expr = [base_expr.replace(**{control_id: v})] * len(seq.notes)
        params, _report = generate_synth_params(seq, expr, cfg, spec)
        values = [getattr(extract_note_expression(params, note, spec),
                          control_id) for note in seq.notes]
        extracted_means.append(float(np.mean(values)))
    try:
        r = pearson_correlation(np.array(SWEEP_VALUES),
                                np.array(extracted_means))
        return SweepResult(control_id, SWEEP_VALUES,
                           tuple(extracted_means), r)
    except ZeroVarianceError as exc:
        return SweepResult(control_id, SWEEP_VALUES,
                           tuple(extracted_means), None, str(exc))
