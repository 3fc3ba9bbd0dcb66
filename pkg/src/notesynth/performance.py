"""Deterministic performance model: notes + expression -> synthesis parameters.

This is the inverse of the extractors in :mod:`notesynth.features`: every
generated stream is shaped so that extracting expression from the result
recovers the requested controls, exactly where physics allows and with an
explicit clamp report where it does not (Nyquist-limited brightness, the
200 ms vibrato gate, single-frame notes).

The frame-wise conditioning sequence (unpooled expression, pitch,
onset/offset flags, position code) is built here as well, so a learned
generator could consume the identical interface later.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .score import (
    DEFAULT_NORMALIZATION,
    FRAME_RATE,
    ExpressionControls,
    NormalizationSpec,
    Note,
    NoteSequence,
    denormalize_control,
    midi_to_hz,
    validate_sequence,
)
from .features import VIBRATO_MIN_FRAMES, vibrato_depth_from_deviation
from .synth import (
    AMP_FLOOR,
    N_HARMONICS,
    N_NOISE_BANDS,
    SAMPLE_RATE,
    SynthParams,
    db_to_amplitude,
)

ENVELOPE_SHAPES = ("asymmetric-triangle", "raised-cosine")


@dataclass(frozen=True)
class PerformanceModelConfig:
    """Knobs of the parametric generator.

    Vibrato rate is a constant, not a control: the expression vector encodes
    depth only, and the default 5.5 Hz sits mid-band of the 3-9 Hz gate and
    exactly on the extraction DFT grid.
    """

    vibrato_rate_hz: float = 5.5
    attack_frames: int = 10
    envelope_shape: str = "asymmetric-triangle"
    harmonic_rolloff: str = "exponential"
    noise_floor_db: float = -120.0
    noise_decay_frames: int = 10
    transition_smoothing_frames: int = 0

    def __post_init__(self):
        if not 3.0 <= self.vibrato_rate_hz <= 9.0:
            raise ValueError("vibrato_rate_hz must lie in [3, 9]")
        if self.attack_frames < 1:
            raise ValueError("attack_frames must be >= 1")
        if self.envelope_shape not in ENVELOPE_SHAPES:
            raise ValueError(f"unknown envelope_shape {self.envelope_shape!r}")
        if self.harmonic_rolloff != "exponential":
            raise ValueError("only the exponential rolloff family is implemented")
        if self.noise_floor_db < -140.0:
            raise ValueError("noise_floor_db below the -140 dB synthesis floor")
        if self.noise_decay_frames < 1:
            raise ValueError("noise_decay_frames must be >= 1")
        if self.transition_smoothing_frames < 0:
            raise ValueError("transition_smoothing_frames must be >= 0")


DEFAULT_CONFIG = PerformanceModelConfig()


@dataclass(frozen=True)
class ClampEvent:
    """A requested control value the generator could not realize exactly."""

    note_index: int
    control: str
    requested: float
    effective: float
    reason: str


@dataclass(frozen=True)
class GenerationReport:
    clamps: tuple[ClampEvent, ...] = ()

    @property
    def clean(self) -> bool:
        return not self.clamps

    def for_note(self, note_index: int) -> tuple[ClampEvent, ...]:
        return tuple(c for c in self.clamps if c.note_index == note_index)

    def clamped_controls(self, note_index: int) -> frozenset[str]:
        return frozenset(c.control for c in self.for_note(note_index))

    def as_dict(self) -> dict:
        return {"clamps": [dataclasses.asdict(c) for c in self.clamps]}


@dataclass(frozen=True)
class ConditioningSequence:
    """Frame-wise conditioning rows c(t) for the whole sequence.

    Expression and pitch are repeated over each note's frames; onset/offset
    are one-hot at a note's first/last frame; the position code ramps 0->1
    across the note. Rest frames are all zeros.
    """

    expression: np.ndarray  # (T, 6)
    pitch: np.ndarray  # (T,)
    onset: np.ndarray  # (T,) in {0, 1}
    offset: np.ndarray  # (T,) in {0, 1}
    position_code: np.ndarray  # (T,) in [0, 1]

    def __post_init__(self):
        T = len(self.pitch)
        shapes = (self.expression.shape, self.onset.shape,
                  self.offset.shape, self.position_code.shape)
        if self.expression.shape != (T, 6) or any(
                s != (T,) for s in shapes[1:]):
            raise ValueError("conditioning stream shapes disagree")

    @property
    def n_frames(self) -> int:
        return len(self.pitch)


def build_conditioning(seq: NoteSequence,
                       expressions: list[ExpressionControls] | tuple,
                       ) -> ConditioningSequence:
    """Unpool per-note expression over the frame grid with boundary flags."""
    if len(expressions) != len(seq.notes):
        raise ValueError(
            f"{len(expressions)} expression sets for {len(seq.notes)} notes")
    T = seq.total_frames
    expr = np.zeros((T, 6))
    pitch = np.zeros(T)
    onset = np.zeros(T)
    offset = np.zeros(T)
    position = np.zeros(T)
    for note, e in zip(seq.notes, expressions):
        sl = slice(note.onset_frame, note.offset_frame)
        expr[sl] = [e.volume, e.volume_fluctuation, e.volume_peak_position,
                    e.vibrato, e.brightness, e.attack_noise]
        pitch[sl] = note.pitch
        onset[note.onset_frame] = 1.0
        offset[note.offset_frame - 1] = 1.0
        t_n = note.duration
        if t_n > 1:
            position[sl] = np.arange(t_n) / (t_n - 1)
    return ConditioningSequence(expr, pitch, onset, offset, position)


def _envelope_shape(t_n: int, peak: int, kind: str) -> np.ndarray:
    """Unit envelope rising to 1 at ``peak`` and falling after; values in
    [0, 1] with a unique maximum whenever t_n > 1."""
    if t_n == 1:
        return np.ones(1)
    idx = np.arange(t_n, dtype=float)
    shape = np.empty(t_n)
    if peak > 0:
        shape[:peak + 1] = idx[:peak + 1] / peak
    else:
        shape[0] = 1.0
    if peak < t_n - 1:
        shape[peak:] = (t_n - 1 - idx[peak:]) / (t_n - 1 - peak)
        shape[peak] = 1.0
    if kind == "raised-cosine":
        shape = 0.5 - 0.5 * np.cos(np.pi * shape)
    return shape


def generate_amplitude_envelope(
        e: ExpressionControls, t_n: int,
        cfg: PerformanceModelConfig = DEFAULT_CONFIG,
        spec: NormalizationSpec = DEFAULT_NORMALIZATION,
) -> tuple[np.ndarray, list[ClampEvent]]:
    """Log-amplitude envelope (dB, length t_n) with exact mean and spread.

    A triangle (or raised cosine) peaking at the requested relative position
    is affinely adjusted so the mean equals the denormalized volume and the
    population std equals the denormalized fluctuation.
    """
    if t_n < 1:
        raise ValueError("t_n must be >= 1")
    mu = denormalize_control(e.volume, "volume", spec)
    sigma = denormalize_control(e.volume_fluctuation, "volume_fluctuation",
                                spec)
    q = e.volume_peak_position
    peak = int(np.floor(q * (t_n - 1) + 0.5))
    shape = _envelope_shape(t_n, peak, cfg.envelope_shape)
    clamps: list[ClampEvent] = []
    shape_std = float(np.std(shape))
    if shape_std == 0.0:
        env = np.full(t_n, mu)
        if sigma > 0.0:
            clamps.append(ClampEvent(
                -1, "volume_fluctuation", e.volume_fluctuation, 0.0,
                "single-frame note cannot carry amplitude fluctuation"))
        if q != 0.0:
            clamps.append(ClampEvent(
                -1, "volume_peak_position", q, 0.0,
                "single-frame note has no peak position"))
        return env, clamps
    alpha = sigma / shape_std
    env = mu + alpha * (shape - shape.mean())
    achieved = int(np.argmax(env))
    if achieved != peak:
        # fluctuation zero (or below float resolution at this level):
        # the envelope cannot articulate the requested peak
        clamps.append(ClampEvent(
            -1, "volume_peak_position", q, achieved / t_n,
            "envelope too flat to articulate the requested peak position"))
    return env, clamps


def generate_f0_contour(
        e: ExpressionControls, note: Note,
        cfg: PerformanceModelConfig = DEFAULT_CONFIG,
        spec: NormalizationSpec = DEFAULT_NORMALIZATION,
        prev_pitch: int | None = None,
) -> tuple[np.ndarray, list[ClampEvent]]:
    """Fundamental frequency (Hz, length t_n): base pitch plus calibrated
    sinusoidal vibrato.

    The requested depth is pre-divided by the extraction DFT's gain on a
    unit-depth deviation of this exact length and rate, so the depth read
    back equals the depth requested to float precision. Notes under the
    200 ms gate get a flat contour (reported when depth was requested).
    """
    t_n = note.duration
    base = midi_to_hz(note.pitch)
    depth = denormalize_control(e.vibrato, "vibrato", spec)
    clamps: list[ClampEvent] = []
    semitone_offset = np.zeros(t_n)
    if depth > 0.0:
        if t_n < VIBRATO_MIN_FRAMES:
            clamps.append(ClampEvent(
                -1, "vibrato", e.vibrato, 0.0,
                "note shorter than the 200 ms vibrato gate"))
        else:
            tau = np.arange(t_n)
            unit = np.sin(2.0 * np.pi * cfg.vibrato_rate_hz * tau / FRAME_RATE)
            gain = vibrato_depth_from_deviation(unit - unit.mean())
            if gain <= 0.0:
                clamps.append(ClampEvent(
                    -1, "vibrato", e.vibrato, 0.0,
                    "vibrato rate unresolvable at this note length"))
            else:
                semitone_offset = (depth / gain) * unit
    f0 = base * 2.0 ** (semitone_offset / 12.0)
    glide = min(cfg.transition_smoothing_frames, t_n)
    if glide > 0 and prev_pitch is not None and prev_pitch != note.pitch:
        ramp = (prev_pitch - note.pitch) * (1.0 - np.arange(glide) / glide)
        f0[:glide] *= 2.0 ** (ramp / 12.0)
    return f0, clamps


def _masked_centroid(x: float, audible_counts: np.ndarray,
                     count_weights: np.ndarray) -> float:
    """Mean over frames of the centroid of ``w_k = exp(x*(k-1))`` truncated
    to each frame's audible harmonic count."""
    total = 0.0
    for K, weight in zip(audible_counts, count_weights):
        k = np.arange(1, K + 1, dtype=float)
        w = np.exp(x * (k - (K if x > 0 else 1)))
        total += weight * float((k * w).sum() / w.sum())
    return total


def generate_harmonic_distribution(
        e: ExpressionControls, f0_contour: np.ndarray,
        cfg: PerformanceModelConfig = DEFAULT_CONFIG,
        spec: NormalizationSpec = DEFAULT_NORMALIZATION,
        sample_rate: int = SAMPLE_RATE,
) -> tuple[np.ndarray, list[ClampEvent]]:
    """Per-frame harmonic rows ``h_k ~ exp(x*k)`` sharing one rolloff.

    The rolloff is bisected until the note's mean Nyquist-masked centroid
    matches the denormalized brightness within 1e-6; unreachable targets
    clamp to the nearest extreme and are reported.
    """
    f0 = np.asarray(f0_contour, dtype=float)
    t_n = len(f0)
    if t_n == 0:
        return np.zeros((0, N_HARMONICS)), []
    audible = np.minimum(
        N_HARMONICS, (sample_rate / 2 / f0).astype(int))
    if np.any(audible < 1):
        bad = int(np.argmax(audible < 1))
        raise ValueError(
            f"f0 {f0[bad]:.1f} Hz at frame {bad} has no harmonic below "
            "Nyquist")
    counts, weights = np.unique(audible, return_counts=True)
    weights = weights / t_n
    target = denormalize_control(e.brightness, "brightness", spec)
    clamps: list[ClampEvent] = []

    x_lo, x_hi = -60.0, 60.0
    c_lo = _masked_centroid(x_lo, counts, weights)
    c_hi = _masked_centroid(x_hi, counts, weights)
    if target <= c_lo:
        x = x_lo
        if target < c_lo - 1e-6:
            clamps.append(ClampEvent(
                -1, "brightness", e.brightness,
                float(np.clip((c_lo - 1.0) / 59.0, 0.0, 1.0)),
                "centroid below reachable minimum"))
    elif target >= c_hi:
        x = x_hi
        if target > c_hi + 1e-6:
            clamps.append(ClampEvent(
                -1, "brightness", e.brightness,
                float(np.clip((c_hi - 1.0) / 59.0, 0.0, 1.0)),
                "centroid unachievable after Nyquist masking"))
    else:
        for _ in range(200):
            x = 0.5 * (x_lo + x_hi)
            c = _masked_centroid(x, counts, weights)
            if abs(c - target) <= 1e-6:
                break
            if c < target:
                x_lo = x
            else:
                x_hi = x

    k = np.arange(1, N_HARMONICS + 1, dtype=float)
    rows = np.zeros((t_n, N_HARMONICS))
    for K in counts:
        sel = audible == K
        w = np.exp(x * (k[:K] - (K if x > 0 else 1)))
        rows[np.ix_(sel, np.arange(K))] = w / w.sum()
    return rows, clamps


def generate_noise_envelope(
        e: ExpressionControls, t_n: int,
        cfg: PerformanceModelConfig = DEFAULT_CONFIG,
        spec: NormalizationSpec = DEFAULT_NORMALIZATION,
) -> tuple[np.ndarray, list[ClampEvent]]:
    """Noise magnitudes (t_n, 65): the attack level held over the first
    ``min(attack_frames, t_n)`` frames, then a linear dB slide to the floor.
    Flat across bins, so the per-bin average read back is exact."""
    if t_n < 1:
        raise ValueError("t_n must be >= 1")
    level = denormalize_control(e.attack_noise, "attack_noise", spec)
    floor = cfg.noise_floor_db
    env_db = np.full(t_n, floor)
    m = min(cfg.attack_frames, t_n)
    env_db[:m] = level
    decay = cfg.noise_decay_frames
    for j in range(min(decay, max(t_n - m, 0))):
        env_db[m + j] = level + (floor - level) * (j + 1) / decay
    eta = np.repeat(db_to_amplitude(env_db)[:, None], N_NOISE_BANDS, axis=1)
    return eta, []


def generate_synth_params(
        seq: NoteSequence,
        expressions: list[ExpressionControls] | tuple,
        cfg: PerformanceModelConfig = DEFAULT_CONFIG,
        spec: NormalizationSpec = DEFAULT_NORMALIZATION,
) -> tuple[SynthParams, GenerationReport]:
    """Render the whole sequence to frame-wise synthesis parameters.

    Rest frames hold the previous note's base pitch at the amplitude floor
    with a neutral (uniform audible) harmonic row, so a note's expression
    never leaks outside its own frames. Returns the parameters plus a report
    of every control that had to be clamped.
    """
    report = validate_sequence(seq)
    if not report.ok:
        raise ValueError("invalid sequence: " + "; ".join(report.violations))
    if len(expressions) != len(seq.notes):
        raise ValueError(
            f"{len(expressions)} expression sets for {len(seq.notes)} notes")

    T = seq.total_frames
    f0 = np.zeros(T)
    amplitude = np.full(T, AMP_FLOOR)
    harmonics = np.zeros((T, N_HARMONICS))
    noise = np.full((T, N_NOISE_BANDS),
                    float(db_to_amplitude(cfg.noise_floor_db)))
    clamps: list[ClampEvent] = []

    # rest pitch: previous note's pitch, first note's before it, A4 if empty
    rest_pitch = np.full(T, seq.notes[0].pitch if seq.notes else 69)
    for note in seq.notes:
        rest_pitch[note.onset_frame:] = note.pitch
    f0[:] = midi_to_hz(rest_pitch)

    prev_pitch: int | None = None
    for i, (note, e) in enumerate(zip(seq.notes, expressions)):
        sl = slice(note.onset_frame, note.offset_frame)
        env_db, ev = generate_amplitude_envelope(e, note.duration, cfg, spec)
        clamps += [dataclasses.replace(c, note_index=i) for c in ev]
        amplitude[sl] = db_to_amplitude(env_db)

        contour, ev = generate_f0_contour(e, note, cfg, spec, prev_pitch)
        clamps += [dataclasses.replace(c, note_index=i) for c in ev]
        f0[sl] = contour

        rows, ev = generate_harmonic_distribution(e, contour, cfg, spec)
        clamps += [dataclasses.replace(c, note_index=i) for c in ev]
        harmonics[sl] = rows

        eta, ev = generate_noise_envelope(e, note.duration, cfg, spec)
        clamps += [dataclasses.replace(c, note_index=i) for c in ev]
        noise[sl] = eta
        prev_pitch = note.pitch

    # neutral harmonic rows for rests (uniform over audible harmonics)
    in_note = np.zeros(T, dtype=bool)
    for note in seq.notes:
        in_note[note.onset_frame:note.offset_frame] = True
    if T and not np.all(in_note):
        rest_f0 = f0[~in_note]
        audible = np.minimum(N_HARMONICS,
                             (SAMPLE_RATE / 2 / rest_f0).astype(int))
        rest_rows = np.zeros((len(rest_f0), N_HARMONICS))
        for K in np.unique(audible):
            rest_rows[np.ix_(audible == K, np.arange(K))] = 1.0 / K
        harmonics[~in_note] = rest_rows

    params = SynthParams(f0, amplitude, harmonics, noise)
    return params, GenerationReport(tuple(clamps))
