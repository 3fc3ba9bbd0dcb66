"""Note-level data model: notes, sequences, expression controls, normalization.

All timing is in frames on a fixed 250 frames/s grid (64 samples at 16 kHz),
so note boundaries are exact integers and never suffer rounding drift.
"""
from __future__ import annotations

from dataclasses import dataclass, fields

FRAME_RATE = 250
SAMPLE_RATE = 16000
FRAME_SIZE = 64  # samples per frame

#: Expression control names, in canonical order.
CONTROL_NAMES = (
    "volume",
    "volume_fluctuation",
    "volume_peak_position",
    "vibrato",
    "brightness",
    "attack_noise",
)


@dataclass(frozen=True)
class Note:
    """A single monophonic note on the frame grid.

    ``offset_frame`` is exclusive, so the duration is
    ``offset_frame - onset_frame`` frames.
    """

    pitch: int
    onset_frame: int
    offset_frame: int

    @property
    def duration(self) -> int:
        return self.offset_frame - self.onset_frame


@dataclass(frozen=True)
class NoteSequence:
    """Ordered, non-overlapping notes plus the total frame count.

    Frames covered by no note are rests. Construction does not validate;
    use :func:`validate_sequence` to get a full violation report.
    """

    notes: tuple[Note, ...]
    total_frames: int

    def __init__(self, notes, total_frames: int):
        object.__setattr__(self, "notes", tuple(notes))
        object.__setattr__(self, "total_frames", int(total_frames))


@dataclass(frozen=True)
class ExpressionControls:
    """The six per-note expression scalars, each in [0, 1]."""

    volume: float = 0.5
    volume_fluctuation: float = 0.5
    volume_peak_position: float = 0.5
    vibrato: float = 0.5
    brightness: float = 0.5
    attack_noise: float = 0.5

    def as_dict(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in CONTROL_NAMES}

    def replace(self, **kwargs: float) -> "ExpressionControls":
        d = self.as_dict()
        d.update(kwargs)
        return ExpressionControls(**d)

    def __post_init__(self):
        for name in CONTROL_NAMES:
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"expression.{name} out of [0,1]: {v!r}")


#: Neutral expression applied to notes whose score entry carries none.
DEFAULT_EXPRESSION = ExpressionControls()


@dataclass(frozen=True)
class NormalizationSpec:
    """Affine maps between raw extractor units and the [0, 1] control scale.

    The paper-style extractors produce dB, semitones, and a harmonic index;
    these ranges pin how each maps onto [0, 1]. Values outside a range clamp.
    Peak position is already relative, so it has no range here.
    """

    volume_db_range: tuple[float, float] = (-80.0, 0.0)
    fluctuation_db_range: tuple[float, float] = (0.0, 20.0)
    vibrato_semitone_range: tuple[float, float] = (0.0, 1.0)
    brightness_centroid_range: tuple[float, float] = (1.0, 60.0)
    attack_db_range: tuple[float, float] = (-120.0, 0.0)

    def __post_init__(self):
        for f in fields(self):
            lo, hi = getattr(self, f.name)
            if not lo < hi:
                raise ValueError(f"{f.name}: need min < max, got ({lo}, {hi})")

    def range_for(self, control_id: str) -> tuple[float, float]:
        try:
            return {
                "volume": self.volume_db_range,
                "volume_fluctuation": self.fluctuation_db_range,
                "volume_peak_position": (0.0, 1.0),
                "vibrato": self.vibrato_semitone_range,
                "brightness": self.brightness_centroid_range,
                "attack_noise": self.attack_db_range,
            }[control_id]
        except KeyError:
            raise ValueError(f"unknown control_id: {control_id!r}") from None


DEFAULT_NORMALIZATION = NormalizationSpec()


def normalize_control(raw: float, control_id: str,
                      spec: NormalizationSpec = DEFAULT_NORMALIZATION) -> float:
    """Map a raw extractor value onto [0, 1], clamping outside the range."""
    lo, hi = spec.range_for(control_id)
    x = (raw - lo) / (hi - lo)
    return min(1.0, max(0.0, x))


def denormalize_control(value: float, control_id: str,
                        spec: NormalizationSpec = DEFAULT_NORMALIZATION) -> float:
    """Inverse of :func:`normalize_control` on [0, 1]."""
    lo, hi = spec.range_for(control_id)
    return lo + value * (hi - lo)


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_sequence(seq: NoteSequence) -> ValidationReport:
    """Check every sequence invariant; returns all violations, never raises.

    Checks: pitch range (0 reserved for rests), positive duration, sortedness,
    overlap, and total_frames coverage.
    """
    problems: list[str] = []
    if seq.total_frames < 0:
        problems.append(f"total_frames negative: {seq.total_frames}")
    prev: Note | None = None
    for i, note in enumerate(seq.notes):
        where = f"notes[{i}]"
        if not 0 <= note.pitch <= 127:
            problems.append(f"{where}: pitch {note.pitch} out of [0,127]")
        elif note.pitch == 0:
            problems.append(f"{where}: pitch 0 is reserved for rests")
        if note.onset_frame < 0:
            problems.append(f"{where}: negative onset_frame {note.onset_frame}")
        if note.offset_frame <= note.onset_frame:
            problems.append(
                f"{where}: zero or negative duration "
                f"[{note.onset_frame},{note.offset_frame})")
        if prev is not None:
            if note.onset_frame < prev.onset_frame:
                problems.append(f"{where}: unsorted (onset {note.onset_frame} "
                                f"before previous {prev.onset_frame})")
            if note.onset_frame < prev.offset_frame:
                problems.append(
                    f"{where}: overlap at frame {note.onset_frame} "
                    f"(previous note ends at {prev.offset_frame})")
        if note.offset_frame > seq.total_frames:
            problems.append(
                f"{where}: offset_frame {note.offset_frame} exceeds "
                f"total_frames {seq.total_frames}")
        prev = note
    return ValidationReport(tuple(problems))


def midi_to_hz(pitch: float) -> float:
    """Equal-tempered frequency of a MIDI note number (A4 = 69 = 440 Hz)."""
    return 440.0 * 2.0 ** ((pitch - 69.0) / 12.0)


def hz_to_midi(f0: float) -> float:
    """Inverse of :func:`midi_to_hz`; input must be positive."""
    import math

    return 69.0 + 12.0 * math.log2(f0 / 440.0)
