"""Serialization: score JSON, WAV audio, synthesis-parameter dumps, IR files.

Formats are pinned byte-for-byte where determinism matters:
  * WAV: RIFF PCM, 16-bit signed little-endian, mono, 16 kHz; samples are
    clamped to [-1, 1] and scaled by 32767 with round-half-away-from-zero.
    A 32-bit float variant sits behind a flag.
  * Parameter dumps: little-endian float32 streams (f0, amplitude,
    harmonics frame-major, noise frame-major) after a fixed header; a JSON
    text form exists for inspection.
  * Impulse responses: raw little-endian float32, exactly 48000 values.
"""
from __future__ import annotations

import json
import struct

import numpy as np

from .score import (
    CONTROL_NAMES,
    FRAME_RATE,
    ExpressionControls,
    Note,
    NoteSequence,
    validate_sequence,
)
from .synth import (
    AMP_FLOOR,
    N_HARMONICS,
    N_NOISE_BANDS,
    REVERB_IR_LENGTH,
    SAMPLE_RATE,
    AudioBuffer,
    SynthParams,
)


class ScoreParseError(ValueError):
    """Malformed score document: syntax, schema, or range problems."""


class ScoreValidationError(ValueError):
    """Well-formed score whose notes violate sequence invariants."""


def _require_keys(obj: dict, allowed: set[str], required: set[str],
                  where: str) -> None:
    for key in obj:
        if key not in allowed:
            raise ScoreParseError(f"unknown field {key!r} at {where}")
    for key in required:
        if key not in obj:
            raise ScoreParseError(f"missing field {key!r} at {where}")


def _require_int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScoreParseError(f"{where} must be an integer, got {value!r}")
    return value


def parse_score(text: str | bytes) -> tuple[
        NoteSequence, list[ExpressionControls | None]]:
    """Parse and validate a score document.

    Returns the note sequence plus one optional expression set per note
    (None where the document omits the block). Unknown fields and range
    violations raise :class:`ScoreParseError` with the offending path;
    sequence-invariant violations raise :class:`ScoreValidationError`.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScoreParseError(f"invalid JSON: {exc}") from None
    return parse_score_dict(doc)


def parse_score_dict(doc) -> tuple[
        NoteSequence, list[ExpressionControls | None]]:
    """Same contract as :func:`parse_score`, starting from decoded JSON."""
    if not isinstance(doc, dict):
        raise ScoreParseError("score document must be a JSON object")
    _require_keys(doc, {"frame_rate", "total_frames", "notes"},
                  {"total_frames", "notes"}, "document root")
    frame_rate = doc.get("frame_rate", FRAME_RATE)
    if frame_rate != FRAME_RATE:
        raise ScoreParseError(
            f"frame_rate must be {FRAME_RATE} (the 4 ms grid), "
            f"got {frame_rate!r}")
    total = _require_int(doc["total_frames"], "total_frames")
    if not isinstance(doc["notes"], list):
        raise ScoreParseError("notes must be a list")

    notes: list[Note] = []
    expressions: list[ExpressionControls | None] = []
    for i, entry in enumerate(doc["notes"]):
        where = f"notes[{i}]"
        if not isinstance(entry, dict):
            raise ScoreParseError(f"{where} must be an object")
        _require_keys(entry, {"pitch", "onset", "offset", "expression"},
                      {"pitch", "onset", "offset"}, where)
        notes.append(Note(
            pitch=_require_int(entry["pitch"], f"{where}.pitch"),
            onset_frame=_require_int(entry["onset"], f"{where}.onset"),
            offset_frame=_require_int(entry["offset"], f"{where}.offset"),
        ))
        if "expression" not in entry:
            expressions.append(None)
            continue
        block = entry["expression"]
        if not isinstance(block, dict):
            raise ScoreParseError(f"{where}.expression must be an object")
        _require_keys(block, set(CONTROL_NAMES), set(), f"{where}.expression")
        values = {}
        for name, v in block.items():
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ScoreParseError(
                    f"expression.{name} must be a number at {where}")
            if not 0.0 <= v <= 1.0:
                raise ScoreParseError(
                    f"expression.{name} out of [0,1] at {where}: {v}")
            values[name] = float(v)
        expressions.append(ExpressionControls(**values))

    seq = NoteSequence(notes, total)
    report = validate_sequence(seq)
    if not report.ok:
        raise ScoreValidationError("; ".join(report.violations))
    return seq, expressions


def score_to_dict(seq: NoteSequence,
                  expressions: list[ExpressionControls | None] | None = None,
                  ) -> dict:
    """Inverse of :func:`parse_score` (dict form, JSON-ready)."""
    if expressions is None:
        expressions = [None] * len(seq.notes)
    notes = []
    for note, expr in zip(seq.notes, expressions):
        entry: dict = {"pitch": note.pitch, "onset": note.onset_frame,
                       "offset": note.offset_frame}
        if expr is not None:
            entry["expression"] = expr.as_dict()
        notes.append(entry)
    return {"frame_rate": FRAME_RATE, "total_frames": seq.total_frames,
            "notes": notes}


# --- WAV ---------------------------------------------------------------

_WAVE_PCM = 1
_WAVE_FLOAT = 3


def write_wav(audio: AudioBuffer, float32: bool = False) -> bytes:
    """Encode mono WAV bytes; PCM16 by default, IEEE float32 behind a flag."""
    x = np.clip(audio.samples, -1.0, 1.0)
    if float32:
        payload = x.astype("<f4").tobytes()
        fmt_code, bits = _WAVE_FLOAT, 32
    else:
        quantized = np.copysign(np.floor(np.abs(x) * 32767.0 + 0.5), x)
        payload = quantized.astype("<i2").tobytes()
        fmt_code, bits = _WAVE_PCM, 16
    sr = audio.sample_rate
    block_align = bits // 8
    header = b"RIFF" + struct.pack("<I", 36 + len(payload)) + b"WAVE"
    fmt = b"fmt " + struct.pack("<IHHIIHH", 16, fmt_code, 1, sr,
                                sr * block_align, block_align, bits)
    data = b"data" + struct.pack("<I", len(payload))
    return header + fmt + data + payload


def read_wav(data: bytes) -> AudioBuffer:
    """Decode mono 16 kHz WAV bytes (PCM16 or float32)."""
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise ValueError("malformed RIFF: missing RIFF/WAVE header")
    pos = 12
    fmt_code = bits = channels = sr = None
    samples = None
    while pos + 8 <= len(data):
        chunk_id = data[pos:pos + 4]
        (size,) = struct.unpack("<I", data[pos + 4:pos + 8])
        body = data[pos + 8:pos + 8 + size]
        if chunk_id == b"fmt ":
            if size < 16:
                raise ValueError("malformed RIFF: short fmt chunk")
            fmt_code, channels, sr, _, _, bits = struct.unpack(
                "<HHIIHH", body[:16])
        elif chunk_id == b"data":
            if len(body) < size:
                raise ValueError("unexpected end of data chunk")
            if fmt_code is None:
                raise ValueError("malformed RIFF: data before fmt")
            if channels != 1:
                raise ValueError(f"unsupported channel count {channels}")
            if fmt_code == _WAVE_PCM and bits == 16:
                samples = np.frombuffer(body[:size], dtype="<i2") / 32767.0
            elif fmt_code == _WAVE_FLOAT and bits == 32:
                samples = np.frombuffer(body[:size], dtype="<f4").astype(float)
            else:
                raise ValueError(
                    f"unsupported format code {fmt_code} ({bits}-bit)")
            return AudioBuffer(samples, sr)
        pos += 8 + size + (size & 1)  # chunks are word-aligned
    raise ValueError("malformed RIFF: no data chunk")


# --- synthesis parameter dumps ------------------------------------------

_PARAMS_MAGIC = b"NSYP"
_PARAMS_VERSION = 1


def write_params(params: SynthParams, text: bool = False) -> bytes:
    """Serialize synthesis parameters; compact binary or inspectable JSON."""
    if text:
        doc = {
            "frame_rate": FRAME_RATE,
            "n_frames": params.n_frames,
            "n_harmonics": N_HARMONICS,
            "n_noise_bands": N_NOISE_BANDS,
            "sample_rate": params.sample_rate,
            "f0": params.f0.tolist(),
            "amplitude": params.amplitude.tolist(),
            "harmonic_distribution": params.harmonic_distribution.tolist(),
            "noise_magnitudes": params.noise_magnitudes.tolist(),
        }
        return json.dumps(doc).encode()
    header = _PARAMS_MAGIC + struct.pack(
        "<IIIIII", _PARAMS_VERSION, FRAME_RATE, params.n_frames,
        N_HARMONICS, N_NOISE_BANDS, params.sample_rate)
    streams = [params.f0, params.amplitude,
               params.harmonic_distribution.reshape(-1),
               params.noise_magnitudes.reshape(-1)]
    return header + b"".join(s.astype("<f4").tobytes() for s in streams)


def read_params(data: bytes) -> SynthParams:
    """Load a parameter dump (either encoding, detected by leading bytes).

    float32 quantization can nudge noise magnitudes a hair under the 1e-7
    floor; they are re-floored so the invariants hold after a round trip.
    """
    if data[:4] == _PARAMS_MAGIC:
        if len(data) < 28:
            raise ValueError("truncated parameter header")
        version, frame_rate, n_frames, n_harm, n_noise, sr = struct.unpack(
            "<IIIIII", data[4:28])
        if version != _PARAMS_VERSION:
            raise ValueError(f"unsupported parameter file version {version}")
        if frame_rate != FRAME_RATE or n_harm != N_HARMONICS \
                or n_noise != N_NOISE_BANDS:
            raise ValueError("parameter header disagrees with this build "
                             f"({frame_rate} fps, {n_harm}/{n_noise} bands)")
        expected = n_frames * (2 + n_harm + n_noise) * 4
        body = data[28:]
        if len(body) < expected:
            raise ValueError("unexpected end of parameter streams")
        flat = np.frombuffer(body[:expected], dtype="<f4").astype(float)
        t = n_frames
        f0, rest = flat[:t], flat[t:]
        amp, rest = rest[:t], rest[t:]
        h = rest[:t * n_harm].reshape(t, n_harm)
        eta = rest[t * n_harm:].reshape(t, n_noise)
    else:
        try:
            doc = json.loads(data)
        except (json.JSONDecodeError, UnicodeDecodeError):
            raise ValueError(
                "not a parameter dump (bad magic and not JSON)") from None
        for key in ("f0", "amplitude", "harmonic_distribution",
                    "noise_magnitudes"):
            if key not in doc:
                raise ValueError(f"parameter JSON missing {key!r}")
        f0 = np.asarray(doc["f0"], dtype=float)
        amp = np.asarray(doc["amplitude"], dtype=float)
        h = np.asarray(doc["harmonic_distribution"], dtype=float)
        eta = np.asarray(doc["noise_magnitudes"], dtype=float)
        sr = doc.get("sample_rate", SAMPLE_RATE)
    return SynthParams(f0, amp, h, np.maximum(eta, AMP_FLOOR), sr)


def read_impulse_response(data: bytes) -> np.ndarray:
    """Raw little-endian float32 IR; must hold exactly 48000 values."""
    if len(data) != REVERB_IR_LENGTH * 4:
        raise ValueError(
            f"impulse response must be {REVERB_IR_LENGTH} float32 values "
            f"({REVERB_IR_LENGTH * 4} bytes), got {len(data)} bytes")
    return np.frombuffer(data, dtype="<f4").astype(float)
