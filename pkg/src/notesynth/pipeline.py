"""Render/extract/roundtrip/sweep entry points shared by CLI and HTTP.

Both interfaces funnel into the functions here, so a given RenderRequest
produces byte-identical WAV output no matter which surface submitted it.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .score import (
    CONTROL_NAMES,
    DEFAULT_EXPRESSION,
    DEFAULT_NORMALIZATION,
    ExpressionControls,
    NormalizationSpec,
    NoteSequence,
)
from .synth import AudioBuffer, ReverbConfig, SynthParams, synthesize
from .features import extract_note_expression
from .performance import (
    DEFAULT_CONFIG,
    GenerationReport,
    PerformanceModelConfig,
    generate_synth_params,
)
from .metrics import SweepResult, control_sweep
from . import fileio


@dataclass(frozen=True)
class RenderRequest:
    """Everything needed to reproduce one render bit-for-bit."""

    score: dict
    noise_seed: int = 0
    reverb_ir: np.ndarray | None = None  # None -> dry output
    config: PerformanceModelConfig = DEFAULT_CONFIG
    normalization: NormalizationSpec = DEFAULT_NORMALIZATION


@dataclass(frozen=True)
class RenderResult:
    audio: AudioBuffer
    wav_bytes: bytes
    params: SynthParams
    report: GenerationReport


def _config_from_dict(doc: dict) -> PerformanceModelConfig:
    allowed = {f.name for f in dataclasses.fields(PerformanceModelConfig)}
    for key in doc:
        if key not in allowed:
            raise fileio.ScoreParseError(f"unknown field {key!r} at config")
    return dataclasses.replace(DEFAULT_CONFIG, **doc)


def _normalization_from_dict(doc: dict) -> NormalizationSpec:
    allowed = {f.name for f in dataclasses.fields(NormalizationSpec)}
    values = {}
    for key, v in doc.items():
        if key not in allowed:
            raise fileio.ScoreParseError(
                f"unknown field {key!r} at normalization")
        if not (isinstance(v, (list, tuple)) and len(v) == 2):
            raise fileio.ScoreParseError(
                f"normalization.{key} must be a [min, max] pair")
        values[key] = (float(v[0]), float(v[1]))
    return dataclasses.replace(DEFAULT_NORMALIZATION, **values)


def request_from_dict(doc: dict,
                      reverb_ir: np.ndarray | None = None) -> RenderRequest:
    """Build a RenderRequest from its JSON form.

    ``reverb_ir`` overrides any IR reference in the document (used when the
    caller already resolved an upload or a file path).
    """
    if not isinstance(doc, dict):
        raise fileio.ScoreParseError("render request must be a JSON object")
    allowed = {"score", "noise_seed", "reverb", "reverb_ir_base64",
               "config", "normalization"}
    for key in doc:
        if key not in allowed:
            raise fileio.ScoreParseError(
                f"unknown field {key!r} at request root")
    if "score" not in doc:
        raise fileio.ScoreParseError("missing field 'score' at request root")
    seed = doc.get("noise_seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise fileio.ScoreParseError("noise_seed must be an integer")

    ir = reverb_ir
    if ir is None and "reverb_ir_base64" in doc:
        import base64

        try:
            raw = base64.b64decode(doc["reverb_ir_base64"], validate=True)
        except Exception:
            raise fileio.ScoreParseError(
                "reverb_ir_base64 is not valid base64") from None
        ir = fileio.read_impulse_response(raw)
    if ir is None:
        ref = doc.get("reverb", "none")
        if ref not in (None, "none"):
            if not isinstance(ref, str):
                raise fileio.ScoreParseError(
                    "reverb must be 'none' or a file path")
            with open(ref, "rb") as fh:
                ir = fileio.read_impulse_response(fh.read())

    cfg = _config_from_dict(doc.get("config", {}) or {})
    spec = _normalization_from_dict(doc.get("normalization", {}) or {})
    return RenderRequest(score=doc["score"], noise_seed=seed,
                         reverb_ir=ir, config=cfg, normalization=spec)


def resolve_expressions(
        expressions: list[ExpressionControls | None]) -> list[ExpressionControls]:
    """Substitute the neutral default for absent expression blocks."""
    return [e if e is not None else DEFAULT_EXPRESSION for e in expressions]


def run_render(request: RenderRequest) -> RenderResult:
    """Score -> SynthParams -> audio -> WAV bytes, deterministically."""
    seq, raw_expr = fileio.parse_score_dict(request.score)
    expressions = resolve_expressions(raw_expr)
    params, report = generate_synth_params(
        seq, expressions, request.config, request.normalization)
    reverb = None
    if request.reverb_ir is not None:
        reverb = ReverbConfig(impulse_response=request.reverb_ir)
    audio = synthesize(params, reverb, seed=request.noise_seed)
    return RenderResult(audio, fileio.write_wav(audio), params, report)


def run_extract(params: SynthParams, seq: NoteSequence,
                spec: NormalizationSpec = DEFAULT_NORMALIZATION,
                ) -> list[ExpressionControls]:
    """Per-note expression from existing synthesis parameters."""
    return [extract_note_expression(params, note, spec) for note in seq.notes]


def run_roundtrip(request: RenderRequest) -> dict:
    """Generate from the score, extract back, and report recovery error.

    Controls the generator had to clamp are excluded from the error
    statistics and listed separately with their reasons.
    """
    seq, raw_expr = fileio.parse_score_dict(request.score)
    expressions = resolve_expressions(raw_expr)
    params, report = generate_synth_params(
        seq, expressions, request.config, request.normalization)
    extracted = run_extract(params, seq, request.normalization)

    per_control: dict[str, dict] = {}
    overall_max = 0.0
    for name in CONTROL_NAMES:
        errors = []
        for i, (requested, got) in enumerate(zip(expressions, extracted)):
            if name in report.clamped_controls(i):
                continue
            errors.append(abs(getattr(requested, name) - getattr(got, name)))
        entry: dict = {"evaluated": len(errors)}
        if errors:
            entry["mean_abs_error"] = float(np.mean(errors))
            entry["max_abs_error"] = float(np.max(errors))
            overall_max = max(overall_max, entry["max_abs_error"])
        per_control[name] = entry
    return {
        "notes": len(seq.notes),
        "per_control": per_control,
        "max_error": overall_max,
        "clamps": report.as_dict()["clamps"],
    }


def run_sweep(request: RenderRequest,
              base_expr: ExpressionControls = DEFAULT_EXPRESSION,
              ) -> list[SweepResult]:
    """The interpolate-and-extract protocol for every control in turn."""
    seq, _ = fileio.parse_score_dict(request.score)
    return [control_sweep(seq, base_expr, name, request.config,
                          request.normalization)
            for name in CONTROL_NAMES]


def sweep_results_to_csv(results: list[SweepResult]) -> str:
    lines = ["control,input,extracted_mean,r"]
    for res in results:
        r_text = "" if res.r is None else f"{res.r:.6f}"
        for v, ex in zip(res.inputs, res.extracted):
            lines.append(f"{res.control},{v:.1f},{ex:.6f},{r_text}")
    return "\n".join(lines) + "\n"
