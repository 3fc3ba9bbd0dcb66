"""Deterministic harmonic-plus-noise note synthesizer with six invertible
per-note expression controls.

The pipeline: a score of notes (frame-aligned, 250 frames/s) and per-note
expression vectors in [0,1]^6 deterministically become frame-wise synthesis
parameters, which render to 16 kHz audio. The extractors invert the
generator, so expression survives a round trip through synthesis; the
metrics module quantifies how well.
"""

from .score import (
    CONTROL_NAMES,
    DEFAULT_EXPRESSION,
    DEFAULT_NORMALIZATION,
    FRAME_RATE,
    FRAME_SIZE,
    SAMPLE_RATE,
    ExpressionControls,
    NormalizationSpec,
    Note,
    NoteSequence,
    denormalize_control,
    midi_to_hz,
    normalize_control,
    validate_sequence,
)
from .synth import (
    AMP_FLOOR,
    N_HARMONICS,
    N_NOISE_BANDS,
    AudioBuffer,
    ReverbConfig,
    SynthParams,
    apply_reverb,
    exp_sigmoid,
    normalize_harmonics,
    render_harmonic,
    render_noise,
    synthesize,
    upsample_controls,
)
from .features import (
    NoteWindow,
    a_weighting_db,
    compute_loudness,
    extract_attack_noise,
    extract_brightness,
    extract_note_expression,
    extract_vibrato,
    extract_volume,
    extract_volume_fluctuation,
    extract_volume_peak_position,
)
from .performance import (
    DEFAULT_CONFIG,
    ConditioningSequence,
    GenerationReport,
    PerformanceModelConfig,
    build_conditioning,
    generate_synth_params,
)
from .metrics import (
    SpectralLossConfig,
    SweepResult,
    ZeroVarianceError,
    control_sweep,
    expression_rmse,
    multi_scale_spectral_loss,
    pearson_correlation,
    stft_magnitude,
)
from .pipeline import RenderRequest, run_render, run_roundtrip

__version__ = "0.1.0"
