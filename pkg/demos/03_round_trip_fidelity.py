#!/usr/bin/env python3
"""Measure expression recovery over a random corpus.

Draws (note, expression) pairs, generates synthesis parameters, extracts
the six controls back, and reports per-control error statistics. Durations
start at 50 frames (the 200 ms vibrato gate) and pitches stay low enough
that every harmonic is audible, so nothing needs clamping.
"""
import numpy as np

from notesynth import CONTROL_NAMES, ExpressionControls, Note, NoteSequence
from notesynth.features import extract_note_expression
from notesynth.performance import generate_synth_params

rng = np.random.default_rng(123)
errors = {name: [] for name in CONTROL_NAMES}

for _ in range(300):
    t_n = int(rng.integers(50, 501))
    pitch = int(rng.integers(36, 47))
    e = ExpressionControls(*rng.uniform(0, 1, 6))
    seq = NoteSequence([Note(pitch, 0, t_n)], t_n)
    params, report = generate_synth_params(seq, [e])
    got = extract_note_expression(params, seq.notes[0])
    for name in CONTROL_NAMES:
        if name not in report.clamped_controls(0):
            errors[name].append(abs(getattr(got, name) - getattr(e, name)))

print(f"{'control':24s} {'mean abs err':>12s} {'max abs err':>12s}")
for name, errs in errors.items():
    print(f"{name:24s} {np.mean(errs):12.2e} {np.max(errs):12.2e}")
print("\n(peak position carries the frame-grid quantization of "
      "round(q*(T-1)); everything else recovers to float precision)")
