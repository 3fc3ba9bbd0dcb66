#!/usr/bin/env python3
"""Compare renders with the multi-scale spectral loss.

Distances: identical renders (zero), same score with different noise seeds
(small), a semitone transposition (larger), an octave (larger still).
"""
from notesynth import ExpressionControls, Note, NoteSequence, synthesize
from notesynth.metrics import multi_scale_spectral_loss
from notesynth.performance import generate_synth_params


def render(pitch, seed=0):
    seq = NoteSequence([Note(pitch, 0, 250)], 250)
    params, _ = generate_synth_params(
        seq, [ExpressionControls(attack_noise=0.6)])
    return synthesize(params, seed=seed)


base = render(45, seed=0)
cases = {
    "identical render": render(45, seed=0),
    "different noise seed": render(45, seed=1),
    "one semitone up": render(46),
    "one octave up": render(57),
}

for label, other in cases.items():
    total, per_size = multi_scale_spectral_loss(base, other)
    sizes = ", ".join(f"{k}:{v:.3f}" for k, v in per_size.items())
    print(f"{label:22s} total {total:8.4f}   ({sizes})")
