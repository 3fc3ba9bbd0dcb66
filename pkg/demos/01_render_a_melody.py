#!/usr/bin/env python3
"""Render a short melody to WAV with hand-picked expression per note.

Shows the basic pipeline: notes on the 250 frames/s grid -> per-note
expression -> synthesis parameters -> audio.
"""
from pathlib import Path

from notesynth import (
    ExpressionControls,
    Note,
    NoteSequence,
    synthesize,
)
from notesynth.performance import generate_synth_params
from notesynth.fileio import write_wav

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

# one bar of a slow line: half a second per note, a short breath before the
# last note
seq = NoteSequence(
    [Note(43, 0, 125), Note(46, 125, 250), Note(45, 250, 375),
     Note(41, 385, 625)],
    total_frames=640,
)

legato = ExpressionControls(volume=0.75, volume_fluctuation=0.25,
                            volume_peak_position=0.5, vibrato=0.5,
                            brightness=0.35, attack_noise=0.15)
staccato = legato.replace(volume_fluctuation=0.6, volume_peak_position=0.1,
                          attack_noise=0.7)
expressions = [legato, legato, staccato, legato.replace(vibrato=0.8)]

params, report = generate_synth_params(seq, expressions)
print(f"{params.n_frames} frames of synthesis parameters "
      f"({params.n_frames * 64 / 16000:.2f} s)")
for clamp in report.clamps:
    print("clamped:", clamp)

audio = synthesize(params, seed=1)
(OUT / "melody.wav").write_bytes(write_wav(audio))
print("wrote", OUT / "melody.wav")
