import numpy as np
import pytest

from notesynth import ExpressionControls, Note, NoteSequence
from notesynth.features import NoteWindow


@pytest.fixture
def melody() -> NoteSequence:
    """Four low notes (full brightness range stays below Nyquist), 125
    frames each, with one 10-frame rest."""
    return NoteSequence(
        [Note(41, 0, 125), Note(43, 125, 250), Note(45, 260, 385),
         Note(46, 385, 510)],
        total_frames=520,
    )


@pytest.fixture
def neutral() -> ExpressionControls:
    return ExpressionControls()


def window_from_db(amp_db, f0=None, harmonics=None, noise_db=None):
    """Build a NoteWindow directly from dB-domain test vectors."""
    amp_db = np.asarray(amp_db, dtype=float)
    t = len(amp_db)
    if f0 is None:
        f0 = np.full(t, 220.0)
    if harmonics is None:
        harmonics = np.zeros((t, 60))
        harmonics[:, 0] = 1.0
    if noise_db is None:
        noise_db = np.full((t, 65), -120.0)
    return NoteWindow(np.asarray(f0, dtype=float), amp_db,
                      np.asarray(harmonics, dtype=float),
                      np.asarray(noise_db, dtype=float))
