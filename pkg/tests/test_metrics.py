import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from notesynth.score import ExpressionControls, Note, NoteSequence
from notesynth.synth import AudioBuffer
from notesynth.metrics import (
    SpectralLossConfig,
    ZeroVarianceError,
    control_sweep,
    expression_rmse,
    multi_scale_spectral_loss,
    pearson_correlation,
    stft_magnitude,
)

SR = 16000


def sine(freq, seconds=1.0, amp=1.0):
    t = np.arange(int(seconds * SR))
    return AudioBuffer(amp * np.sin(2 * np.pi * freq * t / SR))


# --- independent reference (brute-force framing + direct DFT) -------------

def reference_stft_matrix(x, size, hop):
    n = np.arange(size)
    window = 0.5 - 0.5 * np.cos(2 * np.pi * n / size)
    bins = size // 2 + 1
    dft = np.exp(-2j * np.pi * np.outer(n, np.arange(bins)) / size)
    pad = size // 2
    padded = np.concatenate([np.zeros(pad), x, np.zeros(pad)])
    out = []
    t = 0
    while t * hop <= len(x) - 1:
        frame = padded[t * hop:t * hop + size] * window
        out.append(np.abs(frame @ dft))
        t += 1
    return np.array(out)


def reference_loss(a, b, sizes=(2048, 1024, 512, 256, 128, 64),
                   beta=1.0, eps=1e-7):
    total = 0.0
    for size in sizes:
        sa = reference_stft_matrix(a, size, size // 4)
        sb = reference_stft_matrix(b, size, size // 4)
        total += np.mean(np.abs(sa - sb)) + beta * np.mean(
            np.abs(np.log(sa + eps) - np.log(sb + eps)))
    return total


class TestStftMagnitude:
    def test_sine_dominant_bin(self):
        mags = stft_magnitude(sine(1000.0), 2048)
        assert round(1000 * 2048 / SR) == 128
        assert np.all(np.argmax(mags, axis=1) == 128)

    def test_silence_all_zero(self):
        mags = stft_magnitude(AudioBuffer(np.zeros(4096)), 512)
        assert np.all(mags == 0.0)

    def test_dc_input(self):
        mags = stft_magnitude(AudioBuffer(np.full(4096, 0.5)), 256)
        interior = mags[4:-4]
        assert np.all(np.argmax(interior, axis=1) == 0)
        # Hann analysis necessarily leaks DC into bin 1; beyond that: none
        assert np.max(interior[:, 2:]) < 1e-9 * np.max(interior)

    def test_too_short_rejected(self):
        with pytest.raises(ValueError, match="shorter than one frame"):
            stft_magnitude(AudioBuffer(np.zeros(100)), 256)

    def test_matches_reference(self):
        rng = np.random.default_rng(0)
        x = rng.uniform(-1, 1, 2000)
        got = stft_magnitude(x, 256, 64)
        want = reference_stft_matrix(x, 256, 64)
        assert got.shape == want.shape
        assert np.max(np.abs(got - want)) < 1e-9


class TestMultiScaleSpectralLoss:
    def test_identity_is_exactly_zero(self):
        buf = sine(440.0)
        total, per_size = multi_scale_spectral_loss(buf, buf)
        assert total == 0.0
        assert all(v == 0.0 for v in per_size.values())

    def test_silence_vs_silence(self):
        a = AudioBuffer(np.zeros(SR))
        total, _ = multi_scale_spectral_loss(a, a)
        assert total == 0.0

    def test_symmetry(self):
        a, b = sine(440.0), sine(660.0)
        ab, _ = multi_scale_spectral_loss(a, b)
        ba, _ = multi_scale_spectral_loss(b, a)
        assert abs(ab - ba) < 1e-12

    def test_octave_sines_match_reference(self):
        a, b = sine(440.0), sine(880.0)
        got, _ = multi_scale_spectral_loss(a, b)
        want = reference_loss(a.samples, b.samples)
        assert got > 0.0
        assert abs(got - want) / want < 1e-6

    def test_semitone_apart_strictly_positive(self):
        a = sine(440.0)
        b = sine(440.0 * 2 ** (1 / 12))
        total, _ = multi_scale_spectral_loss(a, b)
        assert total > 0.01

    def test_length_mismatch_padded(self):
        a = sine(440.0, seconds=1.0)
        b = sine(440.0, seconds=0.5)
        total, _ = multi_scale_spectral_loss(a, b)
        assert total > 0.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            multi_scale_spectral_loss(AudioBuffer(np.zeros(0)), sine(440.0))

    def test_config_validation(self):
        with pytest.raises(ValueError, match="power of two"):
            SpectralLossConfig(fft_sizes=(1000,))


class TestExpressionRmse:
    def test_identical_is_zero(self):
        xs = [ExpressionControls(), ExpressionControls(volume=0.2)]
        assert expression_rmse(xs, xs) == 0.0

    def test_uniform_offset(self):
        a = [ExpressionControls(*([0.4] * 6))] * 3
        b = [ExpressionControls(*([0.5] * 6))] * 3
        assert expression_rmse(a, b) == pytest.approx(0.1)

    def test_matches_brute_force(self):
        rng = np.random.default_rng(5)
        a = [ExpressionControls(*rng.uniform(0, 1, 6)) for _ in range(9)]
        b = [ExpressionControls(*rng.uniform(0, 1, 6)) for _ in range(9)]
        total = 0.0
        count = 0
        for ea, eb in zip(a, b):
            for name, va in ea.as_dict().items():
                total += (va - eb.as_dict()[name]) ** 2
                count += 1
        assert expression_rmse(a, b) == pytest.approx(
            (total / count) ** 0.5, abs=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="length mismatch"):
            expression_rmse([ExpressionControls()], [])


class TestPearson:
    def test_perfect_linear(self):
        xs = np.array([0.0, 1.0, 2.0, 5.0])
        assert pearson_correlation(xs, 2 * xs + 3) == pytest.approx(1.0)

    def test_perfect_inverse(self):
        xs = np.array([0.0, 1.0, 2.0])
        assert pearson_correlation(xs, -xs) == pytest.approx(-1.0)

    def test_hand_computed_four_points(self):
        r = pearson_correlation(np.array([1, 2, 3, 4]),
                                np.array([1, 3, 2, 4]))
        assert r == pytest.approx(0.8, abs=1e-12)

    def test_zero_variance_raises(self):
        with pytest.raises(ZeroVarianceError):
            pearson_correlation(np.array([1.0, 1.0, 1.0]),
                                np.array([1.0, 2.0, 3.0]))

    @given(st.floats(min_value=1e-3, max_value=1e3),
           st.floats(min_value=-100, max_value=100))
    @settings(max_examples=50)
    def test_positive_affine_invariance(self, a, b):
        xs = np.array([0.1, 0.7, 0.3, 0.9, 0.5])
        ys = np.array([0.2, 0.9, 0.1, 0.8, 0.4])
        base = pearson_correlation(xs, ys)
        assert abs(pearson_correlation(a * xs + b, ys) - base) < 1e-12


class TestControlSweep:
    def test_volume_sweep_strongly_correlated(self, melody, neutral):
        res = control_sweep(melody, neutral, "volume")
        assert res.error is None
        assert res.r >= 0.99
        assert len(res.inputs) == 11

    def test_one_frame_notes_degenerate_peak_sweep(self, neutral):
        seq = NoteSequence([Note(45, i * 2, i * 2 + 1) for i in range(4)], 8)
        res = control_sweep(seq, neutral, "volume_peak_position")
        assert res.r is None
        assert "zero variance" in res.error

    def test_short_note_vibrato_sweep_gated(self, neutral):
        seq = NoteSequence([Note(45, 0, 40), Note(47, 40, 80)], 80)
        res = control_sweep(seq, neutral, "vibrato")
        assert all(v == 0.0 for v in res.extracted)
        assert res.r is None
        assert "zero variance" in res.error

    def test_unknown_control_rejected(self, melody, neutral):
        with pytest.raises(ValueError, match="unknown control_id"):
            control_sweep(melody, neutral, "sparkle")
