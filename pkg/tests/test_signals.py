import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ifreq.errors import ValidationError
from ifreq.signals import (
    ModulatorSpec,
    PhasePolynomial,
    WaveformSpec,
    read_waveform_csv,
    synth_modulator,
    synth_signal,
    true_frequency,
    write_waveform_csv,
)

TWO_PI = 2 * np.pi


def test_quarter_cycle_rotation():
    x = synth_signal(WaveformSpec(1.0, PhasePolynomial((0.0, np.pi / 2)), 0.0, 4))
    np.testing.assert_allclose(x, [1, 1j, -1, -1j], atol=1e-15)


def test_dc_case():
    x = synth_signal(WaveformSpec(1.0, PhasePolynomial((0.0,)), 0.0, 10))
    assert np.all(x == 1 + 0j)


def test_run5_sweep_endpoints():
    N = 1000
    ph = PhasePolynomial((0.0, -TWO_PI * 0.4, TWO_PI * 0.8 / (N - 1)))
    assert true_frequency(ph, 0) / TWO_PI == pytest.approx(-0.4, abs=1e-15)
    assert true_frequency(ph, N - 1) / TWO_PI == pytest.approx(0.4, abs=1e-14)


def test_true_frequency_constant_and_linear_term():
    assert true_frequency(PhasePolynomial((0.3, TWO_PI * 0.1)), 17.25) == pytest.approx(TWO_PI * 0.1)
    assert true_frequency(PhasePolynomial((0.0, 0.7, 5.0)), 0.0) == 0.7


def test_run6_mid_sweep_frequency():
    from ifreq.harness import builtin_scenario

    ph = builtin_scenario(6).waveform.phase
    N = 1000
    assert true_frequency(ph, 0) == 0.0
    assert true_frequency(ph, (N - 1) / 2) / TWO_PI == pytest.approx(0.25, abs=2e-4)
    assert true_frequency(ph, N - 1) / TWO_PI == pytest.approx(-0.25, abs=2e-4)


def test_phase_at_origin_is_offset():
    ph = PhasePolynomial((0.123, 4.0, -2.0, 9.0))
    assert ph.phase(0) == 0.123
    assert ph.order == 3


@pytest.mark.parametrize("kw", [{"length": 1}, {"magnitude": 0.0}, {"magnitude": -1.0}, {"sigma": -0.1}])
def test_invalid_waveform_rejected(kw):
    with pytest.raises(ValidationError):
        WaveformSpec(**kw)


def test_unit_magnitude_noise_free():
    x = synth_signal(WaveformSpec(2.5, PhasePolynomial((1.0, 0.3, 1e-3)), 0.0, 500))
    np.testing.assert_allclose(np.abs(x), 2.5, rtol=1e-15)


def test_phase_difference_is_frequency():
    theta1 = 2.9
    x = synth_signal(WaveformSpec(1.0, PhasePolynomial((0.4, theta1)), 0.0, 300))
    d = np.angle(x[1:] * np.conj(x[:-1]))
    np.testing.assert_allclose(d, theta1, atol=1e-12)


def test_noise_variance_per_part():
    spec = WaveformSpec(1.0, PhasePolynomial((0.0, 1.0)), 0.05, 200_000, seed=3)
    noise = synth_signal(spec) - synth_signal(spec.replace(sigma=0.0))
    assert np.var(noise) == pytest.approx(2 * 0.05**2, rel=0.05)
    assert np.var(noise.real) == pytest.approx(0.05**2, rel=0.05)


def test_deterministic_per_seed():
    spec = WaveformSpec(1.0, PhasePolynomial((0.0, 1.0)), 0.1, 64, seed=9)
    assert np.array_equal(synth_signal(spec), synth_signal(spec))
    assert not np.array_equal(synth_signal(spec), synth_signal(spec.replace(seed=10)))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=1, max_size=5), st.floats(-20, 20))
def test_frequency_is_phase_derivative(coeffs, t):
    ph = PhasePolynomial(tuple(coeffs))
    h = 1e-4
    fd = (ph.phase(t + h) - ph.phase(t - h)) / (2 * h)
    assert abs(fd - true_frequency(ph, t)) < 1e-6 * max(1.0, abs(t) ** 3)


def test_modulator_band_limited():
    spec = ModulatorSpec(4, TWO_PI / 100, seed=1)
    chi = synth_modulator(spec, 1 << 16)
    psd = np.abs(np.fft.fft(chi)) ** 2
    f = np.abs(np.fft.fftfreq(chi.size))
    assert psd[f < 2 * 0.01].sum() / psd.sum() >= 0.9


def test_modulator_single_sample_and_determinism():
    from ifreq.lti import steady_state
    from ifreq.weights import design_butterworth

    spec = ModulatorSpec(4, TWO_PI / 100, seed=5)
    one = synth_modulator(spec, 1)
    rng = np.random.default_rng(5)
    re, im = rng.standard_normal((2, 1))
    v = complex(re[0], im[0])
    st_ = steady_state(design_butterworth(4, TWO_PI / 100), v)
    assert one[0] == pytest.approx(st_.step(v), abs=1e-12)
    assert np.array_equal(synth_modulator(spec, 50), synth_modulator(spec, 50))


def test_modulator_cutoff_validated():
    with pytest.raises(ValidationError):
        ModulatorSpec(4, math.pi)
    with pytest.raises(ValidationError):
        ModulatorSpec(4, 0.0)


def test_modulated_waveform_has_no_added_noise():
    mod = ModulatorSpec(4, TWO_PI / 100, seed=2)
    spec = WaveformSpec(1.0, PhasePolynomial((0.0, TWO_PI * 0.2)), 0.0, 256, modulator=mod)
    x = synth_signal(spec)
    n = np.arange(256)
    np.testing.assert_allclose(x, np.exp(1j * TWO_PI * 0.2 * n) * synth_modulator(mod, 256), atol=1e-15)


def test_csv_round_trip(tmp_path):
    x = synth_signal(WaveformSpec(1.0, PhasePolynomial((0.1, 0.77)), 0.3, 40, seed=1))
    path = tmp_path / "w.csv"
    text = write_waveform_csv(x, path)
    assert text.splitlines()[0] == "n,re,im"
    assert np.array_equal(read_waveform_csv(path), x)


def test_csv_malformed(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("a,b\n1,2\n")
    with pytest.raises(ValidationError):
        read_waveform_csv(p)
