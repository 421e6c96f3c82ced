import numpy as np
import pytest
from numpy.testing import assert_allclose

from phasemo.errors import (
    AlignmentError,
    AlreadyCompensated,
    InvalidBandwidth,
    InvalidLength,
    InvalidSpec,
)
from phasemo.frontend import (
    PrecodedStreams,
    TimeDomainConfig,
    brickwall_bandpass,
    dac_zoh,
    deinterleave,
    fps_apply,
    fps_line_spectrum_measured,
    fps_spectrum_closed_form,
    interleave,
    make_fps_waveform,
    matrix_model_emit,
    out_of_band_residual_db,
    phase_precompensate,
    recover_subcarrier_symbols,
    time_domain_emit,
    zoh_inband_response,
)
from phasemo.precoding import AnalogPhaseMatrix, Architecture, ArchitectureSpec, DigitalPrecoder
from phasemo.waveform import UserSymbols, random_symbols


def _streams(values, rate=1.0):
    return PrecodedStreams(values=np.asarray(values, dtype=complex), sample_rate_hz=rate)


# ---------------------------------------------------------------- interleaver


def test_interleave_single_stream_identity():
    p = _streams([[1, 2, 3]])
    assert_allclose(interleave(p).values, [1, 2, 3])


def test_interleave_two_streams_order():
    p = _streams([[1, 2], [10, 20]])
    assert_allclose(interleave(p).values, [1, 10, 2, 20])


def test_interleave_roundtrip():
    rng = np.random.default_rng(0)
    p = _streams(rng.standard_normal((4, 16)) + 1j * rng.standard_normal((4, 16)))
    back = deinterleave(interleave(p))
    assert np.array_equal(back.values, p.values)


def test_ragged_streams_rejected():
    with pytest.raises(InvalidLength):
        PrecodedStreams(values=np.array([[1, 2], [1]], dtype=object), sample_rate_hz=1.0)


# ------------------------------------------------------------ pre-compensation


def test_precompensate_stream_zero_unchanged():
    rng = np.random.default_rng(1)
    vals = rng.standard_normal((3, 8)) + 1j * rng.standard_normal((3, 8))
    comp = phase_precompensate(_streams(vals))
    assert_allclose(comp.values[0], vals[0], atol=1e-12)


def test_precompensate_dc_bin_unchanged():
    vals = np.ones((4, 8), dtype=complex)  # pure DC streams
    comp = phase_precompensate(_streams(vals))
    assert_allclose(comp.values, vals, atol=1e-12)


def test_precompensate_twice_rejected():
    comp = phase_precompensate(_streams(np.ones((2, 4))))
    with pytest.raises(AlreadyCompensated):
        phase_precompensate(comp)


def test_precompensation_cancels_interleaver_delay():
    # with stream 0 silent, the in-band interleaved spectrum must equal the
    # other stream's spectrum with no residual delay phase
    rng = np.random.default_rng(5)
    M, V, fs = 32, 2, 1.0
    p1 = rng.standard_normal(M) + 1j * rng.standard_normal(M)
    p = _streams(np.stack([np.zeros(M, complex), p1]), rate=fs)
    z = interleave(phase_precompensate(p))
    z_spec = np.fft.fft(z.values)
    p1_spec = np.fft.fft(p1)
    inband = np.concatenate([np.arange(0, M - M // 2), np.arange(V * M - M // 2, V * M)])
    recovered = z_spec[inband]
    expected = p1_spec[np.mod(inband, M)]
    err = np.linalg.norm(recovered - expected) / np.linalg.norm(expected)
    assert err < 1e-6


# ------------------------------------------------------------------ ZOH DAC


def test_zoh_constant_stays_constant():
    z = interleave(_streams(np.ones((1, 16))))
    held = dac_zoh(z, 4)
    assert held.size == 64
    assert_allclose(held, 1.0, atol=1e-15)
    spec = np.fft.fft(held)
    assert np.all(np.abs(spec[1:]) < 1e-12)  # DC only


def test_zoh_output_length():
    z = interleave(_streams(np.ones((2, 8))))
    assert dac_zoh(z, 5).size == 2 * 8 * 5


def test_zoh_requires_oversampling():
    z = interleave(_streams(np.ones((1, 4))))
    with pytest.raises(InvalidLength):
        dac_zoh(z, 1)


def test_zoh_image_follows_sinc_envelope():
    # tone at f0 << fs': first image at f0 - fs' (magnitude fs' - f0), with the
    # relative sinc amplitude |sinc((fs'-f0)/fs') / sinc(f0/fs')|
    M, L = 256, 32
    fs_hold = 1.0
    k0 = 16  # f0 = k0/M cycles per hold-sample
    tone = np.exp(2j * np.pi * k0 * np.arange(M) / M)
    held = dac_zoh(interleave(_streams(tone[None, :], rate=fs_hold)), L)
    spec = np.abs(np.fft.fft(held))
    main = spec[k0]
    image = spec[M * L - (M - k0)]  # negative-frequency bin at -(fs' - f0)
    f0 = k0 / M
    expected = abs(np.sinc((1 - f0) / 1.0) / np.sinc(f0 / 1.0))
    assert abs(image / main - expected) / expected < 0.01


def test_zoh_inband_response_is_exact():
    # the analytical hold response must match the measured bin ratio exactly
    rng = np.random.default_rng(7)
    M, L, fs_hold = 64, 8, 2.0
    x = rng.standard_normal(M) + 1j * rng.standard_normal(M)
    held = np.repeat(x, L)
    spec_held = np.fft.fft(held)
    spec_x = np.fft.fft(x)
    freqs = np.fft.fftfreq(M * L, d=1.0 / (L * fs_hold))
    bins = np.concatenate([np.arange(0, M - M // 2), np.arange(M * L - M // 2, M * L)])
    ratio = spec_held[bins] / spec_x[np.mod(bins, M)]
    expected = L * zoh_inband_response(freqs[bins], fs_hold, L)
    assert_allclose(ratio, expected, atol=1e-9)


# ------------------------------------------------------------- FPS waveform


def test_fps_unit_modulus_everywhere():
    rng = np.random.default_rng(2)
    w = make_fps_waveform(rng.uniform(-np.pi, np.pi, 8), 1.0, 16)
    assert np.max(np.abs(np.abs(w.samples()) - 1.0)) == 0.0


def test_fps_lines_only_at_base_rate_multiples():
    rng = np.random.default_rng(3)
    V, L, periods = 4, 8, 16
    w = make_fps_waveform(rng.uniform(-np.pi, np.pi, V), 1.0, L)
    tiled = np.tile(w.samples(), periods)
    spec = np.abs(np.fft.fft(tiled)) / tiled.size
    line_bins = np.arange(0, tiled.size, periods)
    off_line = np.delete(np.arange(tiled.size), line_bins)
    assert np.max(spec[off_line]) < 1e-10


def test_fps_static_single_phase_has_dc_only():
    w = make_fps_waveform(np.zeros(1), 1.0, 4)
    weights = fps_spectrum_closed_form(w, np.arange(-8, 9))
    expected = np.zeros(17)
    expected[8] = 1.0  # only i = 0 survives: sinc(i) = 0 for integer i != 0
    assert_allclose(weights, expected, atol=0.0)


def test_fps_antiphase_pair_nulls_dc():
    w = make_fps_waveform(np.array([0.0, np.pi]), 1.0, 4)
    dc = fps_spectrum_closed_form(w, np.array([0]))[0]
    assert abs(dc) < 1e-16


@pytest.mark.parametrize("v_count", [1, 2, 4, 8])
@pytest.mark.parametrize("trial", range(20))
def test_fps_closed_form_matches_fft(v_count, trial):
    rng = np.random.default_rng(1000 * v_count + trial)
    w = make_fps_waveform(rng.uniform(-np.pi, np.pi, v_count), 1.0, 16)
    i_range = np.arange(-3 * v_count, 3 * v_count + 1)
    closed = fps_spectrum_closed_form(w, i_range)
    measured = fps_line_spectrum_measured(w, i_range)
    assert np.max(np.abs(closed - measured)) < 1e-9


@pytest.mark.parametrize("v_count", [2, 4, 8])
def test_fps_nulls_at_v_multiples_exact(v_count):
    rng = np.random.default_rng(v_count)
    w = make_fps_waveform(rng.uniform(-np.pi, np.pi, v_count), 1.0, 8)
    multiples = v_count * np.array([-2, -1, 1, 2])
    weights = fps_spectrum_closed_form(w, multiples)
    assert np.all(weights == 0.0)  # exact sinc nulls, asserted symbolically


def test_fps_apply_alignment():
    w = make_fps_waveform(np.zeros(4), 1.0, 4)
    with pytest.raises(AlignmentError):
        fps_apply(np.ones(30), w)


def test_fps_apply_slotwise_product():
    w = make_fps_waveform(np.array([0.0, np.pi / 2]), 1.0, 2)
    out = fps_apply(np.ones(8, dtype=complex), w)
    expected = np.tile([1, 1, 1j, 1j], 2)
    assert_allclose(out, expected, atol=1e-15)


# --------------------------------------------------------------- band-pass


def test_brickwall_passes_inband_tone():
    n = 128
    tone = np.exp(2j * np.pi * 5 * np.arange(n) / n)  # f = 5/128 of fs=1
    out = brickwall_bandpass(tone, bandwidth_hz=0.25, sample_rate_hz=1.0)
    assert np.linalg.norm(out - tone) / np.linalg.norm(tone) < 1e-12


def test_brickwall_kills_out_of_band_tone():
    n = 128
    tone = np.exp(2j * np.pi * 40 * np.arange(n) / n)  # f = 40/128
    out = brickwall_bandpass(tone, bandwidth_hz=0.25, sample_rate_hz=1.0)
    assert np.max(np.abs(out)) < 1e-12


def test_brickwall_two_tone_superposition():
    n = 128
    t = np.arange(n)
    inband = np.exp(2j * np.pi * 5 * t / n)
    outband = np.exp(2j * np.pi * 40 * t / n)
    out = brickwall_bandpass(inband + outband, bandwidth_hz=0.25, sample_rate_hz=1.0)
    assert np.linalg.norm(out - inband) / np.linalg.norm(inband) < 1e-12


def test_brickwall_invalid_bandwidth():
    with pytest.raises(InvalidBandwidth):
        brickwall_bandpass(np.ones(8), bandwidth_hz=2.0, sample_rate_hz=1.0)


# ------------------------------------------------------------- matrix model


def _spec(kind, n, k, v):
    return ArchitectureSpec(kind, n_antennas=n, n_users=k, chains=v)


def test_matrix_emit_direct_substitution():
    # N=2, V=1, Phi = [1, j]^T, X = 1 -> Y = [1, j]^T
    phi = AnalogPhaseMatrix(np.array([[0.0], [np.pi / 2]]), np.ones((2, 1), bool))
    x = UserSymbols(values=np.ones((1, 1, 1), dtype=complex), modulation_order=4)
    out = matrix_model_emit(_spec(Architecture.PHASEMO, 2, 1, 1), phi, None, x)
    assert_allclose(out.data[:, 0, 0], [1.0, 1.0j], atol=1e-15)


def test_matrix_emit_v1_is_analog_form():
    rng = np.random.default_rng(4)
    phi = AnalogPhaseMatrix(rng.uniform(-np.pi, np.pi, (4, 1)), np.ones((4, 1), bool))
    x = UserSymbols(values=random_symbols(4, (1, 8, 2), rng), modulation_order=4)
    pm = matrix_model_emit(_spec(Architecture.PHASEMO, 4, 1, 1), phi, None, x)
    analog = matrix_model_emit(_spec(Architecture.ANALOG, 4, 1, 1), phi, None, x)
    assert np.array_equal(pm.data, analog.data)


def test_matrix_emit_vn_identity_is_scaled_digital():
    rng = np.random.default_rng(6)
    n, k, s = 4, 2, 8
    phi_id = AnalogPhaseMatrix(np.zeros((n, n)), np.eye(n, dtype=bool))
    gam = rng.standard_normal((s, n, k)) + 1j * rng.standard_normal((s, n, k))
    gamma = DigitalPrecoder(matrices=gam)
    x = UserSymbols(values=random_symbols(16, (k, s, 3), rng), modulation_order=16)
    pm = matrix_model_emit(_spec(Architecture.PHASEMO, n, k, n), phi_id, gamma, x)
    dig = matrix_model_emit(_spec(Architecture.DIGITAL, n, k, n), phi_id, gamma, x)
    assert np.allclose(n * pm.data, dig.data, atol=1e-12)


def test_matrix_emit_dimension_mismatch():
    phi = AnalogPhaseMatrix(np.zeros((2, 2)), np.ones((2, 2), bool))
    gamma = DigitalPrecoder(matrices=np.ones((4, 3, 1), dtype=complex))  # V=3 vs phi V=2
    x = UserSymbols(values=np.ones((1, 4, 1), dtype=complex), modulation_order=4)
    with pytest.raises(InvalidSpec):
        matrix_model_emit(_spec(Architecture.PHASEMO, 2, 1, 2), phi, gamma, x)


# ----------------------------------------------------- time-domain oracle


def _oracle_setup(n, v, s=64, t=2, seed=0, order=64):
    rng = np.random.default_rng(seed)
    phi = AnalogPhaseMatrix(rng.uniform(-np.pi, np.pi, (n, v)), np.ones((n, v), bool))
    k = 1 if v == 1 else 2
    raw = rng.standard_normal((s, v, k)) + 1j * rng.standard_normal((s, v, k))
    gamma = DigitalPrecoder(matrices=raw / np.sqrt(v * k))
    x = UserSymbols(values=random_symbols(order, (k, s, t), rng), modulation_order=order)
    return phi, gamma, x


def test_time_domain_v1_static_phase():
    phi, gamma, x = _oracle_setup(3, 1, s=32, t=2, seed=9)
    cfg = TimeDomainConfig(v_count=1, sample_rate_hz=1e6, oversample=16)
    series = time_domain_emit(phi, gamma, x, cfg)
    recovered = recover_subcarrier_symbols(series, cfg, 32, 2)
    spec = _spec(Architecture.PHASEMO, 3, x.values.shape[0], 1)
    reference = matrix_model_emit(spec, phi, gamma, x)
    err = np.linalg.norm(recovered - reference.data) / np.linalg.norm(reference.data)
    assert err < 1e-9


def test_time_domain_matches_matrix_model():
    phi, gamma, x = _oracle_setup(8, 4, seed=1)
    cfg = TimeDomainConfig(v_count=4, sample_rate_hz=100e6, oversample=32)
    series = time_domain_emit(phi, gamma, x, cfg)
    recovered = recover_subcarrier_symbols(series, cfg, 64, 2)
    spec = _spec(Architecture.PHASEMO, 8, 2, 4)
    reference = matrix_model_emit(spec, phi, gamma, x)
    err = np.linalg.norm(recovered - reference.data) / np.linalg.norm(reference.data)
    assert err < 1e-3


@pytest.mark.parametrize(
    "n,v", [(n, v) for n in (1, 2, 4, 8) for v in (1, 2, 4, 8) if v <= n]
)
def test_oracle_equivalence_all_small_arrays(n, v):
    phi, gamma, x = _oracle_setup(n, v, s=32, t=2, seed=100 * n + v)
    cfg = TimeDomainConfig(v_count=v, sample_rate_hz=100e6, oversample=32)
    series = time_domain_emit(phi, gamma, x, cfg)
    recovered = recover_subcarrier_symbols(series, cfg, 32, 2)
    k = x.values.shape[0]
    reference = matrix_model_emit(_spec(Architecture.PHASEMO, n, k, v), phi, gamma, x)
    err = np.linalg.norm(recovered - reference.data) / np.linalg.norm(reference.data)
    assert err < 1e-3


def test_time_domain_out_of_band_clean():
    phi, gamma, x = _oracle_setup(4, 4, seed=2)
    cfg = TimeDomainConfig(v_count=4, sample_rate_hz=100e6, oversample=32)
    series = time_domain_emit(phi, gamma, x, cfg)
    assert out_of_band_residual_db(series, 100e6) < -120.0


def test_time_domain_without_precompensation_fails():
    phi, gamma, x = _oracle_setup(4, 4, seed=3)
    cfg = TimeDomainConfig(v_count=4, sample_rate_hz=100e6, oversample=32)
    series = time_domain_emit(phi, gamma, x, cfg, skip_precompensation=True)
    recovered = recover_subcarrier_symbols(series, cfg, 64, 2)
    spec = _spec(Architecture.PHASEMO, 4, 2, 4)
    reference = matrix_model_emit(spec, phi, gamma, x)
    err = np.linalg.norm(recovered - reference.data) / np.linalg.norm(reference.data)
    assert err > 1e-2  # the uncancelled delay factor must show up


def test_time_domain_needs_minimum_oversampling():
    with pytest.raises(InvalidLength):
        TimeDomainConfig(v_count=2, sample_rate_hz=1e6, oversample=4)


def test_fps_spreading_attenuates_inband_power():
    # pre-filter spectrum holds the 1/V^2 main-band power spreading
    phi, gamma, x = _oracle_setup(1, 4, s=32, t=2, seed=12)
    cfg = TimeDomainConfig(v_count=4, sample_rate_hz=1e6, oversample=16)
    series = time_domain_emit(phi, gamma, x, cfg)
    recovered = recover_subcarrier_symbols(series, cfg, 32, 2)
    streams = np.einsum("svk,kst->vst", gamma.matrices, x.values)
    unspread = np.einsum("nv,vst->nst", phi.as_complex(), streams)
    ratio = np.linalg.norm(recovered) / np.linalg.norm(unspread)
    assert abs(ratio - 1.0 / 4.0) < 1e-6
