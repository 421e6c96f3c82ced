import numpy as np
import pytest
from numpy.testing import assert_allclose

from phasemo.errors import DegenerateReference, InvalidLength, UnsupportedOrder
from phasemo.waveform import (
    SUPPORTED_ORDERS,
    evm_rms,
    ofdm_demodulate,
    ofdm_modulate,
    qam_constellation,
    qam_modulate,
)


def test_qpsk_gray_corner():
    sym = qam_modulate([0, 0], 4)
    assert_allclose(sym, [(1 + 1j) / np.sqrt(2)], atol=1e-15)


@pytest.mark.parametrize("order", SUPPORTED_ORDERS)
def test_constellation_unit_mean_energy(order):
    points = qam_constellation(order)
    assert abs(np.mean(np.abs(points) ** 2) - 1.0) < 1e-12


@pytest.mark.parametrize("order", SUPPORTED_ORDERS)
def test_constellation_bijective(order):
    points = qam_constellation(order)
    assert len(np.unique(np.round(points, 12))) == order


def test_qam_bad_bit_count():
    with pytest.raises(InvalidLength):
        qam_modulate([0, 1, 0], 4)


def test_qam_unsupported_order():
    with pytest.raises(UnsupportedOrder):
        qam_modulate([0, 0, 0], 8)


def test_ofdm_dc_tone_gives_constant():
    sym = np.zeros(16, dtype=complex)
    sym[8] = 1.0  # DC sits at index S//2 in the DC-centered layout
    frame = ofdm_modulate(sym)
    assert_allclose(frame.time_samples, np.full(16, frame.time_samples[0]), atol=1e-15)


@pytest.mark.parametrize("length", [16, 64, 256])
def test_ofdm_roundtrip(length):
    rng = np.random.default_rng(length)
    sym = rng.standard_normal(length) + 1j * rng.standard_normal(length)
    back = ofdm_demodulate(ofdm_modulate(sym))
    assert np.linalg.norm(back - sym) / np.linalg.norm(sym) < 1e-12


def test_ofdm_zero_in_zero_out():
    frame = ofdm_modulate(np.zeros(8, dtype=complex))
    assert np.all(frame.time_samples == 0)


def test_ofdm_energy_preserved():
    rng = np.random.default_rng(3)
    sym = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    frame = ofdm_modulate(sym)
    e_f = np.sum(np.abs(sym) ** 2)
    e_t = np.sum(np.abs(frame.time_samples) ** 2)
    assert abs(e_f - e_t) / e_f < 1e-10


def test_ofdm_length_mismatch():
    with pytest.raises(InvalidLength):
        ofdm_demodulate(np.zeros(8, dtype=complex), subcarrier_count=16)


def test_evm_identity_and_uniform_scale():
    rng = np.random.default_rng(1)
    ref = rng.standard_normal(100) + 1j * rng.standard_normal(100)
    assert evm_rms(ref, ref) == 0.0
    assert abs(evm_rms(1.1 * ref, ref) - 0.1) < 1e-12


def test_evm_noise_monte_carlo():
    # unit QPSK + complex noise of variance 0.01 -> EVM about 0.1
    rng = np.random.default_rng(2024)
    n = 10_000
    ref = qam_modulate(rng.integers(0, 2, size=2 * n), 4)
    noise = np.sqrt(0.01 / 2) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    evm = evm_rms(ref + noise, ref)
    assert abs(evm - 0.1) < 0.01


@pytest.mark.parametrize("seed", range(5))
def test_evm_scale_invariance(seed):
    rng = np.random.default_rng(seed)
    ref = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    rx = ref + 0.05 * (rng.standard_normal(64) + 1j * rng.standard_normal(64))
    alpha = rng.standard_normal() + 1j * rng.standard_normal()
    assert abs(evm_rms(alpha * rx, alpha * ref) - evm_rms(rx, ref)) < 1e-12


def test_evm_errors():
    with pytest.raises(InvalidLength):
        evm_rms(np.zeros(4, complex), np.zeros(5, complex))
    with pytest.raises(DegenerateReference):
        evm_rms(np.ones(4, complex), np.zeros(4, complex))
