"""QAM constellation mapping, OFDM modulation, and EVM measurement."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateReference, InvalidLength, UnsupportedOrder

SUPPORTED_ORDERS = (4, 16, 64, 256)


@dataclass(frozen=True)
class UserSymbols:
    """Per-user constellation symbols, shape [K users][S subcarriers][T symbols]."""

    values: np.ndarray
    modulation_order: int

    def __post_init__(self):
        if self.values.ndim != 3 or min(self.values.shape) < 1:
            raise InvalidLength("symbol tensor must be [K][S][T] with all dims >= 1")
        if self.modulation_order not in SUPPORTED_ORDERS:
            raise UnsupportedOrder(f"order {self.modulation_order} not in {SUPPORTED_ORDERS}")


@dataclass(frozen=True)
class OfdmFrame:
    """One OFDM symbol in the time domain, critically sampled (no cyclic prefix)."""

    time_samples: np.ndarray
    subcarrier_count: int
    bandwidth_hz: float


def _axis_amplitude(bits: np.ndarray) -> np.ndarray:
    """Map per-axis Gray-coded bits [..., c] to PAM amplitudes.

    Uses the nested sign construction of the NR square-QAM mappings, e.g. for
    three bits: (1-2b0) * (4 - (1-2b1) * (2 - (1-2b2))).
    """
    c = bits.shape[-1]
    amp = np.ones(bits.shape[:-1])
    for level in range(c - 1, 0, -1):
        amp = 2 ** (c - level) - (1 - 2 * bits[..., level]) * amp
    return (1 - 2 * bits[..., 0]) * amp


def qam_modulate(bits: np.ndarray, order: int) -> np.ndarray:
    """Map a bit sequence to Gray-coded square-QAM symbols with unit mean energy.

    Even-index bits steer the in-phase axis, odd-index bits the quadrature
    axis (NR bit-interleaving convention).  All-zero bits map to the positive
    inner corner, e.g. (1+1j)/sqrt(2) for order 4.
    """
    if order not in SUPPORTED_ORDERS:
        raise UnsupportedOrder(f"order {order} not in {SUPPORTED_ORDERS}")
    bits = np.asarray(bits).astype(np.int64).reshape(-1)
    k = int(np.log2(order))
    if bits.size % k != 0:
        raise InvalidLength(f"bit count {bits.size} not divisible by {k}")
    groups = bits.reshape(-1, k)
    i_amp = _axis_amplitude(groups[:, 0::2])
    q_amp = _axis_amplitude(groups[:, 1::2])
    scale = np.sqrt(2.0 * (order - 1) / 3.0)  # unit average constellation energy
    return (i_amp + 1j * q_amp) / scale


def qam_constellation(order: int) -> np.ndarray:
    """All `order` constellation points in bit-pattern order."""
    k = int(np.log2(order))
    patterns = ((np.arange(order)[:, None] >> np.arange(k - 1, -1, -1)) & 1).reshape(-1)
    return qam_modulate(patterns, order)


def random_symbols(order: int, shape: tuple[int, ...], rng: np.random.Generator) -> np.ndarray:
    """Uniform random constellation symbols of the given tensor shape."""
    points = qam_constellation(order)
    idx = rng.integers(0, order, size=shape)
    return points[idx]


def ofdm_modulate(symbols: np.ndarray, bandwidth_hz: float = 1.0) -> OfdmFrame:
    """Unitary IFFT of a DC-centered subcarrier vector (index S//2 is DC)."""
    symbols = np.asarray(symbols)
    if symbols.ndim != 1 or symbols.size < 1:
        raise InvalidLength("per-subcarrier vector required")
    time = np.fft.ifft(np.fft.ifftshift(symbols), norm="ortho")
    return OfdmFrame(time_samples=time, subcarrier_count=symbols.size, bandwidth_hz=bandwidth_hz)


def ofdm_demodulate(frame: OfdmFrame | np.ndarray, subcarrier_count: int | None = None) -> np.ndarray:
    """Inverse of :func:`ofdm_modulate`; returns the DC-centered subcarrier vector."""
    if isinstance(frame, OfdmFrame):
        time, count = frame.time_samples, frame.subcarrier_count
    else:
        time = np.asarray(frame)
        count = subcarrier_count if subcarrier_count is not None else time.size
    if time.size != count:
        raise InvalidLength(f"expected {count} samples, got {time.size}")
    return np.fft.fftshift(np.fft.fft(time, norm="ortho"))


def evm_rms(received: np.ndarray, reference: np.ndarray) -> float:
    """Root-mean-square error vector magnitude against known reference symbols.

    ``sqrt(mean|received - reference|^2 / mean|reference|^2)``.  The reference
    is the transmitted (genie) constellation, not a nearest-point decision.
    """
    received = np.asarray(received)
    reference = np.asarray(reference)
    if received.shape != reference.shape:
        raise InvalidLength(f"shape mismatch {received.shape} vs {reference.shape}")
    ref_energy = np.mean(np.abs(reference) ** 2)
    if ref_energy == 0:
        raise DegenerateReference("reference has zero energy")
    err = received - reference
    err = np.where(np.isfinite(err), err, np.inf)
    return float(np.sqrt(np.mean(np.abs(err) ** 2) / ref_energy))
