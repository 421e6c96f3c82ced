"""Shared numeric foundations: FFT contract, pseudo-inverse, sinc, seeded RNG.

Conventions fixed here and relied on everywhere else:

* Transforms are unitary (1/sqrt(L) both directions) so Parseval holds
  symmetrically.
* ``sinc(x) = sin(pi*x)/(pi*x)`` with ``sinc(0) = 1`` and *exact* zeros at
  nonzero integers, so switching-waveform spectral nulls land exactly on
  integer multiples of the phase count.
* Complex values in binary file formats are interleaved (re, im) IEEE-754
  little-endian 64-bit floats.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidLength


@dataclass(frozen=True)
class Spectrum:
    """Frequency-domain samples on a uniform bin grid (baseband equivalent)."""

    bin_values: np.ndarray
    bin_spacing: float = 1.0
    center_offset: float = 0.0

    def __post_init__(self):
        if self.bin_values.size < 1:
            raise InvalidLength("spectrum needs at least one bin")
        if self.bin_spacing <= 0:
            raise InvalidLength("bin spacing must be positive")


def fft_forward(samples: np.ndarray, sample_rate: float = 1.0) -> Spectrum:
    """Unitary forward transform of a complex time series."""
    samples = np.asarray(samples)
    if samples.size < 1:
        raise InvalidLength("empty input")
    values = np.fft.fft(samples, norm="ortho")
    return Spectrum(bin_values=values, bin_spacing=sample_rate / samples.size)


def fft_inverse(spectrum: Spectrum | np.ndarray) -> np.ndarray:
    """Unitary inverse transform; exact inverse of :func:`fft_forward`."""
    values = spectrum.bin_values if isinstance(spectrum, Spectrum) else np.asarray(spectrum)
    if values.size < 1:
        raise InvalidLength("empty input")
    return np.fft.ifft(values, norm="ortho")


def pseudo_inverse(m: np.ndarray) -> np.ndarray:
    """Moore-Penrose pseudo-inverse (SVD-based). Rank handling is the caller's job."""
    m = np.asarray(m)
    if m.size == 0:
        raise InvalidLength("empty matrix")
    return np.linalg.pinv(m)


def sinc(x) -> np.ndarray:
    """Normalized sinc with exact nulls at nonzero integers.

    ``np.sinc`` evaluates ``sin(pi*x)/(pi*x)`` in floating point, which leaves
    residues of order 1e-16 at integer arguments; the spectral-null assertions
    downstream require exact zeros there.
    """
    x = np.asarray(x, dtype=float)
    out = np.sinc(x)
    exact_null = (x == np.round(x)) & (x != 0)
    return np.where(exact_null, 0.0, out)


def validate_finite(arr: np.ndarray, name: str) -> np.ndarray:
    """Reject NaN/Inf entries at construction time."""
    arr = np.asarray(arr)
    if not np.all(np.isfinite(arr.view(float) if np.iscomplexobj(arr) else arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


class SeededRng:
    """Deterministic random source: PCG64 keyed by a 64-bit seed.

    Identical seeds produce identical streams on every platform (numpy pins
    the PCG64 algorithm).  ``substream`` derives independent, reproducible
    child streams for Monte-Carlo repetitions and sweep points.
    """

    algorithm = "numpy PCG64 (default_rng)"

    def __init__(self, seed: int, _key: tuple[int, ...] = ()):
        self.seed = int(seed)
        self._key = _key
        self.generator = np.random.default_rng((self.seed, *_key))

    def substream(self, *key: int) -> "SeededRng":
        return SeededRng(self.seed, self._key + tuple(int(k) for k in key))
