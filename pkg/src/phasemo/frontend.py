"""Transmitter front end in two representations.

Matrix path: per-subcarrier emission Y(f) = g * Phi * Gamma(f) * X(f), valid
for every architecture (g = 1/V for the interleaved single-chain design,
whose switching spreads the main-band amplitude by 1/V, power by 1/V^2).

Time-domain path (the brute-force oracle for the single-chain design):
precode -> per-stream delay pre-compensation -> sample interleaver ->
zero-order-hold DAC at V*fs with images -> periodic fast-phase-shifter
waveform per antenna -> brick-wall band-pass filter.  After equalizing the
known in-band hold response, the band-limited content must match the matrix
path.

All processing is complex baseband equivalent; the upconverter enters only
through the channel.  Amplitude bookkeeping: recovered subcarrier values are
continuous-waveform amplitudes, i.e. DFT bins divided by the sample count.
Holding each interleaved sample for 1/(V*fs) instead of 1/fs is what makes
the in-band amplitude come out V times smaller than a conventional
full-rate-DAC chain driving the same sample values.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .core import sinc
from .errors import AlignmentError, AlreadyCompensated, InvalidBandwidth, InvalidLength, InvalidSpec
from .precoding import AnalogPhaseMatrix, Architecture, ArchitectureSpec, DigitalPrecoder
from .waveform import UserSymbols, ofdm_demodulate, ofdm_modulate


@dataclass(frozen=True)
class PrecodedStreams:
    """V per-chain time-domain streams [V][M] at the base sample rate."""

    values: np.ndarray
    sample_rate_hz: float
    precompensated: bool = False

    def __post_init__(self):
        if self.values.ndim != 2 or self.values.shape[0] < 1:
            raise InvalidLength("streams must be [V][M] with V >= 1")


@dataclass(frozen=True)
class InterleavedStream:
    """Round-robin interleaved samples at rate V * fs; slot (m, v) holds stream v sample m."""

    values: np.ndarray
    v_count: int
    base_rate_hz: float

    @property
    def rate_hz(self) -> float:
        return self.v_count * self.base_rate_hz


@dataclass(frozen=True)
class FpsWaveform:
    """One antenna's periodic switching waveform: V phases, each held L samples.

    Unit modulus everywhere; period V * T'_s with T'_s = 1/(V*fs); transitions
    aligned to DAC sample boundaries.
    """

    phases: np.ndarray  # [V]
    slot_duration_s: float
    oversample: int

    def __post_init__(self):
        if self.phases.ndim != 1 or self.phases.size < 1:
            raise InvalidLength("need at least one phase state")
        if self.oversample < 1:
            raise InvalidLength("oversample factor must be >= 1")

    @property
    def v_count(self) -> int:
        return self.phases.size

    @property
    def period_samples(self) -> int:
        return self.v_count * self.oversample

    def samples(self) -> np.ndarray:
        return np.repeat(np.exp(1j * self.phases), self.oversample)


@dataclass(frozen=True)
class AntennaSignals:
    """Per-antenna emitted signal: frequency-domain [N][S][T] or oversampled time series [N][M_os]."""

    data: np.ndarray
    kind: str  # "spectrum" | "time"
    sample_rate_hz: float = 0.0

    def __post_init__(self):
        if self.kind not in ("spectrum", "time"):
            raise InvalidSpec(f"unknown antenna-signal kind {self.kind!r}")
        if self.data.shape[0] < 1:
            raise InvalidLength("need at least one antenna")


def spreading_gain(spec: ArchitectureSpec, compensate_spreading: bool = False) -> float:
    """Scalar emission gain g: 1/V for the switched single-chain design, else 1."""
    if spec.kind is Architecture.PHASEMO and not compensate_spreading:
        return 1.0 / spec.chains
    return 1.0


def matrix_model_emit(
    spec: ArchitectureSpec,
    phi: AnalogPhaseMatrix,
    gamma: DigitalPrecoder | None,
    x: UserSymbols,
    compensate_spreading: bool = False,
) -> AntennaSignals:
    """Frequency-domain emission Y[n,s,t] = g * (Phi Gamma(s) X(s,t))[n].

    Digital uses Phi = I; analog uses Gamma = 1 with a single user; antenna
    muting carries zero rows on muted antennas inside Phi's mask.
    """
    phi_c = phi.as_complex()
    values = x.values
    K, S, T = values.shape
    if phi_c.shape[0] != spec.n_antennas:
        raise InvalidSpec("phase matrix rows must match antenna count")
    if gamma is None:  # analog beamforming: single user straight to the phase network
        if K != 1 or phi_c.shape[1] != 1:
            raise InvalidSpec("direct analog emission needs K = 1 and a single column")
        gammas = np.ones((S, 1, 1), dtype=np.complex128)
    else:
        gammas = gamma.matrices
        if gammas.shape[0] != S or gammas.shape[2] != K or gammas.shape[1] != phi_c.shape[1]:
            raise InvalidSpec(
                f"precoder {gammas.shape} inconsistent with streams {phi_c.shape[1]}, "
                f"users {K}, subcarriers {S}"
            )
    g = spreading_gain(spec, compensate_spreading)
    out = g * _kernels.apply_per_subcarrier(phi_c, gammas, values)
    return AntennaSignals(data=out, kind="spectrum")


def emission_mapping(
    spec: ArchitectureSpec,
    phi: AnalogPhaseMatrix,
    gamma: DigitalPrecoder | None,
    n_subcarriers: int,
    compensate_spreading: bool = False,
) -> np.ndarray:
    """Per-subcarrier antenna mapping M[s] = g * Phi * Gamma(s), shape [S][N][K]."""
    phi_c = phi.as_complex()
    g = spreading_gain(spec, compensate_spreading)
    if gamma is None:
        return np.repeat(g * phi_c[None, :, :], n_subcarriers, axis=0)
    return g * np.einsum("nv,svk->snk", phi_c, gamma.matrices)


def phase_precompensate(p: PrecodedStreams, v_count: int | None = None) -> PrecodedStreams:
    """Cancel the interleaver's per-stream delay up front.

    Stream v is multiplied per frequency bin by exp(+j 2 pi f v / (V fs)),
    the inverse of the exp(-j 2 pi f v / (V fs)) factor the interleaver's
    time offset imprints on the combined spectrum.  Applied digitally after
    precoding, before interleaving.  Frequencies follow the FFT bin layout
    (Nyquist negative), so the cancellation is exact bin by bin.
    """
    if p.precompensated:
        raise AlreadyCompensated("streams already pre-compensated")
    V, M = p.values.shape
    if v_count is None:
        v_count = V
    freqs = np.fft.fftfreq(M, d=1.0 / p.sample_rate_hz)
    shift = np.exp(
        2j * np.pi * freqs[None, :] * np.arange(V)[:, None] / (v_count * p.sample_rate_hz)
    )
    spectra = np.fft.fft(p.values, axis=1)
    comp = np.fft.ifft(spectra * shift, axis=1)
    return replace(p, values=comp, precompensated=True)


def interleave(p: PrecodedStreams) -> InterleavedStream:
    """z = [p_1[1], p_2[1], ..., p_V[1], p_1[2], ...] at rate V * fs."""
    values = np.asarray(p.values)
    return InterleavedStream(values=values.T.reshape(-1), v_count=values.shape[0], base_rate_hz=p.sample_rate_hz)


def deinterleave(z: InterleavedStream) -> PrecodedStreams:
    """Exact inverse of :func:`interleave`."""
    if z.values.size % z.v_count != 0:
        raise InvalidLength("interleaved length not a multiple of the stream count")
    values = z.values.reshape(-1, z.v_count).T
    return PrecodedStreams(values=values, sample_rate_hz=z.base_rate_hz)


def dac_zoh(z: InterleavedStream, oversample: int) -> np.ndarray:
    """Zero-order-hold DAC model: each sample held for `oversample` output samples.

    The held output carries images at multiples of the input rate under a
    sinc-shaped envelope with a half-sample delay (the classic hold response);
    see :func:`zoh_inband_response` for the exact sampled form.
    """
    if oversample < 2:
        raise InvalidLength("oversample factor must be >= 2")
    return _kernels.zoh_hold(z.values, oversample)


def zoh_inband_response(freqs_hz: np.ndarray, hold_rate_hz: float, oversample: int) -> np.ndarray:
    """Exact response of the sampled hold at the analysis frequencies, 1 at DC.

    sin(pi f / f_h) / (L sin(pi f / (L f_h))) * exp(-j pi f (L-1) / (L f_h)),
    the discrete form of the sinc-amplitude + half-sample-delay hold response
    for a hold of L samples at input rate f_h.
    """
    f = np.asarray(freqs_hz, dtype=float)
    L = oversample
    x = f / hold_rate_hz
    num = np.sin(np.pi * x)
    den = L * np.sin(np.pi * x / L)
    amp = np.ones_like(f)
    nonzero = den != 0
    amp[nonzero] = num[nonzero] / den[nonzero]
    amp[~nonzero & (np.abs(x) < 0.5)] = 1.0  # DC
    return amp * np.exp(-1j * np.pi * x * (L - 1) / L)


def make_fps_waveform(phases: np.ndarray, base_rate_hz: float, oversample: int) -> FpsWaveform:
    """Periodic switching waveform holding phase v for slot v of each period."""
    phases = np.asarray(phases, dtype=float)
    return FpsWaveform(
        phases=phases,
        slot_duration_s=1.0 / (phases.size * base_rate_hz),
        oversample=oversample,
    )


def fps_apply(signal: np.ndarray, w: FpsWaveform) -> np.ndarray:
    """Pointwise product of the oversampled signal with the periodic waveform."""
    signal = np.asarray(signal)
    if signal.size % w.period_samples != 0:
        raise AlignmentError(
            f"signal length {signal.size} not a multiple of the waveform period {w.period_samples}"
        )
    return _kernels.fps_modulate(signal, w.samples())


def fps_spectrum_closed_form(w: FpsWaveform, i_range) -> np.ndarray:
    """Line weights of the switching waveform at frequencies i / (V T'_s).

    weight(i) = (1/V) * sum_v exp(j Phi_v) exp(-j (2 pi i / V)(v + 1/2)) sinc(i/V).
    Lines at nonzero multiples of V are exactly null (sinc null), which is why
    the DAC images survive the band-pass filter with zero weight.
    """
    i = np.asarray(i_range, dtype=float)
    V = w.v_count
    v = np.arange(V)
    phase = np.exp(1j * w.phases)[None, :] * np.exp(
        -1j * (2.0 * np.pi * i[:, None] / V) * (v[None, :] + 0.5)
    )
    return phase.sum(axis=1) / V * sinc(i / V)


def fps_line_spectrum_measured(w: FpsWaveform, i_range) -> np.ndarray:
    """Continuous-time line weights measured from the generated samples.

    The DFT of one period gives the sampled sequence's coefficients; dividing
    each line by the per-sample hold response (the waveform is constant over
    each output sample) recovers the piecewise-constant waveform's Fourier
    coefficients exactly.  Valid for |i| < V*L/2.
    """
    i = np.asarray(i_range, dtype=int)
    period = w.period_samples
    if np.any(np.abs(i) >= period / 2):
        raise InvalidLength("line index beyond the sampled Nyquist range")
    coeffs = np.fft.fft(w.samples()) / period
    hold = sinc(i / period) * np.exp(-1j * np.pi * i / period)
    return coeffs[np.mod(i, period)] * hold


def brickwall_bandpass(signal: np.ndarray, bandwidth_hz: float, sample_rate_hz: float) -> np.ndarray:
    """Ideal filter: zero every FFT bin with |f| > B/2 (baseband equivalent)."""
    signal = np.asarray(signal)
    if bandwidth_hz > sample_rate_hz:
        raise InvalidBandwidth(f"bandwidth {bandwidth_hz} exceeds sample rate {sample_rate_hz}")
    spectrum = np.fft.fft(signal)
    freqs = np.fft.fftfreq(signal.size, d=1.0 / sample_rate_hz)
    spectrum[np.abs(freqs) > bandwidth_hz / 2.0 + 1e-9] = 0.0
    return np.fft.ifft(spectrum)


@dataclass(frozen=True)
class TimeDomainConfig:
    v_count: int
    sample_rate_hz: float  # base stream rate fs (= occupied bandwidth B)
    oversample: int  # L, output grid rate L * V * fs

    def __post_init__(self):
        if self.oversample < 8:
            raise InvalidLength("time-domain oracle needs oversample >= 8")


def precoded_time_streams(gamma: DigitalPrecoder | None, x: UserSymbols, sample_rate_hz: float) -> PrecodedStreams:
    """OFDM-modulate Gamma(f) X(f) into V concatenated time-domain streams [V][S*T]."""
    K, S, T = x.values.shape
    if gamma is None:
        per_sc = x.values  # analog: single stream is the user signal itself
    else:
        per_sc = np.einsum("svk,kst->vst", gamma.matrices, x.values)
    V = per_sc.shape[0]
    streams = np.empty((V, S * T), dtype=np.complex128)
    for v in range(V):
        for t in range(T):
            streams[v, t * S : (t + 1) * S] = ofdm_modulate(per_sc[v, :, t]).time_samples
    return PrecodedStreams(values=streams, sample_rate_hz=sample_rate_hz)


def time_domain_emit(
    phi: AnalogPhaseMatrix,
    gamma: DigitalPrecoder | None,
    x: UserSymbols,
    config: TimeDomainConfig,
    skip_precompensation: bool = False,
) -> AntennaSignals:
    """Full single-chain transmit chain, one oversampled series per antenna.

    precode -> pre-compensate -> interleave -> ZOH DAC at V*fs -> per-antenna
    switching waveform -> brick-wall band-pass of width fs.  The
    `skip_precompensation` switch exists as a negative control: without the
    digital delay cancellation the recovered streams are rotated per bin and
    the matrix-model comparison must fail.
    """
    phi_c = phi.as_complex()
    V = config.v_count
    if phi_c.shape[1] != V:
        raise InvalidSpec(f"phase matrix has {phi_c.shape[1]} columns, expected {V}")
    if not np.allclose(np.abs(phi_c), 1.0):
        raise InvalidSpec("time-domain chain requires unit-modulus fully-connected phases")
    streams = precoded_time_streams(gamma, x, config.sample_rate_hz)
    if not skip_precompensation:
        streams = phase_precompensate(streams, V)
    z = interleave(streams)
    held = dac_zoh(z, config.oversample)
    rate_os = config.oversample * z.rate_hz
    n_antennas = phi_c.shape[0]
    out = np.empty((n_antennas, held.size), dtype=np.complex128)
    for n in range(n_antennas):
        w = make_fps_waveform(np.angle(phi_c[n, :]), config.sample_rate_hz, config.oversample)
        modulated = fps_apply(held, w)
        out[n] = brickwall_bandpass(modulated, config.sample_rate_hz, rate_os)
    return AntennaSignals(data=out, kind="time", sample_rate_hz=rate_os)


def recover_subcarrier_symbols(
    signals: AntennaSignals, config: TimeDomainConfig, n_subcarriers: int, n_symbols: int
) -> np.ndarray:
    """Demodulate oversampled antenna series back to subcarrier values [N][S][T].

    In-band FFT bins are equalized by the known hold response and rescaled to
    continuous-amplitude units (bin / sample count); the switching chain's
    1/V main-band attenuation survives this bookkeeping and is part of the
    recovered values.
    """
    if signals.kind != "time":
        raise InvalidSpec("recovery expects oversampled time-domain signals")
    V, L = config.v_count, config.oversample
    M = n_subcarriers * n_symbols
    total = signals.data.shape[1]
    if total != L * V * M:
        raise InvalidLength(f"series length {total} != L*V*S*T = {L * V * M}")
    hold_rate = V * config.sample_rate_hz
    rate_os = L * hold_rate
    # fft-layout in-band bins: k = 0..M/2-1 and total-M/2..total-1
    pos = np.arange(0, M - M // 2)
    neg = np.arange(total - M // 2, total)
    bins = np.concatenate([pos, neg])
    freqs = np.fft.fftfreq(total, d=1.0 / rate_os)[bins]
    eq = zoh_inband_response(freqs, hold_rate, L)
    out = np.empty((signals.data.shape[0], n_subcarriers, n_symbols), dtype=np.complex128)
    for n in range(signals.data.shape[0]):
        spectrum = np.fft.fft(signals.data[n])
        m_spectrum = np.zeros(M, dtype=np.complex128)
        m_spectrum[np.mod(bins, M)] = spectrum[bins] / eq / (L * V)
        series = np.fft.ifft(m_spectrum)
        for t in range(n_symbols):
            out[n, :, t] = ofdm_demodulate(series[t * n_subcarriers : (t + 1) * n_subcarriers], n_subcarriers)
    return out


def out_of_band_residual_db(signals: AntennaSignals, bandwidth_hz: float) -> float:
    """Energy outside |f| <= B/2 relative to in-band energy, in dB (-inf if zero)."""
    if signals.kind != "time":
        raise InvalidSpec("residual measurement expects time-domain signals")
    total_in = 0.0
    total_out = 0.0
    for n in range(signals.data.shape[0]):
        spectrum = np.fft.fft(signals.data[n])
        freqs = np.fft.fftfreq(spectrum.size, d=1.0 / signals.sample_rate_hz)
        mask = np.abs(freqs) <= bandwidth_hz / 2.0 + 1e-9
        power = np.abs(spectrum) ** 2
        total_in += power[mask].sum()
        total_out += power[~mask].sum()
    if total_out == 0.0:
        return float("-inf")
    return float(10.0 * np.log10(total_out / total_in))
