"""End-to-end downlink: channel, noise, EVM/SINR, MCS mapping, throughput.

Unit conventions (recorded in every CSV metadata block):

* Signal amplitudes are dBm-native: |value|^2 = power in mW.
* The PA gain g_pa is the largest scalar keeping EIRP <= cap, with
  EIRP(dBm) = mean per-active-antenna conducted power (dBm) + 20 log10(N_active).
* Noise is complex Gaussian with variance 10^(noise_dbm/10) mW per received
  subcarrier sample.
* The receiver applies a perfect-CSI single-tap equalizer per (user,
  subcarrier): the known composite gain H(f) g_pa M(f) diagonal is divided
  out, leaving interference and scaled noise in the constellation estimate.
"""

from __future__ import annotations

import csv
import importlib.resources
from dataclasses import dataclass

import numpy as np

from .channel import ChannelFrequencyResponse
from .errors import InvalidLength, InvalidSpec
from .waveform import UserSymbols, evm_rms


@dataclass(frozen=True)
class McsTable:
    """SINR-threshold (dB) to spectral-efficiency (bits/s/Hz) lookup, ascending."""

    thresholds_db: np.ndarray
    efficiencies: np.ndarray

    def __post_init__(self):
        t, e = self.thresholds_db, self.efficiencies
        if t.size < 1 or t.size != e.size:
            raise InvalidLength("table needs matching, non-empty columns")
        if np.any(np.diff(t) <= 0) or np.any(np.diff(e) <= 0):
            raise InvalidSpec("thresholds and efficiencies must be strictly increasing")

    @property
    def max_efficiency(self) -> float:
        return float(self.efficiencies[-1])


def load_mcs_table(path: str | None = None) -> McsTable:
    """Load an MCS table CSV (`sinr_db,se_bps_hz`); default ships with the package."""
    if path is None:
        ref = importlib.resources.files("phasemo.data").joinpath("mcs_table.csv")
        text = ref.read_text(encoding="utf-8")
        rows = list(csv.DictReader(text.splitlines()))
    else:
        with open(path, newline="", encoding="utf-8") as f:
            rows = list(csv.DictReader(f))
    thresholds = np.array([float(r["sinr_db"]) for r in rows])
    eff = np.array([float(r["se_bps_hz"]) for r in rows])
    return McsTable(thresholds_db=thresholds, efficiencies=eff)


@dataclass(frozen=True)
class LinkResult:
    per_user_evm: np.ndarray
    per_user_sinr_db: np.ndarray
    per_user_se: np.ndarray
    net_throughput_bps: float
    eirp_dbm: float
    pa_gain: float


@dataclass(frozen=True)
class ReceiveParams:
    noise_dbm: float = -100.0
    eirp_cap_dbm: float = 77.0
    sinr_cap_db: float = 40.0
    acpr_penalty_db: float = 0.0
    per_antenna_dbm: float | None = None  # fixed conducted power instead of cap-driven


def pa_scaling(
    emitted: np.ndarray, n_active: int, params: ReceiveParams
) -> tuple[float, float]:
    """(g_pa, achieved EIRP dBm) for per-subcarrier antenna spectra [N][S][T].

    Conducted power convention: mean |value|^2 over active antennas and all
    (subcarrier, symbol) slots.  With `per_antenna_dbm` set, g_pa targets that
    conducted power (the fixed-PA-rating convention); the resulting EIRP must
    still respect the cap.
    """
    active = np.abs(emitted) ** 2
    mean_power = active.sum(axis=(1, 2)).sum() / (n_active * emitted.shape[1] * emitted.shape[2])
    if mean_power == 0:
        return 0.0, float("-inf")
    if params.per_antenna_dbm is not None:
        target_mw = 10.0 ** (params.per_antenna_dbm / 10.0)
    else:
        target_mw = 10.0 ** ((params.eirp_cap_dbm - 20.0 * np.log10(n_active)) / 10.0)
    g = float(np.sqrt(target_mw / mean_power))
    eirp_dbm = 10.0 * np.log10(target_mw) + 20.0 * np.log10(n_active)
    if eirp_dbm > params.eirp_cap_dbm + 1e-9:
        raise InvalidSpec(
            f"per-antenna power {params.per_antenna_dbm} dBm drives EIRP {eirp_dbm:.2f} "
            f"past the {params.eirp_cap_dbm} dBm cap"
        )
    return g, eirp_dbm


def transmit_receive(
    emitted: np.ndarray,
    h: ChannelFrequencyResponse,
    mapping: np.ndarray,
    params: ReceiveParams,
    rng: np.random.Generator,
    n_active: int | None = None,
    noiseless: bool = False,
) -> tuple[np.ndarray, float, float]:
    """Propagate antenna spectra through the channel and equalize.

    emitted: [N][S][T] per-subcarrier antenna values; mapping: [S][N][K]
    composite precoding matrices (for the genie equalizer diagonal).
    Returns (equalized received symbols [K][S][T], g_pa, eirp_dbm).
    """
    N, S, T = emitted.shape
    if h.entries.shape[1] != N or h.entries.shape[2] != S:
        raise InvalidSpec("channel tensor inconsistent with emitted signals")
    if n_active is None:
        n_active = N
    g_pa, eirp_dbm = pa_scaling(emitted, n_active, params)
    received = np.einsum("kns,nst->kst", h.entries, emitted) * g_pa
    if not noiseless:
        sigma2 = 10.0 ** (params.noise_dbm / 10.0)
        noise = rng.standard_normal(received.shape) + 1j * rng.standard_normal(received.shape)
        received = received + np.sqrt(sigma2 / 2.0) * noise
    # genie single-tap equalizer: composite per-(user, subcarrier) gain
    diag = np.einsum("kns,snk->ks", h.entries, mapping) * g_pa
    with np.errstate(divide="ignore", invalid="ignore"):
        equalized = received / diag[:, :, None]
    equalized = np.where(np.isfinite(equalized), equalized, np.inf)
    return equalized, g_pa, eirp_dbm


def sinr_from_evm(evm: float, cap_db: float = 40.0) -> float:
    """SINR = 1/EVM^2 in dB, capped; a zero EVM returns the cap."""
    if evm < 0:
        raise InvalidSpec("EVM must be non-negative")
    if evm == 0.0:
        return cap_db
    with np.errstate(divide="ignore"):
        sinr = 10.0 * np.log10(1.0 / evm**2)
    return float(min(sinr, cap_db))


def mcs_map(sinr_db: float, table: McsTable) -> float:
    """Spectral efficiency of the highest row whose threshold <= sinr (0 in outage)."""
    idx = int(np.searchsorted(table.thresholds_db, sinr_db, side="right")) - 1
    if idx < 0:
        return 0.0
    return float(table.efficiencies[idx])


def net_throughput(se_per_user, bandwidth_hz: float) -> float:
    """Total rate: bandwidth times the summed spectral efficiencies."""
    se = np.asarray(se_per_user, dtype=float)
    if se.size and np.any(se < 0):
        raise InvalidSpec("spectral efficiencies must be >= 0")
    return float(bandwidth_hz * se.sum())


def measure_link(
    received: np.ndarray,
    reference: UserSymbols,
    table: McsTable,
    bandwidth_hz: float,
    sinr_cap_db: float = 40.0,
    acpr_penalty_db: float = 0.0,
    eirp_dbm: float = float("nan"),
    pa_gain: float = float("nan"),
) -> LinkResult:
    """Per-user EVM -> SINR -> spectral efficiency -> net throughput."""
    K = reference.values.shape[0]
    evm = np.array([evm_rms(received[k], reference.values[k]) for k in range(K)])
    sinr = np.array([sinr_from_evm(e, sinr_cap_db) for e in evm]) - acpr_penalty_db
    se = np.array([mcs_map(s, table) for s in sinr])
    return LinkResult(
        per_user_evm=evm,
        per_user_sinr_db=sinr,
        per_user_se=se,
        net_throughput_bps=net_throughput(se, bandwidth_hz),
        eirp_dbm=eirp_dbm,
        pa_gain=pa_gain,
    )
