"""Wireless channel: synthetic geometric multipath generator and CFR file I/O.

The frequency response tensor is H[user][antenna][subcarrier] for a uniform
linear array.  Synthetic channels replace an external ray tracer: per user,
a handful of far-field paths with random angles, delays, and complex gains,
attenuated by distance pathloss.

CFR binary format (bit-exact round trip):
  8-byte magic ``CFRv0001``, then one UTF-8 JSON header line terminated by
  ``\\n`` with fields {"k","n","s","fc_hz","scs_hz","meta"}, then k*n*s
  complex entries in row-major [k][n][s] order, each stored as two IEEE-754
  little-endian 64-bit floats (re, im).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .core import validate_finite
from .errors import FormatError, TruncatedPayload

SPEED_OF_LIGHT = 299792458.0
MAGIC = b"CFRv0001"


@dataclass(frozen=True)
class ChannelFrequencyResponse:
    entries: np.ndarray  # complex [K][N][S]
    center_frequency_hz: float
    subcarrier_spacing_hz: float
    metadata: str = ""

    def __post_init__(self):
        if self.entries.ndim != 3 or min(self.entries.shape) < 1:
            raise ValueError("channel tensor must be [K][N][S] with all dims >= 1")
        validate_finite(self.entries, "channel tensor")

    @property
    def n_users(self) -> int:
        return self.entries.shape[0]

    @property
    def n_antennas(self) -> int:
        return self.entries.shape[1]

    @property
    def n_subcarriers(self) -> int:
        return self.entries.shape[2]


@dataclass(frozen=True)
class GeometryScenario:
    """Parameters of the synthetic multipath draw.

    Angles are drawn uniformly over +-angle_spread_deg, delays uniformly over
    [0, delay_spread_s], per-path gains are complex normal with total mean
    power set by the distance pathloss.  User 0 sits at distance_max_m; the
    remaining users are placed area-uniformly in the annulus
    [distance_min_m, distance_max_m].
    """

    n_antennas: int
    n_users: int
    center_frequency_hz: float
    subcarrier_spacing_hz: float
    n_subcarriers: int
    element_spacing_wavelengths: float = 0.5
    paths_per_user: int = 6
    distance_min_m: float = 100.0
    distance_max_m: float = 300.0
    pathloss_exponent: float = 2.0
    angle_spread_deg: float = 60.0
    delay_spread_s: float = field(default=0.0)  # 0 -> 4 / (S * scs)
    seed: int = 0

    def __post_init__(self):
        if min(self.n_antennas, self.n_users, self.paths_per_user, self.n_subcarriers) < 1:
            raise ValueError("antenna/user/path/subcarrier counts must be >= 1")
        if self.element_spacing_wavelengths <= 0:
            raise ValueError("element spacing must be positive")
        if not (0 < self.distance_min_m <= self.distance_max_m):
            raise ValueError("distances must satisfy 0 < min <= max")

    @property
    def bandwidth_hz(self) -> float:
        return self.n_subcarriers * self.subcarrier_spacing_hz

    @property
    def effective_delay_spread_s(self) -> float:
        return self.delay_spread_s if self.delay_spread_s > 0 else 4.0 / self.bandwidth_hz


def pathloss_amplitude(distance_m: float, exponent: float, center_frequency_hz: float) -> float:
    """Amplitude gain at distance d: (lambda / 4 pi) * d**(-exponent/2), d0 = 1 m."""
    wavelength = SPEED_OF_LIGHT / center_frequency_hz
    return (wavelength / (4.0 * np.pi)) * distance_m ** (-exponent / 2.0)


def steering_phase(angles_rad: np.ndarray, n_antennas: int, spacing_wavelengths: float) -> np.ndarray:
    """ULA steering phase [.., n] = 2 pi n d sin(theta); applied as exp(-j phase)."""
    n = np.arange(n_antennas)
    return 2.0 * np.pi * spacing_wavelengths * np.sin(np.asarray(angles_rad))[..., None] * n


def cfr_from_paths(
    angles_rad: np.ndarray,
    delays_s: np.ndarray,
    gains: np.ndarray,
    n_antennas: int,
    spacing_wavelengths: float,
    n_subcarriers: int,
    subcarrier_spacing_hz: float,
) -> np.ndarray:
    """Assemble H[k][n][s] from explicit per-user path lists [K][P].

    H[k,n,s] = sum_p gains[k,p] * exp(-j 2 pi n d sin(theta_p))
                               * exp(-j 2 pi f_s tau_p)
    with f_s the DC-centered baseband subcarrier offset (index S//2 is DC).
    """
    phases = steering_phase(angles_rad, n_antennas, spacing_wavelengths)  # [K,P,N]
    offsets = (np.arange(n_subcarriers) - n_subcarriers // 2) * subcarrier_spacing_hz
    return _kernels.cfr_accumulate(phases, delays_s, gains, offsets)


def draw_user_distances(scenario: GeometryScenario, rng: np.random.Generator) -> np.ndarray:
    """User 0 at distance_max_m; others area-uniform in the annulus."""
    d = np.empty(scenario.n_users)
    d[0] = scenario.distance_max_m
    if scenario.n_users > 1:
        u = rng.uniform(size=scenario.n_users - 1)
        d[1:] = np.sqrt(
            scenario.distance_min_m**2
            + u * (scenario.distance_max_m**2 - scenario.distance_min_m**2)
        )
    return d


def synthesize_channel(
    scenario: GeometryScenario, rng: np.random.Generator | None = None
) -> ChannelFrequencyResponse:
    """Draw a random multipath channel; deterministic for a given seed/rng."""
    if rng is None:
        rng = np.random.default_rng(scenario.seed)
    K, P = scenario.n_users, scenario.paths_per_user
    distances = draw_user_distances(scenario, rng)
    spread = np.deg2rad(scenario.angle_spread_deg)
    angles = rng.uniform(-spread, spread, size=(K, P))
    delays = rng.uniform(0.0, scenario.effective_delay_spread_s, size=(K, P))
    gains = (rng.standard_normal((K, P)) + 1j * rng.standard_normal((K, P))) / np.sqrt(2.0 * P)
    amp = pathloss_amplitude(distances, scenario.pathloss_exponent, scenario.center_frequency_hz)
    gains *= amp[:, None]
    entries = cfr_from_paths(
        angles,
        delays,
        gains,
        scenario.n_antennas,
        scenario.element_spacing_wavelengths,
        scenario.n_subcarriers,
        scenario.subcarrier_spacing_hz,
    )
    meta = (
        f"synthetic ULA spacing={scenario.element_spacing_wavelengths}wl "
        f"paths={P} pathloss_exp={scenario.pathloss_exponent} "
        f"placement=annulus[{scenario.distance_min_m},{scenario.distance_max_m}]m "
        f"seed={scenario.seed}"
    )
    return ChannelFrequencyResponse(
        entries=entries,
        center_frequency_hz=scenario.center_frequency_hz,
        subcarrier_spacing_hz=scenario.subcarrier_spacing_hz,
        metadata=meta,
    )


def save_cfr(h: ChannelFrequencyResponse, path: str) -> None:
    header = {
        "k": h.n_users,
        "n": h.n_antennas,
        "s": h.n_subcarriers,
        "fc_hz": h.center_frequency_hz,
        "scs_hz": h.subcarrier_spacing_hz,
        "meta": h.metadata,
    }
    interleaved = np.empty(h.entries.size * 2, dtype="<f8")
    flat = np.ascontiguousarray(h.entries, dtype=np.complex128).reshape(-1)
    interleaved[0::2] = flat.real
    interleaved[1::2] = flat.imag
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write((json.dumps(header) + "\n").encode("utf-8"))
        f.write(interleaved.tobytes())


def load_cfr(path: str) -> ChannelFrequencyResponse:
    with open(path, "rb") as f:
        magic = f.read(len(MAGIC))
        if magic != MAGIC:
            raise FormatError(f"bad magic {magic!r}")
        header_bytes = bytearray()
        while True:
            c = f.read(1)
            if not c:
                raise FormatError("unterminated header line")
            if c == b"\n":
                break
            header_bytes += c
            if len(header_bytes) > 65536:
                raise FormatError("header line too long")
        try:
            header = json.loads(header_bytes.decode("utf-8"))
            k, n, s = int(header["k"]), int(header["n"]), int(header["s"])
            fc, scs = float(header["fc_hz"]), float(header["scs_hz"])
            meta = str(header.get("meta", ""))
        except (ValueError, KeyError, UnicodeDecodeError) as e:
            raise FormatError(f"malformed header: {e}") from e
        payload = f.read()
    expected = k * n * s * 16
    if len(payload) < expected:
        raise TruncatedPayload(f"payload has {len(payload)} bytes, header promises {expected}")
    if len(payload) > expected:
        raise FormatError(f"payload has {len(payload) - expected} trailing bytes")
    raw = np.frombuffer(payload, dtype="<f8")
    entries = (raw[0::2] + 1j * raw[1::2]).reshape(k, n, s)
    return ChannelFrequencyResponse(entries, fc, scs, meta)


def load_cfr_csv(path: str, center_frequency_hz: float, subcarrier_spacing_hz: float) -> ChannelFrequencyResponse:
    """Convenience CSV import (columns k,n,s,re,im); lossy at text precision."""
    data = np.genfromtxt(path, delimiter=",", names=True)
    data = np.atleast_1d(data)
    k = int(data["k"].max()) + 1
    n = int(data["n"].max()) + 1
    s = int(data["s"].max()) + 1
    entries = np.zeros((k, n, s), dtype=np.complex128)
    entries[data["k"].astype(int), data["n"].astype(int), data["s"].astype(int)] = (
        data["re"] + 1j * data["im"]
    )
    return ChannelFrequencyResponse(
        entries, center_frequency_hz, subcarrier_spacing_hz, metadata=f"csv import {path}"
    )


def save_cfr_csv(h: ChannelFrequencyResponse, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write("k,n,s,re,im\n")
        for k in range(h.n_users):
            for n in range(h.n_antennas):
                for s in range(h.n_subcarriers):
                    v = h.entries[k, n, s]
                    f.write(f"{k},{n},{s},{float(v.real)!r},{float(v.imag)!r}\n")
