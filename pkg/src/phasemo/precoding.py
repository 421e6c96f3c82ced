"""Digital and analog precoder construction for every beamforming architecture."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .channel import ChannelFrequencyResponse
from .core import validate_finite
from .errors import GenerationFailed, InvalidSpec, RankDeficient

RANK_TOLERANCE = 1e-10  # relative singular-value cutoff for ZF


class Architecture(str, Enum):
    DIGITAL = "digital"
    ANALOG = "analog"
    HYBRID_FULL = "hybrid_full"
    HYBRID_PARTIAL = "hybrid_partial"
    GREENMO = "greenmo"
    PHASEMO = "phasemo"
    ANTENNA_MUTING = "antenna_muting"


@dataclass(frozen=True)
class ArchitectureSpec:
    kind: Architecture
    n_antennas: int
    n_users: int
    chains: int  # physical R, or virtual V for the switched-phase architecture
    active_antennas: int | None = None  # antenna-muting only

    def __post_init__(self):
        if not (1 <= self.chains <= self.n_antennas):
            raise InvalidSpec(f"chains={self.chains} outside [1, {self.n_antennas}]")
        if self.kind is Architecture.ANALOG and (self.chains != 1 or self.n_users != 1):
            raise InvalidSpec("analog beamforming requires chains=1 and a single user")
        if self.kind is Architecture.DIGITAL and self.chains != self.n_antennas:
            raise InvalidSpec("digital beamforming requires chains == antennas")
        if self.active_antennas is not None and not (1 <= self.active_antennas <= self.n_antennas):
            raise InvalidSpec(f"active_antennas={self.active_antennas} outside [1, {self.n_antennas}]")


@dataclass(frozen=True)
class AnalogPhaseMatrix:
    """Per-antenna phase states [N][V] with a connectivity mask.

    unit_modulus entries contribute exp(j*phase); masked-out entries
    contribute 0; binary_switch matrices carry {0,1} in the mask with zero
    phases and must have full column rank.
    """

    phases: np.ndarray  # radians [N][V]
    mask: np.ndarray  # bool [N][V]
    kind: str = "unit_modulus"

    def __post_init__(self):
        if self.phases.shape != self.mask.shape or self.phases.ndim != 2:
            raise InvalidSpec("phases and mask must share an [N][V] shape")
        validate_finite(self.phases, "phase matrix")
        if self.kind not in ("unit_modulus", "binary_switch"):
            raise InvalidSpec(f"unknown phase-matrix kind {self.kind!r}")
        if self.kind == "binary_switch":
            rank = np.linalg.matrix_rank(self.mask.astype(float))
            if rank < self.mask.shape[1]:
                raise InvalidSpec("binary switch matrix must have full column rank")

    def as_complex(self) -> np.ndarray:
        return np.where(self.mask, np.exp(1j * self.phases), 0.0)


@dataclass(frozen=True)
class DigitalPrecoder:
    """One V x K matrix per subcarrier, plus the per-subcarrier scale factors."""

    matrices: np.ndarray  # complex [S][V][K]
    normalization: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.matrices.ndim != 3:
            raise InvalidSpec("precoder tensor must be [S][V][K]")
        validate_finite(self.matrices, "digital precoder")


def zero_forcing(h_eff: np.ndarray, power_budget: float = 1.0) -> DigitalPrecoder:
    """Per-subcarrier zero-forcing precoder from the K x V effective channel.

    Gamma(f) = pinv(h_eff(f)), Frobenius-scaled so the total transmit power of
    the precoded streams equals `power_budget` on every subcarrier (unit-energy
    user symbols assumed).  h_eff . Gamma is then a per-subcarrier scalar times
    the identity.

    Raises RankDeficient(subcarrier) when any per-subcarrier matrix has a
    relative singular value below 1e-10.
    """
    h_eff = np.asarray(h_eff, dtype=np.complex128)
    if h_eff.ndim != 3:
        raise InvalidSpec("effective channel must be [S][K][V]")
    S, K, V = h_eff.shape
    if K > V:
        raise InvalidSpec(f"zero forcing needs K <= V, got K={K}, V={V}")
    sv = np.linalg.svd(h_eff, compute_uv=False)  # [S][K]
    bad = np.where(sv[:, -1] < RANK_TOLERANCE * sv[:, 0])[0]
    if bad.size:
        raise RankDeficient(int(bad[0]))
    raw = np.linalg.pinv(h_eff)  # [S][V][K]
    norms = np.linalg.norm(raw, axis=(1, 2))
    scale = np.sqrt(power_budget) / norms
    return DigitalPrecoder(matrices=raw * scale[:, None, None], normalization=scale)


def analog_phases_center_subcarrier(h: ChannelFrequencyResponse, v_count: int) -> AnalogPhaseMatrix:
    """Conjugate-phase beamforming from the center subcarrier.

    Column v uses user k(v) = v mod K: phases[n, v] = -arg(H[k(v)][n][S//2]).
    """
    if v_count < 1:
        raise InvalidSpec("need at least one column")
    center = h.n_subcarriers // 2
    users = np.arange(v_count) % h.n_users
    phases = -np.angle(h.entries[users, :, center]).T  # [N][V]
    mask = np.ones_like(phases, dtype=bool)
    return AnalogPhaseMatrix(phases=phases, mask=mask, kind="unit_modulus")


def greenmo_binary_matrix(
    n_antennas: int, chains: int, rng: np.random.Generator, max_attempts: int = 1000
) -> AnalogPhaseMatrix:
    """Random full-column-rank {0,1} switch matrix (ad-hoc switched-array precoder)."""
    if chains > n_antennas:
        raise InvalidSpec(f"chains={chains} exceeds antennas={n_antennas}")
    for _ in range(max_attempts):
        bits = rng.integers(0, 2, size=(n_antennas, chains)).astype(bool)
        if np.linalg.matrix_rank(bits.astype(float)) == chains:
            return AnalogPhaseMatrix(phases=np.zeros((n_antennas, chains)), mask=bits, kind="binary_switch")
    raise GenerationFailed(f"no full-rank draw in {max_attempts} attempts")


def partial_connection_mask(n_antennas: int, chains: int) -> np.ndarray:
    """Block connectivity: chain r owns antennas [r*ceil(N/R), ...); one chain per antenna."""
    if chains > n_antennas:
        raise InvalidSpec(f"chains={chains} exceeds antennas={n_antennas}")
    block = int(np.ceil(n_antennas / chains))
    mask = np.zeros((n_antennas, chains), dtype=bool)
    for r in range(chains):
        lo = r * block
        hi = n_antennas if r == chains - 1 else min((r + 1) * block, n_antennas)
        mask[lo:hi, r] = True
    if not mask.any(axis=0).all():
        raise InvalidSpec(f"block split leaves an unconnected chain for N={n_antennas}, R={chains}")
    return mask


def muted_antenna_selection(
    n_antennas: int, active: int, rule: str = "highest_index", rng: np.random.Generator | None = None
) -> np.ndarray:
    """Indices of the antennas kept active under muting.

    Default mutes the highest-index antennas; "random" draws a seeded subset
    (which antennas to mute is an unspecified upstream choice).
    """
    if rule == "highest_index":
        return np.arange(active)
    if rule == "random":
        if rng is None:
            raise InvalidSpec("random muting rule needs an rng")
        return np.sort(rng.choice(n_antennas, size=active, replace=False))
    raise InvalidSpec(f"unknown muting rule {rule!r}")


def build_analog_stage(
    spec: ArchitectureSpec,
    h: ChannelFrequencyResponse,
    rng: np.random.Generator,
    muting_rule: str = "highest_index",
) -> AnalogPhaseMatrix:
    """Analog/front-end matrix for the requested architecture."""
    kind = spec.kind
    n = spec.n_antennas
    if kind is Architecture.DIGITAL:
        return AnalogPhaseMatrix(np.zeros((n, n)), np.eye(n, dtype=bool))
    if kind is Architecture.ANTENNA_MUTING:
        active = spec.active_antennas if spec.active_antennas is not None else spec.chains
        keep = muted_antenna_selection(n, active, muting_rule, rng)
        mask = np.zeros((n, active), dtype=bool)
        mask[keep, np.arange(active)] = True
        return AnalogPhaseMatrix(np.zeros((n, active)), mask)
    if kind is Architecture.GREENMO:
        return greenmo_binary_matrix(n, spec.chains, rng)
    phi = analog_phases_center_subcarrier(h, spec.chains)
    if kind is Architecture.HYBRID_PARTIAL:
        mask = partial_connection_mask(n, spec.chains)
        return AnalogPhaseMatrix(phi.phases, mask)
    return phi  # analog, hybrid_full, phasemo: fully connected unit-modulus


def effective_channel(h: ChannelFrequencyResponse, phi: AnalogPhaseMatrix) -> np.ndarray:
    """Channel composed with the analog stage: [S][K][V] = H(f) . Phi."""
    return np.einsum("kns,nv->skv", h.entries, phi.as_complex())
