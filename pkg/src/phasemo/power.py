"""Base-station power and energy-efficiency model.

Total draw is PA plus baseband processing.  PA conducted power per antenna is
driven by the EIRP budget; baseband power scales with the number of active or
virtual chains (one DSP share per chain).

Two conventions for antenna muting are provided, because how per-antenna
power reacts to muting is an upstream unknown:

* ``cap``: per-antenna power is re-optimized against the EIRP cap at the
  reduced count (P_ant = cap - 20 log10(n_active)); total PA power then grows
  as antennas are muted.
* ``fixed``: per-antenna power stays at the full-array design value; EIRP
  drops with the lost array gain and total PA power falls linearly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidPower, InvalidSpec

AM_POWER_MODES = ("cap", "fixed")


@dataclass(frozen=True)
class PowerModelParams:
    pa_efficiency: float = 0.6
    max_eirp_dbm: float = 77.0
    baseband_w_per_chain: float = 1.683
    gflops_per_chain: float = 15.0  # bookkeeping only

    def __post_init__(self):
        if not (0 < self.pa_efficiency <= 1):
            raise InvalidPower(f"PA efficiency {self.pa_efficiency} outside (0, 1]")
        if self.baseband_w_per_chain <= 0:
            raise InvalidPower("baseband power per chain must be positive")


@dataclass(frozen=True)
class PowerReport:
    pa_power_w: float
    baseband_power_w: float

    @property
    def total_w(self) -> float:
        return self.pa_power_w + self.baseband_power_w


def per_antenna_conducted_dbm(n_active: int, params: PowerModelParams) -> float:
    """EIRP-budget share per antenna: cap minus the 20 log10(N) coherent array gain."""
    return params.max_eirp_dbm - 20.0 * np.log10(n_active)


def pa_power(n_active: int, params: PowerModelParams, per_antenna_dbm: float | None = None) -> float:
    """Total PA draw in watts for n_active antennas.

    Per-antenna conducted power defaults to the cap-driven value; passing
    `per_antenna_dbm` selects the fixed-rating convention.
    """
    if n_active < 1:
        raise InvalidSpec("need at least one active antenna")
    dbm = per_antenna_dbm if per_antenna_dbm is not None else per_antenna_conducted_dbm(n_active, params)
    conducted_w = 10.0 ** (dbm / 10.0) / 1000.0
    return n_active * conducted_w / params.pa_efficiency


def baseband_power(chains: int, params: PowerModelParams) -> float:
    """Baseband processing draw: chains times the per-chain wattage."""
    if chains < 0:
        raise InvalidSpec("chain count must be >= 0")
    return chains * params.baseband_w_per_chain


def energy_efficiency(throughput_bps: float, total_power_w: float) -> float:
    """Delivered bits per Joule."""
    if total_power_w <= 0:
        raise InvalidPower(f"total power must be positive, got {total_power_w}")
    return throughput_bps / total_power_w


@dataclass(frozen=True)
class SweepPoint:
    chains: int
    throughput_bps: float
    power_w: float
    energy_efficiency_bpj: float
    pa_power_w: float
    baseband_power_w: float


def adaptability_sweep(config, mode: str, chain_counts, seeds=None) -> list[list[SweepPoint]]:
    """Throughput/power/EE per chain count, one curve per seed.

    mode "phasemo": all antennas stay active (PA power pinned at the full
    array) while the virtual chain count varies.  mode "am_dbf": active
    antennas equal active chains and the link is recomputed on the reduced
    channel, with PA power following the configured muting convention.
    """
    from .runner import run_point  # deferred: runner depends on this module

    if mode not in ("phasemo", "am_dbf"):
        raise InvalidSpec(f"unknown sweep mode {mode!r}")
    seeds = [config.seed] if seeds is None else list(seeds)
    params = config.power_params()
    curves: list[list[SweepPoint]] = []
    for seed in seeds:
        points = []
        for chains in chain_counts:
            if not (1 <= chains <= config.n_antennas):
                raise InvalidSpec(f"chain count {chains} outside [1, {config.n_antennas}]")
            if mode == "phasemo":
                cfg = config.replace(architecture="phasemo", chains=chains, seed=seed)
                pa = pa_power(config.n_antennas, params)
                bb = baseband_power(chains, params)
            else:
                cfg = config.replace(
                    architecture="antenna_muting",
                    chains=chains,
                    active_antennas=chains,
                    seed=seed,
                )
                if config.am_power_mode == "fixed":
                    design = per_antenna_conducted_dbm(config.n_antennas, params)
                    pa = pa_power(chains, params, per_antenna_dbm=design)
                else:
                    pa = pa_power(chains, params)
                bb = baseband_power(chains, params)
            result = run_point(cfg)
            total = pa + bb
            points.append(
                SweepPoint(
                    chains=chains,
                    throughput_bps=result.net_throughput_bps,
                    power_w=total,
                    energy_efficiency_bpj=energy_efficiency(result.net_throughput_bps, total)
                    if total > 0
                    else 0.0,
                    pa_power_w=pa,
                    baseband_power_w=bb,
                )
            )
        curves.append(points)
    return curves
