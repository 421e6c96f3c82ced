"""Experiment runner: single runs, sweeps, and the matrix-vs-time-domain check.

Determinism contract: every random draw comes from a substream keyed by
(seed, point index, repetition, purpose), so results are byte-identical across
reruns and independent of worker scheduling.  Result rows are ordered by
(point index, repetition) regardless of completion order.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channel import ChannelFrequencyResponse, load_cfr, synthesize_channel
from .config import ScenarioConfig
from .core import SeededRng
from .errors import ConfigError
from .frontend import (
    TimeDomainConfig,
    emission_mapping,
    matrix_model_emit,
    out_of_band_residual_db,
    recover_subcarrier_symbols,
    time_domain_emit,
)
from .link import LinkResult, ReceiveParams, load_mcs_table, measure_link, transmit_receive
from .power import PowerReport, baseband_power, pa_power, per_antenna_conducted_dbm
from .precoding import (
    AnalogPhaseMatrix,
    Architecture,
    DigitalPrecoder,
    build_analog_stage,
    effective_channel,
    zero_forcing,
)
from .waveform import UserSymbols, random_symbols

_CHANNEL, _SYMBOLS, _NOISE, _STAGE = range(4)

# artifact-chosen conventions recorded in every CSV metadata block
CONVENTIONS = {
    "fft_normalization": "unitary",
    "evm_reference": "genie transmitted symbols, per-user over all subcarriers+symbols",
    "equalizer": "perfect-CSI single tap per (user, subcarrier)",
    "sinr_formula": "1/EVM^2, capped",
    "noise_units": "dBm per received subcarrier sample",
    "eirp_accounting": "per-antenna conducted dBm + 20log10(n_active)",
    "zf_normalization": "per-subcarrier Frobenius power budget",
    "stream_to_user_map": "v mod K",
    "center_subcarrier": "index S//2, DC-centered order",
    "user_placement": "user 0 at d_max, rest area-uniform in annulus",
    "spreading_gain": "1/V in matrix model unless compensate_spreading",
}


def worker_count() -> int:
    env = os.environ.get("PHASEMO_THREADS", "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError as e:
            raise ConfigError("PHASEMO_THREADS", f"not an integer: {env!r}") from e
    return min(8, os.cpu_count() or 1)


def build_channel(cfg: ScenarioConfig, rng: SeededRng) -> ChannelFrequencyResponse:
    if cfg.channel_file is not None:
        return load_cfr(cfg.channel_file)
    return synthesize_channel(cfg.geometry(), rng.generator)


@dataclass(frozen=True)
class TransmitterStage:
    phi: AnalogPhaseMatrix
    gamma: DigitalPrecoder | None
    n_active: int
    baseband_chains: int


def build_stage(cfg: ScenarioConfig, h: ChannelFrequencyResponse, rng: SeededRng) -> TransmitterStage:
    spec = cfg.architecture_spec()
    phi = build_analog_stage(spec, h, rng.generator, cfg.muting_rule)
    if spec.kind is Architecture.ANALOG:
        return TransmitterStage(phi=phi, gamma=None, n_active=cfg.n_antennas, baseband_chains=1)
    gamma = zero_forcing(effective_channel(h, phi))
    if spec.kind is Architecture.ANTENNA_MUTING:
        active = spec.active_antennas if spec.active_antennas is not None else spec.chains
        return TransmitterStage(phi=phi, gamma=gamma, n_active=active, baseband_chains=active)
    if spec.kind is Architecture.DIGITAL:
        chains = cfg.n_antennas
    else:
        chains = cfg.chains
    return TransmitterStage(phi=phi, gamma=gamma, n_active=cfg.n_antennas, baseband_chains=chains)


def receive_params(cfg: ScenarioConfig) -> ReceiveParams:
    fixed = None
    if cfg.architecture == "antenna_muting" and cfg.am_power_mode == "fixed":
        fixed = per_antenna_conducted_dbm(cfg.n_antennas, cfg.power_params())
    penalty = cfg.acpr_penalty_db if (cfg.apply_acpr_penalty and cfg.architecture == "phasemo") else 0.0
    return ReceiveParams(
        noise_dbm=cfg.noise_dbm,
        eirp_cap_dbm=cfg.eirp_dbm,
        sinr_cap_db=cfg.sinr_cap_db,
        acpr_penalty_db=penalty,
        per_antenna_dbm=fixed,
    )


def power_report(cfg: ScenarioConfig, stage: TransmitterStage) -> PowerReport:
    params = cfg.power_params()
    if cfg.architecture == "antenna_muting" and cfg.am_power_mode == "fixed":
        pa = pa_power(stage.n_active, params, per_antenna_dbm=per_antenna_conducted_dbm(cfg.n_antennas, params))
    elif cfg.architecture == "antenna_muting":
        pa = pa_power(stage.n_active, params)
    else:
        pa = pa_power(cfg.n_antennas, params)
    return PowerReport(pa_power_w=pa, baseband_power_w=baseband_power(stage.baseband_chains, params))


def run_realization(cfg: ScenarioConfig, point: int = 0, rep: int = 0) -> tuple[LinkResult, PowerReport]:
    """One seeded end-to-end realization: channel, precoders, link, power."""
    root = SeededRng(cfg.seed).substream(point, rep)
    h = build_channel(cfg, root.substream(_CHANNEL))
    stage = build_stage(cfg, h, root.substream(_STAGE))
    spec = cfg.architecture_spec()
    x = UserSymbols(
        values=random_symbols(
            cfg.modulation_order,
            (cfg.n_users, cfg.subcarriers, cfg.ofdm_symbols),
            root.substream(_SYMBOLS).generator,
        ),
        modulation_order=cfg.modulation_order,
    )
    emitted = matrix_model_emit(spec, stage.phi, stage.gamma, x, cfg.compensate_spreading)
    mapping = emission_mapping(spec, stage.phi, stage.gamma, cfg.subcarriers, cfg.compensate_spreading)
    params = receive_params(cfg)
    received, g_pa, eirp = transmit_receive(
        emitted.data,
        h,
        mapping,
        params,
        root.substream(_NOISE).generator,
        n_active=stage.n_active,
        noiseless=cfg.noiseless,
    )
    table = load_mcs_table(cfg.mcs_table_path)
    result = measure_link(
        received,
        x,
        table,
        cfg.bandwidth_hz,
        sinr_cap_db=cfg.sinr_cap_db,
        acpr_penalty_db=params.acpr_penalty_db,
        eirp_dbm=eirp,
        pa_gain=g_pa,
    )
    return result, power_report(cfg, stage)


def run_point(cfg: ScenarioConfig) -> LinkResult:
    """Single-realization link result at the config seed (sweep helper)."""
    return run_realization(cfg, 0, 0)[0]


CSV_COLUMNS = (
    "point,rep,architecture,n_antennas,active_antennas,users,chains,seed,"
    "throughput_bps,ee_bpj,power_total_w,pa_power_w,baseband_power_w,eirp_dbm,"
    "mean_sinr_db,min_sinr_db,user_sinr_db,user_se_bps_hz,user_evm"
)


def _format_row(point: int, rep: int, cfg: ScenarioConfig, result: LinkResult, power: PowerReport) -> str:
    ee = result.net_throughput_bps / power.total_w if power.total_w > 0 else 0.0
    per_sinr = ";".join(f"{v:.6g}" for v in result.per_user_sinr_db)
    per_se = ";".join(f"{v:.6g}" for v in result.per_user_se)
    per_evm = ";".join(f"{v:.6g}" for v in result.per_user_evm)
    active = cfg.active_antennas if cfg.active_antennas is not None else cfg.n_antennas
    fields = [
        str(point),
        str(rep),
        cfg.architecture,
        str(cfg.n_antennas),
        str(active),
        str(cfg.n_users),
        str(cfg.chains),
        str(cfg.seed),
        f"{result.net_throughput_bps:.10g}",
        f"{ee:.10g}",
        f"{power.total_w:.10g}",
        f"{power.pa_power_w:.10g}",
        f"{power.baseband_power_w:.10g}",
        f"{result.eirp_dbm:.6g}",
        f"{np.mean(result.per_user_sinr_db):.6g}",
        f"{np.min(result.per_user_sinr_db):.6g}",
        per_sinr,
        per_se,
        per_evm,
    ]
    return ",".join(fields)


def _metadata_lines(cfg: ScenarioConfig, extra: dict | None = None) -> list[str]:
    lines = [f"# seed={cfg.seed}", f"# config_hash={cfg.config_hash()}"]
    for key, value in sorted(CONVENTIONS.items()):
        lines.append(f"# convention {key}={value}")
    lines.append(f"# convention am_power_mode={cfg.am_power_mode}")
    lines.append(f"# convention muting_rule={cfg.muting_rule}")
    lines.append(f"# convention acpr_penalty_db={cfg.acpr_penalty_db if cfg.apply_acpr_penalty else 0.0}")
    lines.append(f"# convention sinr_cap_db={cfg.sinr_cap_db}")
    for key, value in (extra or {}).items():
        lines.append(f"# {key}={value}")
    lines.append("# columns: " + CSV_COLUMNS)
    return lines


def _dispatch(jobs) -> list[str]:
    """Run (point, rep, cfg) jobs on the worker pool; rows come back in job order."""
    workers = worker_count()

    def one(job):
        point, rep, cfg = job
        result, power = run_realization(cfg, point, rep)
        return _format_row(point, rep, cfg, result, power)

    if workers == 1:
        return [one(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, jobs))


def run(cfg: ScenarioConfig, extra_metadata: dict | None = None) -> str:
    """Monte-Carlo run: one CSV row per repetition, plus the metadata block."""
    jobs = [(0, rep, cfg) for rep in range(cfg.repetitions)]
    rows = _dispatch(jobs)
    lines = _metadata_lines(cfg, extra_metadata) + [CSV_COLUMNS] + rows
    return "\n".join(lines) + "\n"


SWEEP_PARAMS = ("chains", "active_antennas", "users", "distance")


def sweep_config(cfg: ScenarioConfig, param: str, value: float) -> ScenarioConfig:
    if param == "chains":
        changes = {"chains": int(value)}
        if cfg.architecture == "antenna_muting":
            changes["active_antennas"] = int(value)
        return cfg.replace(**changes)
    if param == "active_antennas":
        return cfg.replace(
            architecture="antenna_muting", chains=int(value), active_antennas=int(value)
        )
    if param == "users":
        return cfg.replace(n_users=int(value))
    if param == "distance":
        ratio = cfg.distance_min_m / cfg.distance_max_m
        return cfg.replace(distance_max_m=float(value), distance_min_m=float(value) * ratio)
    raise ConfigError("param", f"must be one of {SWEEP_PARAMS}")


def sweep(cfg: ScenarioConfig, param: str, values) -> str:
    """Cross-product sweep: len(values) x repetitions CSV rows with an EE column."""
    jobs = []
    for point, value in enumerate(values):
        point_cfg = sweep_config(cfg, param, value)
        for rep in range(cfg.repetitions):
            jobs.append((point, rep, point_cfg))
    rows = _dispatch(jobs)
    meta = {"sweep_param": param, "sweep_values": ";".join(str(v) for v in values)}
    lines = _metadata_lines(cfg, meta) + [CSV_COLUMNS] + rows
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class OracleReport:
    n_antennas: int
    v_count: int
    oversample: int
    rel_rms_error: float
    out_of_band_db: float
    error_threshold: float = 1e-3
    residual_threshold_db: float = -120.0

    @property
    def passed(self) -> bool:
        return self.rel_rms_error < self.error_threshold and self.out_of_band_db < self.residual_threshold_db


def oracle_check(cfg: ScenarioConfig, skip_precompensation: bool = False) -> OracleReport:
    """Brute-force time-domain chain vs the per-subcarrier matrix model.

    Draws random unit-modulus phases, a random digital precoder, and random
    QAM symbols; pushes them through interleaver -> ZOH DAC -> switching
    waveform -> band-pass filter; equalizes the known hold response; and
    compares the recovered subcarrier values against the matrix model with
    its 1/V spreading gain.
    """
    if cfg.architecture != "phasemo":
        raise ConfigError("architecture", "oracle check applies to the phasemo architecture")
    spec = cfg.architecture_spec()
    V, S, T = cfg.chains, cfg.subcarriers, cfg.ofdm_symbols
    root = SeededRng(cfg.seed)
    phases = root.substream(0).generator.uniform(-np.pi, np.pi, size=(cfg.n_antennas, V))
    phi = AnalogPhaseMatrix(phases=phases, mask=np.ones_like(phases, dtype=bool))
    gen = root.substream(1).generator
    raw = gen.standard_normal((S, V, cfg.n_users)) + 1j * gen.standard_normal((S, V, cfg.n_users))
    gamma = DigitalPrecoder(matrices=raw / np.sqrt(V * cfg.n_users))
    x = UserSymbols(
        values=random_symbols(cfg.modulation_order, (cfg.n_users, S, T), root.substream(2).generator),
        modulation_order=cfg.modulation_order,
    )
    reference = matrix_model_emit(spec, phi, gamma, x)  # physical 1/V convention
    td_cfg = TimeDomainConfig(v_count=V, sample_rate_hz=cfg.bandwidth_hz, oversample=cfg.oversample)
    series = time_domain_emit(phi, gamma, x, td_cfg, skip_precompensation=skip_precompensation)
    recovered = recover_subcarrier_symbols(series, td_cfg, S, T)
    err = np.linalg.norm(recovered - reference.data) / np.linalg.norm(reference.data)
    residual = out_of_band_residual_db(series, cfg.bandwidth_hz)
    return OracleReport(
        n_antennas=cfg.n_antennas,
        v_count=V,
        oversample=cfg.oversample,
        rel_rms_error=float(err),
        out_of_band_db=residual,
    )
