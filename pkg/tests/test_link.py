import numpy as np
import pytest

from phasemo.channel import ChannelFrequencyResponse
from phasemo.config import ScenarioConfig
from phasemo.errors import DegenerateReference, InvalidPower, InvalidSpec
from phasemo.link import (
    McsTable,
    ReceiveParams,
    load_mcs_table,
    mcs_map,
    measure_link,
    net_throughput,
    pa_scaling,
    sinr_from_evm,
    transmit_receive,
)
from phasemo.runner import run_realization
from phasemo.waveform import UserSymbols, qam_modulate


def _unit_link(n_sym=1000, noise_dbm=-20.0, seed=0, noiseless=False):
    """1x1 unit channel with g_pa = 1 (EIRP cap 0 dBm, single antenna)."""
    rng = np.random.default_rng(seed)
    bits = rng.integers(0, 2, size=2 * n_sym)
    x = qam_modulate(bits, 4).reshape(1, 1, n_sym)
    h = ChannelFrequencyResponse(np.ones((1, 1, 1), dtype=complex), 1e9, 1e6)
    mapping = np.ones((1, 1, 1), dtype=complex)
    params = ReceiveParams(noise_dbm=noise_dbm, eirp_cap_dbm=0.0)
    received, g_pa, eirp = transmit_receive(
        x, h, mapping, params, np.random.default_rng(seed + 1), noiseless=noiseless
    )
    return x, received, g_pa, eirp


def test_sinr_from_evm_definition():
    assert sinr_from_evm(0.1) == pytest.approx(20.0, abs=1e-12)
    assert sinr_from_evm(1.0) == pytest.approx(0.0, abs=1e-12)
    assert sinr_from_evm(1e-6) == 40.0  # cap
    assert sinr_from_evm(0.0) == 40.0  # cap rule for perfect reception


def test_mcs_table_default():
    table = load_mcs_table()
    assert table.thresholds_db.size == 15
    assert table.max_efficiency == pytest.approx(7.4063)
    assert np.all(np.diff(table.thresholds_db) > 0)
    assert np.all(np.diff(table.efficiencies) > 0)


def test_mcs_map_boundaries():
    table = McsTable(np.array([0.0, 10.0, 20.0]), np.array([1.0, 2.0, 4.0]))
    assert mcs_map(-5.0, table) == 0.0  # outage below the first threshold
    assert mcs_map(25.0, table) == 4.0  # saturation above the last
    assert mcs_map(10.0, table) == 2.0  # closed lower bound at a threshold
    assert mcs_map(9.999, table) == 1.0


def test_mcs_map_monotone():
    table = load_mcs_table()
    grid = np.linspace(-10, 45, 400)
    values = [mcs_map(s, table) for s in grid]
    assert all(b >= a for a, b in zip(values, values[1:]))


def test_net_throughput_arithmetic():
    assert net_throughput([6.0] * 4, 100e6) == pytest.approx(2.4e9)
    assert net_throughput([], 100e6) == 0.0
    assert net_throughput([7.4063], 100e6) == pytest.approx(740.63e6)
    with pytest.raises(InvalidSpec):
        net_throughput([-1.0], 1.0)


def test_pa_scaling_respects_cap():
    rng = np.random.default_rng(3)
    emitted = rng.standard_normal((4, 8, 2)) + 1j * rng.standard_normal((4, 8, 2))
    params = ReceiveParams(eirp_cap_dbm=30.0)
    g, eirp = pa_scaling(emitted, 4, params)
    assert eirp <= 30.0 + 1e-9
    scaled = g * emitted
    p_ant = np.mean(np.abs(scaled) ** 2)
    assert 10 * np.log10(p_ant) + 20 * np.log10(4) == pytest.approx(30.0, abs=1e-9)


def test_pa_scaling_fixed_per_antenna():
    rng = np.random.default_rng(4)
    emitted = rng.standard_normal((8, 4, 2)) + 1j * rng.standard_normal((8, 4, 2))
    params = ReceiveParams(eirp_cap_dbm=40.0, per_antenna_dbm=10.0)
    g, eirp = pa_scaling(emitted, 8, params)
    assert eirp == pytest.approx(10.0 + 20 * np.log10(8))
    with pytest.raises(InvalidSpec):
        pa_scaling(emitted, 8, ReceiveParams(eirp_cap_dbm=20.0, per_antenna_dbm=10.0))


def test_noiseless_unit_link_is_exact():
    x, received, g_pa, eirp = _unit_link(n_sym=64, noiseless=True)
    assert np.max(np.abs(received - x)) < 1e-12
    assert eirp == pytest.approx(0.0)


def test_measured_sinr_matches_noise_level():
    # unit signal, noise 20 dB below -> measured SINR 20 dB +- 0.5 over 1e4 symbols
    x, received, _, _ = _unit_link(n_sym=10_000, noise_dbm=-20.0, seed=7)
    table = load_mcs_table()
    result = measure_link(received, UserSymbols(values=x, modulation_order=4), table, 1e6)
    assert abs(result.per_user_sinr_db[0] - 20.0) < 0.5


def test_noise_doubling_costs_3db():
    sinrs = []
    for noise in (-20.0, -17.0):  # doubling the noise power = +3 dB
        x, received, _, _ = _unit_link(n_sym=10_000, noise_dbm=noise, seed=11)
        table = load_mcs_table()
        result = measure_link(received, UserSymbols(values=x, modulation_order=4), table, 1e6)
        sinrs.append(result.per_user_sinr_db[0])
    assert abs((sinrs[0] - sinrs[1]) - 3.0) < 0.3


def test_zero_transmit_signal_degenerate():
    h = ChannelFrequencyResponse(np.ones((1, 1, 1), dtype=complex), 1e9, 1e6)
    zero = np.zeros((1, 1, 4), dtype=complex)
    mapping = np.ones((1, 1, 1), dtype=complex)
    received, _, _ = transmit_receive(
        zero, h, mapping, ReceiveParams(), np.random.default_rng(0)
    )
    with pytest.raises(DegenerateReference):
        measure_link(
            received,
            UserSymbols(values=zero, modulation_order=4),
            load_mcs_table(),
            1e6,
        )


def test_noiseless_zf_link_reaches_cap():
    cfg = ScenarioConfig(
        architecture="digital",
        n_antennas=8,
        n_users=3,
        chains=8,
        subcarriers=16,
        ofdm_symbols=4,
        noiseless=True,
        seed=5,
    ).validate()
    result, _ = run_realization(cfg)
    assert np.max(result.per_user_evm) < 1e-6
    assert np.all(result.per_user_sinr_db == cfg.sinr_cap_db)
    assert np.all(result.per_user_se == load_mcs_table().max_efficiency)
    expected = cfg.bandwidth_hz * result.per_user_se.sum()
    assert abs(result.net_throughput_bps - expected) / expected < 1e-9


def test_eirp_never_exceeds_cap_end_to_end():
    for seed in range(4):
        cfg = ScenarioConfig(
            architecture="phasemo",
            n_antennas=8,
            n_users=2,
            chains=4,
            subcarriers=16,
            ofdm_symbols=2,
            seed=seed,
        ).validate()
        result, _ = run_realization(cfg)
        assert result.eirp_dbm <= cfg.eirp_dbm + 1e-9


def test_acpr_penalty_subtracts_before_mapping():
    table = McsTable(np.array([0.0, 10.0]), np.array([1.0, 2.0]))
    x = qam_modulate([0, 0, 1, 1, 0, 1, 1, 0], 4).reshape(1, 1, 4)
    received = x * 1.001  # tiny error -> high sinr, capped
    result = measure_link(
        received, UserSymbols(values=x, modulation_order=4), table, 1e6,
        sinr_cap_db=12.0, acpr_penalty_db=3.0,
    )
    assert result.per_user_sinr_db[0] == pytest.approx(9.0)
    assert result.per_user_se[0] == 1.0  # 12 - 3 = 9 dB falls below the 10 dB row


def test_energy_per_bit_requires_positive_power():
    from phasemo.power import energy_efficiency

    with pytest.raises(InvalidPower):
        energy_efficiency(1.0, 0.0)
