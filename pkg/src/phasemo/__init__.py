"""Link-level simulator for massive-MIMO downlink beamforming.

Covers digital, analog, hybrid (fully/partially connected), switched-array,
and antenna-muting front ends, plus a single-RF-chain design that
time-multiplexes V virtual chains through fast per-antenna phase shifters.
A brute-force time-domain chain (interleaver, ZOH DAC with images, periodic
switching waveform, brick-wall filter) verifies the per-subcarrier matrix
model, and a power/energy-efficiency layer reproduces the adaptability
trade-offs at desk scale.
"""

from .channel import (
    ChannelFrequencyResponse,
    GeometryScenario,
    load_cfr,
    save_cfr,
    synthesize_channel,
)
from .config import ScenarioConfig, load_config
from .core import SeededRng, Spectrum, fft_forward, fft_inverse, pseudo_inverse, sinc
from .frontend import (
    AntennaSignals,
    FpsWaveform,
    InterleavedStream,
    PrecodedStreams,
    TimeDomainConfig,
    brickwall_bandpass,
    dac_zoh,
    deinterleave,
    fps_apply,
    fps_spectrum_closed_form,
    interleave,
    matrix_model_emit,
    phase_precompensate,
    time_domain_emit,
)
from .link import (
    LinkResult,
    McsTable,
    load_mcs_table,
    mcs_map,
    net_throughput,
    sinr_from_evm,
    transmit_receive,
)
from .power import (
    PowerModelParams,
    PowerReport,
    adaptability_sweep,
    baseband_power,
    energy_efficiency,
    pa_power,
)
from .precoding import (
    AnalogPhaseMatrix,
    Architecture,
    ArchitectureSpec,
    DigitalPrecoder,
    analog_phases_center_subcarrier,
    greenmo_binary_matrix,
    partial_connection_mask,
    zero_forcing,
)
from .runner import OracleReport, oracle_check, run, run_realization, sweep
from .waveform import (
    OfdmFrame,
    UserSymbols,
    evm_rms,
    ofdm_demodulate,
    ofdm_modulate,
    qam_modulate,
)

__version__ = "0.1.0"
