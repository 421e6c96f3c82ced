"""Exception types shared across the simulator."""


class PhasemoError(Exception):
    """Base class for all simulator errors."""


class InvalidLength(PhasemoError):
    """Input length violates a size precondition."""


class UnsupportedOrder(PhasemoError):
    """Requested modulation order is not a supported square QAM size."""


class DegenerateReference(PhasemoError):
    """EVM reference signal has zero energy."""


class FormatError(PhasemoError):
    """Channel file header or framing is malformed."""


class TruncatedPayload(PhasemoError):
    """Channel file payload is shorter than the header promises."""


class RankDeficient(PhasemoError):
    """Effective channel is rank deficient at one subcarrier."""

    def __init__(self, subcarrier: int):
        self.subcarrier = subcarrier
        super().__init__(f"rank-deficient effective channel at subcarrier {subcarrier}")


class GenerationFailed(PhasemoError):
    """Random matrix generation exhausted its retry budget."""


class InvalidSpec(PhasemoError):
    """Architecture dimensions are inconsistent."""


class AlreadyCompensated(PhasemoError):
    """Interleaver delay pre-compensation applied twice."""


class AlignmentError(PhasemoError):
    """Signal length is not aligned to the switching-waveform framing."""


class InvalidBandwidth(PhasemoError):
    """Requested bandwidth exceeds the representable band."""


class InvalidPower(PhasemoError):
    """Power value violates a positivity precondition."""


class ConfigError(PhasemoError):
    """Scenario configuration is invalid; message carries the field path."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")
