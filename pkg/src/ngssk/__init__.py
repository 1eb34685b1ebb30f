"""Link-level simulator and analytical toolkit for a hybrid NOMA-GSSK downlink.

Subpackages split along the processing chain: scenario configuration,
antenna-combination codebooks, Rayleigh channel models, transmit/receive
physical layer, special functions, closed-form performance analysis, and a
deterministic Monte-Carlo engine.
"""

from ngssk.config import ConfigError, DerivedSnr, SystemConfig, load_config, snr_to_linear, validate_config
from ngssk.codebook import AntennaCombination, Codebook, bit_distance, build_codebook, enumerate_combinations

__all__ = [
    "AntennaCombination",
    "Codebook",
    "ConfigError",
    "DerivedSnr",
    "SystemConfig",
    "bit_distance",
    "build_codebook",
    "enumerate_combinations",
    "load_config",
    "snr_to_linear",
    "validate_config",
]

__version__ = "0.1.0"
