"""Scenario definition, validation, and derived SNR quantities.

A validated :class:`SystemConfig` is immutable and shared read-only by the
analysis and simulation modules.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

import tomli

__all__ = [
    "ConfigError",
    "DerivedSnr",
    "SystemConfig",
    "default_snr_grid",
    "load_config",
    "snr_to_linear",
    "validate_config",
]

COEFF_SUM_TOL = 1e-12


class ConfigError(ValueError):
    """Raised with a description of the first violated scenario invariant."""


def default_snr_grid() -> tuple[float, ...]:
    """0:2:40 dB grid used when a scenario does not override it."""
    return tuple(float(x) for x in range(0, 42, 2))


@dataclass(frozen=True)
class SystemConfig:
    """All scenario parameters for one simulation or analysis run.

    Power allocation coefficients are user-supplied, strictly descending and
    summing to one; user 1 (largest coefficient) is the weakest user after
    channel ordering.  Noise variance defaults to 1 but stays configurable so
    detector behaviour under noise scaling can be exercised.
    """

    n_transmit: int
    n_active: int
    n_noma_users: int
    power_coeffs: tuple[float, ...]
    total_power: float = 1.0
    noise_var: float = 1.0
    snr_grid_db: tuple[float, ...] = ()
    psk_order: int = 2
    trials_per_point: int = 100_000
    seed: int = 12345

    def __post_init__(self) -> None:
        # normalize sequence fields so configs hash/compare by value
        object.__setattr__(self, "power_coeffs", tuple(float(a) for a in self.power_coeffs))
        grid = self.snr_grid_db if self.snr_grid_db else default_snr_grid()
        object.__setattr__(self, "snr_grid_db", tuple(float(s) for s in grid))


@dataclass(frozen=True)
class DerivedSnr:
    """Linear SNR and its per-active-antenna share rho_prime = rho / n_active."""

    rho: float
    rho_prime: float


def snr_to_linear(snr_db: float, n_active: int) -> DerivedSnr:
    """Convert an SNR in dB to linear form together with its per-antenna share."""
    if n_active < 1:
        raise ConfigError(f"n_active must be at least 1, got {n_active}")
    rho = 10.0 ** (snr_db / 10.0)
    return DerivedSnr(rho=rho, rho_prime=rho / n_active)


def validate_config(cfg: SystemConfig) -> SystemConfig:
    """Return ``cfg`` unchanged if every invariant holds.

    Raises :class:`ConfigError` naming the first failed invariant.
    """
    if cfg.n_transmit < 1:
        raise ConfigError(f"n_transmit must be positive, got {cfg.n_transmit}")
    if cfg.n_active < 1:
        raise ConfigError(f"n_active must be positive, got {cfg.n_active}")
    if cfg.n_active > cfg.n_transmit:
        raise ConfigError(
            f"n_active exceeds n_transmit ({cfg.n_active} > {cfg.n_transmit})"
        )
    if cfg.n_noma_users < 1:
        raise ConfigError(f"n_noma_users must be positive, got {cfg.n_noma_users}")
    if len(cfg.power_coeffs) != cfg.n_noma_users:
        raise ConfigError(
            f"power_coeffs has {len(cfg.power_coeffs)} entries for "
            f"{cfg.n_noma_users} users"
        )
    if any(a <= 0.0 for a in cfg.power_coeffs):
        raise ConfigError("power coefficients must be strictly positive")
    if any(a <= b for a, b in zip(cfg.power_coeffs, cfg.power_coeffs[1:])):
        raise ConfigError("coefficients not strictly descending")
    if abs(math.fsum(cfg.power_coeffs) - 1.0) > COEFF_SUM_TOL:
        raise ConfigError(
            f"power coefficients sum to {math.fsum(cfg.power_coeffs)!r}, not 1"
        )
    if cfg.psk_order < 2 or cfg.psk_order & (cfg.psk_order - 1):
        raise ConfigError(f"psk_order must be a power of two, got {cfg.psk_order}")
    if not cfg.noise_var > 0.0:
        raise ConfigError(f"noise_var must be positive, got {cfg.noise_var}")
    if not cfg.total_power > 0.0:
        raise ConfigError(f"total_power must be positive, got {cfg.total_power}")
    if len(cfg.snr_grid_db) == 0:
        raise ConfigError("snr_grid_db must not be empty")
    if any(a >= b for a, b in zip(cfg.snr_grid_db, cfg.snr_grid_db[1:])):
        raise ConfigError("snr_grid_db must be strictly increasing")
    if cfg.trials_per_point < 1:
        raise ConfigError(f"trials_per_point must be positive, got {cfg.trials_per_point}")
    if not 0 <= cfg.seed < 2**64:
        raise ConfigError(f"seed must fit in 64 bits, got {cfg.seed}")
    return cfg


_REQUIRED_KEYS = ("n_transmit", "n_active", "n_noma_users", "power_coeffs")
_INT_KEYS = ("n_transmit", "n_active", "n_noma_users", "psk_order", "trials_per_point", "seed")


def load_config(path: str) -> SystemConfig:
    """Parse a plain-text ``key = value`` scenario file and validate it.

    The format is flat TOML: scalars and ``[a, b]`` arrays, one key per field
    of :class:`SystemConfig`.  Unknown keys are a hard error.
    """
    with open(path, "rb") as fh:
        try:
            raw = tomli.load(fh)
        except tomli.TOMLDecodeError as exc:
            raise ConfigError(f"cannot parse config file {path}: {exc}") from exc

    known = {f.name for f in fields(SystemConfig)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f"unknown config key: {unknown[0]}")
    for key in _REQUIRED_KEYS:
        if key not in raw:
            raise ConfigError(f"missing config key: {key}")
    for key in _INT_KEYS:
        if key in raw and not isinstance(raw[key], int):
            raise ConfigError(f"config key {key} must be an integer")

    kwargs = dict(raw)
    kwargs["power_coeffs"] = tuple(float(a) for a in raw["power_coeffs"])
    if "snr_grid_db" in kwargs:
        if len(raw["snr_grid_db"]) == 0:
            raise ConfigError("snr_grid_db must not be empty")
        kwargs["snr_grid_db"] = tuple(float(s) for s in raw["snr_grid_db"])
    return validate_config(SystemConfig(**kwargs))


def with_overrides(cfg: SystemConfig, **kwargs) -> SystemConfig:
    """Copy ``cfg`` with the given fields replaced, re-validating the result."""
    return validate_config(replace(cfg, **kwargs))
