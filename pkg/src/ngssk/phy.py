"""Transmit-side mapping and the three receivers.

Transmit side: a power-weighted superposition of unit-modulus user symbols is
sent as X/sqrt(n_active) on each active antenna.  Receive side: an energy
detector that needs no knowledge of the superposed payload, a coherent ML
baseline that knows the payload exactly, and successive interference
cancellation for the power-domain users.

All decision rules are pure functions of their inputs; every argmin breaks
ties toward the smallest index.  Scalar and batched (leading trial axis)
inputs are both accepted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ngssk.codebook import AntennaCombination

__all__ = [
    "DetectionResult",
    "SuperposedSymbol",
    "build_transmit_vector",
    "detect_energy_ml",
    "detect_ideal_ml",
    "gray_bit_distance_matrix",
    "gssk_receive",
    "psk_constellation",
    "sic_detect",
    "superpose",
]


def psk_constellation(order: int) -> np.ndarray:
    """Unit-modulus PSK points arranged so adjacent phases differ in one bit.

    ``constellation[label]`` is the point whose Gray bit label is ``label``;
    label Hamming distances therefore count payload bit errors directly.
    """
    if order < 2 or order & (order - 1):
        raise ValueError(f"PSK order must be a power of two, got {order}")
    positions = np.arange(order)
    gray = positions ^ (positions >> 1)
    points = np.exp(2j * np.pi * positions / order)
    out = np.empty(order, dtype=complex)
    out[gray] = points
    return out


def gray_bit_distance_matrix(order: int) -> np.ndarray:
    """Hamming distances between all pairs of Gray labels of a PSK alphabet."""
    idx = np.arange(order)
    xor = idx[:, None] ^ idx[None, :]
    out = np.zeros_like(xor)
    while xor.any():
        out += xor & 1
        xor >>= 1
    return out


@dataclass(frozen=True)
class SuperposedSymbol:
    """Power-weighted sum of the per-user constellation points."""

    value: complex
    component_symbols: tuple[complex, ...]


@dataclass(frozen=True)
class DetectionResult:
    """Decisions of the full receiver chain at one power-domain user."""

    combo_index: int
    per_user_symbols: tuple[complex, ...]
    per_user_bits: tuple[int, ...]


def superpose(symbols, coeffs, power: float) -> SuperposedSymbol:
    """Combine unit-modulus user symbols with amplitudes sqrt(coeff * power)."""
    symbols = tuple(complex(z) for z in symbols)
    coeffs = tuple(float(a) for a in coeffs)
    if len(symbols) != len(coeffs):
        raise ValueError(
            f"{len(symbols)} symbols but {len(coeffs)} power coefficients"
        )
    value = sum(np.sqrt(a * power) * z for a, z in zip(coeffs, symbols))
    return SuperposedSymbol(value=complex(value), component_symbols=symbols)


def superpose_batch(symbols: np.ndarray, coeffs: np.ndarray, power: float) -> np.ndarray:
    """Vectorised superposition: symbols (..., m_users) -> values (...)."""
    amps = np.sqrt(np.asarray(coeffs, dtype=float) * power)
    return (np.asarray(symbols) * amps).sum(axis=-1)


def build_transmit_vector(
    x: SuperposedSymbol, combo: AntennaCombination, n_transmit: int
) -> np.ndarray:
    """Antenna-domain vector: X/sqrt(n_active) at active indices, zero elsewhere."""
    out = np.zeros(n_transmit, dtype=complex)
    out[list(combo.indices)] = x.value / np.sqrt(len(combo))
    return out


def gssk_receive(h_eff, x: SuperposedSymbol, rho_prime: float, noise):
    """Received sample sqrt(rho_prime) * h_eff * X + noise."""
    return np.sqrt(rho_prime) * np.asarray(h_eff) * x.value + np.asarray(noise)


def detect_energy_ml(y0, codebook_energies, rho_prime: float, power: float, noise_var: float):
    """Estimate the active combination from the received energy alone.

    Matches |y0|**2 against rho_prime * power * |h_k,eff|**2 plus the
    interference-plus-noise mean (the noise variance), picking the nearest
    candidate.  ``codebook_energies`` is the receiver-side CSI |h_k,eff|**2
    per codebook entry: shape (n_entries,) or (trials, n_entries).
    """
    energies = np.asarray(codebook_energies, dtype=float)
    if energies.shape[-1] == 0:
        raise ValueError("codebook_energies must not be empty")
    y_e = np.abs(np.asarray(y0)) ** 2
    metric = (y_e[..., None] - rho_prime * power * energies - noise_var) ** 2
    idx = np.argmin(metric, axis=-1)
    return idx if np.ndim(y0) else int(idx)


def detect_ideal_ml(y0, x_known, codebook_gains, rho_prime: float):
    """Coherent ML over combinations with the superposed payload known."""
    gains = np.asarray(codebook_gains, dtype=complex)
    if gains.shape[-1] == 0:
        raise ValueError("codebook_gains must not be empty")
    y0 = np.asarray(y0)
    x_known = np.asarray(x_known)
    metric = np.abs(y0[..., None] - np.sqrt(rho_prime) * gains * x_known[..., None]) ** 2
    idx = np.argmin(metric, axis=-1)
    return idx if y0.ndim else int(idx)


def sic_detect(r, g_eff, coeffs, power: float, constellation: np.ndarray, user_rank: int):
    """Successive interference cancellation decisions for users 1..user_rank.

    Decodes in descending power order: at stage i the already-decided symbols
    are reconstructed and the stage decision minimises
    |r - g_eff * (cancelled + sqrt(coeff_i * power) * z)| over the alphabet,
    treating weaker users as noise.  ``g_eff`` is whatever effective-gain
    estimate the receiver holds, including any amplitude scaling of the link.

    Returns constellation indices, shape (user_rank,) or (trials, user_rank).
    """
    coeffs = np.asarray(coeffs, dtype=float)
    if not 1 <= user_rank <= coeffs.size:
        raise ValueError(f"user_rank {user_rank} outside 1..{coeffs.size}")
    r = np.asarray(r, dtype=complex)
    scalar = r.ndim == 0
    r = np.atleast_1d(r)
    g = np.broadcast_to(np.asarray(g_eff, dtype=complex), r.shape)
    const = np.asarray(constellation, dtype=complex)

    decided = np.zeros((r.shape[0], user_rank), dtype=np.intp)
    cancelled = np.zeros(r.shape[0], dtype=complex)
    for i in range(user_rank):
        amp = np.sqrt(coeffs[i] * power)
        cand = np.abs(
            r[:, None] - g[:, None] * (cancelled[:, None] + amp * const[None, :])
        )
        decided[:, i] = np.argmin(cand, axis=1)
        cancelled = cancelled + amp * const[decided[:, i]]
    return decided[0] if scalar else decided


def noma_receive_chain(
    r,
    codebook_energies,
    codebook_gains,
    rho_prime: float,
    coeffs,
    power: float,
    noise_var: float,
    constellation: np.ndarray,
    user_rank: int,
) -> DetectionResult:
    """Single-shot receiver at one power-domain user: detect the active
    combination from the energy statistic, then run SIC with the detected
    combination's effective gain."""
    k_hat = detect_energy_ml(r, codebook_energies, rho_prime, power, noise_var)
    g_hat = np.sqrt(rho_prime) * np.asarray(codebook_gains, dtype=complex)[k_hat]
    decided = sic_detect(r, g_hat, coeffs, power, constellation, user_rank)
    symbols = tuple(complex(constellation[i]) for i in np.atleast_1d(decided))
    return DetectionResult(
        combo_index=int(k_hat),
        per_user_symbols=symbols,
        per_user_bits=tuple(int(i) for i in np.atleast_1d(decided)),
    )
