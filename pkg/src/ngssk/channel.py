"""Rayleigh fading samplers and the order-statistics densities built on them.

Every per-antenna coefficient is standard complex Gaussian (unit variance,
independent halves).  The effective gain of a combination is the plain sum of
its selected coefficients, so its squared magnitude is exponential with mean
n_active.  NOMA users are ordered ascending by effective-gain magnitude; ties
break by original user index so runs stay reproducible.
"""

from __future__ import annotations

import math

import numpy as np

from ngssk.codebook import AntennaCombination

__all__ = [
    "effective_gain",
    "ordered_gain_second_moment",
    "ordered_rayleigh_pdf",
    "sample_channel_matrix",
    "sample_gssk_channel",
    "sample_ordered_noma_channels",
]


def sample_channel_matrix(rng: np.random.Generator, shape) -> np.ndarray:
    """i.i.d. standard complex Gaussian array of the given shape."""
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return (re + 1j * im) / np.sqrt(2.0)


def sample_gssk_channel(rng: np.random.Generator, n_transmit: int) -> np.ndarray:
    """One realization of the per-antenna gains seen by the spatial-bits user."""
    return sample_channel_matrix(rng, n_transmit)


def effective_gain(gains: np.ndarray, combo: AntennaCombination) -> complex | np.ndarray:
    """Sum of the selected coefficients; vectorises over leading axes of ``gains``."""
    idx = np.asarray(combo.indices, dtype=np.intp)
    out = np.asarray(gains)[..., idx].sum(axis=-1)
    return out if out.ndim else complex(out)


def sample_ordered_noma_channels(
    rng: np.random.Generator, m_users: int, combo: AntennaCombination
) -> tuple[np.ndarray, np.ndarray]:
    """Effective gains of ``m_users`` i.i.d. users, sorted ascending by magnitude.

    Returns ``(sorted_gains, permutation)`` where ``sorted_gains[i] ==
    raw_gains[permutation[i]]``.
    """
    if m_users < 1:
        raise ValueError(f"m_users must be at least 1, got {m_users}")
    raw = sample_channel_matrix(rng, (m_users, len(combo))).sum(axis=1)
    perm = np.argsort(np.abs(raw), kind="stable")
    return raw[perm], perm


def ordered_rayleigh_pdf(g, m: int, m_users: int, n_active: int):
    """Density of the m-th smallest of ``m_users`` i.i.d. Rayleigh magnitudes.

    The base magnitude has second moment ``n_active`` (an effective gain over
    n_active antennas).  Accepts scalars or arrays in ``g``.
    """
    if not 1 <= m <= m_users:
        raise ValueError(f"rank m={m} outside 1..{m_users}")
    g = np.asarray(g, dtype=float)
    if np.any(g < 0):
        raise ValueError("magnitude g must be nonnegative")
    s2 = float(n_active)
    z = g * g / s2
    cdf = -np.expm1(-z)
    pdf = (2.0 * g / s2) * np.exp(-z)
    coeff = math.factorial(m_users) / (math.factorial(m - 1) * math.factorial(m_users - m))
    out = coeff * cdf ** (m - 1) * np.exp(-z) ** (m_users - m) * pdf
    return out if out.ndim else float(out)


def ordered_gain_second_moment(m: int, m_users: int, n_active: int) -> float:
    """E[g**2] of the m-th smallest magnitude, in closed form.

    Expanding the ordered density into a signed sum of Rayleigh terms with
    rates n_j = m_users - m + j + 1 gives
    E[g^2] = n_active * C * sum_j binom(m-1, j) (-1)^j / n_j^2,
    C = m_users! / ((m-1)! (m_users-m)!).
    """
    if not 1 <= m <= m_users:
        raise ValueError(f"rank m={m} outside 1..{m_users}")
    coeff = math.factorial(m_users) / (math.factorial(m - 1) * math.factorial(m_users - m))
    total = 0.0
    for j in range(m):
        n_j = m_users - m + j + 1
        total += math.comb(m - 1, j) * (-1.0) ** j / (n_j * n_j)
    return float(n_active) * coeff * total
