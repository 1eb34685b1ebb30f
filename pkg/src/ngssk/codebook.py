"""Active-antenna combination codebooks and their bit labelling.

Spatial information is carried by which subset of antennas is active.  Out of
the C(n_transmit, n_active) possible combinations, the first 2**b lexicographic
ones are retained, where b = floor(log2 C(...)), and entry i carries the b-bit
natural binary label of i.  Any fixed rule would do for the pairwise analysis;
lexicographic order keeps runs reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

__all__ = [
    "AntennaCombination",
    "Codebook",
    "bit_distance",
    "bit_distance_matrix",
    "build_codebook",
    "enumerate_combinations",
]


@dataclass(frozen=True)
class AntennaCombination:
    """A strictly increasing tuple of active antenna indices."""

    indices: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))
        if any(a >= b for a, b in zip(self.indices, self.indices[1:])):
            raise ValueError(f"antenna indices must be strictly increasing: {self.indices}")

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)


@dataclass(frozen=True)
class Codebook:
    """Ordered combinations with natural-binary bit labels.

    ``degenerate`` flags the single-combination case (zero spatial bits), which
    is permitted so antenna sweeps can still be evaluated and reported.
    """

    combos: tuple[AntennaCombination, ...]
    bits_per_symbol: int
    m_h_full: int
    degenerate: bool = False

    def __len__(self) -> int:
        return len(self.combos)

    def combo_array(self) -> np.ndarray:
        """Combination indices as an (n_entries, n_active) integer array."""
        return np.array([c.indices for c in self.combos], dtype=np.intp)


def enumerate_combinations(n_transmit: int, n_active: int) -> list[AntennaCombination]:
    """All C(n_transmit, n_active) combinations in lexicographic order."""
    if n_active < 1 or n_transmit < 1 or n_active > n_transmit:
        raise ValueError(
            f"need 1 <= n_active <= n_transmit, got n_active={n_active}, "
            f"n_transmit={n_transmit}"
        )
    return [AntennaCombination(c) for c in combinations(range(n_transmit), n_active)]


def build_codebook(n_transmit: int, n_active: int) -> Codebook:
    """Retain the first 2**b lexicographic combinations, b = floor(log2 of count)."""
    all_combos = enumerate_combinations(n_transmit, n_active)
    m_h = len(all_combos)
    bits = int(math.floor(math.log2(m_h)))
    kept = tuple(all_combos[: 2**bits])
    return Codebook(
        combos=kept,
        bits_per_symbol=bits,
        m_h_full=m_h,
        degenerate=(bits == 0),
    )


def bit_distance(codebook: Codebook, j: int, k: int) -> int:
    """Hamming distance between the bit labels of codebook entries j and k."""
    n = len(codebook)
    if not (0 <= j < n and 0 <= k < n):
        raise IndexError(f"codebook indices out of range: j={j}, k={k}, size={n}")
    return int(j ^ k).bit_count()


def bit_distance_matrix(codebook: Codebook) -> np.ndarray:
    """Pairwise Hamming distances of all labels, for vectorised error counting."""
    n = len(codebook)
    idx = np.arange(n)
    xor = idx[:, None] ^ idx[None, :]
    out = np.zeros_like(xor)
    while xor.any():
        out += xor & 1
        xor >>= 1
    return out
