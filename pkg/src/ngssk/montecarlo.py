"""Deterministic, parallelisable Monte-Carlo engine.

The trial space is cut into fixed-size chunks.  Chunk ``c`` of an experiment
draws all of its randomness from a generator seeded by
``(seed, op_code, context..., c)``, and per-chunk integer counts are reduced
in chunk-index order, so results are bit-identical no matter how many worker
threads execute the chunks or in which order they finish.

Early stopping is also deterministic: the run stops after the smallest chunk
prefix whose cumulative error count reaches the threshold, and chunks beyond
that prefix are discarded even if they were already computed.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from ngssk.analysis import CurveTable, rate_noma_user, sum_rate_ngssk
from ngssk.channel import sample_channel_matrix
from ngssk.codebook import bit_distance_matrix, build_codebook
from ngssk.config import SystemConfig, snr_to_linear, validate_config
from ngssk.phy import (
    detect_energy_ml,
    detect_ideal_ml,
    gray_bit_distance_matrix,
    psk_constellation,
    superpose_batch,
)

__all__ = [
    "BerEstimate",
    "GsskBerResult",
    "run_cgssk_ber",
    "run_gssk_ber",
    "run_gssk_ber_paired",
    "run_noma_ber",
    "run_rate_curves",
    "wilson_interval",
]

CHUNK_TRIALS = 8192

# op codes entering the per-chunk seed derivation
_OP_GSSK = 1
_OP_GSSK_PAIRED = 2
_OP_NOMA = 3
_OP_CGSSK = 4

_DETECTOR_CODES = {"energy_ml": 0, "ideal_ml": 1}

Z95 = 1.959963984540054


def wilson_interval(errors: int, trials: int) -> tuple[float, float]:
    """95% Wilson score interval for a binomial proportion."""
    if trials <= 0:
        return (0.0, 0.0)
    p = errors / trials
    z2 = Z95 * Z95
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2.0 * trials)) / denom
    half = Z95 * math.sqrt(p * (1.0 - p) / trials + z2 / (4.0 * trials * trials)) / denom
    # rounding must not push the interval off the point estimate
    return (min(max(0.0, center - half), p), max(min(1.0, center + half), p))


@dataclass(frozen=True)
class BerEstimate:
    """Error counts with point estimate and 95% Wilson confidence interval."""

    errors: int
    trials: int
    ber: float
    ci_low: float
    ci_high: float

    @classmethod
    def from_counts(cls, errors: int, trials: int) -> "BerEstimate":
        ber = errors / trials if trials > 0 else 0.0
        lo, hi = wilson_interval(errors, trials)
        return cls(errors=int(errors), trials=int(trials), ber=ber, ci_low=lo, ci_high=hi)

    @property
    def ci_half_width(self) -> float:
        return 0.5 * (self.ci_high - self.ci_low)


@dataclass(frozen=True)
class GsskBerResult:
    """Spatial-bit BER and combination (symbol) SER of one detector run."""

    bit: BerEstimate
    symbol: BerEstimate


def _chunk_rng(seed: int, op_code: int, context: tuple[int, ...], chunk: int) -> np.random.Generator:
    entropy = (int(seed), int(op_code)) + tuple(int(c) for c in context) + (int(chunk),)
    return np.random.default_rng(np.random.SeedSequence(entropy))


def _snr_key(snr_db: float) -> int:
    # deterministic non-negative integer tag for a dB value
    return int(round(snr_db * 1000.0)) + 2**31


def _run_chunks(
    total_trials: int,
    counts_fn: Callable[[int, int], np.ndarray],
    workers: int = 1,
    early_stop_errors: Optional[int] = None,
    error_index: int = 0,
) -> np.ndarray:
    """Execute chunks and reduce their integer count vectors in index order."""
    n_chunks = max(1, math.ceil(total_trials / CHUNK_TRIALS))
    sizes = [CHUNK_TRIALS] * n_chunks
    sizes[-1] = total_trials - CHUNK_TRIALS * (n_chunks - 1)

    done: dict[int, np.ndarray] = {}
    stop_at: Optional[int] = None

    if workers <= 1:
        cum = 0
        for c in range(n_chunks):
            done[c] = counts_fn(c, sizes[c])
            cum += int(np.asarray(done[c]).flat[error_index])
            if early_stop_errors is not None and cum >= early_stop_errors:
                stop_at = c
                break
    else:
        wave = max(1, workers) * 2
        next_idx, cum = 0, 0
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for start in range(0, n_chunks, wave):
                batch = list(range(start, min(start + wave, n_chunks)))
                for c, out in zip(batch, pool.map(lambda i: counts_fn(i, sizes[i]), batch)):
                    done[c] = out
                # the stop decision depends only on the chunk-index prefix,
                # never on completion order or worker count
                while next_idx in done and stop_at is None:
                    cum += int(np.asarray(done[next_idx]).flat[error_index])
                    if early_stop_errors is not None and cum >= early_stop_errors:
                        stop_at = next_idx
                    next_idx += 1
                if stop_at is not None:
                    break

    last = stop_at if stop_at is not None else n_chunks - 1
    total = np.zeros_like(np.asarray(done[0]))
    for c in range(last + 1):
        total = total + np.asarray(done[c])
    return total


def _gssk_chunk_counts(
    cfg: SystemConfig,
    combos: np.ndarray,
    pc: np.ndarray,
    rho_prime: float,
    rng: np.random.Generator,
    n: int,
    detector: str,
    const_payload: bool,
    constellation: np.ndarray,
) -> np.ndarray:
    """One chunk of the spatial-detection experiment: [bit_err, sym_err, trials]."""
    n_entries = combos.shape[0]
    h = sample_channel_matrix(rng, (n, cfg.n_transmit))
    j = rng.integers(0, n_entries, n)
    if const_payload:
        x = np.full(n, math.sqrt(cfg.total_power), dtype=complex)
    else:
        sym_idx = rng.integers(0, constellation.size, (n, cfg.n_noma_users))
        x = superpose_batch(constellation[sym_idx], cfg.power_coeffs, cfg.total_power)
    noise = sample_channel_matrix(rng, n) * math.sqrt(cfg.noise_var)

    eff = h[:, combos].sum(axis=2)
    y0 = math.sqrt(rho_prime) * eff[np.arange(n), j] * x + noise
    if detector == "energy_ml":
        k_hat = detect_energy_ml(
            y0, np.abs(eff) ** 2, rho_prime, cfg.total_power, cfg.noise_var
        )
    else:
        k_hat = detect_ideal_ml(y0, x, eff, rho_prime)
    bit_err = int(pc[j, k_hat].sum())
    sym_err = int((j != k_hat).sum())
    return np.array([bit_err, sym_err, n], dtype=np.int64)


def _gssk_result(counts: np.ndarray, bits_per_symbol: int) -> GsskBerResult:
    bit_err, sym_err, trials = (int(v) for v in counts)
    return GsskBerResult(
        bit=BerEstimate.from_counts(bit_err, trials * bits_per_symbol),
        symbol=BerEstimate.from_counts(sym_err, trials),
    )


def run_gssk_ber(
    cfg: SystemConfig,
    detector: str,
    snr_db: float,
    trials: Optional[int] = None,
    workers: int = 1,
    early_stop_errors: Optional[int] = None,
) -> GsskBerResult:
    """Spatial-bit BER and combination SER of one detector at one SNR point.

    Each trial draws a fresh channel, payload symbols and noise, transmits a
    uniformly random codebook entry and counts label bit errors.  Chunk c
    derives its generator from (seed, op, detector, snr, c).
    """
    cfg = validate_config(cfg)
    if detector not in _DETECTOR_CODES:
        raise ValueError(f"unknown detector: {detector!r}")
    cb = build_codebook(cfg.n_transmit, cfg.n_active)
    combos = cb.combo_array()
    pc = bit_distance_matrix(cb)
    const = psk_constellation(cfg.psk_order)
    rho_prime = snr_to_linear(snr_db, cfg.n_active).rho_prime
    context = (_DETECTOR_CODES[detector], _snr_key(snr_db))

    def counts_fn(chunk: int, n: int) -> np.ndarray:
        rng = _chunk_rng(cfg.seed, _OP_GSSK, context, chunk)
        return _gssk_chunk_counts(cfg, combos, pc, rho_prime, rng, n, detector, False, const)

    counts = _run_chunks(
        trials or cfg.trials_per_point, counts_fn, workers, early_stop_errors
    )
    return _gssk_result(counts, cb.bits_per_symbol)


def run_cgssk_ber(
    cfg: SystemConfig,
    snr_db: float,
    trials: Optional[int] = None,
    workers: int = 1,
) -> GsskBerResult:
    """Conventional spatial keying baseline: constant payload sqrt(total_power)
    on the active antennas, coherent ML detection."""
    cfg = validate_config(cfg)
    cb = build_codebook(cfg.n_transmit, cfg.n_active)
    combos = cb.combo_array()
    pc = bit_distance_matrix(cb)
    const = psk_constellation(cfg.psk_order)
    rho_prime = snr_to_linear(snr_db, cfg.n_active).rho_prime
    context = (_snr_key(snr_db),)

    def counts_fn(chunk: int, n: int) -> np.ndarray:
        rng = _chunk_rng(cfg.seed, _OP_CGSSK, context, chunk)
        return _gssk_chunk_counts(cfg, combos, pc, rho_prime, rng, n, "ideal_ml", True, const)

    counts = _run_chunks(trials or cfg.trials_per_point, counts_fn, workers)
    return _gssk_result(counts, cb.bits_per_symbol)


def run_gssk_ber_paired(
    cfg: SystemConfig,
    snr_grid_db,
    trials: Optional[int] = None,
    workers: int = 1,
) -> list[tuple[GsskBerResult, GsskBerResult]]:
    """Energy and ideal detection on common random numbers over an SNR grid.

    One set of channel, payload and noise draws per chunk is reused at every
    SNR point and by both detectors, so detector and SNR comparisons are
    paired.  Returns one (energy, ideal) pair per grid point.
    """
    cfg = validate_config(cfg)
    snr_grid_db = [float(s) for s in snr_grid_db]
    cb = build_codebook(cfg.n_transmit, cfg.n_active)
    combos = cb.combo_array()
    pc = bit_distance_matrix(cb)
    const = psk_constellation(cfg.psk_order)
    rho_primes = [snr_to_linear(s, cfg.n_active).rho_prime for s in snr_grid_db]
    n_entries = combos.shape[0]

    def counts_fn(chunk: int, n: int) -> np.ndarray:
        rng = _chunk_rng(cfg.seed, _OP_GSSK_PAIRED, (), chunk)
        h = sample_channel_matrix(rng, (n, cfg.n_transmit))
        j = rng.integers(0, n_entries, n)
        sym_idx = rng.integers(0, const.size, (n, cfg.n_noma_users))
        x = superpose_batch(const[sym_idx], cfg.power_coeffs, cfg.total_power)
        noise = sample_channel_matrix(rng, n) * math.sqrt(cfg.noise_var)
        eff = h[:, combos].sum(axis=2)
        energies = np.abs(eff) ** 2
        eff_tx = eff[np.arange(n), j]
        out = np.zeros((len(snr_grid_db), 5), dtype=np.int64)
        for i, rho_prime in enumerate(rho_primes):
            y0 = math.sqrt(rho_prime) * eff_tx * x + noise
            k_e = detect_energy_ml(y0, energies, rho_prime, cfg.total_power, cfg.noise_var)
            k_i = detect_ideal_ml(y0, x, eff, rho_prime)
            out[i] = (
                int(pc[j, k_e].sum()),
                int((j != k_e).sum()),
                int(pc[j, k_i].sum()),
                int((j != k_i).sum()),
                n,
            )
        return out

    counts = _run_chunks(trials or cfg.trials_per_point, counts_fn, workers)
    results = []
    for row in counts:
        be, se, bi, si, n = (int(v) for v in row)
        results.append(
            (
                GsskBerResult(
                    bit=BerEstimate.from_counts(be, n * cb.bits_per_symbol),
                    symbol=BerEstimate.from_counts(se, n),
                ),
                GsskBerResult(
                    bit=BerEstimate.from_counts(bi, n * cb.bits_per_symbol),
                    symbol=BerEstimate.from_counts(si, n),
                ),
            )
        )
    return results


def run_noma_ber(
    cfg: SystemConfig,
    snr_db: float,
    antenna_knowledge: str = "estimated",
    trials: Optional[int] = None,
    workers: int = 1,
) -> list[BerEstimate]:
    """Per-user payload BER of the full power-domain pipeline at one SNR point.

    Every user first locates the active antenna combination (energy detection
    on its own received sample, or a genie index), then runs SIC with the
    effective gain of the combination it found.  Users are re-ordered by
    effective-gain magnitude per realization; user m means rank m.  The chunk
    generator context excludes the knowledge mode, so estimated and genie
    runs are paired on common random numbers.
    """
    cfg = validate_config(cfg)
    if antenna_knowledge not in ("estimated", "genie"):
        raise ValueError(f"unknown antenna_knowledge: {antenna_knowledge!r}")
    cb = build_codebook(cfg.n_transmit, cfg.n_active)
    combos = cb.combo_array()
    const = psk_constellation(cfg.psk_order)
    qdist = gray_bit_distance_matrix(cfg.psk_order)
    rho_prime = snr_to_linear(snr_db, cfg.n_active).rho_prime
    m_users = cfg.n_noma_users
    alphas = np.asarray(cfg.power_coeffs)
    n_entries = combos.shape[0]
    sqrt_rp = math.sqrt(rho_prime)
    context = (_snr_key(snr_db),)

    def counts_fn(chunk: int, n: int) -> np.ndarray:
        rng = _chunk_rng(cfg.seed, _OP_NOMA, context, chunk)
        j = rng.integers(0, n_entries, n)
        sym_idx = rng.integers(0, const.size, (n, m_users))
        g = sample_channel_matrix(rng, (n, m_users, cfg.n_transmit))
        noise = sample_channel_matrix(rng, (n, m_users)) * math.sqrt(cfg.noise_var)

        eff = g[:, :, combos].sum(axis=3)  # (n, m_users, n_entries)
        g_tx = eff[np.arange(n)[:, None], np.arange(m_users)[None, :], j[:, None]]
        order = np.argsort(np.abs(g_tx), axis=1, kind="stable")
        g_sorted = np.take_along_axis(g_tx, order, axis=1)
        eff_sorted = np.take_along_axis(eff, order[:, :, None], axis=1)

        x = superpose_batch(const[sym_idx], alphas, cfg.total_power)
        r = sqrt_rp * g_sorted * x[:, None] + noise

        out = np.zeros(m_users + 1, dtype=np.int64)
        out[m_users] = n
        rows = np.arange(n)
        for m in range(m_users):
            if antenna_knowledge == "genie":
                k_hat = j
            else:
                k_hat = detect_energy_ml(
                    r[:, m],
                    np.abs(eff_sorted[:, m, :]) ** 2,
                    rho_prime,
                    cfg.total_power,
                    cfg.noise_var,
                )
            g_hat = sqrt_rp * eff_sorted[rows, m, k_hat]
            cancelled = np.zeros(n, dtype=complex)
            decided = np.zeros(n, dtype=np.intp)
            for i in range(m + 1):
                amp = math.sqrt(alphas[i] * cfg.total_power)
                metric = np.abs(
                    r[:, m, None] - g_hat[:, None] * (cancelled[:, None] + amp * const[None, :])
                )
                decided = np.argmin(metric, axis=1)
                cancelled = cancelled + amp * const[decided]
            out[m] = int(qdist[sym_idx[:, m], decided].sum())
        return out

    counts = _run_chunks(trials or cfg.trials_per_point, counts_fn, workers)
    n_total = int(counts[m_users])
    bits = int(math.log2(cfg.psk_order))
    return [
        BerEstimate.from_counts(int(counts[m]), n_total * bits) for m in range(m_users)
    ]


def run_rate_curves(
    cfg: SystemConfig,
    snr_grid_db=None,
    trials: Optional[int] = None,
    workers: int = 1,
    scenario: str = "",
) -> CurveTable:
    """Spectral-efficiency curves with simulated error-rate factors.

    Per SNR point: the hybrid scheme's spatial rate (energy detection),
    payload sum rate and total, a conventional spatial-keying baseline
    (constant payload, coherent detection, own simulated error rate), and a
    conventional power-domain baseline (single antenna, rank-ordered users).
    """
    cfg = validate_config(cfg)
    grid = [float(s) for s in (snr_grid_db if snr_grid_db is not None else cfg.snr_grid_db)]
    cb = build_codebook(cfg.n_transmit, cfg.n_active)
    tag = scenario or f"Nt={cfg.n_transmit} nt={cfg.n_active} M={cfg.n_noma_users}"
    cnoma_cfg = validate_config(replace(cfg, n_transmit=1, n_active=1))

    table = CurveTable()
    for snr_db in grid:
        snr = snr_to_linear(snr_db, cfg.n_active)
        p_gssk = run_gssk_ber(cfg, "energy_ml", snr_db, trials, workers).bit.ber
        pe_users = [e.ber for e in run_noma_ber(cfg, snr_db, "estimated", trials, workers)]
        rates = sum_rate_ngssk(cfg, snr, p_gssk, pe_users)

        p_cgssk = run_cgssk_ber(cfg, snr_db, trials, workers).bit.ber
        r_cgssk = (1.0 - p_cgssk) * cb.bits_per_symbol

        snr1 = snr_to_linear(snr_db, 1)
        pe_cnoma = [e.ber for e in run_noma_ber(cnoma_cfg, snr_db, "genie", trials, workers)]
        r_cnoma = math.fsum(
            (1.0 - pe_cnoma[m - 1]) * rate_noma_user(m, cnoma_cfg, snr1)
            for m in range(1, cfg.n_noma_users + 1)
        )

        table.add(snr_db, "r_gssk", rates.r_gssk, scenario=tag)
        table.add(snr_db, "r_noma", rates.r_noma, scenario=tag)
        table.add(snr_db, "r_total", rates.r_total, scenario=tag)
        table.add(snr_db, "r_cgssk", r_cgssk, scenario=tag)
        table.add(snr_db, "r_cnoma", r_cnoma, scenario=tag)
    return table
