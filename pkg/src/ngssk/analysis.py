"""Closed-form and numerical performance expressions.

Covers the spatial-detection pairwise error probability in four independently
computed forms (conditional, 2-D quadrature, Meijer G closed form, and a 1-D
reduction oracle), the union bound built on it, pairwise/bit error bounds for
the power-domain users via Rayleigh order statistics, the overall error
composition, and ergodic rate integrals.

The PEP forms all describe one quantity: the average of
Q(a * |x - y|) over independent unit-mean exponentials x, y, with

    a = rho_prime * power * n_active
        / (2 * sigma_n * sqrt(2 * rho_prime * power * n_active + sigma_n**2)).

Since x - y is Laplace, |x - y| is itself unit exponential, which collapses
the double integral to integral Q(a*u) exp(-u) du; integrating by parts gives
the closed reference value (1 - erfcx(1 / (sqrt(2) a))) / 2.  That 1-D
reduction is the ground truth the Meijer G assembly is reconciled against:
the assembly constant is a / (sqrt(2) * pi).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from itertools import product
from typing import NamedTuple, Optional

import numpy as np
from scipy.integrate import quad
from scipy.special import erfcx

from ngssk.channel import ordered_rayleigh_pdf
from ngssk.codebook import Codebook, bit_distance_matrix, build_codebook
from ngssk.config import DerivedSnr, SystemConfig
from ngssk.phy import gray_bit_distance_matrix
from ngssk.specfun import SeriesControl, meijer_g_2112, meijer_g_3213, q_function

__all__ = [
    "CurveTable",
    "OverallBer",
    "PepResult",
    "SeriesNonConvergence",
    "SumRate",
    "UnionBound",
    "ber_bound_noma_user",
    "ber_overall",
    "conditional_pep_gssk",
    "pep_param_a",
    "pep_gssk_closed_form",
    "pep_gssk_oracle_1d",
    "pep_gssk_quadrature",
    "pep_noma_first_user",
    "pep_noma_mth_user",
    "rate_gssk",
    "rate_noma_user",
    "sum_rate_ngssk",
    "union_bound_gssk",
]

# assembly constant for the Meijer G closed form, fixed by the 1-D oracle
CLOSED_FORM_CONST = 1.0 / (np.sqrt(2.0) * np.pi)
# truncation residual allowed before the series is declared non-convergent;
# half of the four-decimal agreement the 20-term default must deliver
SERIES_RESIDUAL_LIMIT = 5e-5


class SeriesNonConvergence(ArithmeticError):
    """Series truncation failed to reach a usable residual."""


@dataclass(frozen=True)
class PepResult:
    """A pairwise error probability value plus how it was obtained."""

    value: float
    method: str
    terms_used: int = 0


class UnionBound(NamedTuple):
    raw: float
    clamped: float


class OverallBer(NamedTuple):
    noma_raw: float
    system_raw: float
    noma: float
    system: float


class SumRate(NamedTuple):
    r_gssk: float
    r_noma: float
    r_total: float


def pep_param_a(rho_prime: float, power: float, noise_var: float, n_active: int) -> float:
    """Normalised separation parameter of the energy-detection PEP."""
    if not noise_var > 0:
        raise ValueError(f"noise_var must be positive, got {noise_var}")
    rpn = rho_prime * power * n_active
    return rpn / (2.0 * math.sqrt(noise_var) * math.sqrt(2.0 * rpn + noise_var))


def conditional_pep_gssk(
    xi: float,
    zeta: float,
    rho_prime: float,
    power: float,
    noise_var: float,
    n_active: int,
) -> float:
    """Pairwise error probability conditioned on the two channel energies.

    Q of half the energy separation over the interference-plus-noise standard
    deviation of the energy statistic.
    """
    if xi < 0 or zeta < 0:
        raise ValueError("channel energies must be nonnegative")
    if not noise_var > 0:
        raise ValueError(f"noise_var must be positive, got {noise_var}")
    num = 0.5 * rho_prime * power * abs(xi - zeta)
    den = math.sqrt(noise_var * (2.0 * rho_prime * power * n_active + noise_var))
    return float(q_function(num / den))


def pep_gssk_quadrature(a: float) -> PepResult:
    """Fading-averaged PEP by nested adaptive quadrature of the 2-D integral.

    Evaluates integral over x, y >= 0 of Q(a |x - y|) exp(-x - y), splitting
    the inner integral at the |x - y| kink.  Absolute accuracy 1e-8.
    """
    if a < 0:
        raise ValueError(f"separation parameter must be nonnegative, got {a}")
    if a == 0.0:
        return PepResult(value=0.5, method="quadrature", terms_used=0)

    evals = 0

    def inner(x: float) -> float:
        nonlocal evals

        def f(y: float) -> float:
            nonlocal evals
            evals += 1
            return float(q_function(a * abs(x - y))) * math.exp(-y)

        lo, _ = quad(f, 0.0, x, epsabs=1e-12, limit=100)
        hi, _ = quad(f, x, np.inf, epsabs=1e-12, limit=100)
        return (lo + hi) * math.exp(-x)

    value, _ = quad(inner, 0.0, np.inf, epsabs=1e-10, limit=100)
    return PepResult(value=float(value), method="quadrature", terms_used=evals)


def pep_gssk_oracle_1d(a: float, closed_form: bool = False) -> PepResult:
    """Independent 1-D reduction oracle.

    The difference of two unit exponentials is Laplace, so the 2-D average
    reduces to integral Q(a*u) exp(-u) du over u >= 0.  With
    ``closed_form=True`` the integration-by-parts identity
    (1 - erfcx(1/(sqrt(2) a))) / 2 is returned instead of quadrature.
    """
    if a < 0:
        raise ValueError(f"separation parameter must be nonnegative, got {a}")
    if a == 0.0:
        return PepResult(value=0.5, method="oracle_1d", terms_used=0)
    if closed_form:
        value = 0.5 * (1.0 - float(erfcx(1.0 / (math.sqrt(2.0) * a))))
        return PepResult(value=value, method="oracle_1d", terms_used=0)

    evals = 0

    def f(u: float) -> float:
        nonlocal evals
        evals += 1
        return float(q_function(a * u)) * math.exp(-u)

    value, _ = quad(f, 0.0, np.inf, epsabs=1e-12, limit=200)
    return PepResult(value=float(value), method="oracle_1d", terms_used=evals)


def pep_gssk_closed_form(a: float, ctrl: SeriesControl = SeriesControl()) -> PepResult:
    """Fading-averaged PEP assembled from the two Meijer G instances.

    value = (1 - c*a*[G_standalone(2 a^2) + (1/4) sum_k G_series(a^2/2, k)/k!]) / 2
    with c = CLOSED_FORM_CONST.  The series terms roughly halve from one k to
    the next; truncation stops early once a term drops below ``ctrl.abs_tol``
    and raises if the residual estimate at ``ctrl.max_terms`` would break the
    four-decimal agreement contract.
    """
    if a < 0:
        raise ValueError(f"separation parameter must be nonnegative, got {a}")
    if a == 0.0:
        return PepResult(value=0.5, method="closed_form", terms_used=0)

    z_series = a * a / 2.0
    series = 0.0
    terms = 0
    last = math.inf
    for k in range(ctrl.max_terms):
        term = meijer_g_3213(z_series, k) / math.factorial(k)
        series += term
        terms = k + 1
        last = abs(term)
        if last < ctrl.abs_tol:
            break
    else:
        # geometric tail with ratio about 1/2, in PEP units
        residual = 0.5 * CLOSED_FORM_CONST * a * 0.25 * (2.0 * last)
        if residual > SERIES_RESIDUAL_LIMIT:
            raise SeriesNonConvergence(
                f"series residual {residual:.3e} after {ctrl.max_terms} terms "
                f"exceeds {SERIES_RESIDUAL_LIMIT:.1e}"
            )

    bracket = meijer_g_2112(2.0 * a * a) + 0.25 * series
    value = 0.5 * (1.0 - CLOSED_FORM_CONST * a * bracket)
    return PepResult(value=float(value), method="closed_form", terms_used=terms)


def union_bound_gssk(codebook: Codebook, pep: float) -> UnionBound:
    """Bit-weighted union bound on the spatial-bit error rate.

    The fading-averaged PEP is pair independent, so the bound is
    pep * (sum of pairwise label distances) / codebook size.  The raw value
    may exceed one half at low SNR; the clamped companion caps it there.
    """
    if not 0.0 <= pep <= 0.5:
        raise ValueError(f"pair-averaged pep must lie in [0, 0.5], got {pep}")
    weight = float(bit_distance_matrix(codebook).sum()) / len(codebook)
    raw = pep * weight
    return UnionBound(raw=raw, clamped=min(raw, 0.5))


def _rayleigh_q_average(c: float, sigma2: float) -> float:
    """E[Q(c*g)] for Rayleigh g with E[g^2] = sigma2 (c may be negative)."""
    s = c * math.sqrt(sigma2)
    return 0.5 * (1.0 - s / math.sqrt(2.0 + s * s))


def pep_noma_first_user(
    delta1: complex,
    interferers,
    alpha1: float,
    power: float,
    noise_var: float,
    sigma_h2: float,
) -> float:
    """Average pairwise error probability of the weakest power-domain user.

    ``interferers`` is a sequence of (alpha_j, z_j) pairs for the stronger
    users whose symbols are treated as noise.  ``sigma_h2`` is the second
    moment of the user's channel magnitude; the minimum of i.i.d. Rayleigh
    magnitudes is again Rayleigh, so for rank 1 the Rayleigh average over that
    moment is exact.
    """
    delta1 = complex(delta1)
    if delta1 == 0:
        raise ValueError("delta1 must be nonzero; equal symbols are not an error event")
    interference = sum(math.sqrt(a * power) * np.conj(z) for a, z in interferers)
    nu = math.sqrt(alpha1 * power) * abs(delta1) ** 2 + 2.0 * (delta1 * interference).real
    beta = math.sqrt(2.0) * abs(delta1) * math.sqrt(noise_var)
    s = nu * math.sqrt(sigma_h2)
    return 0.5 * (1.0 - s / math.sqrt(2.0 * beta * beta + s * s))


def pep_noma_mth_user(
    delta_m: complex,
    prior_deltas,
    residual_interferers,
    alpha_m: float,
    power: float,
    noise_var: float,
    m: int,
    m_users: int,
    sigma_h2: float,
) -> float:
    """Average pairwise error probability of the rank-m user after SIC.

    The decision statistic separation is

        eta = sqrt(alpha_m P) |delta|^2
              + 2 Re{delta * sum_j sqrt(alpha_j P) conj(z_j)}      (weaker users)
              + Re{delta * sum_k sqrt(alpha_k P) conj(delta_k)}    (SIC residue)

    and the channel magnitude is the m-th smallest of ``m_users`` i.i.d.
    Rayleigh draws with per-sample second moment ``sigma_h2``.  Expanding the
    order-statistic density into signed Rayleigh components integrates each
    term exactly, giving the finite binomial sum below; at eta = 0 the sum
    collapses to one half.
    """
    if not 1 <= m <= m_users:
        raise ValueError(f"rank m={m} outside 1..{m_users}")
    delta_m = complex(delta_m)
    if delta_m == 0:
        raise ValueError("delta_m must be nonzero; equal symbols are not an error event")

    weaker = sum(math.sqrt(a * power) * np.conj(z) for a, z in residual_interferers)
    residue = sum(math.sqrt(a * power) * np.conj(d) for a, d in prior_deltas)
    eta = (
        math.sqrt(alpha_m * power) * abs(delta_m) ** 2
        + 2.0 * (delta_m * weaker).real
        + (delta_m * residue).real
    )
    beta2 = 2.0 * abs(delta_m) ** 2 * noise_var
    s = eta * math.sqrt(sigma_h2)

    coeff = math.factorial(m_users) / (
        2.0 * math.factorial(m - 1) * math.factorial(m_users - m)
    )
    total = 0.0
    for j in range(m):
        n_j = m_users - m + j + 1
        bracket = 1.0 - s / math.sqrt(s * s + 2.0 * n_j * beta2)
        total += math.comb(m - 1, j) * (-1.0) ** j / n_j * bracket
    return coeff * total


def _sic_residual_alphabet(constellation: np.ndarray) -> list[complex]:
    """Residue values a lower-rank decision can leave: zero plus every ordered
    pairwise symbol difference."""
    vals: list[complex] = [0j]
    for zi, zj in product(constellation, repeat=2):
        if zi != zj:
            vals.append(complex(zi - zj))
    return vals


def ber_bound_noma_user(
    m: int,
    cfg: SystemConfig,
    constellation: np.ndarray,
    snr: DerivedSnr,
    sic_residuals: str = "uniform_differences",
) -> float:
    """Union bound on the payload bit error rate of the rank-m user.

    Enumerates every ordered own-symbol pair weighted by its Gray label
    distance, averaging uniformly over the weaker users' symbols and, per
    ``sic_residuals``, over the lower-rank decision residues: either
    ``"perfect"`` (all zero) or ``"uniform_differences"`` (zero plus each
    ordered pairwise difference, uniformly).
    """
    m_users = cfg.n_noma_users
    if not 1 <= m <= m_users:
        raise ValueError(f"rank m={m} outside 1..{m_users}")
    if sic_residuals not in ("uniform_differences", "perfect"):
        raise ValueError(f"unknown sic_residuals mode: {sic_residuals!r}")

    const = np.asarray(constellation, dtype=complex)
    order = const.size
    bits = int(math.log2(order))
    qdist = gray_bit_distance_matrix(order)
    power_eff = snr.rho_prime * cfg.total_power
    alphas = cfg.power_coeffs

    weaker_alphas = alphas[m:]
    weaker_choices = list(product(const, repeat=len(weaker_alphas)))
    if sic_residuals == "perfect":
        residue_values = [0j]
    else:
        residue_values = _sic_residual_alphabet(const)
    prior_alphas = alphas[: m - 1]
    prior_choices = list(product(residue_values, repeat=len(prior_alphas)))

    bound = 0.0
    for ell in range(order):
        for ell_hat in range(order):
            if ell_hat == ell:
                continue
            delta = complex(const[ell] - const[ell_hat])
            acc = 0.0
            for weaker in weaker_choices:
                for priors in prior_choices:
                    acc += pep_noma_mth_user(
                        delta,
                        list(zip(prior_alphas, priors)),
                        list(zip(weaker_alphas, weaker)),
                        alphas[m - 1],
                        power_eff,
                        cfg.noise_var,
                        m,
                        m_users,
                        sigma_h2=float(cfg.n_active),
                    )
            acc /= len(weaker_choices) * len(prior_choices)
            bound += qdist[ell, ell_hat] * acc / order
    return bound / bits


def ber_overall(p_gssk: float, per_user_bounds) -> OverallBer:
    """Compose spatial and payload error rates into the two system-level bounds."""
    if not 0.0 <= p_gssk <= 1.0:
        raise ValueError(f"p_gssk must lie in [0, 1], got {p_gssk}")
    bounds = [float(b) for b in per_user_bounds]
    if any(b < 0.0 or b > 1.0 for b in bounds):
        raise ValueError("per-user bounds must lie in [0, 1]")
    total = math.fsum(bounds)
    noma_raw = (1.0 - p_gssk) * total + p_gssk
    system_raw = (1.0 - p_gssk) * total + 2.0 * p_gssk
    return OverallBer(
        noma_raw=noma_raw,
        system_raw=system_raw,
        noma=min(noma_raw, 1.0),
        system=min(system_raw, 1.0),
    )


def rate_gssk(p_gssk: float, codebook: Codebook) -> float:
    """Spatial-bit rate (1 - p_gssk) * bits_per_symbol, in bit/s/Hz."""
    if not 0.0 <= p_gssk <= 1.0:
        raise ValueError(f"p_gssk must lie in [0, 1], got {p_gssk}")
    return (1.0 - p_gssk) * codebook.bits_per_symbol


def rate_noma_user(m: int, cfg: SystemConfig, snr: DerivedSnr) -> float:
    """Ergodic rate of the rank-m user, log base 2, absolute accuracy 1e-6.

    Integrates log2(1 + g^2 alpha_m P_eff / (g^2 P_eff sum_{i>m} alpha_i +
    noise_var)) against the rank-m ordered magnitude density, with
    P_eff = rho_prime * total_power; the strongest user sees no interference
    term.
    """
    m_users = cfg.n_noma_users
    if not 1 <= m <= m_users:
        raise ValueError(f"rank m={m} outside 1..{m_users}")
    power_eff = snr.rho_prime * cfg.total_power
    alpha_m = cfg.power_coeffs[m - 1]
    tail = math.fsum(cfg.power_coeffs[m:])

    def integrand(g: float) -> float:
        g2 = g * g
        signal = g2 * alpha_m * power_eff
        interference = g2 * tail * power_eff + cfg.noise_var
        return math.log2(1.0 + signal / interference) * ordered_rayleigh_pdf(
            g, m, m_users, cfg.n_active
        )

    value, err = quad(integrand, 0.0, np.inf, epsabs=1e-8, limit=200)
    if err > 1e-6:
        raise ArithmeticError(f"rate quadrature error estimate {err:.2e} above 1e-6")
    return float(value)


def sum_rate_ngssk(
    cfg: SystemConfig, snr: DerivedSnr, p_gssk: float, per_user_pe
) -> SumRate:
    """Spectral efficiency split: spatial rate, payload sum rate, and total."""
    pe = [float(p) for p in per_user_pe]
    if len(pe) != cfg.n_noma_users:
        raise ValueError(
            f"expected {cfg.n_noma_users} per-user error rates, got {len(pe)}"
        )
    if any(p < 0.0 or p > 1.0 for p in pe):
        raise ValueError("per-user error rates must lie in [0, 1]")
    codebook = build_codebook(cfg.n_transmit, cfg.n_active)
    r_gssk = rate_gssk(p_gssk, codebook)
    r_noma = math.fsum(
        (1.0 - pe[m - 1]) * rate_noma_user(m, cfg, snr)
        for m in range(1, cfg.n_noma_users + 1)
    )
    return SumRate(r_gssk=r_gssk, r_noma=r_noma, r_total=r_gssk + r_noma)


CSV_HEADER = ("snr_db", "metric", "value", "ci_low", "ci_high", "scenario")


@dataclass
class CurveTable:
    """SNR-indexed metric series, serialisable to a stable CSV schema."""

    rows: list[tuple] = field(default_factory=list)

    def add(
        self,
        snr_db: float,
        metric: str,
        value: float,
        ci_low: Optional[float] = None,
        ci_high: Optional[float] = None,
        scenario: str = "",
    ) -> None:
        if not math.isfinite(value):
            raise ValueError(f"metric {metric!r} at {snr_db} dB is not finite")
        self.rows.append((float(snr_db), metric, float(value), ci_low, ci_high, scenario))

    def validate(self) -> None:
        last: dict[tuple[str, str], float] = {}
        for snr_db, metric, _value, _lo, _hi, scenario in self.rows:
            key = (metric, scenario)
            if key in last and snr_db <= last[key]:
                raise ValueError(
                    f"series {key} is not strictly increasing in snr_db at {snr_db}"
                )
            last[key] = snr_db

    def to_csv(self, path: str) -> None:
        self.validate()
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_HEADER)
            for snr_db, metric, value, lo, hi, scenario in self.rows:
                writer.writerow(
                    [
                        _fmt(snr_db),
                        metric,
                        _fmt(value),
                        _fmt(lo) if lo is not None else "",
                        _fmt(hi) if hi is not None else "",
                        scenario,
                    ]
                )


def _fmt(x: float) -> str:
    return format(float(x), ".12g")
