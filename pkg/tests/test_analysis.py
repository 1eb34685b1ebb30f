import math

import numpy as np
import pytest
from scipy.integrate import quad

from ngssk.analysis import (
    CurveTable,
    SeriesNonConvergence,
    ber_bound_noma_user,
    ber_overall,
    conditional_pep_gssk,
    pep_gssk_closed_form,
    pep_gssk_oracle_1d,
    pep_gssk_quadrature,
    pep_noma_first_user,
    pep_noma_mth_user,
    pep_param_a,
    rate_gssk,
    rate_noma_user,
    sum_rate_ngssk,
    union_bound_gssk,
)
from ngssk.channel import ordered_gain_second_moment, ordered_rayleigh_pdf, sample_channel_matrix
from ngssk.codebook import build_codebook
from ngssk.config import SystemConfig, snr_to_linear, validate_config
from ngssk.phy import psk_constellation
from ngssk.specfun import SeriesControl, q_function


class TestConditionalPep:
    def test_equal_energies_give_half(self):
        assert conditional_pep_gssk(1.5, 1.5, 2.0, 1.0, 1.0, 2) == pytest.approx(0.5)

    def test_high_snr_limit(self):
        assert conditional_pep_gssk(2.0, 0.5, 1e8, 1.0, 1.0, 2) < 1e-12

    def test_frozen_value(self):
        # Q(1/sqrt(5)), frozen from Gaussian-tail quadrature
        val = conditional_pep_gssk(2.0, 0.0, 1.0, 1.0, 1.0, 2)
        assert val == pytest.approx(0.3273604230092885, abs=1e-14)

    def test_zero_noise_rejected(self):
        with pytest.raises(ValueError):
            conditional_pep_gssk(1.0, 2.0, 1.0, 1.0, 0.0, 2)


class TestPepAveraged:
    def test_all_methods_half_at_zero(self):
        assert pep_gssk_quadrature(0.0).value == 0.5
        assert pep_gssk_closed_form(0.0).value == 0.5
        assert pep_gssk_oracle_1d(0.0).value == 0.5

    def test_quadrature_matches_1d_oracle(self):
        for a in (0.1, 1.0, 10.0):
            q2 = pep_gssk_quadrature(a).value
            o1 = pep_gssk_oracle_1d(a).value
            assert abs(q2 - o1) <= 1e-7

    def test_oracle_quadrature_vs_closed_identity(self):
        for a in (0.05, 0.7, 3.0, 40.0):
            by_quad = pep_gssk_oracle_1d(a).value
            by_parts = pep_gssk_oracle_1d(a, closed_form=True).value
            assert by_quad == pytest.approx(by_parts, abs=1e-10)

    def test_quadrature_strictly_decreasing_and_bounded(self):
        grid = np.logspace(-2, 2, 17)
        vals = [pep_gssk_quadrature(a).value for a in grid]
        assert all(x > y for x, y in zip(vals, vals[1:]))
        assert all(0.0 < v <= 0.5 for v in vals)

    def test_closed_form_four_decimal_agreement(self):
        for a in (0.5, 1.0, 2.0, 5.0):
            cf = pep_gssk_closed_form(a)
            qd = pep_gssk_quadrature(a)
            assert abs(cf.value - qd.value) <= 1e-4
            assert cf.terms_used <= 20

    def test_twenty_vs_forty_terms(self):
        lo = pep_gssk_closed_form(1.0, SeriesControl(max_terms=20)).value
        hi = pep_gssk_closed_form(1.0, SeriesControl(max_terms=40, abs_tol=1e-16)).value
        assert abs(lo - hi) < 1e-4

    def test_closed_form_grid_agreement(self):
        for a in np.logspace(-2, 2, 25):
            cf = pep_gssk_closed_form(a).value
            qd = pep_gssk_quadrature(a).value
            assert abs(cf - qd) <= 1e-4

    def test_series_nonconvergence_reports_residual(self):
        with pytest.raises(SeriesNonConvergence, match="residual"):
            pep_gssk_closed_form(2.0, SeriesControl(max_terms=2))

    def test_negative_a_rejected(self):
        with pytest.raises(ValueError):
            pep_gssk_quadrature(-1.0)
        with pytest.raises(ValueError):
            pep_gssk_closed_form(-0.5)

    def test_param_a_definition(self):
        snr = snr_to_linear(30.0, 2)
        a = pep_param_a(snr.rho_prime, 1.0, 1.0, 2)
        rpn = snr.rho_prime * 1.0 * 2
        assert a == pytest.approx(rpn / (2 * math.sqrt(2 * rpn + 1.0)))


class TestUnionBound:
    def test_zero_pep(self):
        cb = build_codebook(5, 3)
        assert union_bound_gssk(cb, 0.0).raw == 0.0

    def test_single_bit_codebook(self):
        # two codewords, one bit: the bound equals the pairwise probability
        cb = build_codebook(3, 2)
        assert cb.bits_per_symbol == 1
        assert union_bound_gssk(cb, 0.27).raw == pytest.approx(0.27)

    def test_linear_in_pep(self):
        cb = build_codebook(4, 2)
        b1 = union_bound_gssk(cb, 0.1).raw
        b2 = union_bound_gssk(cb, 0.2).raw
        assert b2 == pytest.approx(2 * b1)

    def test_clamped_at_half(self):
        cb = build_codebook(8, 2)  # weight 32 per unit pep
        ub = union_bound_gssk(cb, 0.4)
        assert ub.raw == pytest.approx(12.8)
        assert ub.clamped == 0.5

    def test_rejects_out_of_range_pep(self):
        cb = build_codebook(4, 2)
        with pytest.raises(ValueError):
            union_bound_gssk(cb, 0.6)


def _numerical_rank_average(eta, beta, m, m_users, n_active):
    val, _ = quad(
        lambda g: float(q_function(g * eta / beta))
        * ordered_rayleigh_pdf(g, m, m_users, n_active),
        0,
        np.inf,
        limit=300,
    )
    return val


class TestNomaPep:
    def test_rank1_limits(self):
        huge = pep_noma_first_user(2.0, [], 0.8, 1e9, 1.0, sigma_h2=1.0)
        assert huge < 1e-4
        # vanishing separation: nu = 0 through interferer cancellation
        # nu = sqrt(0.2*4)*4 + 2*(2*sqrt(0.8*4)*z) = 0 at z = -0.5
        nu_zero = pep_noma_first_user(2.0, [(0.8, -0.5)], 0.2, 4.0, 1.0, sigma_h2=1.0)
        assert nu_zero == pytest.approx(0.5, abs=1e-12)

    def test_rank1_rejects_zero_delta(self):
        with pytest.raises(ValueError):
            pep_noma_first_user(0.0, [], 0.8, 1.0, 1.0, 1.0)

    def test_rank1_worst_case_matches_order_statistic_average(self):
        # weakest of two users, BPSK, worst interferer sign
        m_users, n_active, power = 2, 3, 25.0
        delta = 2.0
        interferers = [(0.2, -1.0)]
        closed = pep_noma_first_user(
            delta, interferers, 0.8, power, 1.0,
            sigma_h2=ordered_gain_second_moment(1, m_users, n_active),
        )
        nu = math.sqrt(0.8 * power) * 4 + 2 * (delta * math.sqrt(0.2 * power) * -1.0)
        beta = math.sqrt(2.0) * 2.0
        oracle = _numerical_rank_average(nu, beta, 1, m_users, n_active)
        assert closed == pytest.approx(oracle, rel=0.10)
        assert closed == pytest.approx(oracle, rel=1e-9)  # exact for the minimum

    def test_rank1_monte_carlo_average(self):
        rng = np.random.default_rng(11)
        m_users, n_active, power = 2, 1, 25.0
        draws = sample_channel_matrix(rng, (10**6, m_users, n_active)).sum(axis=2)
        g_min = np.abs(draws).min(axis=1)
        nu = math.sqrt(0.8 * power) * 4 + 2 * (2.0 * math.sqrt(0.2 * power) * -1.0)
        beta = math.sqrt(2.0) * 2.0
        mc = float(np.mean(q_function(g_min * nu / beta)))
        closed = pep_noma_first_user(
            2.0, [(0.2, -1.0)], 0.8, power, 1.0,
            sigma_h2=ordered_gain_second_moment(1, m_users, n_active),
        )
        assert closed == pytest.approx(mc, rel=0.10)

    @pytest.mark.parametrize("m_users", [2, 3])
    def test_rank_m_matches_order_statistic_average(self, m_users):
        coeff_sets = {2: (0.8, 0.2), 3: (0.7, 0.2, 0.1)}
        alphas = coeff_sets[m_users]
        power, n_active = 40.0, 3
        for m in range(1, m_users + 1):
            delta = 2.0
            weaker = [(a, 1.0) for a in alphas[m:]]
            priors = [(a, -2.0) for a in alphas[: m - 1]]
            closed = pep_noma_mth_user(
                delta, priors, weaker, alphas[m - 1], power, 1.0, m, m_users,
                sigma_h2=n_active,
            )
            eta = (
                math.sqrt(alphas[m - 1] * power) * 4
                + 2 * sum(delta * math.sqrt(a * power) * z for a, z in weaker)
                + sum(delta * math.sqrt(a * power) * d for a, d in priors)
            )
            beta = math.sqrt(2.0) * 2.0
            oracle = _numerical_rank_average(eta, beta, m, m_users, n_active)
            assert closed == pytest.approx(oracle, rel=0.10)
            assert closed == pytest.approx(oracle, rel=1e-8)

    def test_rank_m_reduces_to_rank1_for_single_user(self):
        a = pep_noma_mth_user(2.0, [], [], 1.0, 9.0, 1.0, 1, 1, sigma_h2=2.0)
        b = pep_noma_first_user(2.0, [], 1.0, 9.0, 1.0, sigma_h2=2.0)
        assert a == pytest.approx(b, abs=1e-15)

    @pytest.mark.parametrize("m_users,m", [(2, 2), (3, 2), (3, 3), (4, 3)])
    def test_zero_separation_gives_half(self, m_users, m):
        # craft a prior residue that cancels eta exactly
        alpha_m, power, delta = 0.2, 1.0, 2.0
        lead = math.sqrt(alpha_m * power) * abs(delta) ** 2
        prior = [(0.8, -lead / (delta * math.sqrt(0.8 * power)))]
        val = pep_noma_mth_user(
            delta, prior, [], alpha_m, power, 1.0, m, m_users, sigma_h2=1.0
        )
        assert val == pytest.approx(0.5, abs=1e-12)

    def test_invalid_rank(self):
        with pytest.raises(ValueError):
            pep_noma_mth_user(2.0, [], [], 0.5, 1.0, 1.0, 3, 2, 1.0)


class TestBerBound:
    def test_bpsk_single_user_equals_pairwise(self):
        cfg = validate_config(
            SystemConfig(n_transmit=4, n_active=2, n_noma_users=1, power_coeffs=(1.0,))
        )
        snr = snr_to_linear(10.0, 2)
        bound = ber_bound_noma_user(1, cfg, psk_constellation(2), snr)
        pep = pep_noma_mth_user(
            2.0, [], [], 1.0, snr.rho_prime * cfg.total_power, 1.0, 1, 1,
            sigma_h2=cfg.n_active,
        )
        assert bound == pytest.approx(pep, rel=1e-12)

    def test_non_increasing_in_power(self):
        const = psk_constellation(2)
        for m in (1, 2):
            vals = []
            for p in (0.25, 1.0, 4.0, 16.0, 64.0):
                cfg = validate_config(
                    SystemConfig(
                        n_transmit=4, n_active=2, n_noma_users=2,
                        power_coeffs=(0.8, 0.2), total_power=p,
                    )
                )
                vals.append(ber_bound_noma_user(m, cfg, const, snr_to_linear(10.0, 2)))
            assert all(a >= b - 1e-12 for a, b in zip(vals, vals[1:]))

    def test_perfect_residue_mode_not_larger(self):
        cfg = validate_config(
            SystemConfig(n_transmit=4, n_active=2, n_noma_users=2, power_coeffs=(0.8, 0.2))
        )
        snr = snr_to_linear(20.0, 2)
        const = psk_constellation(2)
        enum = ber_bound_noma_user(2, cfg, const, snr, sic_residuals="uniform_differences")
        perfect = ber_bound_noma_user(2, cfg, const, snr, sic_residuals="perfect")
        assert perfect <= enum


class TestOverall:
    def test_zero_spatial_error(self):
        res = ber_overall(0.0, [0.04, 0.06])
        assert res.noma_raw == pytest.approx(0.1)
        assert res.system_raw == pytest.approx(0.1)

    def test_zero_user_bounds(self):
        res = ber_overall(0.01, [])
        assert res.noma_raw == pytest.approx(0.01)
        assert res.system_raw == pytest.approx(0.02)

    def test_composition_identity(self):
        res = ber_overall(0.01, [0.1])
        assert res.noma_raw == pytest.approx(0.109, rel=1e-12)
        assert res.system_raw == pytest.approx(0.119, rel=1e-12)

    def test_clamping(self):
        res = ber_overall(0.9, [0.8, 0.9])
        assert res.system_raw > 1.0
        assert res.system == 1.0
        assert res.noma <= 1.0

    def test_ordering_invariant(self):
        res = ber_overall(0.05, [0.02, 0.03])
        assert res.system_raw >= res.noma_raw >= 0.05


class TestRates:
    def test_rate_gssk_values(self):
        assert rate_gssk(0.0, build_codebook(5, 3)) == 3.0
        assert rate_gssk(1.0, build_codebook(5, 3)) == 0.0
        assert rate_gssk(0.5, build_codebook(8, 2)) == 2.0

    def test_vanishing_coefficient_gives_vanishing_rate(self):
        cfg = validate_config(
            SystemConfig(
                n_transmit=4, n_active=2, n_noma_users=2,
                power_coeffs=(1.0 - 1e-13, 1e-13),
            )
        )
        assert rate_noma_user(2, cfg, snr_to_linear(20.0, 2)) < 1e-6

    def test_strongest_user_high_power_slope(self):
        base = validate_config(
            SystemConfig(n_transmit=4, n_active=2, n_noma_users=2,
                         power_coeffs=(0.8, 0.2), total_power=100.0)
        )
        big = validate_config(
            SystemConfig(n_transmit=4, n_active=2, n_noma_users=2,
                         power_coeffs=(0.8, 0.2), total_power=10000.0)
        )
        snr = snr_to_linear(20.0, 2)
        gap = rate_noma_user(2, big, snr) - rate_noma_user(2, base, snr)
        assert gap == pytest.approx(math.log2(100.0), abs=0.05)

    def test_weak_user_interference_ceiling(self):
        cfg = validate_config(
            SystemConfig(n_transmit=4, n_active=2, n_noma_users=2,
                         power_coeffs=(0.8, 0.2), total_power=1e7)
        )
        val = rate_noma_user(1, cfg, snr_to_linear(30.0, 2))
        assert val == pytest.approx(math.log2(5.0), abs=1e-3)

    def test_rates_non_negative_and_non_decreasing_in_power(self):
        snr = snr_to_linear(10.0, 2)
        last = {1: 0.0, 2: 0.0}
        for p in (0.5, 1.0, 2.0, 8.0, 32.0):
            cfg = validate_config(
                SystemConfig(n_transmit=4, n_active=2, n_noma_users=2,
                             power_coeffs=(0.8, 0.2), total_power=p)
            )
            for m in (1, 2):
                val = rate_noma_user(m, cfg, snr)
                assert val >= last[m] - 1e-12
                last[m] = val

    def test_sum_rate_composition(self):
        cfg = validate_config(
            SystemConfig(n_transmit=5, n_active=3, n_noma_users=2, power_coeffs=(0.8, 0.2))
        )
        snr = snr_to_linear(20.0, 3)
        res = sum_rate_ngssk(cfg, snr, 0.0, [0.0, 0.0])
        r1 = rate_noma_user(1, cfg, snr)
        r2 = rate_noma_user(2, cfg, snr)
        assert res.r_gssk == 3.0
        assert res.r_noma == pytest.approx(r1 + r2)
        assert res.r_total == pytest.approx(3.0 + r1 + r2)
        dead = sum_rate_ngssk(cfg, snr, 1.0, [1.0, 1.0])
        assert dead.r_total == 0.0


class TestCurveTable:
    def test_csv_roundtrip(self, tmp_path):
        table = CurveTable()
        table.add(0.0, "pep", 0.5, scenario="s")
        table.add(10.0, "pep", 0.25, 0.2, 0.3, "s")
        path = tmp_path / "curves.csv"
        table.to_csv(str(path))
        lines = path.read_text().splitlines()
        assert lines[0] == "snr_db,metric,value,ci_low,ci_high,scenario"
        assert lines[1] == "0,pep,0.5,,,s"
        assert lines[2] == "10,pep,0.25,0.2,0.3,s"

    def test_rejects_non_finite(self):
        table = CurveTable()
        with pytest.raises(ValueError):
            table.add(0.0, "pep", float("nan"))

    def test_rejects_non_increasing_series(self, tmp_path):
        table = CurveTable()
        table.add(10.0, "pep", 0.5, scenario="s")
        table.add(10.0, "pep", 0.25, scenario="s")
        with pytest.raises(ValueError):
            table.to_csv(str(tmp_path / "bad.csv"))
