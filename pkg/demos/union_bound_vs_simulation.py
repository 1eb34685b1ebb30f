"""Union bound against simulated energy detection, small scale.

Reproduces the bit-error comparison for a couple of antenna configurations
with a single-stream payload (constant transmitted modulus).  At small
antenna counts the retained combinations share antennas, the channel
energies of competing hypotheses correlate, and the bound built on an
independence assumption can sit below the simulation at low SNR; watch the
n_transmit=3 column.
"""

from ngssk.analysis import pep_gssk_closed_form, pep_param_a, union_bound_gssk
from ngssk.codebook import build_codebook
from ngssk.config import SystemConfig, snr_to_linear, validate_config
from ngssk.montecarlo import run_gssk_ber

TRIALS = 50_000

for n_transmit in (3, 5):
    cfg = validate_config(
        SystemConfig(
            n_transmit=n_transmit, n_active=2, n_noma_users=1, power_coeffs=(1.0,),
            trials_per_point=TRIALS, seed=1,
        )
    )
    cb = build_codebook(n_transmit, 2)
    print(f"\nn_transmit={n_transmit}, n_active=2, "
          f"{cb.bits_per_symbol} spatial bit(s), {TRIALS} trials/point")
    print(f"{'snr_db':>7} {'simulated':>10} {'bound':>10} {'sim<=bound':>11}")
    for snr_db in range(0, 32, 4):
        snr = snr_to_linear(snr_db, 2)
        a = pep_param_a(snr.rho_prime, cfg.total_power, cfg.noise_var, 2)
        bound = union_bound_gssk(cb, pep_gssk_closed_form(a).value).raw
        est = run_gssk_ber(cfg, "energy_ml", float(snr_db)).bit
        print(f"{snr_db:>7} {est.ber:>10.4f} {bound:>10.4f} {str(est.ber <= bound):>11}")
