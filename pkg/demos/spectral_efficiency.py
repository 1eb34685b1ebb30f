"""Spectral-efficiency comparison at one SNR point, reduced trial count.

Prints the hybrid scheme's rate split (spatial + payload) next to the
conventional spatial-keying and conventional power-domain baselines for the
two standard power splits.
"""

from ngssk.config import SystemConfig, validate_config
from ngssk.montecarlo import run_rate_curves

SNR_DB = 30.0
TRIALS = 20_000

for coeffs in ((0.8, 0.2), (0.7, 0.2, 0.1)):
    cfg = validate_config(
        SystemConfig(
            n_transmit=5, n_active=3, n_noma_users=len(coeffs),
            power_coeffs=coeffs, trials_per_point=TRIALS, seed=2,
        )
    )
    table = run_rate_curves(cfg, [SNR_DB], trials=TRIALS)
    vals = {row[1]: row[2] for row in table.rows}
    print(f"\n{len(coeffs)} users, power split {coeffs}, {SNR_DB:g} dB:")
    for metric in ("r_gssk", "r_noma", "r_total", "r_cgssk", "r_cnoma"):
        print(f"  {metric:<10} {vals[metric]:7.3f} bit/s/Hz")
