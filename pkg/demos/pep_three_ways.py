"""Compute the fading-averaged pairwise error probability three ways.

The energy detector's pair error, averaged over independent exponential
channel energies, is evaluated by (1) nested 2-D quadrature, (2) the Meijer G
closed form, and (3) the 1-D reduction oracle, and the three columns are
printed side by side.  The last column is the integration-by-parts identity
(1 - erfcx(1/(sqrt(2) a))) / 2, which all of them should reproduce.
"""

import numpy as np

from ngssk.analysis import (
    pep_gssk_closed_form,
    pep_gssk_oracle_1d,
    pep_gssk_quadrature,
    pep_param_a,
)
from ngssk.config import snr_to_linear

print(f"{'snr_db':>7} {'a':>9} {'quadrature':>12} {'closed':>12} "
      f"{'oracle_1d':>12} {'exact':>12}")
for snr_db in range(0, 42, 4):
    snr = snr_to_linear(snr_db, n_active=2)
    a = pep_param_a(snr.rho_prime, power=1.0, noise_var=1.0, n_active=2)
    qd = pep_gssk_quadrature(a)
    cf = pep_gssk_closed_form(a)
    o1 = pep_gssk_oracle_1d(a)
    exact = pep_gssk_oracle_1d(a, closed_form=True)
    print(f"{snr_db:>7} {a:>9.3f} {qd.value:>12.8f} {cf.value:>12.8f} "
          f"{o1.value:>12.8f} {exact.value:>12.8f}")

print("\nclosed form used", pep_gssk_closed_form(1.0).terms_used, "series terms at a=1")
print("worst spread at a=1:",
      np.ptp([pep_gssk_quadrature(1.0).value,
              pep_gssk_closed_form(1.0).value,
              pep_gssk_oracle_1d(1.0).value]))
