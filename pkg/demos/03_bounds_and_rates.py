"""Closed-form sensing bound and achievable rates, no detection involved.

    python demos/03_bounds_and_rates.py
"""

import numpy as np

import uplink_isac as ui
from uplink_isac import analysis as an

cfg = ui.SystemConfig()
rng = np.random.default_rng(0)

print(f"CRB with the orthogonal waveform: {ui.crb_orthogonal(cfg):.5f}")
for L in (8, 20, 40):
    print(f"  L={L:2d}: {ui.crb_orthogonal(cfg.replace(L=L)):.5f}")

# Projected SNR equals P_c / sigma2; SIC loses to the radar echo instead.
print("SNR_P theory   :", ui.snr_projected_theory(cfg))
print("SNR_P simulated:", ui.snr_projected_empirical(cfg, 500, rng))
print("SINR_SIC       :", ui.sinr_sic_empirical(cfg, 500, rng))

# Rates per snapshot, averaged over channel draws.
for L in (8, 16, 28, 40):
    c = cfg.replace(L=L)
    sinr = ui.sinr_sic_empirical(c, 200, rng)
    reps = [ui.ergodic_rates(ui.gen_comm_channel(rng, c.M_r, c.N_t), c, sinr)
            for _ in range(200)]
    mean = lambda k: np.mean([getattr(r, k) for r in reps])
    print(f"L={L:2d}  comm-only {mean('rate_comm_only'):6.2f}  "
          f"SIC {mean('rate_sic'):6.2f}  projection {mean('rate_projection'):6.2f}")

# The water-filling solution satisfies its optimality conditions.
rep = reps[-1]
print("KKT residual:", an.waterfill_kkt_residual(rep.eigenvalues, cfg.snr, rep.powers))
