"""
One channel draw, every scheme
==============================

Draw a single desk-scale channel (12 antennas, 4 RF chains, 3 users and
2 eavesdroppers at 10 dBm) and compare the joint design against the
sequential design and the three reference schemes.  Run with::

    python demos/single_draw.py
"""

import numpy as np

from secureas import benchmarks, pdd_solve, so_solve
from secureas.sim import desk_profile, gen_channels

spec = desk_profile()
cfg = spec.base
ch = gen_channels(cfg, spec.path_loss_db, rng_seed=0, realization_index=0)

# the joint design returns its convergence trace along with the solution
joint = pdd_solve(cfg, ch)
results = {
    "pdd": joint,
    "so": so_solve(cfg, ch),
    "so (refined)": so_solve(cfg, ch, refine=True),
    "random": benchmarks.random_scheme(cfg, ch, rng_seed=0),
    "energy": benchmarks.energy_scheme(cfg, ch),
    "mrt": benchmarks.mrt_scheme(cfg, ch),
}

print(f"{'scheme':14s} {'WSSR (bit/s/Hz)':>16s}  antennas")
for name, res in results.items():
    print(f"{name:14s} {res.report.wssr:16.3f}  {res.selection.indices.tolist()}")

# per-user breakdown of the joint design; a user may be switched off
# entirely when serving it would only leak information
rep = joint.report
print("\nuser  SINR (dB)  eve SNR (dB)  secrecy rate")
for k in range(cfg.K):
    if rep.gamma[k] == 0:
        print(f"{k:4d}  {'off':>9s}  {'off':>12s}  {rep.rates[k]:12.3f}")
        continue
    print(f"{k:4d}  {10 * np.log10(rep.gamma[k]):9.2f}  {10 * np.log10(rep.gamma_bar[k]):12.2f}  {rep.rates[k]:12.3f}")

# the relaxed selection is driven to a binary point by the penalty updates
tr = joint.trace
print(f"\nouter iterations: {tr.outer_iters_used}, final violation {tr.violation_per_outer_iter[-1]:.1e}")
for t in (0, 4, 9, 19, tr.outer_iters_used - 1):
    if t < tr.outer_iters_used:
        print(f"  outer {t + 1:3d}: violation {tr.violation_per_outer_iter[t]:.2e}, "
              f"objective {tr.objective_per_outer_iter[t]:.4f}")
print("relaxed selection before rounding:", np.round(joint.relaxed_s, 3))
