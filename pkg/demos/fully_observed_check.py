#!/usr/bin/env python3
"""The regime where the naive estimator is exactly right, and how it breaks.

With synchronized daily testing, full participation, and no community or
contact-to-contact infections, first-positive order matches acquisition
order, the index is always the true primary, and the naive pooled-SAR
estimator reproduces the cohort's true VE exactly. Switching to
independent per-person test phases breaks the ordering: a contact
occasionally tests positive before its primary, the unit migrates to the
unvaccinated arm, and the naive VE drifts upward.
"""

import numpy as np

from sarbias import DurationModelParams, mc_fully_observed_naive

d = DurationModelParams()
n = 400_000

sync = mc_fully_observed_naive(d, interval_k=1.0, units_per_arm=n,
                               rng=np.random.default_rng(31), shared_phase=True)
print("Synchronized household testing, every day:")
print(f"  naive VE {sync.ve_naive:.6f} vs true VE {sync.ve_true:.6f} "
      f"(difference {sync.difference:+.2e})")
print()

indep = mc_fully_observed_naive(d, interval_k=1.0, units_per_arm=n,
                                rng=np.random.default_rng(31),
                                shared_phase=False)
print("Independent per-person test phases, every day:")
print(f"  naive VE {indep.ve_naive:.6f} vs true VE {indep.ve_true:.6f} "
      f"(difference {indep.difference:+.4f}, about "
      f"{indep.difference / indep.se_naive:.1f} standard errors)")
print()
print("Same data volume, same testing frequency: only the phase alignment")
print("changed, and the index-order swaps alone bias the estimate.")
