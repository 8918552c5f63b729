"""
Capacity, complexity, energy and throughput
===========================================

The closed-form comparisons need no simulation apart from the capacity
average, which reuses one set of channel draws for every system.
"""

from dmbm.analysis import (capacity_curve, complexity, config_for, energy_saving,
                           spectral_efficiency, throughput)

cfgs = {s: config_for(s, 4, n_R=4, n_T=4, m_rf=4) for s in ("SM", "MBM", "DSM", "DMBM")}
snrs = [0, 10, 20]
curves = capacity_curve(list(cfgs.values()), snrs, n_channel_samples=500, seed=6)
print("capacity [bits/s/Hz]")
for name, curve in zip(cfgs, curves):
    print(f"  {name:5s}", "  ".join(f"{e.mean:6.2f}" for e in curve))

# %%
# Receiver cost and bits per channel use for one parameter set.
print("\nsystem  eta  real multiplications")
for s in ("SM", "QSM", "MBM", "DSM", "DMBM"):
    print(f"  {s:5s} {spectral_efficiency(s, 8, 4, 5):4d}  {complexity(s, 8, n_T=4, m_rf=5, n_R=4):14.1f}")

# %%
# Energy saved per bit by DMBM relative to a scheme with fewer bits per
# channel use, and the resulting throughput at a given error rate.
eta = spectral_efficiency("DMBM", 4, m_rf=4)
for s in ("SM", "QSM", "MBM", "DSM"):
    print(f"  vs {s:4s}: {energy_saving(spectral_efficiency(s, 4, 4, 4), eta):5.1f} %")
print("throughput at ABER 1e-3:", throughput(1e-3, eta), "bits per symbol period")
