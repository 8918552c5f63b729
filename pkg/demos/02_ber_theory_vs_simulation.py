"""
Simulated BER against the union bound
=====================================

BPSK DMBM with two receive antennas. The union bound should sit on top
of the Monte Carlo curve once the BER drops below about 1e-2.
"""

from dmbm import ModulationConfig
from dmbm.analysis import theoretical_aber
from dmbm.channel import snr_to_n0
from dmbm.montecarlo import StoppingRule, run_ber

rule = StoppingRule(min_bit_errors=200, max_trials=400_000, ber_floor=1e-4)
snrs = [6, 10, 14, 18, 22]

for m_rf in (2, 3):
    cfg = ModulationConfig(M=2, m_rf=m_rf, n_R=2)
    curve = run_ber(cfg, snrs, rule, seed=1)
    print(f"\nm_rf={m_rf} (eta={cfg.eta})")
    print(" snr   simulated    bound      ratio")
    for p in curve.points:
        bound = theoretical_aber(cfg, snr_to_n0(p.snr_db))
        ratio = bound / p.ber if p.bit_errors else float("nan")
        print(f"{p.snr_db:4.0f}  {p.ber:.3e}  {bound:.3e}  {ratio:6.2f}"
              + ("" if p.completed else "  (budget hit)"))
