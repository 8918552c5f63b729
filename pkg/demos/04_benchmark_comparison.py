"""
DMBM against index-modulation benchmarks
========================================

All four systems carry ten bits per channel use and see four receive
antennas. Each scheme runs on the same master seed.
"""

from dmbm import BenchmarkConfig, ModulationConfig
from dmbm.montecarlo import StoppingRule, run_ber

systems = {
    "DMBM": ModulationConfig(M=4, m_rf=3, n_R=4),
    "MBM": BenchmarkConfig("MBM", M=4, n_R=4, m_rf=8),
    "QSM": BenchmarkConfig("QSM", M=16, n_R=4, n_T=8),
    "SM": BenchmarkConfig("SM", M=16, n_R=4, n_T=64),
}
rule = StoppingRule(min_bit_errors=100, max_trials=20_000, block_size=1000)
snrs = [4, 8, 12]

print("snr " + "".join(f"{k:>12}" for k in systems))
curves = {k: run_ber(cfg, snrs, rule, seed=8) for k, cfg in systems.items()}
for i, snr in enumerate(snrs):
    print(f"{snr:3d} " + "".join(f"{curves[k].points[i].ber:12.3e}" for k in systems))
assert {cfg.eta for cfg in systems.values()} == {10}
