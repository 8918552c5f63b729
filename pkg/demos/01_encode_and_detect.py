"""
Encoding and ML detection
=========================

Eight source bits drive a DMBM transmitter with QPSK symbols and two RF
mirrors (four mirror activation patterns). The receiver searches all
2**eta codewords.
"""

import numpy as np

from dmbm import ModulationConfig, build_qam, encode, ml_detect, split_bits
from dmbm.channel import draw_channel, draw_noise, snr_to_n0, substream, transmit

# Gray QPSK, unnormalized so the points read as integers
print("QPSK points:", build_qam(4, normalize=False).points)

cfg = ModulationConfig(M=4, m_rf=2, n_R=2, normalize=False)
bits = [1, 0, 0, 1, 0, 0, 1, 1]
b1, b2 = split_bits(bits, cfg)
print("symbol bits", b1, "MAP bits", b2)

cw = encode(bits, cfg)
print(f"active MAPs k1={cw.k1}, k2={cw.k2}; symbols s1={cw.s1}, s2={cw.s2}")
print("transmission vector:", np.round(cw.dense, 3))

# %%
# Send it over one Rayleigh draw with a little noise and detect it again.
rng = substream(0, 0)
H = draw_channel(cfg, rng)
y = transmit(H, cw.dense, draw_noise(cfg.n_R, snr_to_n0(20), rng))
res = ml_detect(y, H, cfg)
print("decoded bits:", res.bits, "metric:", round(res.metric, 4))
assert res.bits.tolist() == bits
