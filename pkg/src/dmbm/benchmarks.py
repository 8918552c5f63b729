"""Reference index-modulation transceivers: SM, QSM, MBM and DSM.

Bit layouts (symbol bits always first, MSB-first index values):

* SM   ``[sym | antenna]``: one symbol on one of n_T antennas.
* QSM  ``[sym | antenna_I | antenna_Q]``: Re(s) on antenna_I and j*Im(s)
  on antenna_Q (which may coincide).
* MBM  ``[sym | MAP]``: one symbol on one of R = 2**m_rf MAPs.
* DSM  ``[sym1 | sym2 | antenna1 | antenna2]``: two symbols on two antennas,
  the second rotated by ``phi`` (same optimum-angle table as DMBM).

Every scheme uses unit average energy per constellation symbol.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .codebook import Codebook, OpCounter, product_codebook
from .constellation import _log2_int, build_qam, int_to_bits, normalize_angle, optimum_angle
from .errors import ConfigurationError

SYSTEMS = ("SM", "QSM", "MBM", "DSM")


@dataclass(frozen=True)
class BenchmarkConfig:
    system: str
    M: int
    n_R: int = 1
    n_T: int | None = None
    m_rf: int | None = None
    phi: float | None = None

    def __post_init__(self):
        if self.system not in SYSTEMS:
            raise ConfigurationError(f"unknown benchmark system {self.system!r}")
        _log2_int(self.M)
        if self.n_R < 1:
            raise ConfigurationError(f"n_R must be >= 1, got {self.n_R}")
        if self.system == "MBM":
            if self.m_rf is None or self.m_rf < 1:
                raise ConfigurationError("MBM needs m_rf >= 1")
        else:
            if self.n_T is None:
                raise ConfigurationError(f"{self.system} needs n_T")
            _log2_int(self.n_T, "n_T")
        if self.system == "QSM" and self.M < 4:
            raise ConfigurationError("QSM needs a complex alphabet (M >= 4)")
        if self.system == "DSM":
            phi = optimum_angle(self.M) if self.phi is None else normalize_angle(self.phi)
            object.__setattr__(self, "phi", phi)

    @property
    def m_s(self) -> int:
        return _log2_int(self.M)

    @property
    def m_sm(self) -> int:
        return 0 if self.n_T is None else _log2_int(self.n_T, "n_T")

    @property
    def n_cols(self) -> int:
        return (1 << self.m_rf) if self.system == "MBM" else self.n_T

    @property
    def eta(self) -> int:
        m_s, m_sm = self.m_s, self.m_sm
        if self.system == "MBM":
            return self.m_rf + m_s
        if self.system == "SM":
            return m_s + m_sm
        if self.system == "QSM":
            return m_s + 2 * m_sm
        return 2 * (m_s + m_sm)

    def codebook(self) -> Codebook:
        return bench_codebook(self.system, self.M, self.n_cols, self.phi)


@functools.lru_cache(maxsize=64)
def bench_codebook(system: str, M: int, n_cols: int, phi: float | None) -> Codebook:
    c = build_qam(M)
    if system in ("SM", "MBM"):
        return product_codebook(n_cols, c.points)
    if system == "DSM":
        return product_codebook(n_cols, c.points, c.points * np.exp(1j * phi))
    # QSM: in-phase bits pick Re(s), quadrature bits pick Im(s)
    re_levels = c.points[(np.arange(1 << c.bits_i) << c.bits_q)].real
    im_levels = c.points[np.arange(1 << c.bits_q)].imag
    return product_codebook(n_cols, re_levels, 1j * im_levels)


def encode_bench(b, bcfg: BenchmarkConfig) -> np.ndarray:
    """Dense transmission vector for source bits ``b``."""
    b = np.asarray(b)
    if b.shape != (bcfg.eta,):
        raise ValueError(f"expected {bcfg.eta} bits, got shape {b.shape}")
    index = int(b.astype(np.int64) @ (1 << np.arange(bcfg.eta - 1, -1, -1)))
    return bcfg.codebook().dense(index)


def ml_detect_bench(y, H, bcfg: BenchmarkConfig, counter: OpCounter | None = None) -> np.ndarray:
    """Exhaustive ML decision, returned as decoded source bits."""
    y = np.asarray(y, dtype=complex)
    H = np.asarray(H, dtype=complex)
    if y.shape != (bcfg.n_R,) or H.shape != (bcfg.n_R, bcfg.n_cols):
        raise ValueError(f"expected y ({bcfg.n_R},) and H ({bcfg.n_R}, {bcfg.n_cols}); "
                         f"got {y.shape} and {H.shape}")
    idx = bcfg.codebook().detect(y[None], H[None], counter)[0]
    return int_to_bits(idx, bcfg.eta)
