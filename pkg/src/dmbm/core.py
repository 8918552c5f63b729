"""Double media-based modulation: bit splitting, encoding and ML detection.

Source bits ``b`` of length ``eta = 2(m_s + m_rf)`` are laid out as
``[sym1 | sym2 | k1 | k2]``. The first symbol rides on mirror activation
pattern (MAP) ``k1``, the second, rotated by ``phi``, on MAP ``k2``;
``k1 == k2`` superposes both on one column. MAP indices are 1-based in the
public types (``k = 1 + MSB-first value``).

Energy convention: each symbol has unit average energy, so a DMBM channel
use carries ``E{||s||^2} = 2`` while SNR is quoted per symbol (Es = 1).
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

from .codebook import Codebook, OpCounter, product_codebook
from .constellation import (Constellation, _log2_int, bits_to_int, build_qam, int_to_bits,
                            normalize_angle, optimum_angle)
from .errors import ConfigurationError, ResourceCapError

ENUMERATION_CAP = 20


@dataclass(frozen=True)
class ModulationConfig:
    """DMBM parameters. ``phi`` (radians) defaults to the tabulated optimum."""

    M: int
    m_rf: int
    n_R: int = 1
    phi: float | None = None
    normalize: bool = True
    system: str = field(default="DMBM", init=False)

    def __post_init__(self):
        _log2_int(self.M)
        if self.m_rf < 1:
            raise ConfigurationError(f"m_rf must be >= 1, got {self.m_rf}")
        if self.n_R < 1:
            raise ConfigurationError(f"n_R must be >= 1, got {self.n_R}")
        phi = optimum_angle(self.M) if self.phi is None else normalize_angle(self.phi)
        object.__setattr__(self, "phi", phi)

    @property
    def R(self) -> int:
        return 1 << self.m_rf

    @property
    def m_s(self) -> int:
        return _log2_int(self.M)

    @property
    def eta(self) -> int:
        return 2 * (self.m_s + self.m_rf)

    @property
    def n_cols(self) -> int:
        return self.R

    @property
    def constellation(self) -> Constellation:
        return build_qam(self.M, normalize=self.normalize)

    def with_angle(self, phi: float) -> "ModulationConfig":
        return ModulationConfig(self.M, self.m_rf, self.n_R, phi, self.normalize)

    def codebook(self) -> Codebook:
        return dmbm_codebook(self.M, self.m_rf, self.phi, self.normalize)


@dataclass(frozen=True)
class Codeword:
    k1: int
    k2: int
    s1: complex
    s2: complex
    bits: np.ndarray
    phi: float
    R: int

    @property
    def dense(self) -> np.ndarray:
        s = np.zeros(self.R, dtype=complex)
        s[self.k1 - 1] += self.s1
        s[self.k2 - 1] += self.s2 * np.exp(1j * self.phi)
        return s


@dataclass(frozen=True)
class DetectionResult:
    k1: int
    k2: int
    s1: complex
    s2: complex
    bits: np.ndarray
    metric: float
    index: int


@functools.lru_cache(maxsize=64)
def dmbm_codebook(M: int, m_rf: int, phi: float, normalize: bool = True) -> Codebook:
    """Shared read-only codebook; index ``c`` carries the bits of value ``c``."""
    pts = build_qam(M, normalize=normalize).points
    return product_codebook(1 << m_rf, pts, pts * np.exp(1j * phi))


def _check_bits(b, eta: int) -> np.ndarray:
    b = np.asarray(b)
    if b.shape != (eta,):
        raise ValueError(f"expected {eta} bits, got shape {b.shape}")
    if np.any((b != 0) & (b != 1)):
        raise ValueError("bits must be 0/1")
    return b.astype(np.uint8)


def split_bits(b, cfg: ModulationConfig) -> tuple[np.ndarray, np.ndarray]:
    """``(b1, b2)``: symbol bits (2 m_s) and MAP-index bits (2 m_rf)."""
    b = _check_bits(b, cfg.eta)
    n = 2 * cfg.m_s
    return b[:n].copy(), b[n:].copy()


def encode(b, cfg: ModulationConfig) -> Codeword:
    b1, b2 = split_bits(b, cfg)
    c = cfg.constellation
    m_s, m_rf = cfg.m_s, cfg.m_rf
    s1 = complex(c.points[int(bits_to_int(b1[:m_s]))]) if m_s else complex(c.points[0])
    s2 = complex(c.points[int(bits_to_int(b1[m_s:]))]) if m_s else complex(c.points[0])
    k1 = 1 + int(bits_to_int(b2[:m_rf]))
    k2 = 1 + int(bits_to_int(b2[m_rf:]))
    return Codeword(k1, k2, s1, s2, np.concatenate([b1, b2]), cfg.phi, cfg.R)


def decode_index(index: int, cfg: ModulationConfig) -> Codeword:
    return encode(int_to_bits(index, cfg.eta), cfg)


def enumerate_codewords(cfg: ModulationConfig, cap: int = ENUMERATION_CAP) -> list[Codeword]:
    """All ``2**eta`` codewords; list position equals the bit-string value."""
    if cfg.eta > cap:
        raise ResourceCapError(f"eta={cfg.eta} exceeds enumeration cap {cap}")
    bits = int_to_bits(np.arange(1 << cfg.eta), cfg.eta)
    return [encode(row, cfg) for row in bits]


def ml_detect(y, H, cfg: ModulationConfig, counter: OpCounter | None = None) -> DetectionResult:
    """Exhaustive search over (s1, s2, k1, k2) minimizing ``||y - H s||^2``."""
    y = np.asarray(y, dtype=complex)
    H = np.asarray(H, dtype=complex)
    if y.shape != (cfg.n_R,) or H.shape != (cfg.n_R, cfg.R):
        raise ValueError(f"expected y ({cfg.n_R},) and H ({cfg.n_R}, {cfg.R}); "
                         f"got {y.shape} and {H.shape}")
    cb = cfg.codebook()
    idx = int(cb.detect(y[None], H[None], counter)[0])
    cw = decode_index(idx, cfg)
    metric = float(cb.metric(y, H, idx))
    return DetectionResult(cw.k1, cw.k2, cw.s1, cw.s2, cw.bits, max(metric, 0.0), idx)


def codeword_distinct(cfg: ModulationConfig) -> bool:
    """True when all dense transmission vectors differ."""
    d = cfg.codebook().dense()
    key = np.round(d, 9)
    return len(np.unique(key.view(np.float64).reshape(len(d), -1), axis=0)) == len(d)

