"""Gray-mapped rectangular M-QAM alphabets and symbol rotation.

Points are indexed by their label value (MSB first). In-phase bits come
first in each label; the in-phase axis runs left to right and the
quadrature axis top to bottom, so for 4-QAM (unnormalized) the label
``10`` is ``1+1j`` and ``01`` is ``-1-1j``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError

# BER-optimal rotation of the second symbol, degrees
OPTIMUM_ANGLE_DEG = {2: 90.0, 4: 45.0, 8: 60.0, 16: 70.0}


def _log2_int(n: int, what: str = "M") -> int:
    if not isinstance(n, (int, np.integer)) or n < 1 or n & (n - 1):
        raise ConfigurationError(f"{what} must be a power of two, got {n!r}")
    return int(n).bit_length() - 1


def gray_to_binary(g: np.ndarray) -> np.ndarray:
    """Inverse Gray code, elementwise on non-negative integers."""
    b = np.array(g, dtype=np.int64, copy=True)
    shift = b >> 1
    while np.any(shift):
        b ^= shift
        shift >>= 1
    return b


def int_to_bits(values, width: int) -> np.ndarray:
    """MSB-first bit expansion, shape ``values.shape + (width,)``."""
    values = np.asarray(values, dtype=np.int64)
    shifts = np.arange(width - 1, -1, -1, dtype=np.int64)
    return ((values[..., None] >> shifts) & 1).astype(np.uint8)


def bits_to_int(bits) -> np.ndarray:
    """MSB-first integer value of the last axis of ``bits``."""
    bits = np.asarray(bits, dtype=np.int64)
    width = bits.shape[-1]
    weights = np.int64(1) << np.arange(width - 1, -1, -1, dtype=np.int64)
    return bits @ weights


@dataclass(frozen=True)
class Constellation:
    """Labeled QAM alphabet.

    ``points[v]`` is the symbol carrying the label whose MSB-first value is
    ``v``; ``labels[v]`` is that label as a bit row.
    """

    order: int
    points: np.ndarray = field(repr=False)
    bits_i: int = 0
    bits_q: int = 0
    scale: float = 1.0

    def __post_init__(self):
        self.points.setflags(write=False)

    @property
    def bits_per_symbol(self) -> int:
        return self.bits_i + self.bits_q

    @property
    def labels(self) -> np.ndarray:
        return int_to_bits(np.arange(self.order), self.bits_per_symbol)

    @property
    def average_energy(self) -> float:
        return float(np.mean(np.abs(self.points) ** 2))

    def map_bits(self, bits) -> complex:
        return map_bits(bits, self)

    def demap(self, symbol) -> np.ndarray:
        return demap(symbol, self)


def build_qam(M: int, normalize: bool = True) -> Constellation:
    """Rectangular Gray-coded M-QAM.

    M=2 is BPSK on the real axis; odd ``log2(M)`` gives a rectangle with one
    more in-phase bit than quadrature bits (M=8 is 4x2). ``M=1`` is the
    degenerate single-point alphabet ``{1}``. With ``normalize`` the average
    symbol energy is 1, otherwise points sit on the odd-integer grid.
    """
    m = _log2_int(M)
    bits_i = (m + 1) // 2
    bits_q = m // 2
    n_i, n_q = 1 << bits_i, 1 << bits_q

    v = np.arange(M)
    gi = v >> bits_q
    gq = v & (n_q - 1)
    level_i = 2 * gray_to_binary(gi) - (n_i - 1)
    level_q = (n_q - 1) - 2 * gray_to_binary(gq)
    points = level_i.astype(float) + 1j * level_q.astype(float)
    if M == 1:
        points = np.ones(1, dtype=complex)

    scale = 1.0
    if normalize:
        scale = 1.0 / math.sqrt(np.mean(np.abs(points) ** 2))
        points = points * scale
    return Constellation(order=M, points=points, bits_i=bits_i, bits_q=bits_q, scale=scale)


def map_bits(bits, c: Constellation) -> complex:
    """Symbol carrying label ``bits``."""
    bits = np.asarray(bits)
    if bits.shape != (c.bits_per_symbol,):
        raise ValueError(f"expected {c.bits_per_symbol} bits, got shape {bits.shape}")
    return complex(c.points[int(bits_to_int(bits))])


def demap(symbol, c: Constellation) -> np.ndarray:
    """Hard decision: label of the nearest constellation point."""
    d = np.abs(np.asarray(symbol)[..., None] - c.points) ** 2
    return int_to_bits(np.argmin(d, axis=-1), c.bits_per_symbol)


def rotate(s, phi: float):
    """``s * exp(j*phi)``, phi in radians."""
    return s * np.exp(1j * phi)


def normalize_angle(phi: float) -> float:
    """Wrap into [0, 2*pi)."""
    phi = math.fmod(phi, 2 * math.pi)
    if phi < 0:
        phi += 2 * math.pi
    return 0.0 if phi >= 2 * math.pi else phi


def optimum_angle(M: int, override: float | None = None) -> float:
    """Rotation angle in radians for the second symbol.

    Tabulated for M in {2, 4, 8, 16}; any other order needs ``override``
    (radians).
    """
    if override is not None:
        return normalize_angle(override)
    try:
        return math.radians(OPTIMUM_ANGLE_DEG[M])
    except KeyError:
        raise ConfigurationError(
            f"no tabulated rotation angle for M={M}; pass an explicit angle"
        ) from None
