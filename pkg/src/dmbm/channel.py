"""Rayleigh fading, AWGN and SNR bookkeeping.

Random streams are derived with ``numpy.random.SeedSequence`` spawn keys,
so a block of trials identified by ``(seed, block, stream)`` always sees
the same numbers whichever worker runs it.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ConfigurationError

# stream ids within a trial block
BITS, CHANNEL, NOISE = 0, 1, 2


def substream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for ``key`` under master ``seed``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def complex_normal(rng: np.random.Generator, shape, variance: float = 1.0) -> np.ndarray:
    """i.i.d. CN(0, variance) samples."""
    z = rng.standard_normal(tuple(shape) + (2,))
    return (z[..., 0] + 1j * z[..., 1]) * math.sqrt(variance / 2.0)


def draw_channel(cfg, rng: np.random.Generator, batch: int | None = None) -> np.ndarray:
    """``n_R x n_cols`` CN(0, 1) matrix, or a stack of ``batch`` of them."""
    shape = (cfg.n_R, cfg.n_cols) if batch is None else (batch, cfg.n_R, cfg.n_cols)
    return complex_normal(rng, shape)


def draw_noise(n_R: int, N0: float, rng: np.random.Generator, batch: int | None = None) -> np.ndarray:
    if not N0 > 0:
        raise ConfigurationError(f"N0 must be positive, got {N0}")
    shape = (n_R,) if batch is None else (batch, n_R)
    return complex_normal(rng, shape, N0)


def transmit(H: np.ndarray, s: np.ndarray, w: np.ndarray | None = None) -> np.ndarray:
    """``y = H s + w``."""
    H = np.asarray(H)
    s = np.asarray(s)
    if H.ndim != 2 or s.shape != (H.shape[1],):
        raise ValueError(f"H {H.shape} and s {s.shape} do not agree")
    y = H @ s
    if w is not None:
        w = np.asarray(w)
        if w.shape != y.shape:
            raise ValueError(f"noise shape {w.shape} != {y.shape}")
        y = y + w
    return y


def snr_to_n0(snr_db: float) -> float:
    """Noise density for SNR = Es/N0 in dB with Es = 1."""
    return 10.0 ** (-snr_db / 10.0)


def n0_to_snr(N0: float) -> float:
    return -10.0 * math.log10(N0)
