"""Closed-form and semi-analytic performance measures.

Pairwise error probabilities over i.i.d. Rayleigh fading with n_R
receive antennas, the union-bound average BER, ergodic capacity by Monte
Carlo over channel draws, and the receiver-complexity / spectral-efficiency
/ energy / throughput formulas used to compare DMBM against SM, QSM, MBM
and DSM.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import integrate, special

from .benchmarks import BenchmarkConfig
from .channel import complex_normal, substream
from .constellation import _log2_int
from .core import ModulationConfig
from .errors import ConfigurationError, ResourceCapError

ABER_CAP = 12
ALL_SYSTEMS = ("SM", "QSM", "MBM", "DSM", "DMBM")


def qfunc(x):
    return 0.5 * special.erfc(np.asarray(x) / math.sqrt(2.0))


def cpep(H, s, s_hat, N0: float) -> float:
    """P(s -> s_hat | H) = Q(sqrt(||H (s - s_hat)||^2 / (2 N0)))."""
    if not N0 > 0:
        raise ConfigurationError(f"N0 must be positive, got {N0}")
    d = np.asarray(H) @ (np.asarray(s) - np.asarray(s_hat))
    return float(qfunc(math.sqrt(float(np.vdot(d, d).real) / (2.0 * N0))))


def upep_numeric(delta2: float, N0: float, n_R: int) -> float:
    """Channel-averaged PEP from the MGF integral.

    ``delta2`` is ``||s - s_hat||^2``. Integrates
    (1/pi) * int_0^{pi/2} (sin^2 t / (sin^2 t + delta2/(4 N0)))^n_R dt.
    """
    g = delta2 / (4.0 * N0)

    def f(t):
        s2 = math.sin(t) ** 2
        return (s2 / (s2 + g)) ** n_R if s2 + g > 0 else 1.0

    val, _ = integrate.quad(f, 0.0, math.pi / 2, epsabs=1e-13, epsrel=1e-12, limit=200)
    return val / math.pi


def upep_closed(delta2, N0: float, n_R: int):
    """Closed form of :func:`upep_numeric`, vectorized over ``delta2``.

    P = 1/2 [1 - mu * sum_{k<n_R} C(2k, k) ((1 - mu^2)/4)^k],
    mu = sqrt(delta2 / (4 N0 + delta2)).
    """
    d = np.asarray(delta2, dtype=float)
    mu2 = d / (4.0 * N0 + d)
    mu = np.sqrt(mu2)
    x = (1.0 - mu2) / 4.0
    acc = np.zeros_like(mu)
    term = np.ones_like(mu)
    for k in range(n_R):
        acc = acc + special.comb(2 * k, k, exact=True) * term
        term = term * x
    out = np.clip(0.5 * (1.0 - mu * acc), 0.0, 0.5)
    return float(out) if out.ndim == 0 else out


def pair_tables(cfg, cap: int = ABER_CAP) -> tuple[np.ndarray, np.ndarray]:
    """Full ``(||s_i - s_j||^2, hamming(i, j))`` tables, 2**eta square."""
    if cfg.eta > cap:
        raise ResourceCapError(
            f"eta={cfg.eta} exceeds the pair-table cap {cap}; subsample codeword pairs instead")
    cb = cfg.codebook()
    S = cb.dense()
    n = cb.size
    idx = np.arange(n)
    d2 = np.empty((n, n))
    rows = max(1, (1 << 22) // (n * cb.n_cols))
    for lo in range(0, n, rows):
        diff = S[lo:lo + rows, None, :] - S[None, :, :]
        d2[lo:lo + rows] = np.sum(diff.real ** 2 + diff.imag ** 2, axis=-1)
    ham = np.bitwise_count(idx[:, None] ^ idx[None, :]).astype(np.int64)
    return d2, ham


@functools.lru_cache(maxsize=32)
def distance_spectrum(cfg, cap: int = ABER_CAP) -> tuple[np.ndarray, np.ndarray]:
    """Distinct squared distances and their summed Hamming weights.

    SNR-independent; the union bound only needs these. Distances are
    grouped after rounding to 1e-10.
    """
    d2, ham = pair_tables(cfg, cap)
    mask = ham > 0
    key = np.round(d2[mask], 10)
    values, inv = np.unique(key, return_inverse=True)
    weights = np.bincount(inv, weights=ham[mask], minlength=len(values))
    return values, weights


def theoretical_aber(cfg, N0: float, cap: int = ABER_CAP, clamp: bool = True) -> float:
    """Union bound (1/(eta 2^eta)) sum_i sum_j P(s_i -> s_j) e_ij.

    At low SNR the bound can exceed one; ``clamp`` caps it at 1.
    """
    if not N0 > 0:
        raise ConfigurationError(f"N0 must be positive, got {N0}")
    values, weights = distance_spectrum(cfg, cap)
    p = upep_closed(values, N0, cfg.n_R)
    total = math.fsum(np.atleast_1d(p) * weights)
    bound = total / (cfg.eta * (1 << cfg.eta))
    return min(1.0, bound) if clamp else bound


# -- capacity -------------------------------------------------------------

@dataclass(frozen=True)
class CapacityEstimate:
    mean: float
    stderr: float
    samples: int


def transmit_covariance(cfg, normalization: str = "AR") -> np.ndarray:
    """Diagonal weight of each channel column in the log-det capacity.

    For two-active-column schemes (DMBM, DSM) this is
    sum_{w1, w2} X X^H / (A * norm) with A = 2 active columns and
    norm = R ("AR") or R**2 ("AR2"); single-column schemes use A = 1 and
    average over their R (or n_T) patterns. QSM splits each symbol's
    energy over two equiprobable columns, which averages to I/n_T.
    """
    n = cfg.n_cols
    if normalization not in ("AR", "AR2"):
        raise ConfigurationError(f"unknown capacity normalization {normalization!r}")
    if cfg.system in ("DMBM", "DSM"):
        # diag(X X^H) for X = [e_w1, e_w2] adds one to columns w1 and w2
        acc = np.zeros(n)
        for w1 in range(n):
            for w2 in range(n):
                acc[w1] += 1.0
                acc[w2] += 1.0
        norm = 2 * (n if normalization == "AR" else n * n)
        return acc / norm
    return np.full(n, 1.0 / n)


def channel_samples(n_R: int, n_cols: int, samples: int, seed: int) -> np.ndarray:
    """Common channel draws; systems with fewer columns use a prefix."""
    return complex_normal(substream(seed, 0xCA9), (samples, n_R, n_cols))


def capacity_mc(cfg, N0: float, n_channel_samples: int = 2000, seed: int = 0,
                normalization: str = "AR", H: np.ndarray | None = None) -> CapacityEstimate:
    """E_H log2 det(I + H diag(p) H^H / N0), with p from :func:`transmit_covariance`."""
    if n_channel_samples < 1:
        raise ValueError("need at least one channel sample")
    if H is None:
        H = channel_samples(cfg.n_R, cfg.n_cols, n_channel_samples, seed)
    H = H[:n_channel_samples, :cfg.n_R, :cfg.n_cols]
    p = transmit_covariance(cfg, normalization)
    G = np.einsum("snk,k,smk->snm", H, p, H.conj()) / N0
    G += np.eye(cfg.n_R)
    sign, logdet = np.linalg.slogdet(G)
    c = logdet.real / math.log(2.0)
    se = float(np.std(c, ddof=1) / math.sqrt(len(c))) if len(c) > 1 else 0.0
    return CapacityEstimate(math.fsum(c) / len(c), se, len(c))


def capacity_curve(cfgs, snr_grid, n_channel_samples: int = 2000, seed: int = 0,
                   normalization: str = "AR") -> list[list[CapacityEstimate]]:
    """Capacity of several systems over an SNR grid on one shared channel set.

    Returns one list of estimates per config, aligned with ``snr_grid``.
    """
    n_R = max(c.n_R for c in cfgs)
    cols = max(c.n_cols for c in cfgs)
    H = channel_samples(n_R, cols, n_channel_samples, seed)
    return [
        [capacity_mc(cfg, 10.0 ** (-snr / 10.0), n_channel_samples,
                     normalization=normalization, H=H) for snr in snr_grid]
        for cfg in cfgs
    ]


# -- formula tables -------------------------------------------------------

def _ratio(num, den) -> Fraction:
    if den == 0:
        raise ConfigurationError("formula denominator is zero for these parameters")
    return Fraction(num, den)


def complexity(system: str, M: int, n_T: int | None = None, m_rf: int | None = None,
               n_R: int = 1) -> float:
    """Real multiplications of the ML receiver at the DMBM spectral efficiency."""
    m_s = _log2_int(M)
    if system == "DMBM":
        R = 1 << m_rf
        return float(16 * M * M * R * R * n_R)
    if system == "MBM":
        R = 1 << m_rf
        return float(16 * M * R * n_R)
    m_sm = _log2_int(n_T, "n_T")
    if system == "SM":
        v = 8 * M * n_T * n_R * (1 + _ratio(m_s + 2 * m_rf - m_sm, m_s + m_sm))
    elif system == "QSM":
        v = 8 * M * n_T * n_R * (1 + _ratio(m_s + 2 * (m_rf - m_sm), m_s + 2 * m_sm))
    elif system == "DSM":
        v = 16 * M * M * n_T * n_T * n_R * (1 + _ratio(2 * (m_rf - m_sm), 2 * (m_s + m_sm)))
    else:
        raise ConfigurationError(f"unknown system {system!r}")
    return float(v)


def spectral_efficiency(system: str, M: int, n_T: int | None = None, m_rf: int | None = None) -> int:
    """Bits per channel use."""
    m_s = _log2_int(M)
    if system == "DMBM":
        return 2 * m_rf + 2 * m_s
    if system == "MBM":
        return m_rf + m_s
    m_sm = _log2_int(n_T, "n_T")
    if system == "SM":
        return m_sm + m_s
    if system == "QSM":
        return 2 * m_sm + m_s
    if system == "DSM":
        return 2 * m_sm + 2 * m_s
    raise ConfigurationError(f"unknown system {system!r}")


def energy_saving(eta_c: float, eta: float) -> float:
    """Percent of bit energy saved relative to a scheme carrying ``eta_c`` bits."""
    if not 0 < eta_c <= eta:
        raise ValueError(f"need 0 < eta_c <= eta, got eta_c={eta_c}, eta={eta}")
    return 100.0 * (1.0 - eta_c / eta)


def throughput(aber: float, eta: float, tau_s: float = 1.0) -> float:
    """Correctly delivered bits per second for symbol duration ``tau_s``."""
    if not 0.0 <= aber <= 1.0:
        raise ValueError(f"aber must lie in [0, 1], got {aber}")
    if not tau_s > 0:
        raise ValueError("tau_s must be positive")
    return (1.0 - aber) / tau_s * eta


def config_for(system: str, M: int, n_R: int, n_T: int | None = None, m_rf: int | None = None,
               phi: float | None = None):
    """Build the config object for any of the five systems."""
    if system == "DMBM":
        if m_rf is None:
            raise ConfigurationError("DMBM needs m_rf")
        return ModulationConfig(M, m_rf, n_R, phi)
    return BenchmarkConfig(system, M, n_R, n_T, m_rf, phi)
