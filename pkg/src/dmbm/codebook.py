"""Product codebooks and exhaustive ML detection shared by every scheme.

Every scheme handled here is a product codebook: codeword ``c`` with bit
layout ``[sym1 | sym2 | k1 | k2]`` sends ``v1[sym1]`` on column ``k1`` plus
``v2[sym2]`` on column ``k2`` (the two add when ``k1 == k2``).
Single-symbol schemes drop ``sym2`` and ``k2``. Codeword ``c`` carries the
source bits whose MSB-first value is ``c``.

Detection works in the Gram domain. With ``G = H^H H`` and ``z = H^H y``,

    ||y - H s||^2 - ||y||^2 = A[sym1, k1] + B[sym2, k2]
                              + 2 Re(conj(v1[sym1]) v2[sym2] G[k1, k2])

where ``A[s, k] = |v1[s]|^2 G[k, k] - 2 Re(conj(z[k]) v1[s])`` and likewise
``B``. The receive dimension only enters ``G`` and ``z``; the search itself
is a handful of real broadcasts laid out directly in codebook order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .constellation import int_to_bits

# real elements per detection chunk (bounds peak memory)
_CHUNK_ELEMENTS = 1 << 21


@dataclass
class OpCounter:
    """Counts ML metric evaluations, each spanning all receive antennas."""

    metrics: int = 0
    antenna_terms: int = 0

    def add(self, n_codewords: int, n_R: int, n_trials: int = 1):
        self.metrics += n_codewords * n_trials
        self.antenna_terms += n_codewords * n_R * n_trials


@dataclass(frozen=True)
class Codebook:
    n_cols: int
    v1: np.ndarray
    v2: np.ndarray | None = None
    eta: int = field(init=False)
    _shape: tuple = field(init=False, repr=False)

    def __post_init__(self):
        n = self.n_cols
        if n < 1 or n & (n - 1):
            raise ValueError("n_cols must be a power of two")
        n1 = len(self.v1)
        shape = (n1, n) if self.v2 is None else (n1, len(self.v2), n, n)
        size = int(np.prod(shape))
        if size & (size - 1):
            raise ValueError("alphabet sizes must be powers of two")
        object.__setattr__(self, "_shape", shape)
        object.__setattr__(self, "eta", size.bit_length() - 1)
        for arr in (self.v1, self.v2):
            if arr is not None:
                arr.setflags(write=False)

    @property
    def size(self) -> int:
        return 1 << self.eta

    @property
    def two_part(self) -> bool:
        return self.v2 is not None

    def split(self, index):
        """``(s1, k1, s2, k2)`` index arrays; s2/k2 are None for single-part."""
        sub = np.unravel_index(np.asarray(index), self._shape)
        if self.two_part:
            s1, s2, k1, k2 = sub
            return s1, k1, s2, k2
        return sub[0], sub[1], None, None

    def bits(self, index=None) -> np.ndarray:
        if index is None:
            index = np.arange(self.size)
        return int_to_bits(index, self.eta)

    def dense(self, index=None) -> np.ndarray:
        """Transmission vectors, shape ``index.shape + (n_cols,)``."""
        if index is None:
            index = np.arange(self.size)
        index = np.asarray(index)
        s1, k1, s2, k2 = self.split(index)
        eye = np.eye(self.n_cols)
        out = eye[k1] * self.v1[s1][..., None]
        if self.two_part:
            out = out + eye[k2] * self.v2[s2][..., None]
        return out

    def transmit(self, H: np.ndarray, index: np.ndarray) -> np.ndarray:
        """Noiseless ``H @ s`` for a batch: H (B, n_R, n_cols), index (B,)."""
        s1, k1, s2, k2 = self.split(index)
        rows = np.arange(H.shape[0])
        y = H[rows, :, k1] * self.v1[s1][:, None]
        if self.two_part:
            y = y + H[rows, :, k2] * self.v2[s2][:, None]
        return y

    def detect(self, Y: np.ndarray, H: np.ndarray, counter: OpCounter | None = None) -> np.ndarray:
        """Exhaustive ML codeword indices for a batch.

        Y is (B, n_R), H is (B, n_R, n_cols). Ties resolve to the lowest
        codeword index.
        """
        Y = np.asarray(Y, dtype=complex)
        H = np.asarray(H, dtype=complex)
        if Y.ndim != 2 or H.ndim != 3 or H.shape[:2] != Y.shape or H.shape[2] != self.n_cols:
            raise ValueError(
                f"shape mismatch: y {Y.shape}, H {H.shape}, codebook needs {self.n_cols} columns"
            )
        B, n_R = Y.shape
        if counter is not None:
            counter.add(self.size, n_R, B)
        step = max(1, _CHUNK_ELEMENTS // self.size)
        out = np.empty(B, dtype=np.int64)
        for lo in range(0, B, step):
            out[lo:lo + step] = self._detect_chunk(Y[lo:lo + step], H[lo:lo + step])
        return out

    def _detect_chunk(self, Y, H):
        Hh = H.conj().transpose(0, 2, 1)
        z = np.matmul(Hh, Y[:, :, None])[:, :, 0]  # (B, n)
        gd = np.sum(H.real ** 2 + H.imag ** 2, axis=1)  # column energies
        A = _atom_metric(self.v1, z, gd)  # (B, n1, n)
        if not self.two_part:
            return np.argmin(A.reshape(len(Y), -1), axis=1)
        G = np.matmul(Hh, H)  # (B, n, n)
        Bp = _atom_metric(self.v2, z, gd)  # (B, n2, n)
        w = np.conj(self.v1)[:, None] * self.v2[None, :]  # (n1, n2)
        metric = w.real[None, :, :, None, None] * G.real[:, None, None, :, :]
        metric -= w.imag[None, :, :, None, None] * G.imag[:, None, None, :, :]
        metric *= 2.0
        metric += A[:, :, None, :, None]
        metric += Bp[:, None, :, None, :]
        return np.argmin(metric.reshape(len(Y), -1), axis=1)

    def metric(self, y: np.ndarray, H: np.ndarray, index) -> np.ndarray:
        """Direct ``||y - H s||^2`` for one received vector and given codewords."""
        r = y - self.dense(np.asarray(index)) @ H.T
        return np.sum(r.real ** 2 + r.imag ** 2, axis=-1)


def _atom_metric(v, z, gd):
    # |v|^2 ||h_k||^2 - 2 Re(conj(z_k) v)
    p = (v.real ** 2 + v.imag ** 2)[None, :, None] * gd[:, None, :]
    p -= 2.0 * (z.real[:, None, :] * v.real[None, :, None] + z.imag[:, None, :] * v.imag[None, :, None])
    return p


def product_codebook(n_cols: int, first_vals, second_vals=None) -> Codebook:
    v1 = np.array(first_vals, dtype=complex)
    v2 = None if second_vals is None else np.array(second_vals, dtype=complex)
    return Codebook(n_cols, v1, v2)
