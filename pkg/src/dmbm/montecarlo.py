"""Seeded BER simulation over SNR grids and rotation-angle sweeps.

Trials are grouped in fixed-size blocks. Block ``b`` draws its bits,
channels and noise from substreams keyed by ``(b, stream)`` under the
master seed, independently of the SNR point, the rotation angle and the
worker that runs it. That gives common random numbers across SNR points,
angles and systems of equal ``eta`` and ``n_R``, and makes results
independent of the thread count: blocks are reduced in index order and
the stopping rule is evaluated on that ordered prefix.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channel import BITS, CHANNEL, NOISE, complex_normal, snr_to_n0, substream

Z95 = 1.959963984540054


@dataclass(frozen=True)
class StoppingRule:
    min_bit_errors: int = 200
    max_trials: int = 10_000_000
    ber_floor: float | None = None
    block_size: int = 2000

    def __post_init__(self):
        if self.min_bit_errors < 1:
            raise ValueError("min_bit_errors must be >= 1")
        if self.max_trials < 1 or self.block_size < 1:
            raise ValueError("max_trials and block_size must be >= 1")


@dataclass(frozen=True)
class BerPoint:
    snr_db: float
    trials: int
    bit_errors: int
    eta: int
    completed: bool

    @property
    def ber(self) -> float:
        return self.bit_errors / (self.trials * self.eta)

    @property
    def ci95(self) -> float:
        p = self.ber
        return Z95 * math.sqrt(p * (1.0 - p) / (self.trials * self.eta))


@dataclass
class BerCurve:
    system: str
    eta: int
    points: list[BerPoint] = field(default_factory=list)

    @property
    def snr_db(self) -> np.ndarray:
        return np.array([p.snr_db for p in self.points])

    @property
    def ber(self) -> np.ndarray:
        return np.array([p.ber for p in self.points])

    def snr_at(self, target: float) -> float:
        """SNR where the curve crosses ``target`` (log-linear interpolation).

        Only completed points count. NaN if the target is not bracketed.
        """
        pts = [p for p in self.points if p.completed and p.bit_errors > 0]
        for a, b in zip(pts, pts[1:]):
            if a.ber >= target >= b.ber and a.ber > b.ber:
                t = (math.log10(a.ber) - math.log10(target)) / (math.log10(a.ber) - math.log10(b.ber))
                return a.snr_db + t * (b.snr_db - a.snr_db)
        return math.nan


def _run_block(cfg, block: int, seed: int, N0: float | None, size: int):
    cb = cfg.codebook()
    idx = substream(seed, block, BITS).integers(0, cb.size, size=size)
    H = complex_normal(substream(seed, block, CHANNEL), (size, cfg.n_R, cfg.n_cols))
    y = cb.transmit(H, idx)
    if N0 is not None:
        y = y + math.sqrt(N0) * complex_normal(substream(seed, block, NOISE), (size, cfg.n_R))
    est = cb.detect(y, H)
    return int(np.bitwise_count(idx ^ est).sum())


def simulate_point(cfg, snr_db: float, rule: StoppingRule = StoppingRule(), seed: int = 0,
                   threads: int = 1, noiseless: bool = False, pool=None) -> BerPoint:
    """Run blocks until ``rule`` is met; ``noiseless`` skips the AWGN (N0 = 0)."""
    N0 = None if noiseless else snr_to_n0(snr_db)
    eta = cfg.eta
    trials = errors = 0
    block = 0
    completed = stop = False
    wave = max(1, threads)
    while not stop and trials < rule.max_trials:
        sizes = []
        t = trials
        while len(sizes) < wave and t < rule.max_trials:
            sizes.append(min(rule.block_size, rule.max_trials - t))
            t += sizes[-1]
        if pool is not None and len(sizes) > 1:
            futs = [pool.submit(_run_block, cfg, block + i, seed, N0, n) for i, n in enumerate(sizes)]
            results = [f.result() for f in futs]
        else:
            results = [_run_block(cfg, block + i, seed, N0, n) for i, n in enumerate(sizes)]
        # ordered reduction; later speculative blocks are discarded
        for n, e in zip(sizes, results):
            trials += n
            errors += e
            block += 1
            if errors >= rule.min_bit_errors:
                completed = stop = True
                break
            if rule.ber_floor is not None and trials * eta * rule.ber_floor >= rule.min_bit_errors:
                stop = True
                break
    if noiseless:
        completed = True
    return BerPoint(float(snr_db), trials, errors, eta, completed)


def _report(progress, **fields):
    if progress is not None:
        progress.write(json.dumps(fields) + "\n")
        progress.flush()


def run_ber(cfg, snr_grid, rule: StoppingRule = StoppingRule(), seed: int = 0,
            threads: int = 1, noiseless: bool = False, progress=None) -> BerCurve:
    """BER curve of one system. ``progress`` receives one JSON line per point."""
    curve = BerCurve(cfg.system, cfg.eta)
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        for i, snr in enumerate(snr_grid):
            pt = simulate_point(cfg, snr, rule, seed, threads, noiseless, pool)
            curve.points.append(pt)
            _report(progress, point=i, snr_db=pt.snr_db, trials=pt.trials,
                    errors=pt.bit_errors, completed=pt.completed)
    return curve


@dataclass
class AngleSweep:
    snr_db: float
    angles_deg: np.ndarray
    points: list[BerPoint]

    @property
    def ber(self) -> np.ndarray:
        return np.array([p.ber for p in self.points])

    @property
    def best_angle_deg(self) -> float:
        """Raw grid argmin."""
        return float(self.angles_deg[int(np.argmin(self.ber))])

    def optimum_deg(self, M: int, window: int = 2) -> float:
        """Argmin estimate that pools symmetric angles and smooths the bottom.

        Uses the exact symmetries of the BER-vs-angle curve (see
        :func:`angle_images`): estimates at equivalent angles are averaged,
        then a quadratic in log10(BER) is fitted over ``window`` grid steps
        either side of the pooled discrete minimum. Returns the vertex (or
        the discrete minimum if the fit is not convex) folded into the
        canonical range.
        """
        return estimate_optimum(self.angles_deg, self.ber, M, window)


def angle_images(angle_deg: float, M: int) -> list[float]:
    """Angles whose BER equals that at ``angle_deg`` for Gray M-QAM.

    Negating or conjugating a rectangular Gray alphabet only XORs the labels
    with a fixed mask, so BER(t) = BER(-t) = BER(t + 180). A square alphabet
    is also closed under a quarter turn, adding BER(t) = BER(90 - t).
    """
    period = 90.0 if _square(M) else 180.0
    out = set()
    for base in (angle_deg, -angle_deg):
        for k in range(-3, 4):
            out.add(round(base + k * period, 9))
    return sorted(out)


def canonical_angle(angle_deg: float, M: int) -> float:
    """Representative in [0, 90] (rectangular) or [45, 90] (square)."""
    period = 90.0 if _square(M) else 180.0
    a = angle_deg % period
    if a > period / 2:
        a = period - a
    if _square(M):
        a = 90.0 - a
    return float(a)


def _square(M: int) -> bool:
    return M >= 4 and (M.bit_length() - 1) % 2 == 0


def estimate_optimum(angles_deg, ber, M: int, window: int = 2) -> float:
    angles = np.asarray(angles_deg, dtype=float)
    ber = np.asarray(ber, dtype=float)
    step = float(np.min(np.diff(np.unique(angles)))) if len(angles) > 1 else 1.0
    pooled: dict[float, list[float]] = {}
    for a, b in zip(angles, ber):
        for img in angle_images(a, M):
            pooled.setdefault(img, []).append(b)
    xs = np.array(sorted(pooled))
    ys = np.array([np.mean(pooled[x]) for x in xs])
    ok = ys > 0
    if not np.any(ok):
        return canonical_angle(float(angles[0]), M)
    xs, ys = xs[ok], np.log10(ys[ok])
    i = int(np.argmin(ys))
    x0 = xs[i]
    near = np.abs(xs - x0) <= window * step + 1e-9
    best = x0
    if np.count_nonzero(near) >= 3:
        c2, c1, _ = np.polyfit(xs[near] - x0, ys[near], 2)
        if c2 > 0:
            v = -c1 / (2 * c2)
            if abs(v) <= window * step:
                best = x0 + v
    return canonical_angle(best, M)


def run_angle_sweep(cfg, snr_db: float, angle_grid_deg, rule: StoppingRule = StoppingRule(),
                    seed: int = 0, threads: int = 1, progress=None) -> AngleSweep:
    """BER versus rotation angle of the second symbol, common random numbers."""
    angles = np.asarray(angle_grid_deg, dtype=float)
    pts = []
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        for i, a in enumerate(angles):
            pt = simulate_point(cfg.with_angle(math.radians(a)), snr_db, rule, seed, threads, pool=pool)
            pts.append(pt)
            _report(progress, point=i, angle_deg=float(a), trials=pt.trials,
                    errors=pt.bit_errors, completed=pt.completed)
    return AngleSweep(float(snr_db), angles, pts)

