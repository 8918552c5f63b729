import itertools
import math

import numpy as np
import pytest

from dmbm.channel import complex_normal
from dmbm.codebook import OpCounter
from dmbm.constellation import build_qam, int_to_bits
from dmbm.core import (ModulationConfig, codeword_distinct, encode, enumerate_codewords, ml_detect,
                       split_bits)
from dmbm.errors import ConfigurationError, ResourceCapError
from dmbm.montecarlo import StoppingRule, simulate_point

WORKED_BITS = [1, 0, 0, 1, 0, 0, 1, 1]


def brute_force_ml(y, H, M, m_rf, phi):
    """Nested loops over (s1, s2, k1, k2) in bit-layout order; first minimum wins."""
    pts = build_qam(M).points
    R = 1 << m_rf
    best, best_idx = math.inf, -1
    idx = 0
    for s1 in range(M):
        for s2 in range(M):
            for k1 in range(R):
                for k2 in range(R):
                    guess = H[:, k1] * pts[s1] + H[:, k2] * pts[s2] * np.exp(1j * phi)
                    m = float(np.sum(np.abs(y - guess) ** 2))
                    if m < best:
                        best, best_idx = m, idx
                    idx += 1
    return best_idx, best


def test_config_derived_quantities():
    cfg = ModulationConfig(M=4, m_rf=3, n_R=2)
    assert (cfg.R, cfg.m_s, cfg.eta) == (8, 2, 10)
    assert cfg.phi == pytest.approx(math.radians(45))


@pytest.mark.parametrize("kw", [dict(M=3, m_rf=2), dict(M=4, m_rf=0), dict(M=4, m_rf=2, n_R=0)])
def test_config_rejects_invalid(kw):
    with pytest.raises(ConfigurationError):
        ModulationConfig(**kw)


def test_split_bits_worked_example():
    b1, b2 = split_bits(WORKED_BITS, ModulationConfig(4, 2))
    assert b1.tolist() == [1, 0, 0, 1]
    assert b2.tolist() == [0, 0, 1, 1]


def test_split_bits_zero_and_concat():
    cfg = ModulationConfig(8, 3)
    b1, b2 = split_bits(np.zeros(cfg.eta, int), cfg)
    assert not b1.any() and not b2.any()
    rng = np.random.default_rng(3)
    b = rng.integers(0, 2, cfg.eta)
    np.testing.assert_array_equal(np.concatenate(split_bits(b, cfg)), b)


def test_split_bits_wrong_length():
    with pytest.raises(ValueError):
        split_bits([1, 0, 1], ModulationConfig(4, 2))


def test_encode_worked_example_unnormalized():
    cfg = ModulationConfig(4, 2, normalize=False)
    cw = encode(WORKED_BITS, cfg)
    assert (cw.k1, cw.k2) == (1, 4)
    assert cw.s1 == 1 + 1j and cw.s2 == -1 - 1j
    np.testing.assert_allclose(cw.dense, [1 + 1j, 0, 0, -math.sqrt(2) * 1j], atol=1e-12)
    np.testing.assert_allclose(cw.dense[3], -1.41j, atol=5e-3)


def test_encode_all_zero_index_bits():
    cw = encode([1, 1, 0, 1, 0, 0, 0, 0], ModulationConfig(4, 2))
    assert cw.k1 == cw.k2 == 1
    assert np.count_nonzero(cw.dense) == 1


def test_collision_superposes():
    cfg = ModulationConfig(2, 1)
    cw = encode([1, 1, 0, 0], cfg)
    assert cw.dense[0] == pytest.approx(cw.s1 + cw.s2 * 1j)


def test_enumerate_small():
    cws = enumerate_codewords(ModulationConfig(2, 1))
    assert len(cws) == 16
    assert not cws[0].bits.any()


def test_enumerate_worked_example_position():
    cfg = ModulationConfig(4, 2)
    cw = enumerate_codewords(cfg)[147]
    assert cw.bits.tolist() == WORKED_BITS
    np.testing.assert_allclose(cw.dense, encode(WORKED_BITS, cfg).dense)


def test_enumerate_cap():
    with pytest.raises(ResourceCapError):
        enumerate_codewords(ModulationConfig(16, 2), cap=10)


def test_codebook_matches_encoder():
    cfg = ModulationConfig(8, 2)
    dense = cfg.codebook().dense()
    for i, cw in enumerate(enumerate_codewords(cfg)):
        np.testing.assert_allclose(dense[i], cw.dense, atol=1e-15)


# exhaustive distinctness oracle: pairwise comparison of all dense vectors
@pytest.mark.parametrize("M,m_rf", [(2, 1), (2, 2), (2, 3), (2, 4), (4, 1), (4, 2), (4, 3),
                                    (8, 1), (8, 2), (16, 1), (16, 2)])
def test_all_codewords_distinct(M, m_rf):
    cfg = ModulationConfig(M, m_rf)
    assert cfg.eta <= 12
    d = cfg.codebook().dense()
    diff = d[:, None, :] - d[None, :, :]
    dist = np.sum(np.abs(diff) ** 2, axis=-1)
    np.fill_diagonal(dist, np.inf)
    assert dist.min() > 1e-6
    assert codeword_distinct(cfg)


def test_zero_angle_collides():
    assert not codeword_distinct(ModulationConfig(2, 1, phi=0.0))


@pytest.mark.parametrize("M,m_rf", [(2, 1), (2, 2), (4, 2), (8, 1), (16, 1), (4, 4), (16, 2)])
def test_decode_encode_roundtrip_exhaustive(M, m_rf):
    cfg = ModulationConfig(M, m_rf, n_R=2)
    cb = cfg.codebook()
    rng = np.random.default_rng(M * 100 + m_rf)
    H = complex_normal(rng, (2, cfg.R))
    idx = np.arange(cb.size)
    Hb = np.broadcast_to(H, (cb.size, 2, cfg.R))
    y = cb.transmit(Hb, idx)
    np.testing.assert_array_equal(cb.detect(y, Hb), idx)


def test_ml_detect_noiseless_single():
    cfg = ModulationConfig(4, 2, n_R=3)
    rng = np.random.default_rng(11)
    H = complex_normal(rng, (3, 4))
    cw = encode(WORKED_BITS, cfg)
    res = ml_detect(H @ cw.dense, H, cfg)
    assert res.bits.tolist() == WORKED_BITS
    assert (res.k1, res.k2) == (1, 4)
    assert res.metric < 1e-20
    assert res.s1 == pytest.approx(cw.s1) and res.s2 == pytest.approx(cw.s2)


@pytest.mark.parametrize("M,m_rf,n_R", [(2, 2, 2), (4, 2, 2), (8, 1, 3), (4, 1, 1)])
def test_ml_detect_matches_brute_force(M, m_rf, n_R):
    cfg = ModulationConfig(M, m_rf, n_R)
    rng = np.random.default_rng(7 + M + m_rf)
    for _ in range(100):
        H = complex_normal(rng, (n_R, cfg.R))
        s = cfg.codebook().dense(rng.integers(0, 1 << cfg.eta))
        y = H @ s + complex_normal(rng, (n_R,), 0.5)
        res = ml_detect(y, H, cfg)
        idx, best = brute_force_ml(y, H, M, m_rf, cfg.phi)
        assert res.index == idx
        assert res.metric == pytest.approx(best, rel=1e-9)


def test_zero_received_picks_weakest_codeword():
    cfg = ModulationConfig(2, 2, n_R=2)
    rng = np.random.default_rng(5)
    H = complex_normal(rng, (2, 4))
    res = ml_detect(np.zeros(2), H, cfg)
    energies = np.sum(np.abs(cfg.codebook().dense() @ H.T) ** 2, axis=1)
    assert res.index == int(np.argmin(energies))


def test_metric_invariant_under_common_unitary():
    cfg = ModulationConfig(4, 2, n_R=3)
    rng = np.random.default_rng(9)
    Q, _ = np.linalg.qr(complex_normal(rng, (3, 3)))
    for _ in range(20):
        H = complex_normal(rng, (3, 4))
        y = complex_normal(rng, (3,))
        a = ml_detect(y, H, cfg)
        b = ml_detect(Q @ y, Q @ H, cfg)
        assert a.index == b.index
        assert abs(a.metric - b.metric) < 1e-9


def test_ml_detect_dimension_mismatch():
    cfg = ModulationConfig(4, 2, n_R=2)
    with pytest.raises(ValueError):
        ml_detect(np.zeros(3), np.zeros((2, 4)), cfg)
    with pytest.raises(ValueError):
        ml_detect(np.zeros(2), np.zeros((2, 5)), cfg)


@pytest.mark.parametrize("M,m_rf,n_R", [(2, 1, 1), (4, 2, 2), (8, 2, 3), (16, 1, 4)])
def test_detector_cost_counter(M, m_rf, n_R):
    cfg = ModulationConfig(M, m_rf, n_R)
    ops = OpCounter()
    rng = np.random.default_rng(0)
    ml_detect(complex_normal(rng, (n_R,)), complex_normal(rng, (n_R, cfg.R)), cfg, counter=ops)
    assert ops.metrics == 2 ** cfg.eta == M * M * cfg.R * cfg.R
    assert ops.antenna_terms == 2 ** cfg.eta * n_R
    # each metric costs 16 real multiplications per receive antenna
    assert 16 * ops.antenna_terms == 16 * M ** 2 * cfg.R ** 2 * n_R


def test_noiseless_monte_carlo_zero_errors():
    cfg = ModulationConfig(4, 2, n_R=2)
    pt = simulate_point(cfg, 0.0, StoppingRule(max_trials=10_000), seed=4, noiseless=True)
    assert pt.trials == 10_000
    assert pt.bit_errors == 0


def test_decoded_bits_layout():
    cfg = ModulationConfig(2, 2, n_R=4)
    rng = np.random.default_rng(1)
    H = complex_normal(rng, (4, 4))
    for b in itertools.islice(itertools.product([0, 1], repeat=6), 0, 64, 7):
        res = ml_detect(H @ encode(b, cfg).dense, H, cfg)
        assert res.bits.tolist() == list(b)
        assert int_to_bits(res.index, 6).tolist() == list(b)
