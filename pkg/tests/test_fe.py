import numpy as np
import pytest

from lwepuf import fe
from lwepuf.bch import rep_decode
from lwepuf.fe import (ECC_BER_1, ECC_BER_5, ECC_BER_10, ECC_BER_15, POK_BITS,
                       HELPER_BYTES, HelperData, PokArray, analytic_failure_rate,
                       concat_encode, fe_gen, fe_rec, majority_error_rate,
                       pok_new, pok_read)
from lwepuf.sampler import make_rng, sample_bits


def test_preset_geometry():
    assert ECC_BER_5.raw_bits == 6360 == POK_BITS
    assert ECC_BER_1.raw_bits == 2360
    assert ECC_BER_10.raw_bits == 11000
    assert ECC_BER_15.raw_bits == 17080
    for cfg in (ECC_BER_1, ECC_BER_5, ECC_BER_10, ECC_BER_15):
        assert cfg.key_bits == 1280


def test_pok_read_noise():
    rng = make_rng(401)
    pok = pok_new(rng, ber=0.0)
    assert np.array_equal(pok_read(pok, rng), pok.truth)
    pok = pok_new(rng, ber=0.05)
    dist = np.mean(pok_read(pok, rng) != pok.truth)
    assert abs(dist - 0.05) < 0.01
    # two reads differ from each other at ~2*ber*(1-ber)
    r1, r2 = pok_read(pok, rng), pok_read(pok, rng)
    assert abs(np.mean(r1 != r2) - 2 * 0.05 * 0.95) < 0.01


def test_pok_validation():
    rng = make_rng(402)
    with pytest.raises(ValueError):
        pok_new(rng, ber=0.6)
    with pytest.raises(ValueError):
        PokArray(truth=np.zeros(100, dtype=np.uint8))


def test_fe_round_trip_noiseless():
    rng = make_rng(403)
    pok = pok_new(rng)
    key, helper = fe_gen(pok, rng)
    got = fe_rec(pok.truth, helper)
    assert got is not None and np.array_equal(got.s, key.s)
    # deterministic given (read, helper)
    again = fe_rec(pok.truth, helper)
    assert np.array_equal(again.s, got.s)


def test_fe_reconstruction_under_noise():
    rng = make_rng(404)
    pok = pok_new(rng, ber=0.05)
    key, helper = fe_gen(pok, rng)
    for _ in range(200):
        got = fe_rec(pok_read(pok, rng), helper)
        assert got is not None and np.array_equal(got.s, key.s)


def test_mask_looks_uniform():
    rng = make_rng(405)
    pok = pok_new(rng)
    _, helper = fe_gen(pok, rng)
    assert abs(helper.mask.mean() - 0.5) < 0.01


def test_same_key_different_truths_different_masks():
    rng = make_rng(406)
    key_bits = sample_bits(1280, rng)
    enc = concat_encode(key_bits)
    t1, t2 = sample_bits(POK_BITS, rng), sample_bits(POK_BITS, rng)
    assert not np.array_equal(enc ^ t1, enc ^ t2)


def test_concat_round_trip_with_bounded_errors():
    # <= 1 flip per inner triple and <= 11 affected triples per outer block
    # must always recover the key exactly
    rng = make_rng(407)
    key_bits = sample_bits(1280, rng)
    enc = concat_encode(key_bits)
    truth = sample_bits(POK_BITS, rng)
    helper = HelperData(mask=enc ^ truth)
    for _ in range(20):
        errors = np.zeros(POK_BITS, dtype=np.uint8)
        for blk in range(10):
            for t in rng.choice(212, size=11, replace=False):
                errors[blk * 636 + int(t) * 3 + int(rng.integers(0, 3))] ^= 1
        got = fe_rec(truth ^ errors, helper)
        assert got is not None
        assert np.array_equal(got.w_bits, key_bits)


def test_fe_rec_failure_on_heavy_noise():
    rng = make_rng(408)
    pok = pok_new(rng, ber=0.05)
    key, helper = fe_gen(pok, rng)
    garbage = sample_bits(POK_BITS, rng)
    got = fe_rec(garbage, helper)
    assert got is None or not np.array_equal(got.s, key.s)


def test_helper_serialization():
    rng = make_rng(409)
    mask = sample_bits(POK_BITS, rng)
    helper = HelperData(mask=mask)
    raw = helper.to_bytes()
    assert len(raw) == HELPER_BYTES == 795
    assert HelperData.from_bytes(raw) == helper
    # LSB-first: mask bit 0 is the low bit of byte 0
    probe = np.zeros(POK_BITS, dtype=np.uint8)
    probe[0] = 1
    probe[9] = 1
    raw = HelperData(mask=probe).to_bytes()
    assert raw[0] == 0x01 and raw[1] == 0x02


def test_majority_error_rate_value():
    assert abs(majority_error_rate(0.05) - 0.00725) < 1e-12
    assert majority_error_rate(0.05, 1) == pytest.approx(0.05)


def test_analytic_failure_rate():
    assert analytic_failure_rate(0.0) == 0.0
    # frozen from the binomial tail: 6.94e-7 at the deployed 5% design
    rate = analytic_failure_rate(0.05)
    assert rate <= 1e-6
    assert rate == pytest.approx(6.94e-7, rel=0.02)
    # monotone in ber
    assert analytic_failure_rate(0.06) > rate
    # 15% raw BER under the [3,1] inner code blows the target
    assert analytic_failure_rate(0.15) > 1e-6
    # and the [7,1,3] preset is what brings it back
    assert analytic_failure_rate(0.15, ECC_BER_15) < analytic_failure_rate(0.15)


def test_analytic_vs_monte_carlo_consistency():
    # at ber=0.12 the failure rate is measurable; MC within 3-sigma binomial
    rng = make_rng(410)
    ber = 0.12
    predicted = analytic_failure_rate(ber)
    trials = 400
    pok = pok_new(rng, ber=ber)
    key, helper = fe_gen(pok, rng)
    fails = sum(fe_rec(pok_read(pok, rng), helper) is None for _ in range(trials))
    sigma = (predicted * (1 - predicted) / trials) ** 0.5
    assert abs(fails / trials - predicted) < 3 * sigma + 0.02
