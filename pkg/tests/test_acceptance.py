"""Acceptance gate: every release criterion at its stated tolerance.

Each check prints one PASS/FAIL line (run with `pytest -s` or execute this
file directly).  The suite depends only on the Python package; the
TypeScript attack bench is exercised by its own test suite.
"""

import threading
import time

import numpy as np
import pytest

from lwepuf.attacks import (ProtectedOracle, UnprotectedOracle,
                            attack_protected, attack_unprotected,
                            stream_divergence)
from lwepuf.bch import CODE_N, bch_decode, bch_encode, rep_decode
from lwepuf.core import DEFAULT_PARAMS, key_from_s, quantize, mod_dot
from lwepuf.device import (DatapathConfig, DeviceState, cycle_model,
                           latency_table, respond)
from lwepuf.evaluate import (PopulationSpec, decryption_error_mc, export_crps,
                             export_toy_crps, lr_attack, run_stats)
from lwepuf.fe import analytic_failure_rate, fe_gen, fe_rec, pok_new, pok_read
from lwepuf.lfsr import LfsrState, absorb, step_unrolled, max_unroll
from lwepuf.sampler import make_rng, predicted_error_rate, sample_bits
from lwepuf.server import AuthPolicy, authenticate, enroll_record
from lwepuf.wire import (ProtocolDevice, Response, connect_device,
                         loopback_authenticate, loopback_pair, serve)

P = DEFAULT_PARAMS


def report(name: str, ok: bool, detail: str) -> None:
    print(f"{'PASS' if ok else 'FAIL'}: {name} ({detail})")
    assert ok, f"{name}: {detail}"


def full_key(seed: int):
    rng = make_rng(seed)
    return key_from_s(rng.integers(0, 256, 160, dtype=np.int64).astype(np.uint8))


def test_decryption_error_rate():
    mc = decryption_error_mc(100_000, master_seed=11)
    analytic = predicted_error_rate(P)
    ok = 0.010 <= mc <= 0.016 and abs(analytic - 0.0118) <= 5e-4
    report("decryption error rate", ok,
           f"monte-carlo={mc:.4f} in [0.010, 0.016], analytic={analytic:.4f}, "
           f"gap={mc - analytic:+.4f}")


def test_population_statistics():
    rep = run_stats(PopulationSpec(num_devices=100, challenges_per_device=1000,
                                   master_seed=12))
    checks = {
        "uniformity mean": abs(rep.uniformity_mean - 0.50) <= 0.01,
        "uniformity std": abs(rep.uniformity_std - 0.016) <= 0.006,
        "uniqueness mean": abs(rep.uniqueness_mean - 0.50) <= 0.01,
        "reliability mean": abs(rep.reliability_mean - 0.0126) <= 0.004,
    }
    detail = (f"uniformity={rep.uniformity_mean:.4f} std={rep.uniformity_std:.4f}, "
              f"uniqueness={rep.uniqueness_mean:.4f}, "
              f"reliability={rep.reliability_mean:.4f}")
    failed = [k for k, v in checks.items() if not v]
    if failed:
        detail += "; out of band: " + ", ".join(failed)
    report("population statistics (100 x 1000)", not failed, detail)


def test_fuzzy_extractor():
    analytic = analytic_failure_rate(0.05)
    rng = make_rng(13)
    failures = 0
    for _ in range(10):
        pok = pok_new(rng, ber=0.05)
        key, helper = fe_gen(pok, rng)
        for _ in range(1000):
            got = fe_rec(pok_read(pok, rng), helper)
            if got is None or not np.array_equal(got.s, key.s):
                failures += 1
    # BCH corrects every tested pattern of weight <= 11
    bch_fail = 0
    msg = sample_bits(128, rng)
    clean = bch_encode(msg)
    for i in range(10_000):
        word = clean.copy()
        weight = 1 + i % 11
        word[rng.choice(CODE_N, weight, replace=False)] ^= 1
        got = bch_decode(word)
        if got is None or not np.array_equal(got, msg):
            bch_fail += 1
    # repetition majority at p = 0.05
    flips = (rng.random((1_000_000, 3)) < 0.05).astype(np.uint8)
    rep_rate = float(np.mean(rep_decode(flips.reshape(-1)) != 0))
    ok = (analytic <= 1e-6 and failures == 0 and bch_fail == 0
          and abs(rep_rate - 0.00725) <= 5e-4)
    report("fuzzy extractor", ok,
           f"analytic={analytic:.2e} <= 1e-6, mc-failures={failures}/10000, "
           f"bch-failures={bch_fail}/10000, majority-ber={rep_rate:.5f}")


def test_lfsr_unroll_equivalence():
    rng = make_rng(14)
    states = rng.integers(0, 2, size=(10_000, 256)).astype(np.uint8)
    mismatches = 0
    for u in (1, 4, 8, 16, 32, 64, 128):
        # batched serial oracle over all states at once
        ref_regs = states.copy()
        ref_outs = np.empty((10_000, u), dtype=np.uint8)
        for k in range(u):
            ref_outs[:, k] = ref_regs[:, 255]
            fb = (ref_regs[:, 255] ^ ref_regs[:, 253]
                  ^ ref_regs[:, 250] ^ ref_regs[:, 245])
            ref_regs[:, 1:] = ref_regs[:, :-1]
            ref_regs[:, 0] = fb
        for i in range(10_000):
            st = LfsrState(reg=states[i].copy())
            outs = step_unrolled(st, u)
            if not (np.array_equal(outs, ref_outs[i])
                    and np.array_equal(st.reg, ref_regs[i])):
                mismatches += 1
    ok = mismatches == 0 and max_unroll() == 128
    report("lfsr unroll equivalence", ok,
           f"mismatches={mismatches} over 7 x 10^4 states, max_unroll={max_unroll()}")


def serial_respond_reference(key, seed, counter, b_prime, p1):
    from lwepuf.lfsr import step_serial

    states = [absorb(seed, counter + d) for d in range(min(p1, len(b_prime)))]
    out = []
    for k in range(len(b_prime)):
        st = states[k % p1]
        bits = [step_serial(st) for _ in range(1280)]
        a = np.packbits(np.array(bits, dtype=np.uint8), bitorder="little")
        out.append(quantize((int(b_prime[k]) - mod_dot(a, key, P)) & 0xFF))
    return np.array(out, dtype=np.uint8)


def test_parallel_datapath():
    key = full_key(15)
    rng = make_rng(16)
    seed = rng.bytes(32)
    b_prime = rng.integers(0, 256, 4, dtype=np.int64).astype(np.uint8)
    func_ok = True
    for (p1, p2), ref_us in [((1, 1), None), ((1, 8), None), ((2, 128), None),
                             ((4, 16), None), ((8, 4), None)]:
        state = DeviceState(key=key, config=DatapathConfig(p1=p1, p2=p2), counter=3)
        bits, _ = respond(state, seed, b_prime)
        ref = serial_respond_reference(key, seed, 3, b_prime, p1)
        func_ok = func_ok and np.array_equal(bits, ref)

    table = latency_table(128)
    cells = {(1, 1): 5632, (1, 8): 1229, (1, 16): 614, (1, 32): 307,
             (1, 64): 154, (1, 128): 77, (2, 128): 38}
    cell_ok = all(abs(table[c] - v) / v <= 0.25 for c, v in cells.items())
    halving_ok = all(abs(table[(1, p2)] / table[(1, 2 * p2)] - 2) <= 0.1
                     for p2 in (8, 16, 32, 64))
    p1_ok = all(abs(table[(p1, 8)] / table[(2 * p1, 8)] - 2) <= 0.1
                for p1 in (1, 2, 4))
    cpb = cycle_model(DatapathConfig(2, 128), 128).decrypt_cycles_per_bit
    cpb_ok = abs(cpb - 10) <= 2
    ok = func_ok and cell_ok and halving_ok and p1_ok and cpb_ok
    report("parallel datapath", ok,
           f"bit-exact={func_ok}, cells<=25%={cell_ok}, halving={halving_ok}, "
           f"p1-scaling={p1_ok}, cycles/bit@(2,128)={cpb:.1f}")


def test_protocol():
    rng = make_rng(17)
    pok = pok_new(rng, ber=0.05)
    policy = AuthPolicy()  # L = 100, threshold 25
    record = enroll_record("acc-dev", pok, DatapathConfig(), rng, policy, batch=1000)
    dev = ProtocolDevice(pok=pok, rng=make_rng(18))
    accepted = 0
    for _ in range(1000):
        ok, _, _ = loopback_authenticate(record, policy, dev)
        accepted += ok
    genuine_rate = accepted / 1000

    # adversary: uniform random responses against fresh CRPs
    import math
    tail = sum(math.comb(100, k) * 0.5 ** 100 for k in range(25))
    adv_record = enroll_record("acc-adv", pok_new(rng, 0.05), DatapathConfig(),
                               rng, policy, batch=2000)
    adv_rng = make_rng(19)
    adv_accepts = 0
    for _ in range(2000):
        server_ch, dev_ch = loopback_pair()

        def adversary():
            dev_ch.recv_msg()
            dev_ch.send_msg(Response(r_bytes=adv_rng.bytes(13)))
            dev_ch.recv_msg()

        worker = threading.Thread(target=adversary)
        worker.start()
        adv_accepts += authenticate(adv_record, policy, server_ch)
        worker.join()

    # transport equality, single transaction each way
    pok_b = pok_new(make_rng(20), 0.05)
    rec_l = enroll_record("acc-t", pok_b, DatapathConfig(), make_rng(21), policy, batch=1)
    dev_l = ProtocolDevice(pok=pok_b, rng=make_rng(22))
    ok_l, server_ch, _ = loopback_authenticate(rec_l, policy, dev_l)
    rec_s = enroll_record("acc-t", pok_b, DatapathConfig(), make_rng(21), policy, batch=1)
    dev_s = ProtocolDevice(pok=pok_b, rng=make_rng(22))
    channels, results = [], []
    worker = threading.Thread(target=lambda: results.append(
        serve(rec_s, policy, "127.0.0.1:9533", 1, channel_log=channels)))
    worker.start()
    time.sleep(0.2)
    ok_s = connect_device(dev_s, "127.0.0.1:9533")
    worker.join()
    traces_equal = ([f for _, f in server_ch.trace]
                    == [f for _, f in channels[0].trace])

    # no CRP leaves the store twice
    single_use = (len(record._sent) == sum(c.used for c in record.crps)
                  and len(set(record._sent)) == len(record._sent))

    ok = (genuine_rate >= 0.999 and tail <= 1e-6 and adv_accepts == 0
          and ok_l and ok_s and traces_equal and single_use)
    report("authentication protocol", ok,
           f"genuine={genuine_rate:.4f} >= 0.999, adversary-tail={tail:.2e}, "
           f"adversary-accepts={adv_accepts}/2000, traces-equal={traces_equal}, "
           f"single-use={single_use}")


def test_active_attack():
    key = full_key(23)
    oracle = UnprotectedOracle(key=key)
    rep = attack_unprotected(oracle, make_rng(24), clone_trials=100_000)
    unprot_ok = rep.success and rep.queries <= 2 ** 17 and rep.clone_agreement == 1.0

    state = DeviceState(key=key, config=DatapathConfig())
    poracle = ProtectedOracle(state=state)
    div = stream_divergence(poracle, make_rng(25), trials=10)
    prep = attack_protected(poracle, make_rng(26), clone_trials=10_000)
    prot_ok = (not prep.success) and prep.clone_agreement <= 0.55 and div > 0.0
    report("active attack", unprot_ok and prot_ok,
           f"unprotected: recovered={rep.success} queries={rep.queries} <= 2^17, "
           f"clone=1.0; protected: clone={prep.clone_agreement:.3f} <= 0.55, "
           f"divergence={div:.3f}")


def test_ml_resistance(tmp_path):
    key = full_key(27)
    rng = make_rng(28)
    lattice = str(tmp_path / "lattice.csv")
    export_crps(key, 125_000, "compressed", lattice, rng)
    err = lr_attack(lattice, epochs=30, rate=0.5, seed=3)
    three_sigma = 3 * (0.25 / 25_000) ** 0.5
    lattice_ok = err >= 0.48 and abs(err - 0.5) <= three_sigma

    toy = str(tmp_path / "toy.csv")
    export_toy_crps(125_000, toy, make_rng(29))
    toy_err = lr_attack(toy, epochs=30, rate=0.5, seed=3)
    ok = lattice_ok and toy_err <= 0.05
    report("ml resistance (logistic regression)", ok,
           f"lattice error={err:.4f} (>= 0.48, within 3-sigma {three_sigma:.4f} "
           f"of 0.5), toy error={toy_err:.4f} <= 0.05")


if __name__ == "__main__":
    import tempfile
    from pathlib import Path

    test_decryption_error_rate()
    test_population_statistics()
    test_fuzzy_extractor()
    test_lfsr_unroll_equivalence()
    test_parallel_datapath()
    test_protocol()
    test_active_attack()
    with tempfile.TemporaryDirectory() as tmp:
        test_ml_resistance(Path(tmp))
    print("all acceptance criteria passed")
