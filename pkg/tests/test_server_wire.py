import os
import threading
import time

import numpy as np
import pytest

from lwepuf.core import key_from_s
from lwepuf.crpgen import gen_lbit_crp
from lwepuf.device import DatapathConfig
from lwepuf.fe import pok_new
from lwepuf.sampler import make_rng
from lwepuf.server import (AuthPolicy, CrpStoreExhausted, DeviceRecord,
                           DuplicateDevice, ServerDb, authenticate,
                           enroll_record, load_record, resync)
from lwepuf.wire import (Challenge, Response, Result, Resync, WireError,
                         ProtocolDevice, decode_msg, encode_msg,
                         device_transaction, loopback_authenticate,
                         loopback_pair, pack_bits, serve, connect_device)


def make_enrolled(seed=701, batch=6, config=None, path=None):
    rng = make_rng(seed)
    pok = pok_new(rng)
    config = config or DatapathConfig()
    record = enroll_record("dev0", pok, config, rng, batch=batch, path=path)
    return pok, record


# --- message encoding ---------------------------------------------------------

def test_message_round_trips():
    rng = make_rng(702)
    msgs = [
        Challenge(seed=rng.bytes(32), counter=int(rng.integers(0, 2 ** 60)),
                  b_prime=rng.integers(0, 256, 100, dtype=np.int64).astype(np.uint8),
                  helper=rng.bytes(795)),
        Response(r_bytes=rng.bytes(13)),
        Result(accept=True),
        Result(accept=False),
        Resync(counter=12345),
    ]
    for msg in msgs:
        assert decode_msg(encode_msg(msg)) == msg


def test_challenge_frame_size():
    rng = make_rng(703)
    msg = Challenge(seed=rng.bytes(32), counter=7,
                    b_prime=np.zeros(100, dtype=np.uint8), helper=rng.bytes(795))
    frame = encode_msg(msg)
    assert len(frame) == 5 + 937  # header + 32+8+2+100+795


def test_frame_error_paths():
    rng = make_rng(704)
    frame = encode_msg(Resync(counter=1))
    with pytest.raises(WireError):
        decode_msg(frame[:-1])  # truncated
    with pytest.raises(WireError):
        decode_msg(frame[:4])  # no type byte
    bad_type = bytes([frame[0], frame[1], frame[2], frame[3], 99]) + frame[5:]
    with pytest.raises(WireError):
        decode_msg(bad_type)
    with pytest.raises(WireError):
        encode_msg(Response(r_bytes=bytes(70_000)))  # oversize


# --- enrollment and the CRP store ---------------------------------------------

def test_enroll_generates_consistent_record():
    pok, record = make_enrolled()
    assert record.remaining == 6
    assert record.next_counter == 6  # p1 = 1
    counters = [c.counter for c in record.crps]
    assert counters == sorted(counters)


def test_enroll_batch_advances_counter_by_p1():
    _, record = make_enrolled(batch=5, config=DatapathConfig(p1=4, p2=8))
    assert record.next_counter == 20


def test_duplicate_enrollment_rejected():
    db = ServerDb()
    rng = make_rng(705)
    db.enroll("x", pok_new(rng), DatapathConfig(), rng, batch=1)
    with pytest.raises(DuplicateDevice):
        db.enroll("x", pok_new(rng), DatapathConfig(), rng, batch=1)


def test_duplicate_enrollment_rejected_on_disk(tmp_path):
    path = str(tmp_path / "dev.db")
    make_enrolled(path=path, batch=1)
    with pytest.raises(DuplicateDevice):
        make_enrolled(path=path, batch=1)


def test_store_exhaustion_and_single_use():
    pok, record = make_enrolled(batch=2)
    dev = ProtocolDevice(pok=pok, rng=make_rng(706))
    for _ in range(2):
        accept, _, _ = loopback_authenticate(record, AuthPolicy(), dev)
        assert accept
    assert record.remaining == 0
    with pytest.raises(CrpStoreExhausted):
        authenticate(record, AuthPolicy(), None)
    # a consumed CRP can never be consumed again
    with pytest.raises(AssertionError):
        record.consume(0)


# --- authentication outcomes ---------------------------------------------------

def test_genuine_device_accepts():
    pok, record = make_enrolled()
    dev = ProtocolDevice(pok=pok, rng=make_rng(707))
    accept, server_ch, _ = loopback_authenticate(record, AuthPolicy(), dev)
    assert accept
    assert record.crps[0].used


def test_wrong_key_rejects():
    _, record = make_enrolled()
    rng = make_rng(708)
    impostor = ProtocolDevice(key=key_from_s(rng.integers(0, 256, 160,
                              dtype=np.int64).astype(np.uint8)))
    accept, _, _ = loopback_authenticate(record, AuthPolicy(), impostor)
    assert not accept


def test_random_responder_rejects():
    _, record = make_enrolled()

    class RandomResponder:
        def __init__(self):
            self.rng = make_rng(709)

        def run(self, channel):
            channel.recv_msg()
            channel.send_msg(Response(r_bytes=self.rng.bytes(13)))
            channel.recv_msg()

    server_ch, dev_ch = loopback_pair()
    adversary = RandomResponder()
    worker = threading.Thread(target=adversary.run, args=(dev_ch,))
    worker.start()
    assert authenticate(record, AuthPolicy(), server_ch) is False
    worker.join()


def test_replayed_response_rejects():
    pok, record = make_enrolled()
    dev = ProtocolDevice(pok=pok, rng=make_rng(710))
    captured = {}

    class Tap:
        def run(self, channel):
            msg = channel.recv_msg()
            bits_state = device_transaction_inner(dev, msg)
            captured["resp"] = bits_state
            channel.send_msg(Response(r_bytes=bits_state))
            channel.recv_msg()

    def device_transaction_inner(dev, challenge):
        from lwepuf.device import DeviceState, respond
        from lwepuf.fe import HelperData, fe_rec, pok_read
        key = fe_rec(pok_read(dev.pok, dev.rng), HelperData.from_bytes(challenge.helper))
        state = DeviceState(key=key, config=dev.config, counter=challenge.counter)
        bits, _ = respond(state, challenge.seed, challenge.b_prime)
        return pack_bits(bits)

    server_ch, dev_ch = loopback_pair()
    worker = threading.Thread(target=Tap().run, args=(dev_ch,))
    worker.start()
    assert authenticate(record, AuthPolicy(), server_ch) is True
    worker.join()

    # replay the captured response against a fresh CRP
    class Replayer:
        def run(self, channel):
            channel.recv_msg()
            channel.send_msg(Response(r_bytes=captured["resp"]))
            channel.recv_msg()

    server_ch, dev_ch = loopback_pair()
    worker = threading.Thread(target=Replayer().run, args=(dev_ch,))
    worker.start()
    assert authenticate(record, AuthPolicy(), server_ch) is False
    worker.join()


def test_connection_drop_consumes_crp_and_rejects():
    _, record = make_enrolled()

    class Mute:
        def run(self, channel):
            channel.recv_msg()
            channel.close()

    server_ch, dev_ch = loopback_pair(timeout=0.5)
    worker = threading.Thread(target=Mute().run, args=(dev_ch,))
    before = record.remaining
    worker.start()
    assert authenticate(record, AuthPolicy(), server_ch) is False
    worker.join()
    assert record.remaining == before - 1


def test_corrupt_helper_fails_closed():
    pok, record = make_enrolled()
    bad_helper = record.helper.mask.copy()
    bad_helper ^= make_rng(711).integers(0, 2, bad_helper.size).astype(np.uint8)
    record.helper.mask[:] = bad_helper
    dev = ProtocolDevice(pok=pok, rng=make_rng(712))
    accept, _, _ = loopback_authenticate(record, AuthPolicy(), dev)
    assert not accept


# --- counter handling -----------------------------------------------------------

def test_stale_counter_triggers_resync_and_skip():
    pok, record = make_enrolled(batch=6)
    dev = ProtocolDevice(pok=pok, rng=make_rng(713), counter=3)
    # first CRP carries counter 0 < 3: device answers with a resync, the
    # server rejects, consumes it and skips every CRP below the device counter
    accept, _, _ = loopback_authenticate(record, AuthPolicy(), dev)
    assert not accept
    assert all(c.used for c in record.crps if c.counter < 3)
    # the next transaction proceeds normally
    accept, _, _ = loopback_authenticate(record, AuthPolicy(), dev)
    assert accept


def test_resync_probe():
    pok, record = make_enrolled(batch=5)
    dev = ProtocolDevice(pok=pok, rng=make_rng(714), counter=2)
    server_ch, dev_ch = loopback_pair()
    worker = threading.Thread(target=device_transaction, args=(dev, dev_ch))
    worker.start()
    got = resync(record, server_ch)
    worker.join()
    assert got == 2
    assert all(c.used for c in record.crps if c.counter < 2)


def test_device_fast_forwards_to_public_counter():
    pok, record = make_enrolled(batch=3)
    dev = ProtocolDevice(pok=pok, rng=make_rng(715), counter=0)
    record.consume(record.next_unused())  # burn CRP 0
    accept, _, _ = loopback_authenticate(record, AuthPolicy(), dev)
    assert accept
    assert dev.counter == record.crps[1].counter + 1


# --- persistence -----------------------------------------------------------------

def test_record_file_round_trip(tmp_path):
    path = str(tmp_path / "dev.db")
    pok, record = make_enrolled(path=path, batch=4,
                                config=DatapathConfig(p1=2, p2=16))
    loaded = load_record(path)
    assert loaded.device_id == record.device_id
    assert np.array_equal(loaded.key.s, record.key.s)
    assert loaded.helper == record.helper
    assert (loaded.config.p1, loaded.config.p2) == (2, 16)
    assert loaded.next_counter == record.next_counter
    assert len(loaded.crps) == 4
    for a, b in zip(loaded.crps, record.crps):
        assert a.seed == b.seed and a.counter == b.counter
        assert np.array_equal(a.b_prime, b.b_prime)
        assert np.array_equal(a.r, b.r)
        assert a.used == b.used


def test_used_watermark_survives_restart(tmp_path):
    path = str(tmp_path / "dev.db")
    pok, record = make_enrolled(path=path, batch=3)
    dev = ProtocolDevice(pok=pok, rng=make_rng(716))
    assert loopback_authenticate(record, AuthPolicy(), dev)[0]
    reloaded = load_record(path)
    assert reloaded.remaining == 2
    assert reloaded.crps[0].used and not reloaded.crps[1].used
    # the reloaded store continues to serve
    assert loopback_authenticate(reloaded, AuthPolicy(), dev)[0]


# --- transports -------------------------------------------------------------------

def test_loopback_and_socket_traces_identical():
    policy = AuthPolicy()
    pok, record_a = make_enrolled(seed=717, batch=2)
    dev_a = ProtocolDevice(pok=pok, rng=make_rng(718))
    accept_a, server_a, device_a = loopback_authenticate(record_a, policy, dev_a)
    assert accept_a
    frames_loopback = [f for _, f in server_a.trace]
    # what the server sent is what the device received, and vice versa
    assert frames_loopback == [f for _, f in device_a.trace]

    # identical seeds over a real socket must produce identical bytes
    pok_b, record_b = make_enrolled(seed=717, batch=2)
    dev_b = ProtocolDevice(pok=pok_b, rng=make_rng(718))
    port = 9437
    results, channels = [], []

    def run_server():
        results.append(serve(record_b, policy, f"127.0.0.1:{port}",
                             max_transactions=1, channel_log=channels))

    worker = threading.Thread(target=run_server)
    worker.start()
    time.sleep(0.2)
    accept_b = connect_device(dev_b, f"127.0.0.1:{port}")
    worker.join()
    assert accept_b and results[0] == [True]
    frames_socket = [f for _, f in channels[0].trace]
    assert frames_socket == frames_loopback


def test_policy_validation():
    with pytest.raises(ValueError):
        AuthPolicy(length=100, threshold=50)
    with pytest.raises(ValueError):
        AuthPolicy(length=100, threshold=0)
    assert AuthPolicy(length=100).threshold == 25
