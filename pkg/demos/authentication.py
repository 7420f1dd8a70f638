# End-to-end authentication: enrollment reads the POK once, stores key,
# helper data and a batch of one-time CRPs; each transaction ships
# (seed, b', helper), the device reconstructs its key from a fresh noisy
# read and answers with the decrypted string.  Accept iff the Hamming
# distance to the stored plaintexts stays under the threshold.

import numpy as np

from lwepuf.core import key_from_s
from lwepuf.device import DatapathConfig
from lwepuf.fe import pok_new
from lwepuf.sampler import make_rng
from lwepuf.server import AuthPolicy, enroll_record
from lwepuf.wire import ProtocolDevice, loopback_authenticate

rng = make_rng(6)
pok = pok_new(rng, ber=0.05)
policy = AuthPolicy()  # L = 100, threshold = 25
record = enroll_record("demo-device", pok, DatapathConfig(p1=2, p2=16), rng,
                       policy, batch=8)
print(f"enrolled '{record.device_id}': {record.remaining} one-time CRPs, "
      f"threshold {policy.threshold}/{policy.length}")

device = ProtocolDevice(config=DatapathConfig(p1=2, p2=16), pok=pok,
                        rng=make_rng(7))
for i in range(3):
    accept, server_ch, _ = loopback_authenticate(record, policy, device)
    challenge_frame = server_ch.trace[0][1]
    print(f"transaction {i}: {'accept' if accept else 'reject'} "
          f"(challenge frame {len(challenge_frame)} bytes, "
          f"{record.remaining} CRPs left)")

impostor = ProtocolDevice(
    config=DatapathConfig(p1=2, p2=16),
    key=key_from_s(make_rng(99).integers(0, 256, 160, dtype=np.int64).astype(np.uint8)),
    counter=device.counter)
accept, _, _ = loopback_authenticate(record, policy, impostor)
print(f"impostor with a random key: {'accept' if accept else 'reject'}")

# a challenge whose counter lags the device's own is a replay: the device
# refuses and answers with its counter so the server can skip burned CRPs
ahead = ProtocolDevice(config=DatapathConfig(p1=2, p2=16), pok=pok,
                       rng=make_rng(7), counter=10_000)
accept, _, _ = loopback_authenticate(record, policy, ahead)
print(f"replayed challenge (device counter ahead): "
      f"{'accept' if accept else 'reject'}")
print(f"CRPs remaining: {record.remaining}")
