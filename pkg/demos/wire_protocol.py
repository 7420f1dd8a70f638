# The byte protocol between server and device, shown over both transports.
# Frames are length-prefixed; the loopback transport produces the exact
# bytes the TCP transport does, so traces can be compared offline.

import threading
import time

from lwepuf.device import DatapathConfig
from lwepuf.fe import pok_new
from lwepuf.sampler import make_rng
from lwepuf.server import AuthPolicy, enroll_record
from lwepuf.wire import (MSG_CHALLENGE, ProtocolDevice, connect_device,
                         decode_msg, loopback_authenticate, serve)

policy = AuthPolicy()
rng = make_rng(15)
pok = pok_new(rng)
record = enroll_record("wire-demo", pok, DatapathConfig(), rng, policy, batch=2)
device = ProtocolDevice(pok=pok, rng=make_rng(16))

accept, server_ch, device_ch = loopback_authenticate(record, policy, device)
print(f"loopback transaction: {'accept' if accept else 'reject'}")
for direction, frame in server_ch.trace:
    mtype = frame[4]
    names = {1: "CHALLENGE", 2: "RESPONSE", 3: "RESULT", 4: "RESYNC"}
    print(f"  server {direction}: {names[mtype]:9s} {len(frame):4d} bytes")

challenge = decode_msg(server_ch.trace[0][1])
print(f"\nchallenge fields: seed {len(challenge.seed)} B, counter "
      f"{challenge.counter}, L={challenge.b_prime.size}, helper "
      f"{len(challenge.helper)} B")

endpoint = "127.0.0.1:9705"
channels, results = [], []
worker = threading.Thread(target=lambda: results.append(
    serve(record, policy, endpoint, max_transactions=1, channel_log=channels)))
worker.start()
time.sleep(0.3)
accept = connect_device(device, endpoint)
worker.join()
same = ([f for _, f in channels[0].trace][0][4] == MSG_CHALLENGE)
print(f"\nTCP transaction on {endpoint}: {'accept' if accept else 'reject'}; "
      f"first server frame is a challenge: {same}")
