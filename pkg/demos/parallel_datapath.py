# Latency scaling of the response datapath.  P1 counts parallel
# LFSR+decrypt pipelines (each absorbs the seed with its own counter);
# P2 is the LFSR unroll factor feeding P2/8 MAC units.  Responses are
# bit-identical across P2 and across schedules; only time changes.

import numpy as np

from lwepuf.crpgen import keygen
from lwepuf.device import (DatapathConfig, DeviceState, REFERENCE_LATENCY_US_128,
                           cycle_model, latency_table, respond)
from lwepuf.sampler import make_rng

rng = make_rng(5)
sk, _ = keygen(rng=rng)
seed = rng.bytes(32)
b_prime = rng.integers(0, 256, 16, dtype=np.int64).astype(np.uint8)

base = None
for p2 in (1, 8, 128):
    state = DeviceState(key=sk, config=DatapathConfig(p1=2, p2=p2), counter=9)
    bits, report = respond(state, seed, b_prime)
    base = bits if base is None else base
    print(f"(P1=2, P2={p2:3d}): response equal to serial themselves: "
          f"{np.array_equal(bits, base)}, "
          f"decrypt {report.decrypt_cycles} cycles = {report.decrypt_latency_us:.1f} us")

print("\nmodeled vs reference decrypt latency for 128-bit responses [us]:")
table = latency_table(128)
print(f"{'P1':>4} {'P2':>4} {'model':>9} {'reference':>9} {'error':>7}")
for (p1, p2), ref in REFERENCE_LATENCY_US_128.items():
    if ref is None:
        continue
    mod = table[(p1, p2)]
    print(f"{p1:>4} {p2:>4} {mod:9.1f} {ref:9d} {(mod - ref) / ref:+6.1%}")

rep = cycle_model(DatapathConfig(p1=2, p2=128), 128)
print(f"\nmost parallel supported point (2,128): "
      f"{rep.decrypt_cycles_per_bit:.0f} decrypt cycles per response bit, "
      f"{rep.latency_us:.1f} us total with the {rep.seed_cycles}-cycle seed load")
speedup = table[(1, 1)] / table[(2, 128)]
print(f"speedup over the bit-serial design: {speedup:.0f}x")
