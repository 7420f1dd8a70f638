# Seed-compressed challenges: instead of shipping the 1280-bit vector a,
# the server sends a 256-bit LFSR seed and only the b' scalars; the device
# regrows a' from the seed.  A 100-bit response then needs 1056 challenge
# bits instead of 128,800.

import numpy as np

from lwepuf.crpgen import gen_lbit_crp, keygen
from lwepuf.device import DeviceState, respond
from lwepuf.lfsr import absorb, expand, max_unroll, step_serial, step_unrolled
from lwepuf.sampler import make_rng

rng = make_rng(3)
sk, _ = keygen(rng=rng)

L = 100
crp = gen_lbit_crp(sk, L, rng.bytes(32), counter=0, rng=rng)
plain_bits = L * 1288
compressed_bits = len(crp.seed) * 8 + crp.b_prime.size * 8
print(f"{L}-bit response, uncompressed challenges: {plain_bits} bits")
print(f"compressed (seed, b'): {compressed_bits} bits "
      f"({plain_bits / compressed_bits:.0f}x smaller)")

state = DeviceState(key=sk)
bits, _ = respond(state, crp.seed, crp.b_prime)
print(f"device response vs stored plaintexts: "
      f"{int(np.count_nonzero(bits != crp.r))}/{L} bits differ "
      f"(decryption errors)")

# the LFSR behind the expansion, serial vs unrolled
st = absorb(rng.bytes(32), counter=7)
st_clone = st.clone()
unrolled = step_unrolled(st, 128)
serial = [step_serial(st_clone) for _ in range(128)]
print(f"\nunrolled-by-128 output equals 128 serial steps: "
      f"{list(unrolled) == serial}")
print(f"maximum unroll factor for taps (255,253,250,245): {max_unroll()}")
print(f"one response bit consumes {160} stream bytes "
      f"= {1280} serial LFSR cycles")
print(f"first expanded bytes: {expand(absorb(rng.bytes(32), 0), 8)}")
