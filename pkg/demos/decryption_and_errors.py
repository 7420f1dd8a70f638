# One-bit LWE decryption and where its errors come from.
#
# A challenge is 1288 bits packed into (a, b); the response is
# Q(b - <a, s> mod 256).  Encryption adds an accumulated Gaussian noise
# term, so a small fraction of honestly generated challenges decrypt to
# the wrong bit - that fraction is the PUF's intrinsic error rate.

import numpy as np

from lwepuf.core import DEFAULT_PARAMS, decrypt, pack_challenge, quantize
from lwepuf.crpgen import encrypt_full, keygen
from lwepuf.evaluate import decryption_error_mc
from lwepuf.sampler import make_rng, predicted_error_rate, sample_bits

rng = make_rng(1)
params = DEFAULT_PARAMS
print(f"parameters: n={params.n} q={params.q} m={params.m} alpha={params.alpha}")
print(f"challenge bits: {params.challenge_bits}, key bits: {params.key_bits}")

sk, pk = keygen(params, rng)

bits = sample_bits(params.challenge_bits, rng)
ct = pack_challenge(bits)
print(f"\nrandom 1288-bit challenge -> a[0..4]={ct.a[:5]}, b={ct.b}")
print(f"response bit: {decrypt(ct, sk)}")

print("\nquantizer map on Z_256: 0 on [0,64] and [193,255], 1 on [65,192]")
for x in (0, 64, 65, 128, 192, 193):
    print(f"  Q({x:3d}) = {quantize(x)}")

n_trials = 20_000
errors = 0
for i in range(n_trials):
    r = i & 1
    errors += decrypt(encrypt_full(pk, r, params, rng), sk, params) != r
print(f"\ndecryption errors, one fixed public key: {errors / n_trials:.4f}")
print("  (the rate conditions on that key's error-vector draw)")

mc = decryption_error_mc(50_000, master_seed=2)
print(f"decryption errors over fresh single-bit CRPs: {mc:.4f}")
print(f"analytic prediction 2*(1-Phi(sqrt(pi)/(2*alpha*sqrt(m)))): "
      f"{predicted_error_rate(params):.4f}")
