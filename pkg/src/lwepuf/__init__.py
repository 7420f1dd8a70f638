"""LWE-decryption strong PUF with LFSR challenge compression.

The package simulates the full stack of an LWE-based strong PUF:

- ``core``      exact Z_q arithmetic, bit packing, quantizer, decryption
- ``sampler``   seeded randomness and the discrete Gaussian error sampler
- ``lfsr``      256-bit Fibonacci LFSR with unrolled stepping
- ``crpgen``    server-side CRP generation (full and seed-compressed)
- ``bch``       GF(2^8) arithmetic, shortened BCH and repetition codes
- ``fe``        SRAM POK simulation and the code-offset fuzzy extractor
- ``device``    device datapath simulator and (P1, P2) cycle model
- ``server``    enrollment, CRP database, authentication decisions
- ``wire``      framed byte protocol, loopback and socket transports
- ``evaluate``  uniformity/uniqueness/reliability harness, CRP export,
                logistic-regression modeling attack
- ``attacks``   chosen-ciphertext threshold attack and its counter defence
"""

from .core import Params, Ciphertext, SecretKey, DEFAULT_PARAMS
from .sampler import make_rng

__all__ = ["Params", "Ciphertext", "SecretKey", "DEFAULT_PARAMS", "make_rng"]
