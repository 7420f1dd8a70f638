"""Server-side CRP generation.

Implements the one-bit public-key cryptosystem (keygen / encrypt / the
device holds decrypt) and the seed-compressed variant: instead of sending
the full vector a, the server expands a' from an LFSR seed exactly as the
device will, and transmits only (seed, b') with
b' = <a', s> + e^T x + r*floor(q/2).
"""

from dataclasses import dataclass, field

import numpy as np

from .core import Params, DEFAULT_PARAMS, Ciphertext, SecretKey, key_from_s
from .lfsr import expand_response_streams
from .sampler import Rng, sample_bits, sample_error_vec


@dataclass(frozen=True)
class PublicKey:
    A: np.ndarray      # uint8[m, n]
    b_vec: np.ndarray  # uint8[m] = A s + e


@dataclass
class LbitCrp:
    """One stored L-bit CRP: the compressed challenge plus expected response."""

    seed: bytes             # 32-byte LFSR seed
    counter: int            # counter value embedded at generation
    b_prime: np.ndarray     # uint8[L]
    r: np.ndarray           # uint8[L] expected plaintext bits
    used: bool = field(default=False)

    @property
    def length(self) -> int:
        return int(self.b_prime.size)


def keygen(params: Params = DEFAULT_PARAMS, rng: Rng = None) -> tuple[SecretKey, PublicKey]:
    """Uniform secret s, uniform A, b = A s + e with fresh Gaussian errors."""
    s = rng.integers(0, params.q, size=params.n, dtype=np.int64)
    sk = key_from_s(s.astype(np.uint8), params)
    return sk, public_key_for(sk, params, rng)


def public_key_for(sk: SecretKey, params: Params = DEFAULT_PARAMS, rng: Rng = None) -> PublicKey:
    A = rng.integers(0, params.q, size=(params.m, params.n), dtype=np.int64)
    e = sample_error_vec(params.m, params, rng).astype(np.int64)
    b_vec = (A @ sk.s.astype(np.int64) + e) & params.mask
    return PublicKey(A=A.astype(np.uint8), b_vec=b_vec.astype(np.uint8))


def encrypt_full(pk: PublicKey, r: int, params: Params = DEFAULT_PARAMS,
                 rng: Rng = None, x: np.ndarray = None) -> Ciphertext:
    """Genuine ciphertext (A^T x, b^T x + r*floor(q/2)) with uniform x."""
    if x is None:
        x = sample_bits(params.m, rng)
    x = x.astype(np.int64)
    a = (pk.A.astype(np.int64).T @ x) & params.mask
    b = (int(pk.b_vec.astype(np.int64) @ x) + r * (params.q // 2)) & params.mask
    return Ciphertext(a=a.astype(np.uint8), b=b)


def encrypt_relaxed(sk: SecretKey, r: int, a_prime: np.ndarray,
                    params: Params = DEFAULT_PARAMS, rng: Rng = None,
                    e: np.ndarray = None, x: np.ndarray = None) -> int:
    """b' = <a', s> + e^T x + r*floor(q/2) for an already-expanded a'.

    e and x are drawn fresh when not supplied; a shared-e batch path is
    what gen_lbit_crp uses.
    """
    if e is None:
        e = sample_error_vec(params.m, params, rng)
    if x is None:
        x = sample_bits(params.m, rng)
    noise = int(e.astype(np.int64) @ x.astype(np.int64))
    dot = int(a_prime.astype(np.int64) @ sk.s.astype(np.int64))
    return (dot + noise + r * (params.q // 2)) & params.mask


def relaxed_bvector(sk: SecretKey, a_mat: np.ndarray, params: Params,
                    rng: Rng, per_bit_error: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """(b', r) for a batch of expanded vectors a' (one row per response bit).

    r is uniform; the selection matrix X has one fresh uniform column per
    bit.  By default the error vector e is also drawn fresh per bit, which
    keeps decryption errors independent across the bits of one CRP (a batch
    sharing a single e draw has correlated errors: an unlucky draw shifts
    the whole response string, which sinks the authentication false-reject
    target).  per_bit_error=False shares one e draw across the batch for
    sensitivity experiments.
    """
    L = a_mat.shape[0]
    r = sample_bits(L, rng)
    X = sample_bits(params.m * L, rng).reshape(params.m, L).astype(np.int64)
    if per_bit_error:
        E = sample_error_vec(params.m * L, params, rng).reshape(L, params.m).astype(np.int64)
        noise = (E * X.T).sum(axis=1)
    else:
        e = sample_error_vec(params.m, params, rng).astype(np.int64)
        noise = e @ X
    dots = a_mat.astype(np.int64) @ sk.s.astype(np.int64)
    b_prime = (dots + noise + r.astype(np.int64) * (params.q // 2)) & params.mask
    return b_prime.astype(np.uint8), r


def gen_lbit_crp(sk: SecretKey, length: int, seed: bytes, counter: int,
                 p1: int = 1, params: Params = DEFAULT_PARAMS, rng: Rng = None,
                 per_bit_error: bool = True) -> LbitCrp:
    """Generate one L-bit CRP, mirroring the device's P1 stream assignment.

    The stored r is the plaintext; the device's actual response may differ
    per bit at the decryption error rate.
    """
    if length < 1:
        raise ValueError("length must be >= 1")
    a_mat = expand_response_streams(seed, counter, length, p1, params.n)
    b_prime, r = relaxed_bvector(sk, a_mat, params, rng, per_bit_error)
    return LbitCrp(seed=bytes(seed), counter=counter, b_prime=b_prime, r=r)
