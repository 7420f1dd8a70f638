"""Exact modular arithmetic over Z_q, bit packing, quantizer and decryption.

All arithmetic is performed modulo q with q a power of two, i.e. with plain
integer operations that keep only the last log2(q) bits.  Bit packing is
little-endian within each log2(q)-bit group: bit index 0 of a group is the
least significant bit of the resulting integer.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Params:
    """LWE parameter set.

    n      lattice dimension
    q      modulus (power of two)
    m      encryption combination width (columns of x)
    alpha  noise ratio of the discrete Gaussian error
    """

    n: int = 160
    q: int = 256
    m: int = 256
    alpha: float = 0.0220

    def __post_init__(self):
        if self.q < 2 or self.q & (self.q - 1):
            raise ValueError(f"q must be a power of two, got {self.q}")

    @property
    def log_q(self) -> int:
        return self.q.bit_length() - 1

    @property
    def mask(self) -> int:
        return self.q - 1

    @property
    def challenge_bits(self) -> int:
        """Challenge length N = (n+1)*log2(q)."""
        return (self.n + 1) * self.log_q

    @property
    def key_bits(self) -> int:
        """Secret key length n*log2(q)."""
        return self.n * self.log_q


DEFAULT_PARAMS = Params()


@dataclass(frozen=True)
class SecretKey:
    """Binary secret key W and its packed form s in Z_q^n."""

    w_bits: np.ndarray  # uint8[n*log_q], values 0/1
    s: np.ndarray       # uint8[n]

    def __eq__(self, other):
        if not isinstance(other, SecretKey):
            return NotImplemented
        return np.array_equal(self.w_bits, other.w_bits)


@dataclass(frozen=True)
class Ciphertext:
    """Ciphertext (a, b) with a in Z_q^n and b in Z_q."""

    a: np.ndarray  # uint8[n]
    b: int

    def __eq__(self, other):
        if not isinstance(other, Ciphertext):
            return NotImplemented
        return self.b == other.b and np.array_equal(self.a, other.a)


def _as_bits(bits, expected: int, what: str) -> np.ndarray:
    arr = np.asarray(bits, dtype=np.uint8)
    if arr.ndim != 1 or arr.size != expected:
        raise ValueError(f"{what} must be {expected} bits, got shape {arr.shape}")
    if arr.max(initial=0) > 1:
        raise ValueError(f"{what} must be 0/1 valued")
    return arr


def pack_challenge(bits, params: Params = DEFAULT_PARAMS) -> Ciphertext:
    """Pack an N-bit challenge into (a, b), LSB-first within each byte group."""
    arr = _as_bits(bits, params.challenge_bits, "challenge")
    packed = np.packbits(arr, bitorder="little")
    return Ciphertext(a=packed[: params.n].copy(), b=int(packed[params.n]))


def unpack_challenge(ct: Ciphertext, params: Params = DEFAULT_PARAMS) -> np.ndarray:
    """Inverse of pack_challenge."""
    packed = np.concatenate([ct.a, [np.uint8(ct.b)]]).astype(np.uint8)
    return np.unpackbits(packed, bitorder="little")[: params.challenge_bits]


def pack_key(bits, params: Params = DEFAULT_PARAMS) -> SecretKey:
    """Pack the binary key W into s, s_i = sum_j W[i*log_q + j] * 2^j."""
    arr = _as_bits(bits, params.key_bits, "key")
    return SecretKey(w_bits=arr.copy(), s=np.packbits(arr, bitorder="little"))


def key_from_s(s, params: Params = DEFAULT_PARAMS) -> SecretKey:
    """Build a SecretKey from its packed form."""
    s = np.asarray(s, dtype=np.uint8)
    if s.shape != (params.n,):
        raise ValueError(f"s must have length {params.n}")
    return SecretKey(w_bits=np.unpackbits(s, bitorder="little"), s=s.copy())


def mod_dot(a, key: SecretKey, params: Params = DEFAULT_PARAMS) -> int:
    """<a, s> mod q."""
    a = np.asarray(a, dtype=np.uint8)
    if a.shape != (params.n,):
        raise ValueError(f"a must have length {params.n}")
    return int(a.astype(np.int64) @ key.s.astype(np.int64)) & params.mask


def quantize(x: int, q: int = 256) -> int:
    """Map x in Z_q to a response bit.

    Returns 0 for x in [0, q/4] and (3q/4, q-1], 1 for x in (q/4, 3q/4].
    With q = 256 that is 0 on [0, 64] and [193, 255], 1 on [65, 192].
    """
    return 1 if q // 4 < x <= 3 * q // 4 else 0


def quantize_vec(x: np.ndarray, q: int = 256) -> np.ndarray:
    """Vectorized quantize over an array of Z_q values."""
    x = np.asarray(x)
    return ((x > q // 4) & (x <= 3 * q // 4)).astype(np.uint8)


def decrypt(ct: Ciphertext, key: SecretKey, params: Params = DEFAULT_PARAMS) -> int:
    """Decrypt (a, b) to quantize(b - <a, s> mod q)."""
    return quantize((ct.b - mod_dot(ct.a, key, params)) & params.mask, params.q)


def decrypt_batch(a_mat: np.ndarray, b_vec, key: SecretKey,
                  params: Params = DEFAULT_PARAMS) -> np.ndarray:
    """Decrypt many (a, b) pairs at once; a_mat is (count, n), b_vec is (count,)."""
    a_mat = np.asarray(a_mat, dtype=np.int64)
    b_vec = np.asarray(b_vec, dtype=np.int64)
    dots = (a_mat @ key.s.astype(np.int64)) & params.mask
    return quantize_vec((b_vec - dots) & params.mask, params.q)
