"""Simulated SRAM POK and the code-offset fuzzy extractor.

The POK is a 6360-cell array of power-up bits; every read flips each cell
independently with probability `ber`.  The extractor encodes a uniformly
random 1280-bit key with ten blocks of shortened BCH [212, 128, 11] followed
by bitwise [3, 1] repetition, and publishes mask = Encode(key) XOR truth as
helper data.  Reconstruction XORs a fresh read with the mask, majority-votes
the repetition triples and BCH-decodes each block.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import bch
from .core import SecretKey, pack_key
from .sampler import Rng, sample_bits


@dataclass(frozen=True)
class EccConfig:
    """Concatenated code preset: shortened BCH outer, repetition inner."""

    outer_n: int
    outer_k: int
    outer_t: int
    inner_n: int
    blocks: int = 10

    @property
    def raw_bits(self) -> int:
        return self.blocks * self.outer_n * self.inner_n

    @property
    def key_bits(self) -> int:
        return self.blocks * self.outer_k


# presets by raw POK bit error rate; only the 5% code has a decode path
ECC_BER_1 = EccConfig(236, 128, 14, 1)
ECC_BER_5 = EccConfig(212, 128, 11, 3)
ECC_BER_10 = EccConfig(220, 128, 12, 5)
ECC_BER_15 = EccConfig(244, 128, 15, 7)

POK_BITS = ECC_BER_5.raw_bits  # 6360
HELPER_BYTES = POK_BITS // 8   # 795


@dataclass
class PokArray:
    """Ground-truth power-up bits plus the per-cell flip probability."""

    truth: np.ndarray  # uint8[6360]
    ber: float = 0.05

    def __post_init__(self):
        if not 0.0 <= self.ber < 0.5:
            raise ValueError("ber must be in [0, 0.5)")
        if self.truth.shape != (POK_BITS,):
            raise ValueError(f"truth must be {POK_BITS} bits")


@dataclass(frozen=True)
class HelperData:
    """Public code-offset mask, bit i of the encoded stream at index i."""

    mask: np.ndarray  # uint8[6360]

    def to_bytes(self) -> bytes:
        """795-byte little-endian bit packing (LSB of byte 0 = mask bit 0)."""
        return np.packbits(self.mask, bitorder="little").tobytes()

    @classmethod
    def from_bytes(cls, raw: bytes) -> "HelperData":
        if len(raw) != HELPER_BYTES:
            raise ValueError(f"helper data must be {HELPER_BYTES} bytes")
        return cls(np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little"))

    def __eq__(self, other):
        if not isinstance(other, HelperData):
            return NotImplemented
        return np.array_equal(self.mask, other.mask)


def pok_new(rng: Rng, ber: float = 0.05) -> PokArray:
    return PokArray(truth=sample_bits(POK_BITS, rng), ber=ber)


def pok_read(pok: PokArray, rng: Rng) -> np.ndarray:
    """One noisy read: every truth bit flips independently with prob ber."""
    flips = (rng.random(POK_BITS) < pok.ber).astype(np.uint8)
    return pok.truth ^ flips


def concat_encode(key_bits: np.ndarray) -> np.ndarray:
    """1280 key bits -> 6360 raw bits (block-major, triples consecutive)."""
    blocks = [
        bch.rep_encode(bch.bch_encode(key_bits[i * 128:(i + 1) * 128]))
        for i in range(ECC_BER_5.blocks)
    ]
    return np.concatenate(blocks)


def fe_gen(pok: PokArray, rng: Rng) -> tuple[SecretKey, HelperData]:
    """Enrollment: draw a uniform key, publish Encode(key) XOR truth."""
    key_bits = sample_bits(ECC_BER_5.key_bits, rng)
    mask = concat_encode(key_bits) ^ pok.truth
    return pack_key(key_bits), HelperData(mask=mask)


def fe_rec(noisy_read: np.ndarray, helper: HelperData):
    """Reconstruct the key from a noisy read; None if any block fails."""
    stream = (np.asarray(noisy_read, dtype=np.uint8) ^ helper.mask)
    per_block = ECC_BER_5.outer_n * ECC_BER_5.inner_n
    key_bits = np.empty(ECC_BER_5.key_bits, dtype=np.uint8)
    for i in range(ECC_BER_5.blocks):
        triples = stream[i * per_block:(i + 1) * per_block]
        msg = bch.bch_decode(bch.rep_decode(triples))
        if msg is None:
            return None
        key_bits[i * 128:(i + 1) * 128] = msg
    return pack_key(key_bits)


def _binom_tail_gt(n: int, p: float, t: int) -> float:
    """P[Binomial(n, p) > t], exact up to float rounding."""
    if p <= 0.0:
        return 0.0
    q = 1.0 - p
    term = q ** n
    cdf = 0.0
    for k in range(t + 1):
        cdf += term
        term *= (n - k) / (k + 1) * (p / q)
    return max(0.0, 1.0 - cdf)


def majority_error_rate(ber: float, width: int = 3) -> float:
    """Post-majority bit error rate of a [width, 1] repetition code."""
    return _binom_tail_gt(width, ber, width // 2)


def analytic_failure_rate(ber: float, config: EccConfig = ECC_BER_5) -> float:
    """Key reconstruction failure probability at the given raw BER.

    Per-block failure is P[Binomial(outer_n, p_inner) > outer_t] with p_inner
    the post-majority error rate; the key fails if any block fails.
    """
    if not 0.0 <= ber < 0.5:
        raise ValueError("ber must be in [0, 0.5)")
    p_inner = majority_error_rate(ber, config.inner_n)
    p_block = _binom_tail_gt(config.outer_n, p_inner, config.outer_t)
    return 1.0 - (1.0 - p_block) ** config.blocks
