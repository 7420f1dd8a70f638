"""Device-side datapath simulator: counter handling, LFSR expansion, LWE
decryption per response bit, (P1, P2) parallel configurations and cycle
accounting.

P1 counts parallel LFSR+decrypt datapaths (round-robin over response bits,
datapath d absorbs the seed with counter t+d).  P2 is the number of LFSR
output bits per cycle, i.e. the unroll factor feeding P2/8 parallel MAC
units.  Responses are invariant under P2 (pure unrolling); changing P1
changes the seed-to-bit mapping.
"""

from dataclasses import dataclass, field

import numpy as np

from .core import Params, DEFAULT_PARAMS, SecretKey, quantize_vec
from .lfsr import expand_response_streams, max_unroll

CLOCK_MHZ = 33.3
SEED_LOAD_CYCLES = 320  # serial absorption of seed || counter
ALLOWED_P2 = (1, 4, 8, 16, 32, 64, 128)

# calibration constants for the cycle model, fitted against the reference
# implementation: the bit-serial datapath measures 44 us per response bit
# (1465 cycles at 33.3 MHz, ~1.145 cycles per LFSR output bit); the MAC-array
# regime (p2 >= 8) moves one byte lane step every C_MAC cycles with no
# measurable fixed overhead per bit
C_SERIAL = 1465 / 1280
C_MAC = 2
C_FIX = 0

# reference latencies [us] of the hardware design points for 128-bit
# response generation (decrypt portion, excluding the seed load), used by
# calibration checks; None marks configurations beyond the resource cap
REFERENCE_LATENCY_US_128 = {
    (1, 1): 5632, (1, 4): 1843, (1, 8): 1229, (1, 16): 614, (1, 32): 307,
    (1, 64): 154, (1, 128): 77,
    (2, 1): 2765, (2, 4): 922, (2, 8): 614, (2, 16): 307, (2, 32): 154,
    (2, 64): 77, (2, 128): 38,
    (4, 1): 1382, (4, 4): 461, (4, 8): 307, (4, 16): 154, (4, 32): 77,
    (4, 64): 38, (4, 128): None,
    (8, 1): 691, (8, 4): 230, (8, 8): 154, (8, 16): 77, (8, 32): 38,
    (8, 64): None, (8, 128): None,
}


@dataclass(frozen=True)
class DatapathConfig:
    """(P1, P2) parallelism plus the clock for latency reporting."""

    p1: int = 1
    p2: int = 1
    clock_mhz: float = CLOCK_MHZ
    mac_lane_cap: int = 256  # max p1*p2 (DSP budget of the target device)

    def __post_init__(self):
        if self.p1 < 1:
            raise ValueError("p1 must be >= 1")
        if self.p2 not in ALLOWED_P2:
            raise ValueError(f"p2 must be one of {ALLOWED_P2}")
        if self.p2 > max_unroll():
            raise ValueError(f"p2 {self.p2} exceeds max unroll {max_unroll()}")
        if self.p1 * self.p2 > self.mac_lane_cap:
            raise ValueError(
                f"p1*p2 = {self.p1 * self.p2} exceeds resource cap {self.mac_lane_cap}")


@dataclass
class CycleReport:
    """Cycle accounting of one L-bit transaction."""

    seed_cycles: int
    decrypt_cycles: int
    clock_mhz: float = CLOCK_MHZ
    length: int = 0

    @property
    def total_cycles(self) -> int:
        return self.seed_cycles + self.decrypt_cycles

    @property
    def latency_us(self) -> float:
        return self.total_cycles / self.clock_mhz

    @property
    def decrypt_latency_us(self) -> float:
        return self.decrypt_cycles / self.clock_mhz

    @property
    def decrypt_cycles_per_bit(self) -> float:
        return self.decrypt_cycles / self.length if self.length else 0.0


@dataclass
class DeviceState:
    """Key (post key-reconstruction), self-incrementing counter and config.

    counter_static disables the counter advance; it exists only so the
    attack harness can demonstrate what the counter defends against.
    """

    key: SecretKey
    config: DatapathConfig = field(default_factory=DatapathConfig)
    counter: int = 0
    counter_static: bool = False
    params: Params = DEFAULT_PARAMS


CIPHERTEXT_BITS_PER_RESPONSE = DEFAULT_PARAMS.n * 8  # 160 bytes of a'


def cycles_per_bit(p2: int) -> int:
    """Modeled decrypt cycles for one response bit on one datapath."""
    steps = -(-CIPHERTEXT_BITS_PER_RESPONSE // p2)  # ceil(1280 / p2) lane steps
    if p2 >= 8:
        return C_MAC * steps + C_FIX
    # below one byte per cycle a single MAC stalls 8/p2 cycles per byte
    return round(C_SERIAL * steps) + C_FIX


def cycle_model(config: DatapathConfig, length: int) -> CycleReport:
    """Cycle accounting for an L-bit response under (P1, P2).

    Seed loads run in parallel across datapaths (each has its own LFSR);
    response bits are round-robin, so the decrypt phase takes
    ceil(L/P1) * cycles_per_bit(P2) wall cycles.
    """
    bits_per_path = -(-length // config.p1)
    return CycleReport(
        seed_cycles=SEED_LOAD_CYCLES,
        decrypt_cycles=bits_per_path * cycles_per_bit(config.p2),
        clock_mhz=config.clock_mhz,
        length=length,
    )


def respond(state: DeviceState, seed: bytes, b_prime: np.ndarray
            ) -> tuple[np.ndarray, CycleReport]:
    """Produce the L response bits for a compressed challenge (seed, b').

    Bit k is handled by datapath k mod P1, which absorbs the seed with
    counter t + (k mod P1) and expands 160 ciphertext bytes per handled bit;
    the response bit is quantize(b'_k - <a', s>).  The counter advances by
    P1 after the transaction unless counter_static is set.
    """
    b_prime = np.asarray(b_prime, dtype=np.uint8)
    if b_prime.ndim != 1 or b_prime.size < 1:
        raise ValueError("b_prime must be a nonempty vector")
    length = b_prime.size
    cfg = state.config
    a_mat = expand_response_streams(seed, state.counter, length, cfg.p1, state.params.n)
    dots = (a_mat.astype(np.int64) @ state.key.s.astype(np.int64)) & state.params.mask
    bits = quantize_vec((b_prime.astype(np.int64) - dots) & state.params.mask, state.params.q)
    if not state.counter_static:
        state.counter += cfg.p1
    return bits, cycle_model(cfg, length)


def latency_table(length: int = 128) -> dict:
    """Modeled decrypt latency [us] for every reference design point."""
    out = {}
    for (p1, p2), ref in REFERENCE_LATENCY_US_128.items():
        if ref is None:
            out[(p1, p2)] = None
            continue
        out[(p1, p2)] = cycle_model(DatapathConfig(p1=p1, p2=p2), length).decrypt_latency_us
    return out


def calibration_report(length: int = 128) -> list:
    """(p1, p2, modeled_us, reference_us, relative_error) per design point."""
    rows = []
    model = latency_table(length)
    for key, ref in REFERENCE_LATENCY_US_128.items():
        if ref is None:
            continue
        mod = model[key]
        rows.append((*key, mod, ref, (mod - ref) / ref))
    return rows
