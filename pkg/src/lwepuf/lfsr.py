"""256-bit Fibonacci LFSR: serial stepping, seed absorption, unrolled stepping.

Register bits are X_255 .. X_0 with feedback taps at {255, 253, 250, 245}.
One serial step emits X_255, shifts every bit up one position and inserts
the feedback bit X_255 ^ X_253 ^ X_250 ^ X_245 at X_0.

Unrolling by a factor u computes the u feedback bits of u consecutive
cycles combinationally from the original register, shifts by u positions
and emits u output bits at once.  This is possible as long as no feedback
computation would need a register bit that another feedback bit of the same
batch has already replaced; the lowest tap position therefore bounds the
unroll factor.
"""

from dataclasses import dataclass, field

import numpy as np

REG_BITS = 256
TAPS = (255, 253, 250, 245)
COUNTER_BITS = 64

_POW2 = np.array([1, 4, 8, 16, 32, 64, 128], dtype=np.int64)


def max_unroll(taps=TAPS) -> int:
    """Largest supported unroll factor for a tap set.

    Basic unrolling needs every tap read of every batched cycle to land on an
    original register bit, which caps the factor at lowest_tap + 1.  Unroll
    factors are powers of two (the datapath consumes whole bytes), so the
    limit is the largest power of two not exceeding that bound.
    """
    bound = min(taps) + 1
    return int(_POW2[_POW2 <= bound].max())


@dataclass
class LfsrState:
    """Mutable LFSR register; single-owner, clone() for parallel use."""

    reg: np.ndarray                 # uint8[256], reg[i] = X_i
    taps: tuple = TAPS
    pad_applied: bool = field(default=False)

    def clone(self) -> "LfsrState":
        return LfsrState(self.reg.copy(), self.taps, self.pad_applied)


def _absorb_bits(reg: np.ndarray, bits: np.ndarray, taps) -> None:
    # serial shift-in with the input bit XOR-ed into the feedback path
    for b in bits:
        fb = b
        for t in taps:
            fb ^= reg[t]
        reg[1:] = reg[:-1]
        reg[0] = fb


def _seed_bits(seed) -> np.ndarray:
    if isinstance(seed, (bytes, bytearray)):
        if len(seed) != REG_BITS // 8:
            raise ValueError(f"seed must be {REG_BITS // 8} bytes")
        return np.unpackbits(np.frombuffer(bytes(seed), dtype=np.uint8), bitorder="little")
    arr = np.asarray(seed, dtype=np.uint8)
    if arr.shape != (REG_BITS,):
        raise ValueError(f"seed must be {REG_BITS} bits or {REG_BITS // 8} bytes")
    return arr


# any nonzero shift-in rescues the all-zero fixed point of the linear map
_ZERO_STATE_PAD = np.unpackbits(np.array([0xA5], dtype=np.uint8), bitorder="little")

# absorption is linear over GF(2): cache the matrix mapping the 320 input
# bits to the final register, one column per basis input
_ABSORB_BASIS: dict = {}


def _absorb_basis(taps) -> np.ndarray:
    basis = _ABSORB_BASIS.get(taps)
    if basis is None:
        total = REG_BITS + COUNTER_BITS
        basis = np.zeros((REG_BITS, total), dtype=np.uint8)
        for j in range(total):
            reg = np.zeros(REG_BITS, dtype=np.uint8)
            unit = np.zeros(total, dtype=np.uint8)
            unit[j] = 1
            _absorb_bits(reg, unit, taps)
            basis[:, j] = reg
        _ABSORB_BASIS[taps] = basis
    return basis


def _counter_bits(counter: int) -> np.ndarray:
    if not 0 <= counter < 1 << COUNTER_BITS:
        raise ValueError("counter must fit in 64 bits")
    return np.unpackbits(
        np.frombuffer(counter.to_bytes(COUNTER_BITS // 8, "little"), dtype=np.uint8),
        bitorder="little",
    )


def absorb(seed, counter: int, taps=TAPS) -> LfsrState:
    """Initialize the register by serially shifting in seed || counter.

    The seed is 256 bits (byte 0 first, LSB of each byte first), followed by
    the 64 counter bits LSB-first, each XOR-ed into the feedback path of one
    shift cycle.  Starting register is all-zero; if the result is the
    degenerate all-zero state, a fixed nonzero pad is absorbed as well and
    the event is recorded on the returned state.
    """
    bits = np.concatenate([_seed_bits(seed), _counter_bits(counter)])
    reg = (_absorb_basis(taps) @ bits) & 1  # uint8 sum wraps mod 256, parity survives
    state = LfsrState(reg=reg.astype(np.uint8), taps=taps)
    if not state.reg.any():
        _absorb_bits(state.reg, _ZERO_STATE_PAD, taps)
        state.pad_applied = True
    return state


def step_serial(state: LfsrState) -> int:
    """One serial step: emit X_255, shift, insert the feedback bit at X_0."""
    reg = state.reg
    out = int(reg[REG_BITS - 1])
    fb = np.uint8(0)
    for t in state.taps:
        fb ^= reg[t]
    reg[1:] = reg[:-1]
    reg[0] = fb
    return out


def step_unrolled(state: LfsrState, u: int) -> np.ndarray:
    """u serial steps computed combinationally; identical output and end state.

    Output bit k of the batch is the bit a serial LFSR would emit on cycle
    k+1, i.e. the original X_{255-k}.  Feedback bit k is the XOR of the
    original bits at (tap - k) for each tap.
    """
    limit = max_unroll(state.taps)
    if not 1 <= u <= limit:
        raise ValueError(f"unroll factor {u} out of range 1..{limit}")
    reg = state.reg
    outs = reg[REG_BITS - u:][::-1].copy()
    fb = np.zeros(u, dtype=np.uint8)
    for t in state.taps:
        fb ^= reg[t - u + 1: t + 1][::-1]
    reg[u:] = reg[:-u].copy()
    reg[:u] = fb[::-1]
    return outs


def expand(state: LfsrState, byte_count: int, unroll: int = 128) -> np.ndarray:
    """Emit byte_count bytes from the stream; first emitted bit is the LSB
    of the first byte.  The unroll factor only affects speed, never output."""
    if byte_count < 0:
        raise ValueError("byte_count must be >= 0")
    if byte_count == 0:
        return np.zeros(0, dtype=np.uint8)
    nbits = byte_count * 8
    chunks = []
    emitted = 0
    while emitted < nbits:
        chunks.append(step_unrolled(state, min(unroll, max_unroll(state.taps))))
        emitted += chunks[-1].size
    bits = np.concatenate(chunks)[:nbits]
    return np.packbits(bits, bitorder="little")


# --- batched variants: same streams, vectorized across independent states ---

def absorb_batch(seeds, counters, taps=TAPS) -> np.ndarray:
    """Absorb many seed||counter pairs at once; returns (k, 256) registers.

    Row i equals absorb(seeds[i], counters[i]).reg (including the degenerate
    all-zero pad rule).
    """
    seed_rows = np.stack([_seed_bits(s) for s in seeds])
    ctr_rows = np.stack([_counter_bits(int(c)) for c in counters])
    bits = np.concatenate([seed_rows, ctr_rows], axis=1)
    regs = ((bits @ _absorb_basis(taps).T) & 1).astype(np.uint8)
    dead = ~regs.any(axis=1)
    for i in np.nonzero(dead)[0]:
        _absorb_bits(regs[i], _ZERO_STATE_PAD, taps)
    return regs


def expand_batch(regs: np.ndarray, byte_count: int, taps=TAPS) -> np.ndarray:
    """Emit byte_count stream bytes from every register row; (k, byte_count)."""
    if byte_count == 0:
        return np.zeros((regs.shape[0], 0), dtype=np.uint8)
    u = max_unroll(taps)
    nbits = byte_count * 8
    chunks = []
    emitted = 0
    while emitted < nbits:
        outs = regs[:, REG_BITS - u:][:, ::-1].copy()
        fb = np.zeros((regs.shape[0], u), dtype=np.uint8)
        for t in taps:
            fb ^= regs[:, t - u + 1: t + 1][:, ::-1]
        regs[:, u:] = regs[:, :-u].copy()
        regs[:, :u] = fb[:, ::-1]
        chunks.append(outs)
        emitted += u
    bits = np.concatenate(chunks, axis=1)[:, :nbits]
    return np.packbits(bits, axis=1, bitorder="little")


def expand_response_streams(seed, counter: int, length: int, p1: int = 1,
                            n: int = 160) -> np.ndarray:
    """Ciphertext vectors a'_1..a'_L as produced by p1 parallel datapaths.

    Datapath d absorbs seed with counter value counter+d and handles response
    bits d, d+p1, d+2*p1, ...; each handled bit consumes the next n bytes of
    that datapath's stream.  Returns a (length, n) uint8 matrix.  The server
    mirrors this layout when generating CRPs for a (P1, P2) device.
    """
    if length < 1 or p1 < 1:
        raise ValueError("length and p1 must be >= 1")
    paths = min(p1, length)
    regs = absorb_batch([seed] * paths, [counter + d for d in range(paths)])
    out = np.empty((length, n), dtype=np.uint8)
    per_path = [len(range(d, length, p1)) for d in range(paths)]
    streams = expand_batch(regs, max(per_path) * n)
    for d in range(paths):
        out[d::p1] = streams[d, : per_path[d] * n].reshape(per_path[d], n)
    return out
