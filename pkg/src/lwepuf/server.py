"""Server-side lifecycle: enrollment, CRP database, authentication.

Each device record holds the reconstructed secret key, helper data, the
datapath configuration and an ordered store of one-time L-bit CRPs.  CRPs
are consumed strictly in order and marked used before anything is sent, so
every error path costs a CRP and can never produce an accept.

Database file layout (one device per file, integers big-endian):

    header:  magic(8) | id_len(2) | device_id | p1(2) | p2(2) |
             clock_mhz f64(8) | next_counter(8) | L(2) |
             key s(160) | helper(795)
    record:  seed(32) | counter(8) | b_prime(L) | r(ceil(L/8)) | used(1)

Records are append-only; consuming a CRP rewrites only its used-flag byte.
"""

import os
import struct
from dataclasses import dataclass, field

import numpy as np

from .core import Params, DEFAULT_PARAMS, SecretKey, key_from_s
from .crpgen import LbitCrp, gen_lbit_crp
from .device import DatapathConfig
from .fe import HelperData, PokArray, fe_gen, HELPER_BYTES
from .sampler import Rng
from .wire import Challenge, Response, Resync, Result, WireError, unpack_bits

MAGIC = b"LWEPUFDB"


class CrpStoreExhausted(Exception):
    """No unused CRP left for the device."""


class DuplicateDevice(Exception):
    """A device with this id is already enrolled."""


@dataclass(frozen=True)
class AuthPolicy:
    """Response length and the Hamming-distance acceptance threshold."""

    length: int = 100
    threshold: int = None

    def __post_init__(self):
        if self.threshold is None:
            object.__setattr__(self, "threshold", self.length // 4)
        if not 0 < self.threshold < self.length / 2:
            raise ValueError("threshold must be in (0, L/2)")


@dataclass
class DeviceRecord:
    """Per-device server state; optionally bound to a database file."""

    device_id: str
    key: SecretKey
    helper: HelperData
    config: DatapathConfig
    next_counter: int = 0
    crps: list = field(default_factory=list)
    params: Params = DEFAULT_PARAMS
    path: str = None
    _sent: set = field(default_factory=set, repr=False)

    @property
    def remaining(self) -> int:
        """Number of unused CRPs (possible further authentications)."""
        return sum(1 for c in self.crps if not c.used)

    def generate_crps(self, count: int, length: int, rng: Rng) -> None:
        """Append `count` fresh L-bit CRPs with sequential counter values."""
        for _ in range(count):
            crp = gen_lbit_crp(self.key, length, rng.bytes(32), self.next_counter,
                               self.config.p1, self.params, rng)
            self.next_counter += self.config.p1
            self.crps.append(crp)
            if self.path is not None:
                _append_crp(self.path, crp)
        if self.path is not None:
            _rewrite_next_counter(self.path, self.next_counter)

    def next_unused(self) -> int:
        for i, crp in enumerate(self.crps):
            if not crp.used:
                return i
        raise CrpStoreExhausted(self.device_id)

    def consume(self, index: int) -> LbitCrp:
        """Mark a CRP used (in memory and on disk) before it goes on the wire."""
        crp = self.crps[index]
        assert not crp.used and index not in self._sent, "CRP reuse attempted"
        crp.used = True
        self._sent.add(index)
        if self.path is not None:
            _rewrite_used_flag(self.path, index, self.crps[0].length)
        return crp


def enroll_record(device_id: str, pok: PokArray, config: DatapathConfig,
                  rng: Rng, policy: AuthPolicy = AuthPolicy(),
                  batch: int = 16, params: Params = DEFAULT_PARAMS,
                  path: str = None) -> DeviceRecord:
    """One-time enrollment: run FE.Gen on the POK truth bits, store key and
    helper data, pre-generate a batch of CRPs."""
    key, helper = fe_gen(pok, rng)
    record = DeviceRecord(device_id=device_id, key=key, helper=helper,
                          config=config, params=params, path=path)
    if path is not None:
        if os.path.exists(path):
            raise DuplicateDevice(f"record file already exists: {path}")
        _write_header(path, record, policy.length)
    record.generate_crps(batch, policy.length, rng)
    return record


class ServerDb:
    """In-memory registry of device records keyed by device id."""

    def __init__(self):
        self.records: dict[str, DeviceRecord] = {}

    def enroll(self, device_id: str, pok: PokArray, config: DatapathConfig,
               rng: Rng, policy: AuthPolicy = AuthPolicy(), batch: int = 16,
               params: Params = DEFAULT_PARAMS, path: str = None) -> DeviceRecord:
        if device_id in self.records:
            raise DuplicateDevice(device_id)
        record = enroll_record(device_id, pok, config, rng, policy, batch, params, path)
        self.records[device_id] = record
        return record


def hamming(a: np.ndarray, b: np.ndarray) -> int:
    return int(np.count_nonzero(np.asarray(a) != np.asarray(b)))


def authenticate(record: DeviceRecord, policy: AuthPolicy, channel) -> bool:
    """One authentication transaction over an established channel.

    The next unused CRP is consumed up front; any transport error or resync
    reply is recorded as a reject.  Accept iff HD(response, stored r) < th.
    """
    index = record.next_unused()
    crp = record.consume(index)
    accept = False
    try:
        channel.send_msg(Challenge(seed=crp.seed, counter=crp.counter,
                                   b_prime=crp.b_prime,
                                   helper=record.helper.to_bytes()))
        reply = channel.recv_msg()
        if isinstance(reply, Response):
            bits = unpack_bits(reply.r_bytes, crp.length)
            accept = hamming(bits, crp.r) < policy.threshold
        elif isinstance(reply, Resync):
            _skip_stale(record, reply.counter)
        else:
            raise WireError(f"unexpected reply {type(reply).__name__}")
        channel.send_msg(Result(accept=accept))
    except WireError:
        accept = False
    return accept


def resync(record: DeviceRecord, channel) -> int:
    """Probe the device counter and skip CRPs the device can no longer accept."""
    channel.send_msg(Resync(counter=record.next_counter))
    reply = channel.recv_msg()
    if not isinstance(reply, Resync):
        raise WireError(f"expected resync reply, got {type(reply).__name__}")
    _skip_stale(record, reply.counter)
    return reply.counter


def _skip_stale(record: DeviceRecord, device_counter: int) -> None:
    for i, crp in enumerate(record.crps):
        if not crp.used and crp.counter < device_counter:
            record.consume(i)


# --- database file plumbing -------------------------------------------------

def _header_bytes(record: DeviceRecord, length: int) -> bytes:
    ident = record.device_id.encode("utf-8")
    return (MAGIC + struct.pack(">H", len(ident)) + ident
            + struct.pack(">HHdQH", record.config.p1, record.config.p2,
                          record.config.clock_mhz, record.next_counter, length)
            + record.key.s.tobytes() + record.helper.to_bytes())


def _record_size(length: int) -> int:
    return 32 + 8 + length + (length + 7) // 8 + 1


def _write_header(path: str, record: DeviceRecord, length: int) -> None:
    with open(path, "xb") as fh:
        fh.write(_header_bytes(record, length))


def _header_size(path: str) -> tuple[int, dict]:
    with open(path, "rb") as fh:
        head = fh.read(10)
        if head[:8] != MAGIC:
            raise ValueError(f"not a device record file: {path}")
        (id_len,) = struct.unpack(">H", head[8:10])
        ident = fh.read(id_len).decode("utf-8")
        p1, p2, clock, next_counter, length = struct.unpack(">HHdQH", fh.read(22))
        key_s = np.frombuffer(fh.read(160), dtype=np.uint8)
        helper = fh.read(HELPER_BYTES)
    meta = dict(device_id=ident, p1=p1, p2=p2, clock=clock,
                next_counter=next_counter, length=length, key_s=key_s, helper=helper)
    return 10 + id_len + 22 + 160 + HELPER_BYTES, meta


def _append_crp(path: str, crp: LbitCrp) -> None:
    with open(path, "ab") as fh:
        fh.write(crp.seed + struct.pack(">Q", crp.counter)
                 + crp.b_prime.tobytes()
                 + np.packbits(crp.r, bitorder="little").tobytes()
                 + bytes([1 if crp.used else 0]))


def _rewrite_next_counter(path: str, next_counter: int) -> None:
    with open(path, "r+b") as fh:
        fh.seek(8)
        (id_len,) = struct.unpack(">H", fh.read(2))
        fh.seek(10 + id_len + 12)
        fh.write(struct.pack(">Q", next_counter))


def _rewrite_used_flag(path: str, index: int, length: int) -> None:
    header, _ = _header_size(path)
    with open(path, "r+b") as fh:
        fh.seek(header + (index + 1) * _record_size(length) - 1)
        fh.write(b"\x01")


def load_record(path: str, params: Params = DEFAULT_PARAMS) -> DeviceRecord:
    """Load a device record (including the used-watermark) from disk."""
    header, meta = _header_size(path)
    length = meta["length"]
    rec_size = _record_size(length)
    crps = []
    with open(path, "rb") as fh:
        fh.seek(header)
        while True:
            raw = fh.read(rec_size)
            if not raw:
                break
            if len(raw) != rec_size:
                raise ValueError(f"truncated CRP record in {path}")
            counter = struct.unpack(">Q", raw[32:40])[0]
            b_prime = np.frombuffer(raw[40:40 + length], dtype=np.uint8).copy()
            r_bytes = raw[40 + length:40 + length + (length + 7) // 8]
            r = np.unpackbits(np.frombuffer(r_bytes, dtype=np.uint8),
                              bitorder="little")[:length]
            crps.append(LbitCrp(seed=raw[:32], counter=counter, b_prime=b_prime,
                                r=r, used=raw[-1] == 1))
    record = DeviceRecord(
        device_id=meta["device_id"], key=key_from_s(meta["key_s"], params),
        helper=HelperData.from_bytes(meta["helper"]),
        config=DatapathConfig(p1=meta["p1"], p2=meta["p2"], clock_mhz=meta["clock"]),
        next_counter=meta["next_counter"], crps=crps, params=params, path=path)
    record._sent = {i for i, c in enumerate(crps) if c.used}
    return record
