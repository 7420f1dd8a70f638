"""Framed byte protocol between server and device, plus transports.

Frame layout: 4-byte big-endian payload length, 1 msg-type byte, payload.
Message payloads (all integers big-endian):

    CHALLENGE  seed(32) | counter(8) | L(2) | b_prime(L) | helper(795)
    RESPONSE   response bits, ceil(L/8) bytes, LSB-first within each byte
    RESULT     1 byte, 1 = accept
    RESYNC     counter(8)

The loopback transport runs both ends in one process over in-memory queues
and produces byte-identical frame traces to the socket transport.  Every
error path aborts the transaction; no error can produce an accept.
"""

import queue
import socket
import struct
import threading
from dataclasses import dataclass, field

import numpy as np

from .core import Params, DEFAULT_PARAMS, SecretKey
from .device import DatapathConfig, DeviceState, respond
from .fe import PokArray, HelperData, pok_read, fe_rec
from .sampler import Rng

MSG_CHALLENGE = 1
MSG_RESPONSE = 2
MSG_RESULT = 3
MSG_RESYNC = 4

MAX_PAYLOAD = 64 * 1024
HELPER_LEN = 795
SEED_LEN = 32


class WireError(Exception):
    """Malformed frame or transport failure; always treated as a reject."""


@dataclass(frozen=True)
class Challenge:
    seed: bytes
    counter: int
    b_prime: np.ndarray  # uint8[L]
    helper: bytes

    def __eq__(self, other):
        if not isinstance(other, Challenge):
            return NotImplemented
        return (self.seed == other.seed and self.counter == other.counter
                and self.helper == other.helper
                and np.array_equal(self.b_prime, other.b_prime))


@dataclass(frozen=True)
class Response:
    r_bytes: bytes  # packed response bits


@dataclass(frozen=True)
class Result:
    accept: bool


@dataclass(frozen=True)
class Resync:
    counter: int


def pack_bits(bits: np.ndarray) -> bytes:
    return np.packbits(np.asarray(bits, dtype=np.uint8), bitorder="little").tobytes()


def unpack_bits(raw: bytes, count: int) -> np.ndarray:
    bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")
    if bits.size < count:
        raise WireError("response too short")
    return bits[:count]


def encode_msg(msg) -> bytes:
    """Serialize a message into one frame."""
    if isinstance(msg, Challenge):
        if len(msg.seed) != SEED_LEN:
            raise ValueError("seed must be 32 bytes")
        if len(msg.helper) != HELPER_LEN:
            raise ValueError("helper must be 795 bytes")
        body = (msg.seed + struct.pack(">QH", msg.counter, msg.b_prime.size)
                + msg.b_prime.astype(np.uint8).tobytes() + msg.helper)
        mtype = MSG_CHALLENGE
    elif isinstance(msg, Response):
        body, mtype = bytes(msg.r_bytes), MSG_RESPONSE
    elif isinstance(msg, Result):
        body, mtype = bytes([1 if msg.accept else 0]), MSG_RESULT
    elif isinstance(msg, Resync):
        body, mtype = struct.pack(">Q", msg.counter), MSG_RESYNC
    else:
        raise TypeError(f"not a wire message: {msg!r}")
    if len(body) > MAX_PAYLOAD:
        raise WireError(f"payload {len(body)} exceeds {MAX_PAYLOAD}")
    return struct.pack(">IB", len(body), mtype) + body


def decode_msg(frame: bytes):
    """Parse one frame back into a message; raises WireError on any defect."""
    if len(frame) < 5:
        raise WireError("truncated frame header")
    length, mtype = struct.unpack(">IB", frame[:5])
    if length > MAX_PAYLOAD:
        raise WireError(f"payload length {length} exceeds {MAX_PAYLOAD}")
    body = frame[5:]
    if len(body) != length:
        raise WireError(f"payload length mismatch: header {length}, got {len(body)}")
    if mtype == MSG_CHALLENGE:
        if len(body) < SEED_LEN + 10 + HELPER_LEN:
            raise WireError("challenge too short")
        seed = body[:SEED_LEN]
        counter, L = struct.unpack(">QH", body[SEED_LEN:SEED_LEN + 10])
        rest = body[SEED_LEN + 10:]
        if len(rest) != L + HELPER_LEN:
            raise WireError("challenge field lengths inconsistent")
        b_prime = np.frombuffer(rest[:L], dtype=np.uint8).copy()
        return Challenge(seed=seed, counter=counter, b_prime=b_prime,
                         helper=rest[L:])
    if mtype == MSG_RESPONSE:
        return Response(r_bytes=body)
    if mtype == MSG_RESULT:
        if len(body) != 1:
            raise WireError("result payload must be 1 byte")
        return Result(accept=body[0] == 1)
    if mtype == MSG_RESYNC:
        if len(body) != 8:
            raise WireError("resync payload must be 8 bytes")
        return Resync(counter=struct.unpack(">Q", body)[0])
    raise WireError(f"unknown message type {mtype}")


class Channel:
    """Message channel with a frame trace (('send'|'recv', frame_bytes))."""

    def __init__(self):
        self.trace: list = []

    def _write(self, frame: bytes):
        raise NotImplementedError

    def _read(self) -> bytes:
        raise NotImplementedError

    def send_msg(self, msg):
        frame = encode_msg(msg)
        self.trace.append(("send", frame))
        self._write(frame)

    def recv_msg(self):
        frame = self._read()
        self.trace.append(("recv", frame))
        return decode_msg(frame)

    def close(self):
        pass


class LoopbackChannel(Channel):
    def __init__(self, inbox: queue.Queue, outbox: queue.Queue, timeout: float = 10.0):
        super().__init__()
        self._inbox, self._outbox, self._timeout = inbox, outbox, timeout

    def _write(self, frame: bytes):
        self._outbox.put(frame)

    def _read(self) -> bytes:
        try:
            frame = self._inbox.get(timeout=self._timeout)
        except queue.Empty:
            raise WireError("loopback peer silent") from None
        if frame is None:
            raise WireError("loopback peer closed")
        return frame

    def close(self):
        self._outbox.put(None)


def loopback_pair(timeout: float = 10.0) -> tuple[LoopbackChannel, LoopbackChannel]:
    q_ab, q_ba = queue.Queue(), queue.Queue()
    return LoopbackChannel(q_ba, q_ab, timeout), LoopbackChannel(q_ab, q_ba, timeout)


class SocketChannel(Channel):
    def __init__(self, sock: socket.socket):
        super().__init__()
        self._sock = sock

    def _write(self, frame: bytes):
        try:
            self._sock.sendall(frame)
        except OSError as exc:
            raise WireError(f"send failed: {exc}") from exc

    def _read_exact(self, count: int) -> bytes:
        buf = b""
        while len(buf) < count:
            try:
                chunk = self._sock.recv(count - len(buf))
            except OSError as exc:
                raise WireError(f"recv failed: {exc}") from exc
            if not chunk:
                raise WireError("connection closed mid-frame")
            buf += chunk
        return buf

    def _read(self) -> bytes:
        header = self._read_exact(5)
        length, _ = struct.unpack(">IB", header)
        if length > MAX_PAYLOAD:
            raise WireError(f"payload length {length} exceeds {MAX_PAYLOAD}")
        return header + self._read_exact(length)

    def close(self):
        try:
            self._sock.close()
        except OSError:
            pass


@dataclass
class ProtocolDevice:
    """Device-side protocol actor: datapath config, counter, key source.

    With a POK attached the key is reconstructed from a fresh noisy read and
    the helper data of each incoming challenge; otherwise the fixed key is
    used directly (ideal reconstruction).
    """

    config: DatapathConfig = field(default_factory=DatapathConfig)
    key: SecretKey = None
    pok: PokArray = None
    rng: Rng = None
    counter: int = 0
    counter_static: bool = False
    params: Params = DEFAULT_PARAMS

    def _resolve_key(self, helper_bytes: bytes):
        if self.pok is None:
            return self.key
        helper = HelperData.from_bytes(helper_bytes)
        return fe_rec(pok_read(self.pok, self.rng), helper)


def device_transaction(dev: ProtocolDevice, channel: Channel) -> bool:
    """Run one transaction on the device side; returns the server verdict.

    A challenge counter below the device's own indicates a replay and is
    answered with a resync message instead of a response.  A failed key
    reconstruction aborts the transaction (fail closed).
    """
    msg = channel.recv_msg()
    if isinstance(msg, Resync):
        channel.send_msg(Resync(counter=dev.counter))
        return False
    if not isinstance(msg, Challenge):
        raise WireError(f"expected challenge, got {type(msg).__name__}")
    if msg.counter < dev.counter:
        channel.send_msg(Resync(counter=dev.counter))
        return False
    dev.counter = msg.counter  # fast-forward to the public counter
    key = dev._resolve_key(msg.helper)
    if key is None:
        channel.close()
        raise WireError("key reconstruction failed")
    state = DeviceState(key=key, config=dev.config, counter=dev.counter,
                        counter_static=dev.counter_static, params=dev.params)
    bits, _ = respond(state, msg.seed, msg.b_prime)
    dev.counter = state.counter
    channel.send_msg(Response(r_bytes=pack_bits(bits)))
    verdict = channel.recv_msg()
    if not isinstance(verdict, Result):
        raise WireError(f"expected result, got {type(verdict).__name__}")
    return verdict.accept


def loopback_authenticate(record, policy, dev: ProtocolDevice):
    """One full transaction in-process; returns (accept, server_ch, device_ch)."""
    from .server import authenticate

    server_ch, device_ch = loopback_pair()
    outcome = {}

    def run_device():
        try:
            outcome["device"] = device_transaction(dev, device_ch)
        except WireError as exc:
            outcome["device_error"] = exc

    worker = threading.Thread(target=run_device)
    worker.start()
    accept = authenticate(record, policy, server_ch)
    worker.join(timeout=10.0)
    return accept, server_ch, device_ch


def _parse_endpoint(endpoint: str) -> tuple[str, int]:
    host, _, port = endpoint.rpartition(":")
    return host or "127.0.0.1", int(port)


def serve(record, policy, endpoint: str, max_transactions: int = 1,
          channel_log: list = None) -> list:
    """Accept connections and run one authentication per connection.

    channel_log, when given, collects the server-side channels so callers
    can inspect frame traces.
    """
    from .server import authenticate

    host, port = _parse_endpoint(endpoint)
    results = []
    with socket.create_server((host, port)) as listener:
        listener.settimeout(30.0)
        for _ in range(max_transactions):
            conn, _addr = listener.accept()
            channel = SocketChannel(conn)
            if channel_log is not None:
                channel_log.append(channel)
            try:
                results.append(authenticate(record, policy, channel))
            finally:
                channel.close()
    return results


def connect_device(dev: ProtocolDevice, endpoint: str) -> bool:
    """Connect to a server and run one transaction as the device."""
    host, port = _parse_endpoint(endpoint)
    with socket.create_connection((host, port), timeout=30.0) as sock:
        channel = SocketChannel(sock)
        return device_transaction(dev, channel)
