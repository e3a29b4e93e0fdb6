"""Open Sound Control 1.0 over UDP: message codec, circuit service, client.

Protocol served by :class:`OscService`::

    -> /QuantumCircuit <qasm:s> [<shots:i>]
    <- /info <text:s>                     progress notes (zero or more)
    <- /counts <pairs:s>                  e.g. "00 517 11 507"
    <- /error <text:s>                    on any failure

Replies go to ``reply_port`` on the sender's host, or back to the sender's
own port when ``reply_to_source`` is set.
"""
from __future__ import annotations

import logging
import queue
import socket
import struct
import threading
import time
from dataclasses import dataclass
from typing import Optional, Union

from . import core
from .errors import ArgumentError, QacError, WireError
from .qasm import parse_qasm

log = logging.getLogger("qac.osc")

Arg = Union[int, float, str, bytes]
UDP_MAX = 65507
MAX_SHOTS = 1_000_000


@dataclass(frozen=True)
class OscMessage:
    address: str
    args: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))

    @property
    def typetags(self) -> str:
        return "," + "".join(_tag(a) for a in self.args)


def _tag(arg) -> str:
    if isinstance(arg, bool):
        raise WireError("booleans have no OSC 1.0 type tag")
    if isinstance(arg, int):
        return "i"
    if isinstance(arg, float):
        return "f"
    if isinstance(arg, str):
        return "s"
    if isinstance(arg, (bytes, bytearray)):
        return "b"
    raise WireError(f"cannot encode {type(arg).__name__} as an OSC argument")


def _pad(n: int) -> int:
    return (4 - n % 4) % 4


def _osc_string(text: str) -> bytes:
    raw = text.encode("utf-8")
    if b"\0" in raw:
        raise WireError("OSC strings cannot contain NUL")
    raw += b"\0"
    return raw + b"\0" * _pad(len(raw))


def _osc_blob(data: bytes) -> bytes:
    return struct.pack(">i", len(data)) + bytes(data) + b"\0" * _pad(len(data))


def encode_osc(message: OscMessage) -> bytes:
    if not message.address.startswith("/"):
        raise WireError(f"address {message.address!r} must start with '/'")
    out = [_osc_string(message.address), _osc_string(message.typetags)]
    for arg in message.args:
        tag = _tag(arg)
        if tag == "i":
            if not -(2**31) <= arg < 2**31:
                raise WireError(f"{arg} does not fit in int32")
            out.append(struct.pack(">i", arg))
        elif tag == "f":
            try:
                out.append(struct.pack(">f", arg))
            except OverflowError:
                raise WireError(f"{arg} does not fit in float32") from None
        elif tag == "s":
            out.append(_osc_string(arg))
        else:
            out.append(_osc_blob(arg))
    return b"".join(out)


def _read_string(data: bytes, pos: int) -> tuple[str, int]:
    end = data.find(b"\0", pos)
    if end < 0:
        raise WireError("unterminated OSC string")
    stop = end + 1 + _pad(end + 1 - pos)
    if stop > len(data):
        raise WireError("truncated string padding")
    if any(data[end:stop]):
        raise WireError("non-zero string padding")
    try:
        return data[pos:end].decode("utf-8"), stop
    except UnicodeDecodeError:
        raise WireError("OSC string is not valid UTF-8") from None


def decode_osc(data: bytes) -> OscMessage:
    data = bytes(data)
    if len(data) % 4:
        raise WireError(f"packet length {len(data)} is not a multiple of 4")
    address, pos = _read_string(data, 0)
    if not address.startswith("/"):
        raise WireError(f"address {address!r} must start with '/'")
    if pos >= len(data):
        return OscMessage(address)  # tolerated: no type tag string
    tags, pos = _read_string(data, pos)
    if not tags.startswith(","):
        raise WireError(f"type tag string {tags!r} must start with ','")
    args = []
    for tag in tags[1:]:
        if tag in "if":
            if pos + 4 > len(data):
                raise WireError("truncated argument")
            (value,) = struct.unpack_from(">i" if tag == "i" else ">f", data, pos)
            args.append(value)
            pos += 4
        elif tag == "s":
            value, pos = _read_string(data, pos)
            args.append(value)
        elif tag == "b":
            if pos + 4 > len(data):
                raise WireError("truncated blob size")
            (size,) = struct.unpack_from(">i", data, pos)
            stop = pos + 4 + size + _pad(size)
            if size < 0 or stop > len(data):
                raise WireError("truncated blob")
            args.append(data[pos + 4 : pos + 4 + size])
            pos = stop
        else:
            raise WireError(f"unsupported type tag {tag!r}")
    if pos != len(data):
        raise WireError(f"{len(data) - pos} trailing byte(s) after arguments")
    return OscMessage(address, tuple(args))


# -- service --------------------------------------------------------------------


@dataclass
class ServiceConfig:
    listen_port: int = 9000
    reply_port: int = 9001
    default_shots: int = 1024
    max_payload: int = 8192
    host: str = "127.0.0.1"
    seed: Optional[int] = None
    reply_to_source: bool = False
    queue_size: int = 64

    def __post_init__(self):
        for port in (self.listen_port, self.reply_port):
            if not 0 <= port <= 65535:
                raise ArgumentError(f"port {port} is out of range")
        if self.listen_port and self.listen_port == self.reply_port:
            raise ArgumentError("listen_port and reply_port must differ")
        if self.default_shots < 1 or not 0 < self.max_payload <= UDP_MAX:
            raise ArgumentError("default_shots must be >= 1 and max_payload within UDP limits")


def _counts_reply(config: ServiceConfig, msg: OscMessage) -> list[OscMessage]:
    if msg.address != "/QuantumCircuit":
        return [OscMessage("/error", (f"unknown address {msg.address}",))]
    args = msg.args
    if not args or not isinstance(args[0], str) or len(args) > 2:
        return [OscMessage("/error", ("usage: /QuantumCircuit <qasm:string> [<shots:int>]",))]
    shots = config.default_shots
    if len(args) == 2:
        if not isinstance(args[1], int) or not 1 <= args[1] <= MAX_SHOTS:
            return [OscMessage("/error", (f"shots must be an int in 1..{MAX_SHOTS}",))]
        shots = args[1]
    try:
        qc = parse_qasm(args[0])
        counts = core.sample_counts(qc, shots, core.make_rng(config.seed))
    except QacError as exc:
        return [OscMessage("/error", (str(exc),))]
    return [
        OscMessage("/info", (f"simulated {qc.num_qubits} qubit(s), {shots} shots",)),
        OscMessage("/counts", (core.format_counts(counts),)),
    ]


def handle_packet(config: ServiceConfig, packet: bytes) -> list[OscMessage]:
    """Replies for one datagram; never raises."""
    if len(packet) > config.max_payload:
        return [OscMessage("/error", (f"payload of {len(packet)} bytes exceeds {config.max_payload}",))]
    try:
        msg = decode_osc(packet)
    except WireError as exc:
        return [OscMessage("/error", (f"malformed packet: {exc}",))]
    return _counts_reply(config, msg)


class OscService:
    """UDP receive loop plus one worker; requests are handled in arrival order.

    When the bounded queue is full the oldest pending request is dropped.
    """

    def __init__(self, config: ServiceConfig):
        self.config = config
        self.sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        self.sock.bind((config.host, config.listen_port))
        self.sock.settimeout(0.1)
        self.port = self.sock.getsockname()[1]
        self._queue: queue.Queue = queue.Queue(maxsize=config.queue_size)
        self._stop = threading.Event()
        self._threads: list[threading.Thread] = []
        self.dropped = 0

    def _receive_loop(self):
        while not self._stop.is_set():
            try:
                packet, sender = self.sock.recvfrom(UDP_MAX + 1)
            except socket.timeout:
                continue
            except OSError:
                break
            while True:
                try:
                    self._queue.put_nowait((packet, sender))
                    break
                except queue.Full:
                    try:
                        self._queue.get_nowait()
                        self.dropped += 1
                    except queue.Empty:
                        pass

    def _work_loop(self):
        while not self._stop.is_set():
            try:
                packet, sender = self._queue.get(timeout=0.1)
            except queue.Empty:
                continue
            dest = sender if self.config.reply_to_source else (sender[0], self.config.reply_port)
            for reply in handle_packet(self.config, packet):
                if reply.address == "/error":
                    log.error("%s", reply.args[0])
                else:
                    log.info("%s %s", reply.address, reply.args[0])
                try:
                    self.sock.sendto(encode_osc(reply), dest)
                except OSError as exc:
                    log.error("reply to %s failed: %s", dest, exc)

    def start(self) -> "OscService":
        for target in (self._receive_loop, self._work_loop):
            t = threading.Thread(target=target, daemon=True)
            t.start()
            self._threads.append(t)
        log.info("listening on %s:%d", self.config.host, self.port)
        return self

    def stop(self):
        self._stop.set()
        for t in self._threads:
            t.join(timeout=1)
        self.sock.close()

    def serve_forever(self):
        self.start()
        try:
            while True:
                time.sleep(0.5)
        finally:
            self.stop()

    def __enter__(self):
        return self.start()

    def __exit__(self, *exc):
        self.stop()


def serve(config: ServiceConfig) -> None:
    OscService(config).serve_forever()


# -- client ---------------------------------------------------------------------


class RemoteError(QacError):
    """The service answered with /error."""


class OscClient:
    def __init__(self, target: tuple[str, int], reply_port: int = 0, host: str = "127.0.0.1"):
        self.target = target
        self.sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        self.sock.bind((host, reply_port))
        self.port = self.sock.getsockname()[1]

    def send(self, address: str, *args: Arg) -> None:
        self.sock.sendto(encode_osc(OscMessage(address, args)), self.target)

    def request(self, qasm: str, shots: Optional[int] = None, timeout_ms: int = 1000) -> dict[str, int]:
        args = (qasm,) if shots is None else (qasm, int(shots))
        self.send("/QuantumCircuit", *args)
        deadline = time.monotonic() + timeout_ms / 1000
        while True:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise TimeoutError(f"no reply from {self.target} within {timeout_ms} ms")
            self.sock.settimeout(remaining)
            try:
                packet, _ = self.sock.recvfrom(UDP_MAX + 1)
            except (socket.timeout, ConnectionRefusedError):
                continue
            msg = decode_osc(packet)
            if msg.address == "/counts":
                return core.parse_counts(msg.args[0])
            if msg.address == "/error":
                raise RemoteError(msg.args[0] if msg.args else "unknown error")

    def close(self):
        self.sock.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def client_request(target, qasm, shots=None, timeout_ms=1000, reply_port=0) -> dict[str, int]:
    with OscClient(target, reply_port) as client:
        return client.request(qasm, shots, timeout_ms)
