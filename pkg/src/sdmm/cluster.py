"""Coordinator/worker mode over TCP with a length-prefixed binary protocol.

Every message is one frame: the magic "SDMM", a version byte, a message type
byte, a 4-byte little-endian payload length, then the payload.  Matrices
travel row-major as interleaved re/im IEEE binary64 pairs, little-endian.
Workers are stateless: they answer PING and compute the payloads of one TASK
at a time; the coordinator fans shares out to one worker per index and
decodes as soon as enough responses are back, treating the rest as
stragglers.
"""

import socket
import socketserver
import struct
import threading
import time
from dataclasses import dataclass
from queue import Empty, Queue

import numpy as np

from .schemes import (
    REAL_IDS,
    SCHEME_IDS,
    DFT_IDS,
    INNER_IDS,
    InsufficientResponsesError,
    SchemeParams,
    WorkerResponse,
    decode,
    encode,
    worker_compute,
)

MAGIC = b"SDMM"
VERSION = 1
MSG_TASK, MSG_RESULT, MSG_ERROR, MSG_PING, MSG_PONG = 1, 2, 3, 4, 5
ERR_MALFORMED, ERR_OVERSIZED = 1, 2
MAX_PAYLOAD = 256 * 1024 * 1024

HEADER = struct.Struct("<4sBBI")
TASK_FIXED = struct.Struct("<BHB")
RESULT_FIXED = struct.Struct("<HB")
DIMS = struct.Struct("<II")

SCHEME_WIRE_IDS = {scheme: i + 1 for i, scheme in enumerate(SCHEME_IDS)}
WIRE_SCHEME_IDS = {i: s for s, i in SCHEME_WIRE_IDS.items()}

FLAG_CONJUGATE_PATH = 0x01


class FrameError(ValueError):
    """A malformed (code 1) or oversized (code 2) frame or payload."""

    def __init__(self, message: str, code: int = ERR_MALFORMED):
        self.code = code
        super().__init__(message)


@dataclass(frozen=True)
class Frame:
    msg_type: int
    payload: bytes


def encode_frame(msg_type: int, payload: bytes = b"") -> bytes:
    if len(payload) > MAX_PAYLOAD:
        raise FrameError(f"payload of {len(payload)} bytes exceeds the cap", ERR_OVERSIZED)
    return HEADER.pack(MAGIC, VERSION, msg_type, len(payload)) + payload


def _recvall(sock: socket.socket, length: int) -> bytes:
    chunks = []
    remaining = length
    while remaining:
        chunk = sock.recv(remaining)
        if not chunk:
            raise FrameError("connection closed mid-frame")
        chunks.append(chunk)
        remaining -= len(chunk)
    return b"".join(chunks)


def read_frame(sock: socket.socket, max_payload: int = MAX_PAYLOAD):
    """The next frame from a socket, or None on a clean end of stream."""
    first = sock.recv(1)
    if not first:
        return None
    header = first + _recvall(sock, HEADER.size - 1)
    magic, version, msg_type, length = HEADER.unpack(header)
    if magic != MAGIC:
        raise FrameError(f"bad magic {magic!r}")
    if version != VERSION:
        raise FrameError(f"unsupported version {version}")
    if length > max_payload:
        raise FrameError(f"payload of {length} bytes exceeds the cap", ERR_OVERSIZED)
    return Frame(msg_type, _recvall(sock, length))


def write_frame(sock: socket.socket, msg_type: int, payload: bytes = b"") -> None:
    sock.sendall(encode_frame(msg_type, payload))


def _pack_matrix(m: np.ndarray) -> bytes:
    m = np.ascontiguousarray(m, dtype="<c16")
    return DIMS.pack(m.shape[0], m.shape[1]) + m.tobytes()


def _unpack_matrix(payload: bytes, offset: int):
    if offset + DIMS.size > len(payload):
        raise FrameError("matrix header truncated")
    rows, cols = DIMS.unpack_from(payload, offset)
    offset += DIMS.size
    nbytes = rows * cols * 16
    if offset + nbytes > len(payload):
        raise FrameError("matrix data truncated")
    data = np.frombuffer(payload, dtype="<c16", count=rows * cols, offset=offset)
    return data.reshape(rows, cols).copy(), offset + nbytes


@dataclass(frozen=True)
class TaskPayload:
    """One worker's assignment: its shares and whether to add the conjugate path."""

    scheme_id: str
    worker_index: int
    conjugate_path: bool
    a_share: np.ndarray
    b_share: np.ndarray


def encode_task(scheme_id: str, worker_index: int, a_share, b_share) -> bytes:
    scheme_id = scheme_id.lower()
    flags = FLAG_CONJUGATE_PATH if scheme_id in REAL_IDS - INNER_IDS else 0
    head = TASK_FIXED.pack(SCHEME_WIRE_IDS[scheme_id], worker_index, flags)
    return head + _pack_matrix(a_share) + _pack_matrix(b_share)


def decode_task(payload: bytes) -> TaskPayload:
    if len(payload) < TASK_FIXED.size:
        raise FrameError("task payload truncated")
    wire_id, worker_index, flags = TASK_FIXED.unpack_from(payload, 0)
    scheme_id = WIRE_SCHEME_IDS.get(wire_id)
    if scheme_id is None:
        raise FrameError(f"unknown scheme id {wire_id}")
    conjugate = bool(flags & FLAG_CONJUGATE_PATH)
    if conjugate != (scheme_id in REAL_IDS - INNER_IDS):
        raise FrameError(f"conjugate-path flag inconsistent with scheme {scheme_id}")
    a_share, offset = _unpack_matrix(payload, TASK_FIXED.size)
    b_share, offset = _unpack_matrix(payload, offset)
    if offset != len(payload):
        raise FrameError(f"{len(payload) - offset} trailing bytes in task payload")
    return TaskPayload(scheme_id, worker_index, conjugate, a_share, b_share)


def encode_result(response: WorkerResponse) -> bytes:
    # real-valued payloads ride the complex encoding with a zero imaginary part
    flags = FLAG_CONJUGATE_PATH if len(response.payloads) > 1 else 0
    head = RESULT_FIXED.pack(response.worker_index, flags)
    return head + b"".join(_pack_matrix(p) for p in response.payloads)


def decode_result(payload: bytes) -> WorkerResponse:
    if len(payload) < RESULT_FIXED.size:
        raise FrameError("result payload truncated")
    worker_index, flags = RESULT_FIXED.unpack_from(payload, 0)
    matrices = []
    offset = RESULT_FIXED.size
    for _ in range(2 if flags & FLAG_CONJUGATE_PATH else 1):
        m, offset = _unpack_matrix(payload, offset)
        matrices.append(m)
    if offset != len(payload):
        raise FrameError(f"{len(payload) - offset} trailing bytes in result payload")
    return WorkerResponse(worker_index, tuple(matrices))


class _WorkerHandler(socketserver.BaseRequestHandler):
    def handle(self):
        sock = self.request
        sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        while True:
            try:
                frame = read_frame(sock, self.server.max_payload)
            except FrameError as err:
                self._reply_error(sock, err)
                return
            if frame is None:
                return
            if frame.msg_type == MSG_PING:
                write_frame(sock, MSG_PONG)
                continue
            if frame.msg_type != MSG_TASK:
                self._reply_error(sock, FrameError(f"unexpected message type {frame.msg_type}"))
                return
            try:
                task = decode_task(frame.payload)
            except FrameError as err:
                self._reply_error(sock, err)
                return
            response = worker_compute(
                task.scheme_id, task.a_share, task.b_share, task.worker_index
            )
            write_frame(sock, MSG_RESULT, encode_result(response))

    @staticmethod
    def _reply_error(sock, err: FrameError) -> None:
        try:
            write_frame(sock, MSG_ERROR, bytes([err.code]) + str(err).encode())
        except OSError:
            pass


class WorkerServer(socketserver.ThreadingTCPServer):
    """One process that computes share products for any number of coordinators."""

    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, address, max_payload: int = MAX_PAYLOAD):
        self.max_payload = max_payload
        super().__init__(address, _WorkerHandler)

    @property
    def port(self) -> int:
        return self.server_address[1]


def serve_worker(host: str = "127.0.0.1", port: int = 0, max_payload: int = MAX_PAYLOAD) -> WorkerServer:
    """Bind a worker server; port 0 picks a free port.  Call serve_forever to run."""
    return WorkerServer((host, port), max_payload)


def ping(host: str, port: int, timeout: float = 5.0) -> bool:
    """True when a worker answers PING with PONG within the timeout."""
    try:
        with socket.create_connection((host, port), timeout=timeout) as sock:
            sock.settimeout(timeout)
            write_frame(sock, MSG_PING)
            frame = read_frame(sock)
            return frame is not None and frame.msg_type == MSG_PONG
    except (OSError, FrameError):
        return False


def _fetch_response(address, task_bytes: bytes, timeout: float, results: Queue, index: int):
    try:
        with socket.create_connection(address, timeout=timeout) as sock:
            sock.settimeout(timeout)
            sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
            write_frame(sock, MSG_TASK, task_bytes)
            frame = read_frame(sock)
            if frame is None or frame.msg_type != MSG_RESULT:
                results.put((index, None))
                return
            results.put((index, decode_result(frame.payload)))
    except (OSError, FrameError):
        results.put((index, None))


def coordinate(worker_addresses, params: SchemeParams, a, b, timeout: float = 30.0) -> np.ndarray:
    """Multiply over a worker fleet: send shares, gather responses, decode.

    ``worker_addresses`` holds one (host, port) per worker index; workers that
    fail, disconnect, or miss the deadline count as stragglers.  Raises
    InsufficientResponsesError when too few responses arrive.
    """
    addresses = list(worker_addresses)
    if len(addresses) != params.num_workers:
        raise ValueError(
            f"{len(addresses)} worker addresses for {params.num_workers} workers"
        )
    shares = encode(params, a, b)
    required = params.num_workers if params.scheme_id in DFT_IDS else params.recovery_threshold
    results: Queue = Queue()
    threads = []
    for share, address in zip(shares, addresses):
        task = encode_task(params.scheme_id, share.worker_index, share.a_share, share.b_share)
        thread = threading.Thread(
            target=_fetch_response,
            args=(address, task, timeout, results, share.worker_index),
            daemon=True,
        )
        thread.start()
        threads.append(thread)
    deadline = time.monotonic() + timeout
    responses, resolved = [], 0
    while len(responses) < required and resolved < len(addresses):
        remaining = deadline - time.monotonic()
        if remaining <= 0:
            break
        try:
            index, response = results.get(timeout=remaining)
        except Empty:
            break
        resolved += 1
        if response is not None:
            responses.append(response)
    if len(responses) < required:
        raise InsufficientResponsesError(len(responses), required)
    kept = responses[:required]
    if params.scheme_id in INNER_IDS & REAL_IDS:
        kept = [WorkerResponse(r.worker_index, (r.payloads[0].real,)) for r in kept]
    return decode(params, kept)
