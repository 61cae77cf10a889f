"""Channel transport over a pair of unidirectional named pipes.

The software (client) and the simulator (server) each open both FIFOs, in
opposite directions.  The open order is fixed to make the rendezvous
deadlock-free:

* server: open ``sw_to_fw`` for reading first, then ``fw_to_sw`` for writing
* client: open ``sw_to_fw`` for writing first, then ``fw_to_sw`` for reading

Write ends are opened non-blocking in a retry loop (ENXIO until a reader
exists); read ends are opened non-blocking and then polled until the writing
peer attaches, so open_channel returns a fully connected channel on both
sides and a later hangup is always a genuine PeerClosed.

A Channel carries newline-terminated ASCII lines and nothing else.  Writes
are blocking (protocol lines are far below the pipe buffer size); reads poll
with a deadline.
"""

from __future__ import annotations

import errno
import os
import select
import stat
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

from .errors import (
    PathIsNotFifo,
    PathMissing,
    PeerClosed,
    PermissionDenied,
    TransportTimeout,
)

__all__ = ["TransportConfig", "Channel", "Role", "create_pipes", "open_channel"]

Role = Literal["client", "server"]

_POLL_SLICE_MS = 20  # granularity of connect/receive deadline checks
_READ_CHUNK = 65536


@dataclass(frozen=True)
class TransportConfig:
    """Pipe paths plus the per-channel timeout, shared verbatim by both sides."""

    sw_to_fw_path: Path
    fw_to_sw_path: Path
    timeout_ms: int = 10_000

    def __post_init__(self):
        object.__setattr__(self, "sw_to_fw_path", Path(self.sw_to_fw_path))
        object.__setattr__(self, "fw_to_sw_path", Path(self.fw_to_sw_path))
        if self.sw_to_fw_path == self.fw_to_sw_path:
            raise ValueError("pipe paths must be distinct")
        if self.timeout_ms <= 0:
            raise ValueError("timeout_ms must be positive")


def create_pipes(cfg: TransportConfig) -> None:
    """Create both FIFOs; idempotent if they already exist as FIFOs."""
    for path in (cfg.sw_to_fw_path, cfg.fw_to_sw_path):
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            os.mkfifo(path)
        except FileExistsError:
            if not stat.S_ISFIFO(os.stat(path).st_mode):
                raise PathIsNotFifo(f"{path} exists and is not a FIFO") from None
        except PermissionError as exc:
            raise PermissionDenied(str(exc)) from exc


def _open_write_end(path: Path, deadline: float) -> int:
    """Open the write end, retrying until a reader appears or the deadline hits."""
    while True:
        try:
            fd = os.open(path, os.O_WRONLY | os.O_NONBLOCK)
            break
        except FileNotFoundError as exc:
            raise PathMissing(str(path)) from exc
        except OSError as exc:
            if exc.errno != errno.ENXIO:
                raise
        if time.monotonic() >= deadline:
            raise TransportTimeout(f"no reader appeared on {path}")
        time.sleep(_POLL_SLICE_MS / 1000.0)
    os.set_blocking(fd, True)
    return fd


def _open_read_end(path: Path, deadline: float) -> int:
    """Open the read end and wait until the writing peer attaches."""
    try:
        fd = os.open(path, os.O_RDONLY | os.O_NONBLOCK)
    except FileNotFoundError as exc:
        raise PathMissing(str(path)) from exc
    # POLLHUP stays asserted while the FIFO has no writer; POLLIN means the
    # peer already connected and wrote.
    poller = select.poll()
    poller.register(fd, select.POLLIN)
    while True:
        events = poller.poll(_POLL_SLICE_MS)
        revents = events[0][1] if events else 0
        if revents & select.POLLIN:
            break
        if not revents & select.POLLHUP:
            break
        if time.monotonic() >= deadline:
            os.close(fd)
            raise TransportTimeout(f"no writer appeared on {path}")
        time.sleep(_POLL_SLICE_MS / 1000.0)
    return fd  # left non-blocking; recv_line polls before reading


def open_channel(cfg: TransportConfig, role: Role) -> "Channel":
    """Connect one end of the channel, blocking until the peer arrives.

    Raises TransportTimeout if the peer does not connect within
    cfg.timeout_ms, PathMissing if the FIFOs were never created.
    """
    deadline = time.monotonic() + cfg.timeout_ms / 1000.0
    if role == "server":
        read_fd = _open_read_end(cfg.sw_to_fw_path, deadline)
        try:
            write_fd = _open_write_end(cfg.fw_to_sw_path, deadline)
        except BaseException:
            os.close(read_fd)
            raise
    elif role == "client":
        write_fd = _open_write_end(cfg.sw_to_fw_path, deadline)
        try:
            read_fd = _open_read_end(cfg.fw_to_sw_path, deadline)
        except BaseException:
            os.close(write_fd)
            raise
    else:
        raise ValueError(f"unknown role {role!r}")
    return Channel(role, read_fd, write_fd, cfg.timeout_ms)


class _UseConfigTimeout:
    def __repr__(self):  # pragma: no cover - debug aid
        return "<channel default timeout>"


_CONFIG_TIMEOUT = _UseConfigTimeout()


class Channel:
    """One connected endpoint; owned by a single thread at a time."""

    def __init__(self, role: Role, read_fd: int, write_fd: int, timeout_ms: int):
        self.role = role
        self.timeout_ms = timeout_ms
        self._read_fd = read_fd
        self._write_fd = write_fd
        self._rx = bytearray()
        self._poller = select.poll()
        self._poller.register(read_fd, select.POLLIN)
        self._closed = False

    def send_line(self, line: str) -> None:
        """Write one full newline-terminated line and flush it to the pipe."""
        if self._closed:
            raise ValueError("channel is closed")
        if not line.endswith("\n"):
            raise ValueError("protocol lines must be newline terminated")
        data = line.encode("ascii")
        view = memoryview(data)
        while view:
            try:
                written = os.write(self._write_fd, view)
            except BrokenPipeError as exc:
                raise PeerClosed("peer closed its read end") from exc
            except OSError as exc:
                if exc.errno == errno.EPIPE:
                    raise PeerClosed("peer closed its read end") from exc
                raise
            view = view[written:]

    def recv_line(self, timeout_ms: int | None | _UseConfigTimeout = _CONFIG_TIMEOUT) -> str:
        """Receive one full line; None disables the deadline entirely.

        Raises TransportTimeout when the deadline passes first and PeerClosed
        on end-of-stream before a complete line.
        """
        if self._closed:
            raise ValueError("channel is closed")
        if isinstance(timeout_ms, _UseConfigTimeout):
            timeout_ms = self.timeout_ms
        deadline = None if timeout_ms is None else time.monotonic() + timeout_ms / 1000.0
        while True:
            nl = self._rx.find(b"\n")
            if nl >= 0:
                raw = bytes(self._rx[: nl + 1])
                del self._rx[: nl + 1]
                # Corrupt bytes surface as U+FFFD and fail protocol parsing
                # instead of killing the channel.
                return raw.decode("ascii", errors="replace")
            if deadline is None:
                wait_ms = None
            else:
                wait_ms = (deadline - time.monotonic()) * 1000.0
                if wait_ms <= 0:
                    raise TransportTimeout("no complete line before timeout")
            events = self._poller.poll(wait_ms)
            if not events:
                continue  # deadline re-checked at loop top
            try:
                chunk = os.read(self._read_fd, _READ_CHUNK)
            except BlockingIOError:
                continue
            if chunk == b"":
                raise PeerClosed("peer closed its write end")
            self._rx += chunk

    def close(self) -> None:
        if self._closed:
            return
        self._closed = True
        for fd in (self._read_fd, self._write_fd):
            try:
                os.close(fd)
            except OSError:
                pass

    def __enter__(self) -> "Channel":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
