"""Software-side session: method calls in, bus transactions over the wire out.

A Session owns one connected channel and issues strictly one command at a
time, waiting for its response before returning.  It also keeps transaction
statistics and can model bus access times with a simple linear cost per
transaction (a passive accumulator; nothing is injected into the wire).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from . import protocol
from .errors import (
    AccessViolation,
    BusError,
    MalformedResponse,
    RemoteCommandError,
    SessionClosed,
)
from .protocol import (
    AdvanceTime,
    BlockRead,
    BlockWrite,
    Bye,
    Command,
    Data,
    Ok,
    Quit,
    Read,
    Response,
    Write,
    encode_command,
    parse_response,
)
from .regmap import RegisterMap
from .transport import TransportConfig, open_channel

__all__ = ["Stats", "AccessModel", "Session", "connect"]


@dataclass
class Stats:
    """Transaction counters; block transfers count once but add all their words."""

    reads: int = 0
    writes: int = 0
    words_read: int = 0
    words_written: int = 0
    modeled_time_ns: int = 0


@dataclass(frozen=True)
class AccessModel:
    """Linear access-time model: ns_per_single + ns_per_word * words per transaction."""

    ns_per_single: int = 0
    ns_per_word: int = 0

    def transaction_ns(self, words: int) -> int:
        return self.ns_per_single + self.ns_per_word * words


class Session:
    """One co-simulation session over a connected client channel.

    Single-threaded by contract.  After end_simulation() every operation
    raises SessionClosed.
    """

    def __init__(self, channel, access_model: AccessModel | None = None):
        self._channel = channel
        self.access_model = access_model or AccessModel()
        self.stats = Stats()
        self._closed = False

    # --- plumbing ---

    def _transact(self, cmd: Command) -> Response:
        if self._closed:
            raise SessionClosed("session already ended")
        self._channel.send_line(encode_command(cmd))
        resp = parse_response(self._channel.recv_line())
        if isinstance(resp, protocol.Err):
            if resp.code == protocol.ERR_BUS:
                raise BusError(f"bus error executing {cmd!r}")
            raise RemoteCommandError(resp.code)
        return resp

    def _expect_ok(self, resp: Response, cmd: Command) -> None:
        if not isinstance(resp, Ok):
            raise MalformedResponse(f"expected OK for {cmd!r}, got {resp!r}")

    def _expect_data(self, resp: Response, count: int, cmd: Command) -> tuple[int, ...]:
        if not isinstance(resp, Data) or len(resp.words) != count:
            raise MalformedResponse(f"expected {count} data word(s) for {cmd!r}, got {resp!r}")
        return resp.words

    def _account(self, *, reads: int = 0, writes: int = 0, words: int) -> None:
        self.stats.reads += reads
        self.stats.writes += writes
        self.stats.words_read += words if reads else 0
        self.stats.words_written += words if writes else 0
        self.stats.modeled_time_ns += self.access_model.transaction_ns(words)

    # --- bus transfers ---

    def write32(self, addr: int, data: int) -> None:
        cmd = Write(addr, data)
        self._expect_ok(self._transact(cmd), cmd)
        self._account(writes=1, words=1)

    def read32(self, addr: int) -> int:
        cmd = Read(addr)
        words = self._expect_data(self._transact(cmd), 1, cmd)
        self._account(reads=1, words=1)
        return words[0]

    def block_write(self, addr: int, data: Sequence[int]) -> None:
        cmd = BlockWrite(addr, tuple(data))
        self._expect_ok(self._transact(cmd), cmd)
        self._account(writes=1, words=len(cmd.data))

    def block_read(self, addr: int, count: int) -> list[int]:
        cmd = BlockRead(addr, count)
        words = self._expect_data(self._transact(cmd), count, cmd)
        self._account(reads=1, words=count)
        return list(words)

    # --- simulation control ---

    def advance_time(self, delta_ns: int) -> None:
        """Move the simulator's clock forward by exactly delta_ns nanoseconds."""
        cmd = AdvanceTime(delta_ns)
        self._expect_ok(self._transact(cmd), cmd)

    def end_simulation(self) -> None:
        """Send the quit command, wait for the farewell, and close the channel."""
        if self._closed:
            raise SessionClosed("session already ended")
        try:
            resp = self._transact(Quit())
            if not isinstance(resp, Bye):
                raise MalformedResponse(f"expected BYE, got {resp!r}")
        finally:
            self._closed = True
            self._channel.close()

    def close(self) -> None:
        """Drop the channel without the quit handshake (error-path cleanup)."""
        self._closed = True
        self._channel.close()

    # --- symbolic register access ---

    def write_reg(self, regmap: RegisterMap, path: str, data: int) -> None:
        reg = regmap.lookup(path)
        if reg.access == "ro":
            raise AccessViolation(f"{path} is read-only")
        self.write32(reg.address, data)

    def read_reg(self, regmap: RegisterMap, path: str) -> int:
        reg = regmap.lookup(path)
        if reg.access == "wo":
            raise AccessViolation(f"{path} is write-only")
        return self.read32(reg.address)

    # --- context management ---

    def __enter__(self) -> "Session":
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        if self._closed:
            return
        if exc_type is None:
            self.end_simulation()
        else:
            self.close()


def connect(cfg: TransportConfig, access_model: AccessModel | None = None) -> Session:
    """Open the client end of the channel and return a fresh session."""
    return Session(open_channel(cfg, "client"), access_model)
