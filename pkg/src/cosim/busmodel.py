"""Software bus model: address decoding, device models, simulated time, serve loop.

This is the firmware-side stand-in.  It decodes 32-bit word transfers to
attached device models exactly like a single-master memory-mapped bus with
error termination, and it answers the wire protocol, so the whole framework
runs end to end with no HDL simulator in the loop.

Simulated time only moves on explicit advance-time commands; transfers are
modeled as zero-time (access-time modeling lives on the client side).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TextIO

from . import protocol
from .errors import BadAlignment, BusError, MalformedCommand, OverlappingMapping, PeerClosed
from .protocol import (
    AdvanceTime,
    BlockRead,
    BlockWrite,
    Bye,
    Command,
    Data,
    Err,
    Ok,
    Quit,
    Read,
    Response,
    Write,
    encode_response,
    parse_command,
)
from .regmap import RegisterMap

__all__ = [
    "Device",
    "AdderDevice",
    "MemoryDevice",
    "RegisterBank",
    "Bus",
    "ServeReport",
    "serve",
]

_U32_MAX = 0xFFFF_FFFF


class Device:
    """Behavior hooks for a bus-attached model; offsets are device-relative bytes.

    Subclasses override read/write; the defaults fault, so unpopulated
    locations inside a mapping behave like bus holes.  on_time is delivered
    whenever simulated time advances.
    """

    def read(self, offset: int) -> int:
        raise BusError(f"device read at unpopulated offset {offset:#x}")

    def write(self, offset: int, data: int) -> None:
        raise BusError(f"device write at unpopulated offset {offset:#x}")

    def on_time(self, delta_ns: int) -> None:
        pass


class AdderDevice(Device):
    """Two writable operand registers and a read-only wrapping sum.

    Layout: a at 0x0 (rw), b at 0x4 (rw), sum at 0x8 (ro),
    sum == (a + b) mod 2**32 at all times.
    """

    SPAN = 0x10

    def __init__(self):
        self.a = 0
        self.b = 0

    def read(self, offset: int) -> int:
        if offset == 0x0:
            return self.a
        if offset == 0x4:
            return self.b
        if offset == 0x8:
            return (self.a + self.b) & _U32_MAX
        raise BusError(f"adder has no register at offset {offset:#x}")

    def write(self, offset: int, data: int) -> None:
        if offset == 0x0:
            self.a = data
        elif offset == 0x4:
            self.b = data
        elif offset == 0x8:
            raise BusError("sum register is read-only")
        else:
            raise BusError(f"adder has no register at offset {offset:#x}")


class MemoryDevice(Device):
    """Flat word-addressed RAM of a fixed number of 32-bit words."""

    def __init__(self, words: int):
        if words < 1:
            raise ValueError("memory needs at least one word")
        self.words = [0] * words

    @property
    def span(self) -> int:
        span = 4
        while span < 4 * len(self.words):
            span *= 2
        return span

    def _index(self, offset: int) -> int:
        index = offset // 4
        if not 0 <= index < len(self.words):
            raise BusError(f"memory access beyond end at offset {offset:#x}")
        return index

    def read(self, offset: int) -> int:
        return self.words[self._index(offset)]

    def write(self, offset: int, data: int) -> None:
        self.words[self._index(offset)] = data


class RegisterBank(Device):
    """Storage-backed register file generated from an allocated register map.

    Enforces access attributes on the bus side: reads of write-only and
    writes to read-only registers fault, as do holes in the layout.
    """

    def __init__(self, regmap: RegisterMap):
        self.span = regmap.root.span
        self._cells: dict[int, list] = {}  # offset -> [access, value]
        base = regmap.root.base
        for address, access, _path in regmap.iter_elements():
            self._cells[address - base] = [access, 0]

    def read(self, offset: int) -> int:
        cell = self._cells.get(offset)
        if cell is None:
            raise BusError(f"no register at offset {offset:#x}")
        if cell[0] == "wo":
            raise BusError(f"register at offset {offset:#x} is write-only")
        return cell[1]

    def write(self, offset: int, data: int) -> None:
        cell = self._cells.get(offset)
        if cell is None:
            raise BusError(f"no register at offset {offset:#x}")
        if cell[0] == "ro":
            raise BusError(f"register at offset {offset:#x} is read-only")
        cell[1] = data


@dataclass
class _Mapping:
    base: int
    span: int
    device: Device


class Bus:
    """Single-master word bus with mask-decoded device mappings and a sim clock."""

    def __init__(self):
        self._mappings: list[_Mapping] = []
        self.sim_time_ns = 0

    def attach(self, base: int, span: int, device: Device) -> None:
        """Map device over [base, base+span); span a power of two, base aligned."""
        if span < 4 or span & (span - 1):
            raise BadAlignment(f"span {span:#x} is not a power of two >= 4")
        for m in self._mappings:
            if base < m.base + m.span and m.base < base + span:
                raise OverlappingMapping(
                    f"[{base:#x}, {base + span:#x}) overlaps [{m.base:#x}, {m.base + m.span:#x})"
                )
        if base % span:
            raise BadAlignment(f"base {base:#x} is not aligned to span {span:#x}")
        if base + span - 1 > _U32_MAX:
            raise BadAlignment(f"mapping [{base:#x}, {base + span:#x}) exceeds 32-bit space")
        self._mappings.append(_Mapping(base, span, device))

    def _decode(self, addr: int) -> _Mapping:
        if addr % 4:
            raise ValueError(f"address {addr:#x} is not word aligned")
        if not 0 <= addr <= _U32_MAX:
            raise BusError(f"address {addr:#x} outside the 32-bit bus")
        for m in self._mappings:
            if addr & ~(m.span - 1) == m.base:
                return m
        raise BusError(f"unmapped address {addr:#010x}")

    def read(self, addr: int) -> int:
        m = self._decode(addr)
        return m.device.read(addr - m.base) & _U32_MAX

    def write(self, addr: int, data: int) -> None:
        if not 0 <= data <= _U32_MAX:
            raise ValueError(f"data {data!r} out of 32-bit range")
        m = self._decode(addr)
        m.device.write(addr - m.base, data)

    def advance(self, delta_ns: int) -> None:
        """Move simulated time forward and notify devices in attach order."""
        if delta_ns < 0:
            raise ValueError("time cannot move backwards")
        self.sim_time_ns += delta_ns
        for m in self._mappings:
            m.device.on_time(delta_ns)


@dataclass
class ServeReport:
    """Outcome of one serve loop: lines handled, error responses sent, clean quit."""

    commands: int = 0
    errors: int = 0
    quit_received: bool = False


def _execute(bus: Bus, cmd: Command) -> Response:
    try:
        if isinstance(cmd, Write):
            bus.write(cmd.addr, cmd.data)
            return Ok()
        if isinstance(cmd, Read):
            return Data((bus.read(cmd.addr),))
        if isinstance(cmd, BlockWrite):
            for i, word in enumerate(cmd.data):
                bus.write(cmd.addr + 4 * i, word)
            return Ok()
        if isinstance(cmd, BlockRead):
            # all-or-nothing: a fault anywhere yields a single error, no data
            return Data(tuple(bus.read(cmd.addr + 4 * i) for i in range(cmd.count)))
        if isinstance(cmd, AdvanceTime):
            bus.advance(cmd.delta_ns)
            return Ok()
        if isinstance(cmd, Quit):
            return Bye()
    except BusError:
        return Err(protocol.ERR_BUS)
    return Err(protocol.ERR_UNSUPPORTED)


def _log(stream: TextIO | None, time_ns: int, direction: str, line: str) -> None:
    if stream is None:
        return
    stream.write(f"{time_ns} {direction} {line.rstrip()}\n")
    stream.flush()


def serve(channel, bus: Bus, log: TextIO | None = None) -> ServeReport:
    """Answer protocol commands against the bus until Quit or peer loss.

    Protocol-level problems never stop the loop: malformed lines are answered
    with error code 2, bus faults with error code 1.  The loop waits for the
    next command indefinitely; pacing belongs to the test process and the
    wall-clock limit to the runner.  Every line is logged with the current
    simulated time when a log stream is given.
    """
    report = ServeReport()
    while True:
        try:
            line = channel.recv_line(timeout_ms=None)
        except PeerClosed:
            return report
        _log(log, bus.sim_time_ns, "rx", line)
        report.commands += 1
        quitting = False
        try:
            cmd = parse_command(line)
        except MalformedCommand:
            resp: Response = Err(protocol.ERR_MALFORMED)
        else:
            resp = _execute(bus, cmd)
            quitting = isinstance(cmd, Quit)
        if isinstance(resp, Err):
            report.errors += 1
        out = encode_response(resp)
        try:
            channel.send_line(out)
        except PeerClosed:
            return report
        _log(log, bus.sim_time_ns, "tx", out)
        if quitting:
            report.quit_received = True
            return report
