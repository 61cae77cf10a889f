"""Line-oriented wire protocol spoken between the test software and the simulator.

Every message is one ASCII line: an opcode followed by fixed-width uppercase
hex fields, separated by single spaces, terminated by ``\\n``.

Commands (software -> simulator)::

    W  <addr8> <data8>            single word write
    R  <addr8>                    single word read
    BW <addr8> <n8> <data8>...    block write of n consecutive words
    BR <addr8> <n8>               block read of n consecutive words
    T  <ns16>                     advance simulated time by ns nanoseconds
    Q                             quit the simulation

Responses (simulator -> software)::

    OK                            command executed, no data
    D  <data8>...                 read data, one field per word
    ERR <code8>                   command failed (codes below)
    BYE                           acknowledges Q; the simulator is exiting

``<x8>`` is exactly 8 uppercase hex digits, ``<ns16>`` exactly 16.  Addresses
are byte addresses and must be word aligned (multiples of 4).  The fixed
width keeps the grammar trivially parseable from HDL-side line readers.

One response answers one command, in order; there is no pipelining.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import MalformedCommand, MalformedResponse

__all__ = [
    "ERR_BUS",
    "ERR_MALFORMED",
    "ERR_UNSUPPORTED",
    "ERROR_CODES",
    "Write",
    "Read",
    "BlockWrite",
    "BlockRead",
    "AdvanceTime",
    "Quit",
    "Command",
    "Ok",
    "Data",
    "Err",
    "Bye",
    "Response",
    "encode_command",
    "parse_command",
    "encode_response",
    "parse_response",
]

# Error response codes.
ERR_BUS = 1          # unmapped address or device-faulted access
ERR_MALFORMED = 2    # command line did not parse
ERR_UNSUPPORTED = 3  # command recognized but not supported by this endpoint

ERROR_CODES = frozenset({ERR_BUS, ERR_MALFORMED, ERR_UNSUPPORTED})

_U32_MAX = 0xFFFF_FFFF
_U64_MAX = 0xFFFF_FFFF_FFFF_FFFF

# Valid characters for a protocol line, newline excluded.
_LINE_CHARS = frozenset("ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 ")
_HEX_DIGITS = frozenset("0123456789ABCDEF")


def _check_u32(value: int, what: str) -> None:
    if not isinstance(value, int) or isinstance(value, bool):
        raise ValueError(f"{what} must be an int, got {type(value).__name__}")
    if not 0 <= value <= _U32_MAX:
        raise ValueError(f"{what} out of 32-bit range: {value!r}")


def _check_addr(addr: int) -> None:
    _check_u32(addr, "address")
    if addr % 4 != 0:
        raise ValueError(f"address {addr:#x} is not word aligned")


def _check_words(words, what: str) -> tuple[int, ...]:
    words = tuple(words)
    if len(words) < 1:
        raise ValueError(f"{what} must contain at least one word")
    for w in words:
        _check_u32(w, f"{what} word")
    return words


# --- commands ---

@dataclass(frozen=True)
class Write:
    addr: int
    data: int

    def __post_init__(self):
        _check_addr(self.addr)
        _check_u32(self.data, "data")


@dataclass(frozen=True)
class Read:
    addr: int

    def __post_init__(self):
        _check_addr(self.addr)


@dataclass(frozen=True)
class BlockWrite:
    addr: int
    data: tuple[int, ...]

    def __post_init__(self):
        _check_addr(self.addr)
        object.__setattr__(self, "data", _check_words(self.data, "block data"))


@dataclass(frozen=True)
class BlockRead:
    addr: int
    count: int

    def __post_init__(self):
        _check_addr(self.addr)
        _check_u32(self.count, "count")
        if self.count < 1:
            raise ValueError("block read count must be >= 1")


@dataclass(frozen=True)
class AdvanceTime:
    delta_ns: int

    def __post_init__(self):
        if not isinstance(self.delta_ns, int) or isinstance(self.delta_ns, bool):
            raise ValueError("delta_ns must be an int")
        if not 0 <= self.delta_ns <= _U64_MAX:
            raise ValueError(f"delta_ns out of 64-bit range: {self.delta_ns!r}")


@dataclass(frozen=True)
class Quit:
    pass


Command = Write | Read | BlockWrite | BlockRead | AdvanceTime | Quit


# --- responses ---

@dataclass(frozen=True)
class Ok:
    pass


@dataclass(frozen=True)
class Data:
    words: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "words", _check_words(self.words, "response data"))


@dataclass(frozen=True)
class Err:
    code: int

    def __post_init__(self):
        if self.code not in ERROR_CODES:
            raise ValueError(f"unknown error code {self.code!r}")


@dataclass(frozen=True)
class Bye:
    pass


Response = Ok | Data | Err | Bye


# --- encoding ---

def encode_command(cmd: Command) -> str:
    """Encode a command as one newline-terminated protocol line."""
    if isinstance(cmd, Write):
        return f"W {cmd.addr:08X} {cmd.data:08X}\n"
    if isinstance(cmd, Read):
        return f"R {cmd.addr:08X}\n"
    if isinstance(cmd, BlockWrite):
        words = " ".join(f"{w:08X}" for w in cmd.data)
        return f"BW {cmd.addr:08X} {len(cmd.data):08X} {words}\n"
    if isinstance(cmd, BlockRead):
        return f"BR {cmd.addr:08X} {cmd.count:08X}\n"
    if isinstance(cmd, AdvanceTime):
        return f"T {cmd.delta_ns:016X}\n"
    if isinstance(cmd, Quit):
        return "Q\n"
    raise TypeError(f"not a command: {cmd!r}")


def encode_response(resp: Response) -> str:
    """Encode a response as one newline-terminated protocol line."""
    if isinstance(resp, Ok):
        return "OK\n"
    if isinstance(resp, Data):
        return "D " + " ".join(f"{w:08X}" for w in resp.words) + "\n"
    if isinstance(resp, Err):
        return f"ERR {resp.code:08X}\n"
    if isinstance(resp, Bye):
        return "BYE\n"
    raise TypeError(f"not a response: {resp!r}")


# --- parsing ---

def _tokens(line: str, exc: type) -> list[str]:
    if line.endswith("\n"):
        line = line[:-1]
    bad = set(line) - _LINE_CHARS
    if bad:
        raise exc(f"invalid characters in line: {sorted(bad)!r}")
    toks = [t for t in line.split(" ") if t]
    if not toks:
        raise exc("empty line")
    return toks


def _field(tok: str, width: int, what: str, exc: type) -> int:
    if len(tok) != width or not set(tok) <= _HEX_DIGITS:
        raise exc(f"{what} must be exactly {width} uppercase hex digits, got {tok!r}")
    return int(tok, 16)


def _aligned(addr: int, exc: type) -> int:
    if addr % 4 != 0:
        raise exc(f"address {addr:#010x} is not word aligned")
    return addr


def parse_command(line: str) -> Command:
    """Parse one command line.

    Tolerates repeated interior spaces and a missing trailing newline;
    anything else outside the grammar raises MalformedCommand.
    """
    toks = _tokens(line, MalformedCommand)
    op, fields = toks[0], toks[1:]

    def u32(i: int, what: str) -> int:
        return _field(fields[i], 8, what, MalformedCommand)

    if op == "W":
        if len(fields) != 2:
            raise MalformedCommand(f"W expects 2 fields, got {len(fields)}")
        return Write(_aligned(u32(0, "address"), MalformedCommand), u32(1, "data"))
    if op == "R":
        if len(fields) != 1:
            raise MalformedCommand(f"R expects 1 field, got {len(fields)}")
        return Read(_aligned(u32(0, "address"), MalformedCommand))
    if op == "BW":
        if len(fields) < 2:
            raise MalformedCommand("BW expects an address and a word count")
        addr = _aligned(u32(0, "address"), MalformedCommand)
        count = u32(1, "count")
        if count < 1:
            raise MalformedCommand("block write length must be >= 1")
        if len(fields) - 2 != count:
            raise MalformedCommand(
                f"block write declares {count} words but carries {len(fields) - 2}"
            )
        data = tuple(u32(i, "data") for i in range(2, len(fields)))
        return BlockWrite(addr, data)
    if op == "BR":
        if len(fields) != 2:
            raise MalformedCommand(f"BR expects 2 fields, got {len(fields)}")
        addr = _aligned(u32(0, "address"), MalformedCommand)
        count = u32(1, "count")
        if count < 1:
            raise MalformedCommand("block read count must be >= 1")
        return BlockRead(addr, count)
    if op == "T":
        if len(fields) != 1:
            raise MalformedCommand(f"T expects 1 field, got {len(fields)}")
        return AdvanceTime(_field(fields[0], 16, "time delta", MalformedCommand))
    if op == "Q":
        if fields:
            raise MalformedCommand("Q takes no fields")
        return Quit()
    raise MalformedCommand(f"unknown opcode {op!r}")


def parse_response(line: str) -> Response:
    """Parse one response line; inverse of encode_response on its image."""
    toks = _tokens(line, MalformedResponse)
    op, fields = toks[0], toks[1:]

    if op == "OK":
        if fields:
            raise MalformedResponse("OK takes no fields")
        return Ok()
    if op == "D":
        if not fields:
            raise MalformedResponse("D requires at least one data word")
        words = tuple(_field(f, 8, "data", MalformedResponse) for f in fields)
        return Data(words)
    if op == "ERR":
        if len(fields) != 1:
            raise MalformedResponse(f"ERR expects 1 field, got {len(fields)}")
        code = _field(fields[0], 8, "error code", MalformedResponse)
        if code not in ERROR_CODES:
            raise MalformedResponse(f"unknown error code {code}")
        return Err(code)
    if op == "BYE":
        if fields:
            raise MalformedResponse("BYE takes no fields")
        return Bye()
    raise MalformedResponse(f"unknown opcode {op!r}")
