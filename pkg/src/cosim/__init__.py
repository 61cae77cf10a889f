"""Bus-level software/firmware co-simulation over named pipes.

The pieces:

* :mod:`cosim.protocol` — the line-oriented command/response wire protocol
* :mod:`cosim.transport` — FIFO channel with a deadlock-free open handshake
* :mod:`cosim.client` — software-side session API with stats and access-time model
* :mod:`cosim.regmap` — register description parser and address allocator
* :mod:`cosim.busmodel` — software bus with device models and the serve loop
* :mod:`cosim.runner` — two-process test orchestration with log redirection
"""

from . import errors
from .busmodel import AdderDevice, Bus, Device, MemoryDevice, RegisterBank, ServeReport, serve
from .client import AccessModel, Session, Stats, connect
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
    encode_command,
    encode_response,
    parse_command,
    parse_response,
)
from .regmap import BlockDesc, RegDesc, RegisterMap, allocate, parse_description
from .runner import TestReport, TestSpec, load_manifest, run
from .transport import Channel, TransportConfig, create_pipes, open_channel

__version__ = "0.1.0"

__all__ = [
    "errors",
    # protocol
    "Write", "Read", "BlockWrite", "BlockRead", "AdvanceTime", "Quit", "Command",
    "Ok", "Data", "Err", "Bye", "Response",
    "encode_command", "parse_command", "encode_response", "parse_response",
    # transport
    "TransportConfig", "Channel", "create_pipes", "open_channel",
    # client
    "Session", "Stats", "AccessModel", "connect",
    # regmap
    "RegDesc", "BlockDesc", "RegisterMap", "parse_description", "allocate",
    # busmodel
    "Bus", "Device", "AdderDevice", "MemoryDevice", "RegisterBank", "serve", "ServeReport",
    # runner
    "TestSpec", "TestReport", "load_manifest", "run",
]
