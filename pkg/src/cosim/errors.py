"""Exception hierarchy shared by all cosim components."""

from __future__ import annotations


class CosimError(Exception):
    """Base class for every error raised by this package."""


# --- wire protocol ---

class MalformedCommand(CosimError, ValueError):
    """A command line does not match the wire grammar."""


class MalformedResponse(CosimError, ValueError):
    """A response line does not match the wire grammar."""


# --- transport ---

class TransportError(CosimError):
    """Base class for channel/pipe failures."""


class PathIsNotFifo(TransportError):
    """A pipe path is occupied by something other than a FIFO."""


class PathMissing(TransportError):
    """A configured pipe path does not exist."""


class PermissionDenied(TransportError):
    """The process may not create or open a pipe path."""


class TransportTimeout(TransportError, TimeoutError):
    """The peer did not connect or respond within the channel timeout."""


class PeerClosed(TransportError):
    """The other endpoint closed its side of the channel."""


# --- bus / session ---

class BusError(CosimError):
    """A bus transaction terminated with an error (unmapped or faulted access)."""


class RemoteCommandError(CosimError):
    """The simulator answered with a protocol-level error response."""

    def __init__(self, code: int, message: str = ""):
        self.code = code
        super().__init__(message or f"simulator rejected command (error code {code})")


class SessionClosed(CosimError):
    """Operation attempted on a session that already sent its quit command."""


class AccessViolation(CosimError):
    """Register access denied by its access attribute (e.g. write to read-only)."""


# --- register map ---

class RegmapError(CosimError):
    """Base class for register description / allocation errors."""


class MapSyntaxError(RegmapError):
    """The register description file is syntactically invalid."""

    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


class DuplicateName(RegmapError):
    """Two siblings in the register description share a name."""


class EmptyBlock(RegmapError):
    """A block declares neither registers nor subblocks."""


class AddressOverflow(RegmapError):
    """The allocated register map does not fit in the 32-bit address space."""


class UnknownRegister(RegmapError):
    """A symbolic register path does not resolve in the map."""


class IndexOutOfRange(RegmapError):
    """A register array index lies outside the declared element count."""


# --- bus model wiring ---

class OverlappingMapping(CosimError):
    """A device mapping intersects an already attached address range."""


class BadAlignment(CosimError):
    """A device mapping violates the power-of-two span/base alignment rule."""


# --- runner ---

class ManifestError(CosimError):
    """The test manifest is missing, malformed, or fails validation."""


class MissingField(ManifestError):
    """A required manifest key is absent."""

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"manifest is missing required field {name!r}")
