"""Hierarchical register description parsing and deterministic address allocation.

Description file format (line oriented, ``#`` starts a comment)::

    block <name>
    reg <name> <rw|ro|wo> [count]
    instance <name> <blockname>
    end

Blocks are defined bottom-up: an ``instance`` line may only reference a block
defined earlier in the file.  The last block defined is the root.

Allocation policy (fixed, so maps are reproducible byte for byte):

* within a block, local registers come first in declaration order, one
  32-bit word per element (arrays occupy ``count`` consecutive words);
* subblocks follow in declaration order, each placed at the next offset
  aligned to its own span;
* a block's span is the smallest power of two covering its contents, which
  lets bus decoders select blocks with plain address masks;
* the root block starts at address 0.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator

from .errors import (
    AddressOverflow,
    DuplicateName,
    EmptyBlock,
    IndexOutOfRange,
    MapSyntaxError,
    UnknownRegister,
)

__all__ = [
    "ACCESS_MODES",
    "RegDesc",
    "BlockDesc",
    "MappedRegister",
    "MappedBlock",
    "ResolvedRegister",
    "RegisterMap",
    "parse_description",
    "allocate",
]

ACCESS_MODES = ("rw", "ro", "wo")

_NAME_RE = re.compile(r"[a-z][a-z0-9_]*\Z")
_ADDR_SPACE = 1 << 32


def _check_name(name: str) -> None:
    if not _NAME_RE.match(name):
        raise ValueError(f"invalid identifier {name!r}")


@dataclass(frozen=True)
class RegDesc:
    """One named 32-bit register, or an array of count consecutive ones."""

    name: str
    access: str
    count: int = 1

    def __post_init__(self):
        _check_name(self.name)
        if self.access not in ACCESS_MODES:
            raise ValueError(f"access must be one of {ACCESS_MODES}, got {self.access!r}")
        if not isinstance(self.count, int) or self.count < 1:
            raise ValueError(f"register count must be a positive int, got {self.count!r}")


@dataclass(frozen=True)
class BlockDesc:
    """A block of registers and instantiated subblocks."""

    name: str
    registers: tuple[RegDesc, ...] = ()
    subblocks: tuple[tuple[str, "BlockDesc"], ...] = ()

    def __post_init__(self):
        _check_name(self.name)
        object.__setattr__(self, "registers", tuple(self.registers))
        object.__setattr__(self, "subblocks", tuple(self.subblocks))
        if not self.registers and not self.subblocks:
            raise EmptyBlock(f"block {self.name!r} is empty")
        seen: set[str] = set()
        for n in [r.name for r in self.registers] + [inst for inst, _ in self.subblocks]:
            if n in seen:
                raise DuplicateName(f"{self.name}.{n}")
            seen.add(n)
        for inst, _ in self.subblocks:
            _check_name(inst)


def parse_description(text: str) -> BlockDesc:
    """Parse a register description; returns the root (last defined) block."""
    blocks: dict[str, BlockDesc] = {}
    root: BlockDesc | None = None
    current: str | None = None
    regs: list[RegDesc] = []
    subs: list[tuple[str, BlockDesc]] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        kw = toks[0]

        if kw == "block":
            if current is not None:
                raise MapSyntaxError(lineno, "'block' inside a block (missing 'end'?)")
            if len(toks) != 2:
                raise MapSyntaxError(lineno, "expected: block <name>")
            if toks[1] in blocks:
                raise DuplicateName(toks[1])
            current, regs, subs = toks[1], [], []
        elif kw == "reg":
            if current is None:
                raise MapSyntaxError(lineno, "'reg' outside a block")
            if len(toks) not in (3, 4):
                raise MapSyntaxError(lineno, "expected: reg <name> <rw|ro|wo> [count]")
            count = 1
            if len(toks) == 4:
                try:
                    count = int(toks[3], 10)
                except ValueError:
                    raise MapSyntaxError(lineno, f"bad register count {toks[3]!r}") from None
            try:
                regs.append(RegDesc(toks[1], toks[2], count))
            except ValueError as exc:
                raise MapSyntaxError(lineno, str(exc)) from None
        elif kw == "instance":
            if current is None:
                raise MapSyntaxError(lineno, "'instance' outside a block")
            if len(toks) != 3:
                raise MapSyntaxError(lineno, "expected: instance <name> <blockname>")
            if toks[2] not in blocks:
                raise MapSyntaxError(lineno, f"unknown block {toks[2]!r}")
            try:
                _check_name(toks[1])
            except ValueError as exc:
                raise MapSyntaxError(lineno, str(exc)) from None
            subs.append((toks[1], blocks[toks[2]]))
        elif kw == "end":
            if current is None:
                raise MapSyntaxError(lineno, "'end' outside a block")
            if len(toks) != 1:
                raise MapSyntaxError(lineno, "'end' takes no arguments")
            try:
                block = BlockDesc(current, tuple(regs), tuple(subs))
            except ValueError as exc:
                raise MapSyntaxError(lineno, str(exc)) from None
            blocks[current] = block
            root = block
            current = None
        else:
            raise MapSyntaxError(lineno, f"unknown keyword {kw!r}")

    if current is not None:
        raise MapSyntaxError(len(text.splitlines()) + 1, f"block {current!r} never ended")
    if root is None:
        raise MapSyntaxError(1, "no block defined")
    return root


# --- allocation ---

@dataclass(frozen=True)
class MappedRegister:
    name: str
    access: str
    count: int
    address: int  # absolute byte address of element 0


@dataclass(frozen=True)
class MappedBlock:
    name: str
    base: int
    span: int
    registers: tuple[MappedRegister, ...]
    subblocks: tuple[tuple[str, "MappedBlock"], ...]


def _pow2ceil(n: int) -> int:
    return 1 << (n - 1).bit_length() if n > 1 else 1


def _align_up(offset: int, alignment: int) -> int:
    return (offset + alignment - 1) & ~(alignment - 1)


def _span(desc: BlockDesc) -> int:
    offset = 0
    for reg in desc.registers:
        offset += 4 * reg.count
    for _, child in desc.subblocks:
        child_span = _span(child)
        offset = _align_up(offset, child_span) + child_span
    span = max(_pow2ceil(offset), 4)
    if span > _ADDR_SPACE:
        raise AddressOverflow(f"block {desc.name!r} spans {span:#x} bytes")
    return span


def _layout(desc: BlockDesc, base: int) -> MappedBlock:
    offset = 0
    regs = []
    for reg in desc.registers:
        regs.append(MappedRegister(reg.name, reg.access, reg.count, base + offset))
        offset += 4 * reg.count
    subs = []
    for inst, child in desc.subblocks:
        child_span = _span(child)
        offset = _align_up(offset, child_span)
        subs.append((inst, _layout(child, base + offset)))
        offset += child_span
    return MappedBlock(desc.name, base, _span(desc), tuple(regs), tuple(subs))


@dataclass(frozen=True)
class ResolvedRegister:
    """lookup() result: the absolute address plus the register attributes."""

    address: int
    access: str
    count: int


class RegisterMap:
    """An allocated register tree with symbolic path lookup."""

    def __init__(self, root: MappedBlock):
        self.root = root
        self._index: dict[str, MappedRegister] = {}
        self._build_index(root, root.name)

    def _build_index(self, block: MappedBlock, prefix: str) -> None:
        for reg in block.registers:
            self._index[f"{prefix}.{reg.name}"] = reg
        for inst, sub in block.subblocks:
            self._build_index(sub, f"{prefix}.{inst}")

    def lookup(self, path: str) -> ResolvedRegister:
        """Resolve a dotted path like ``top.adder.sum`` or ``top.buf[2]``."""
        base_path, index = path, None
        if path.endswith("]"):
            m = re.match(r"(.*)\[(\d+)\]\Z", path)
            if not m:
                raise UnknownRegister(path)
            base_path, index = m.group(1), int(m.group(2))
        reg = self._index.get(base_path)
        if reg is None:
            raise UnknownRegister(path)
        address = reg.address
        if index is not None:
            if index >= reg.count:
                raise IndexOutOfRange(f"{path}: register has {reg.count} element(s)")
            address += 4 * index
        return ResolvedRegister(address, reg.access, reg.count)

    def iter_elements(self) -> Iterator[tuple[int, str, str]]:
        """Yield (address, access, path) for every register element, unsorted."""
        for path, reg in self._index.items():
            if reg.count == 1:
                yield reg.address, reg.access, path
            else:
                for i in range(reg.count):
                    yield reg.address + 4 * i, reg.access, f"{path}[{i}]"

    def emit(self) -> str:
        """Flat machine-readable listing, one line per element, sorted by address.

        Identical maps produce byte-identical output.
        """
        rows = sorted(self.iter_elements())
        return "".join(f"{addr:08x} {access} {path}\n" for addr, access, path in rows)


def allocate(root: BlockDesc) -> RegisterMap:
    """Assign absolute addresses to every register under the fixed policy."""
    return RegisterMap(_layout(root, 0))
