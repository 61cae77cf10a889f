"""Independent reference implementations and randomized generators.

Everything here deliberately avoids the code paths under test: the serve
oracle executes scripts against a flat word array and formats its expected
response lines by hand, and the map checker re-enumerates every allocated
word address straight from the mapped tree.
"""

from __future__ import annotations

import itertools

from cosim.errors import PeerClosed
from cosim.protocol import (
    AdvanceTime,
    BlockRead,
    BlockWrite,
    Quit,
    Read,
    Write,
    encode_command,
)
from cosim.regmap import BlockDesc, MappedBlock, RegDesc, RegisterMap

# --- fake in-process channel for serve-loop tests ---


class FakeChannel:
    """Feeds scripted lines to a serve loop and records what it sends back."""

    role = "server"

    def __init__(self, lines):
        self._incoming = list(lines)
        self.sent: list[str] = []

    def recv_line(self, timeout_ms=None):
        if not self._incoming:
            raise PeerClosed("script exhausted")
        return self._incoming.pop(0)

    def send_line(self, line):
        self.sent.append(line)


# --- serve-loop oracle: flat word array, hand-formatted responses ---

# Every entry is unparseable for a different reason.
MALFORMED_LINES = [
    "garbage\n",
    "W 00000003 00000001\n",     # unaligned address
    "X 00\n",                    # unknown opcode
    "R 0000008\n",               # 7-digit field
    "R 000000080\n",             # 9-digit field
    "BW 00000000 00000002 00000001\n",  # declared 2 words, carries 1
    "BR 00000000 00000000\n",    # zero count
    "T 00000064\n",              # 8 digits where 16 are required
    "W 0000000c 00000001\n",     # lowercase hex
    "Q 00000001\n",              # Q takes no fields
    "D 00000005\n",              # response opcode used as a command
    "\n",                        # empty line
]


def script_lines(script):
    """Render a script (mix of command objects and raw lines) to wire lines."""
    lines = []
    for kind, payload in script:
        lines.append(encode_command(payload) if kind == "cmd" else payload)
    return lines


def memory_oracle(script, n_words):
    """Execute a script against a flat n_words array, brute force.

    Returns (expected response lines, final words, final sim time).  Word
    semantics: any access at word index >= n_words is a bus error; block
    reads return nothing on error; block writes stop at the fault.
    """
    words = [0] * n_words
    out = []
    time_ns = 0
    for kind, payload in script:
        if kind == "raw":
            out.append("ERR 00000002\n")
            continue
        cmd = payload
        if isinstance(cmd, Write):
            idx = cmd.addr // 4
            if idx < n_words:
                words[idx] = cmd.data
                out.append("OK\n")
            else:
                out.append("ERR 00000001\n")
        elif isinstance(cmd, Read):
            idx = cmd.addr // 4
            if idx < n_words:
                out.append(f"D {words[idx]:08X}\n")
            else:
                out.append("ERR 00000001\n")
        elif isinstance(cmd, BlockWrite):
            ok = True
            for i, value in enumerate(cmd.data):
                idx = cmd.addr // 4 + i
                if idx < n_words:
                    words[idx] = value
                else:
                    ok = False
                    break
            out.append("OK\n" if ok else "ERR 00000001\n")
        elif isinstance(cmd, BlockRead):
            indexes = [cmd.addr // 4 + i for i in range(cmd.count)]
            if all(idx < n_words for idx in indexes):
                out.append("D " + " ".join(f"{words[i]:08X}" for i in indexes) + "\n")
            else:
                out.append("ERR 00000001\n")
        elif isinstance(cmd, AdvanceTime):
            time_ns += cmd.delta_ns
            out.append("OK\n")
        elif isinstance(cmd, Quit):
            out.append("BYE\n")
            break
        else:  # pragma: no cover - generator never produces others
            raise AssertionError(cmd)
    return out, words, time_ns


def random_memory_script(rng, n_words, max_commands=50):
    """A random script over a memory device, including error cases."""
    script = []
    for _ in range(rng.randint(1, max_commands - 1)):
        roll = rng.random()
        # word indexes deliberately overshoot the device to provoke bus errors
        addr = 4 * rng.randrange(0, n_words + n_words // 2)
        if roll < 0.18:
            script.append(("raw", rng.choice(MALFORMED_LINES)))
        elif roll < 0.42:
            script.append(("cmd", Write(addr, rng.randrange(2**32))))
        elif roll < 0.66:
            script.append(("cmd", Read(addr)))
        elif roll < 0.78:
            data = tuple(rng.randrange(2**32) for _ in range(rng.randint(1, 8)))
            script.append(("cmd", BlockWrite(addr, data)))
        elif roll < 0.90:
            script.append(("cmd", BlockRead(addr, rng.randint(1, 8))))
        else:
            script.append(("cmd", AdvanceTime(rng.randrange(10**6))))
    if rng.random() < 0.7:
        script.append(("cmd", Quit()))
    return script


# --- register map brute-force checks ---


def enumerate_word_addresses(block: MappedBlock) -> list[int]:
    """Every allocated word address in the tree, one entry per element."""
    addrs: list[int] = []

    def walk(b: MappedBlock):
        for reg in b.registers:
            for i in range(reg.count):
                addrs.append(reg.address + 4 * i)
        for _, sub in b.subblocks:
            walk(sub)

    walk(block)
    return addrs


def check_map_invariants(regmap: RegisterMap) -> None:
    """Assert no-overlap, containment, and alignment by exhaustive scan."""
    addrs = enumerate_word_addresses(regmap.root)
    assert len(addrs) == len(set(addrs)), "registers share an address"

    def walk(b: MappedBlock):
        assert b.span >= 4 and b.span & (b.span - 1) == 0, f"span {b.span:#x} not a power of two"
        assert b.base % b.span == 0, f"base {b.base:#x} unaligned to span {b.span:#x}"
        for reg in b.registers:
            for i in range(reg.count):
                a = reg.address + 4 * i
                assert a % 4 == 0
                assert b.base <= a < b.base + b.span, "register escapes its block"
        for _, sub in b.subblocks:
            assert b.base <= sub.base, "subblock starts before parent"
            assert sub.base + sub.span <= b.base + b.span, "subblock escapes parent"
            walk(sub)

    walk(regmap.root)

    # the flat index agrees with the tree
    flat = sorted(addr for addr, _, _ in regmap.iter_elements())
    assert flat == sorted(addrs)


def random_block_desc(rng, max_elements=150, max_depth=4) -> BlockDesc:
    """A random register tree staying under the element budget and depth."""
    remaining = [rng.randint(1, max_elements)]
    uid = itertools.count()

    def gen(depth: int) -> BlockDesc:
        regs = []
        for _ in range(rng.randint(0, 5)):
            if remaining[0] <= 0:
                break
            count = min(rng.choice((1, 1, 1, 2, 3, 4, 8)), remaining[0])
            remaining[0] -= count
            regs.append(RegDesc(f"r{next(uid)}", rng.choice(("rw", "ro", "wo")), count))
        subs = []
        if depth < max_depth:
            for _ in range(rng.randint(0, 3)):
                if remaining[0] <= 0:
                    break
                subs.append((f"i{next(uid)}", gen(depth + 1)))
        if not regs and not subs:
            regs.append(RegDesc(f"r{next(uid)}", "rw", 1))
        return BlockDesc(f"b{next(uid)}", tuple(regs), tuple(subs))

    return gen(1)


# --- random protocol values for round-trip checks ---


def random_command(rng):
    kind = rng.randrange(6)
    addr = 4 * rng.randrange(2**30)
    if kind == 0:
        return Write(addr, rng.randrange(2**32))
    if kind == 1:
        return Read(addr)
    if kind == 2:
        data = tuple(rng.randrange(2**32) for _ in range(rng.randint(1, 16)))
        return BlockWrite(addr, data)
    if kind == 3:
        count = rng.choice((1, 2, 7, 255, rng.randrange(1, 2**32)))
        return BlockRead(addr, count)
    if kind == 4:
        return AdvanceTime(rng.randrange(2**64))
    return Quit()


def random_response(rng):
    from cosim.protocol import Bye, Data, Err, Ok

    kind = rng.randrange(4)
    if kind == 0:
        return Ok()
    if kind == 1:
        words = tuple(rng.randrange(2**32) for _ in range(rng.randint(1, 16)))
        return Data(words)
    if kind == 2:
        return Err(rng.choice((1, 2, 3)))
    return Bye()
