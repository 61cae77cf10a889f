// Wire grammar twin of the software side: one ASCII line per message,
// fixed-width uppercase hex fields, single response per command.
//
//   W <addr8> <data8> | R <addr8> | BW <addr8> <n8> <data8>... |
//   BR <addr8> <n8>   | T <ns16>  | Q
//
// answered by OK | D <data8>... | ERR <code8> | BYE.
// Parsing must reject exactly what the software bus model rejects, so the
// two endpoints stay interchangeable byte for byte.

export const ERR_BUS = 1;
export const ERR_MALFORMED = 2;

export type Command =
  | { kind: "write"; addr: number; data: number }
  | { kind: "read"; addr: number }
  | { kind: "blockWrite"; addr: number; data: number[] }
  | { kind: "blockRead"; addr: number; count: number }
  | { kind: "advanceTime"; deltaNs: bigint }
  | { kind: "quit" };

export type Response =
  | { kind: "ok" }
  | { kind: "data"; words: number[] }
  | { kind: "err"; code: number }
  | { kind: "bye" };

export class MalformedLine extends Error {}

const LINE_CHARS = /^[A-Z0-9 ]*$/;
const HEX8 = /^[0-9A-F]{8}$/;
const HEX16 = /^[0-9A-F]{16}$/;

function u32(token: string, what: string): number {
  if (!HEX8.test(token)) {
    throw new MalformedLine(`${what} must be exactly 8 uppercase hex digits, got '${token}'`);
  }
  return Number.parseInt(token, 16);
}

function alignedAddr(token: string): number {
  const addr = u32(token, "address");
  if (addr % 4 !== 0) {
    throw new MalformedLine(`address ${token} is not word aligned`);
  }
  return addr;
}

/** Parse one command line (trailing newline optional). Throws MalformedLine. */
export function parseCommand(line: string): Command {
  if (line.endsWith("\n")) {
    line = line.slice(0, -1);
  }
  if (!LINE_CHARS.test(line)) {
    throw new MalformedLine("invalid characters in line");
  }
  const tokens = line.split(" ").filter((t) => t.length > 0);
  if (tokens.length === 0) {
    throw new MalformedLine("empty line");
  }
  const [op, ...fields] = tokens;

  switch (op) {
    case "W": {
      if (fields.length !== 2) throw new MalformedLine("W expects 2 fields");
      return { kind: "write", addr: alignedAddr(fields[0]), data: u32(fields[1], "data") };
    }
    case "R": {
      if (fields.length !== 1) throw new MalformedLine("R expects 1 field");
      return { kind: "read", addr: alignedAddr(fields[0]) };
    }
    case "BW": {
      if (fields.length < 2) throw new MalformedLine("BW expects an address and a count");
      const addr = alignedAddr(fields[0]);
      const count = u32(fields[1], "count");
      if (count < 1) throw new MalformedLine("block write length must be >= 1");
      if (fields.length - 2 !== count) {
        throw new MalformedLine(`block write declares ${count} words but carries ${fields.length - 2}`);
      }
      return { kind: "blockWrite", addr, data: fields.slice(2).map((f) => u32(f, "data")) };
    }
    case "BR": {
      if (fields.length !== 2) throw new MalformedLine("BR expects 2 fields");
      const addr = alignedAddr(fields[0]);
      const count = u32(fields[1], "count");
      if (count < 1) throw new MalformedLine("block read count must be >= 1");
      return { kind: "blockRead", addr, count };
    }
    case "T": {
      if (fields.length !== 1) throw new MalformedLine("T expects 1 field");
      if (!HEX16.test(fields[0])) {
        throw new MalformedLine("time delta must be exactly 16 uppercase hex digits");
      }
      return { kind: "advanceTime", deltaNs: BigInt("0x" + fields[0]) };
    }
    case "Q": {
      if (fields.length !== 0) throw new MalformedLine("Q takes no fields");
      return { kind: "quit" };
    }
    default:
      throw new MalformedLine(`unknown opcode '${op}'`);
  }
}

export function hex8(value: number): string {
  return value.toString(16).toUpperCase().padStart(8, "0");
}

/** Render a response as one newline-terminated protocol line. */
export function formatResponse(resp: Response): string {
  switch (resp.kind) {
    case "ok":
      return "OK\n";
    case "data":
      return "D " + resp.words.map(hex8).join(" ") + "\n";
    case "err":
      return `ERR ${hex8(resp.code)}\n`;
    case "bye":
      return "BYE\n";
  }
}
