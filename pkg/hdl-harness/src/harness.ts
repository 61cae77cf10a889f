// Hardware-side co-simulation endpoint.
//
// Mirrors the testbench harness shape: top-level "generics" arrive as CLI
// flags (the two pipe paths and the clock period), a bus functional master
// executes each received command as clocked bus cycles against the adder
// design, and the reply goes back over the return pipe, bit-exact to the
// wire grammar.  Interchangeable with the software bus model: the same test
// scripts must see the same response bytes.
//
// Open order (server role): sw_to_fw for reading first, then fw_to_sw for
// writing -- the counterpart of the software side's client order, so the
// rendezvous cannot deadlock.

import { open, FileHandle } from "node:fs/promises";
import { openSync, writeSync, closeSync } from "node:fs";
import process from "node:process";

import { WishboneMaster } from "./bfm.js";
import { AdderSlave } from "./design.js";
import {
  Command,
  ERR_BUS,
  ERR_MALFORMED,
  MalformedLine,
  Response,
  formatResponse,
  parseCommand,
} from "./protocol.js";

interface HarnessGenerics {
  swToFwPath: string;
  fwToSwPath: string;
  clockPeriodNs: bigint;
  logPath: string | null;
}

function parseArgs(argv: string[]): HarnessGenerics {
  const generics: HarnessGenerics = {
    swToFwPath: "",
    fwToSwPath: "",
    clockPeriodNs: 10n,
    logPath: null,
  };
  for (let i = 0; i < argv.length; i++) {
    const flag = argv[i];
    const value = argv[i + 1];
    switch (flag) {
      case "--sw-to-fw":
        generics.swToFwPath = value ?? "";
        i++;
        break;
      case "--fw-to-sw":
        generics.fwToSwPath = value ?? "";
        i++;
        break;
      case "--clock-period-ns":
        generics.clockPeriodNs = BigInt(value ?? "10");
        i++;
        break;
      case "--log":
        generics.logPath = value ?? null;
        i++;
        break;
      default:
        throw new Error(`unknown argument '${flag}'`);
    }
  }
  if (!generics.swToFwPath || !generics.fwToSwPath) {
    throw new Error("--sw-to-fw and --fw-to-sw are required");
  }
  if (generics.clockPeriodNs <= 0n) {
    throw new Error("--clock-period-ns must be positive");
  }
  return generics;
}

/** Split a byte stream into newline-terminated lines; drops an unterminated tail. */
async function* lines(handle: FileHandle): AsyncGenerator<string> {
  let pending = "";
  for await (const chunk of handle.createReadStream()) {
    pending += (chunk as Buffer).toString("latin1");
    let nl: number;
    while ((nl = pending.indexOf("\n")) >= 0) {
      yield pending.slice(0, nl + 1);
      pending = pending.slice(nl + 1);
    }
  }
}

class Harness {
  private master = new WishboneMaster(new AdderSlave());
  private advancedNs = 0n;
  private logFd: number | null;

  constructor(private generics: HarnessGenerics) {
    this.logFd = generics.logPath === null ? 2 : openSync(generics.logPath, "w");
  }

  private simTimeNs(): bigint {
    return BigInt(this.master.clocks) * this.generics.clockPeriodNs + this.advancedNs;
  }

  private log(direction: "rx" | "tx", line: string): void {
    if (this.logFd === null) return;
    writeSync(this.logFd, `${this.simTimeNs()} ${direction} ${line.trimEnd()}\n`);
  }

  private execute(cmd: Command): Response {
    switch (cmd.kind) {
      case "write":
        return this.master.write(cmd.addr, cmd.data)
          ? { kind: "ok" }
          : { kind: "err", code: ERR_BUS };
      case "read": {
        const result = this.master.read(cmd.addr);
        return result.ok
          ? { kind: "data", words: [result.data] }
          : { kind: "err", code: ERR_BUS };
      }
      case "blockWrite": {
        for (let i = 0; i < cmd.data.length; i++) {
          if (!this.master.write(cmd.addr + 4 * i, cmd.data[i])) {
            return { kind: "err", code: ERR_BUS };
          }
        }
        return { kind: "ok" };
      }
      case "blockRead": {
        const words: number[] = [];
        for (let i = 0; i < cmd.count; i++) {
          const result = this.master.read(cmd.addr + 4 * i);
          if (!result.ok) {
            return { kind: "err", code: ERR_BUS };
          }
          words.push(result.data);
        }
        return { kind: "data", words };
      }
      case "advanceTime":
        this.advancedNs += cmd.deltaNs;
        return { kind: "ok" };
      case "quit":
        return { kind: "bye" };
    }
  }

  async run(): Promise<number> {
    // server open order: read end first, then write end
    const reader = await open(this.generics.swToFwPath, "r");
    const writer = await open(this.generics.fwToSwPath, "w");
    let sawQuit = false;
    try {
      for await (const line of lines(reader)) {
        this.log("rx", line);
        let resp: Response;
        let quitting = false;
        try {
          const cmd = parseCommand(line);
          resp = this.execute(cmd);
          quitting = cmd.kind === "quit";
        } catch (error) {
          if (!(error instanceof MalformedLine)) throw error;
          resp = { kind: "err", code: ERR_MALFORMED };
        }
        const out = formatResponse(resp);
        writeSync(writer.fd, out);
        this.log("tx", out);
        if (quitting) {
          sawQuit = true;
          break;
        }
      }
    } finally {
      await reader.close();
      await writer.close();
      if (this.logFd !== null && this.logFd !== 2) {
        closeSync(this.logFd);
      }
    }
    return sawQuit ? 0 : 1;
  }
}

async function main(): Promise<number> {
  let generics: HarnessGenerics;
  try {
    generics = parseArgs(process.argv.slice(2));
  } catch (error) {
    console.error(`hdl-harness: ${(error as Error).message}`);
    return 2;
  }
  try {
    return await new Harness(generics).run();
  } catch (error) {
    console.error(`hdl-harness: ${(error as Error).message}`);
    return 1;
  }
}

main().then((code) => {
  process.exitCode = code;
});
