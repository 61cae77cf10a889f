// Bus functional master: turns transaction-level requests into clocked
// bus cycles against a slave, holding cyc/stb until ack or err.

import { AdderSlave, WbRequest } from "./design.js";

const CYCLE_WATCHDOG = 64; // clocks before a stuck slave is a model bug

export interface TransferResult {
  ok: boolean;
  data: number;
}

export class WishboneMaster {
  /** Total rising clock edges driven, for simulation-time accounting. */
  clocks = 0;

  constructor(private slave: AdderSlave) {}

  private cycle(req: WbRequest): TransferResult {
    for (let i = 0; i < CYCLE_WATCHDOG; i++) {
      const out = this.slave.tick(true, true, req);
      this.clocks += 1;
      if (out.ack) return { ok: true, data: out.dataR };
      if (out.err) return { ok: false, data: 0 };
    }
    throw new Error("bus cycle watchdog expired: slave never terminated the cycle");
  }

  write(addr: number, data: number): boolean {
    return this.cycle({ we: true, addr, dataW: data }).ok;
  }

  read(addr: number): TransferResult {
    return this.cycle({ we: false, addr, dataW: 0 });
  }

  /** Idle clocks with the bus released. */
  idle(clocks: number): void {
    for (let i = 0; i < clocks; i++) {
      this.slave.tick(false, false, { we: false, addr: 0, dataW: 0 });
      this.clocks += 1;
    }
  }
}
