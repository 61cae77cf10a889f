// Behavioral model of the device under test: an adder hanging off a
// Wishbone-style slave port.
//
// Register bank (word addressed, 32-bit):
//   0x0  a    read/write
//   0x4  b    read/write
//   0x8  sum  read-only, always (a + b) mod 2^32
//
// The slave registers its outputs: a request sampled on one rising edge is
// answered with ack/err on the next, so every bus cycle takes two clocks.

export interface WbRequest {
  we: boolean;
  addr: number;
  dataW: number;
}

export interface WbOutputs {
  ack: boolean;
  err: boolean;
  dataR: number;
}

const IDLE: WbOutputs = { ack: false, err: false, dataR: 0 };

export class AdderSlave {
  private a = 0;
  private b = 0;
  private next: WbOutputs = IDLE;

  /** One rising clock edge: returns the outputs visible during this cycle. */
  tick(cyc: boolean, stb: boolean, req: WbRequest): WbOutputs {
    const visible = this.next;
    this.next = IDLE;
    // accept a new request only while not presenting a response
    if (cyc && stb && !visible.ack && !visible.err) {
      this.next = this.respond(req);
    }
    return visible;
  }

  private respond(req: WbRequest): WbOutputs {
    const word = req.addr >>> 2;
    if (req.we) {
      if (word === 0) {
        this.a = req.dataW >>> 0;
      } else if (word === 1) {
        this.b = req.dataW >>> 0;
      } else {
        // sum is read-only; anything else is an unmapped hole
        return { ack: false, err: true, dataR: 0 };
      }
      return { ack: true, err: false, dataR: 0 };
    }
    if (word === 0) return { ack: true, err: false, dataR: this.a };
    if (word === 1) return { ack: true, err: false, dataR: this.b };
    if (word === 2) return { ack: true, err: false, dataR: (this.a + this.b) % 0x1_0000_0000 };
    return { ack: false, err: true, dataR: 0 };
  }
}
