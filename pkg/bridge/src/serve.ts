/**
 * Single-threaded event loop: read one JSON message per line from stdin,
 * answer on stdout (flushed per message), exit 0 on shutdown.
 */

import readline from "node:readline";
import type { Readable, Writable } from "node:stream";

import type { AdapterModel } from "./models.js";
import {
  ErrorMsg,
  PROTOCOL_VERSION,
  ProposalMsg,
  ReadyMsg,
  parseLine,
} from "./protocol.js";

export interface ServeOptions {
  /** Artificial per-proposal delay, for exercising host timeout paths. */
  delayMs?: number;
  input?: Readable;
  output?: Writable;
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

export async function serve(model: AdapterModel, opts: ServeOptions = {}): Promise<void> {
  const input = opts.input ?? process.stdin;
  const output = opts.output ?? process.stdout;
  const delayMs = opts.delayMs ?? 0;

  const send = (msg: ReadyMsg | ProposalMsg | ErrorMsg): void => {
    output.write(JSON.stringify(msg) + "\n");
  };

  const rl = readline.createInterface({ input, crlfDelay: Infinity });
  // one request in flight at a time: lines are handled strictly in order
  for await (const line of rl) {
    if (line.trim() === "") continue;
    const parsed = parseLine(line);
    if (!parsed.ok) {
      send({ type: "error", ...(parsed.id !== undefined && { id: parsed.id }), message: parsed.error });
      continue;
    }
    const msg = parsed.msg;
    if (msg.type === "hello") {
      // always advertise our own shape; the parent detects a mismatch
      send({
        type: "ready",
        version: PROTOCOL_VERSION,
        dims: model.dims,
        context_len: model.contextLen,
      });
    } else if (msg.type === "propose") {
      if (delayMs > 0) await sleep(delayMs);
      let value: number[];
      try {
        value = model.next(msg.context, msg.seed);
      } catch (err) {
        send({ type: "error", id: msg.id, message: String(err) });
        continue;
      }
      send({ type: "proposal", id: msg.id, value });
    } else {
      rl.close();
      input.destroy?.();
      return;
    }
  }
}
