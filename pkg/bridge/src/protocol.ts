/**
 * Wire protocol (version 1): one JSON object per newline-terminated line
 * over stdin/stdout.
 *
 *   parent -> child   {"type":"hello","version":1,"dims":d,"context_len":p}
 *   child  -> parent  {"type":"ready","version":1,"dims":d,"context_len":p}
 *   parent -> child   {"type":"propose","id":n,"context":[[...]],"seed":u64}
 *   child  -> parent  {"type":"proposal","id":n,"value":[d reals]}
 *   parent -> child   {"type":"shutdown"}         (child exits 0)
 *
 * Malformed input is answered with {"type":"error","id":n?,"message":...}
 * and the loop continues; diagnostics go to stderr only.
 */

export const PROTOCOL_VERSION = 1;

export interface HelloMsg {
  type: "hello";
  version: number;
  dims: number;
  context_len: number;
}

export interface ReadyMsg {
  type: "ready";
  version: number;
  dims: number;
  context_len: number;
}

export interface ProposeMsg {
  type: "propose";
  id: number;
  context: number[][];
  seed: number;
}

export interface ProposalMsg {
  type: "proposal";
  id: number;
  value: number[];
}

export interface ErrorMsg {
  type: "error";
  id?: number;
  message: string;
}

export interface ShutdownMsg {
  type: "shutdown";
}

export type InboundMsg = HelloMsg | ProposeMsg | ShutdownMsg;

export type ParseResult =
  | { ok: true; msg: InboundMsg }
  | { ok: false; id?: number; error: string };

function isFiniteNumber(v: unknown): v is number {
  return typeof v === "number" && Number.isFinite(v);
}

function isContext(v: unknown): v is number[][] {
  return (
    Array.isArray(v) &&
    v.length > 0 &&
    v.every(
      (row) =>
        Array.isArray(row) && row.length > 0 && row.every(isFiniteNumber),
    )
  );
}

/** Parse and validate one inbound line. Never throws. */
export function parseLine(line: string): ParseResult {
  let raw: unknown;
  try {
    raw = JSON.parse(line);
  } catch {
    return { ok: false, error: `not valid JSON: ${line.slice(0, 80)}` };
  }
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
    return { ok: false, error: "message must be a JSON object" };
  }
  const msg = raw as Record<string, unknown>;
  const id = isFiniteNumber(msg.id) ? msg.id : undefined;

  switch (msg.type) {
    case "hello":
      if (msg.version !== PROTOCOL_VERSION) {
        return { ok: false, id, error: `unsupported version ${msg.version}` };
      }
      if (!isFiniteNumber(msg.dims) || !isFiniteNumber(msg.context_len)) {
        return { ok: false, id, error: "hello requires numeric dims and context_len" };
      }
      return {
        ok: true,
        msg: {
          type: "hello",
          version: PROTOCOL_VERSION,
          dims: msg.dims,
          context_len: msg.context_len,
        },
      };
    case "propose":
      if (id === undefined) {
        return { ok: false, error: "propose requires a numeric id" };
      }
      if (!isContext(msg.context)) {
        return { ok: false, id, error: "context must be a nonempty matrix of finite reals" };
      }
      if (!isFiniteNumber(msg.seed)) {
        return { ok: false, id, error: "seed must be a finite number" };
      }
      return {
        ok: true,
        msg: { type: "propose", id, context: msg.context, seed: msg.seed },
      };
    case "shutdown":
      return { ok: true, msg: { type: "shutdown" } };
    default:
      return { ok: false, id, error: `unknown message type ${String(msg.type)}` };
  }
}
