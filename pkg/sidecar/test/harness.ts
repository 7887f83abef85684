/** Spawns the built sidecar and drives the textsim/1 conversation for tests. */
import { ChildProcess, spawn } from "node:child_process";
import { fileURLToPath } from "node:url";
import * as path from "node:path";

const here = path.dirname(fileURLToPath(import.meta.url));
export const MAIN_JS = path.join(here, "..", "dist", "main.js");

export interface SidecarSession {
  proc: ChildProcess;
  handshake: Record<string, unknown>;
  lines: AsyncGenerator<Record<string, unknown>>;
  rawLines: string[];
  send(obj: unknown): void;
  close(): Promise<number | null>;
}

async function* lineStream(proc: ChildProcess, raw: string[]) {
  let buffer = "";
  for await (const chunk of proc.stdout!) {
    buffer += chunk.toString("utf-8");
    let idx;
    while ((idx = buffer.indexOf("\n")) >= 0) {
      const line = buffer.slice(0, idx);
      buffer = buffer.slice(idx + 1);
      if (!line.trim()) continue;
      raw.push(line);
      yield JSON.parse(line) as Record<string, unknown>;
    }
  }
}

export async function startSidecar(args: string[] = []): Promise<SidecarSession> {
  const proc = spawn("node", [MAIN_JS, ...args], { stdio: ["pipe", "pipe", "pipe"] });
  const rawLines: string[] = [];
  const lines = lineStream(proc, rawLines);
  const first = await lines.next();
  if (first.done) throw new Error("sidecar produced no handshake");
  return {
    proc,
    handshake: first.value,
    lines,
    rawLines,
    send(obj: unknown) {
      proc.stdin!.write(JSON.stringify(obj) + "\n");
    },
    close() {
      proc.stdin!.end();
      return new Promise((resolve) => proc.on("exit", resolve));
    },
  };
}

export async function scoreBatch(
  session: SidecarSession,
  requests: { id: string; candidate: string; reference: string }[]
): Promise<Map<string, number>> {
  for (const request of requests) session.send(request);
  session.send({ flush: true });
  const scores = new Map<string, number>();
  for (;;) {
    const next = await session.lines.next();
    if (next.done) throw new Error("sidecar stream ended before done marker");
    const msg = next.value;
    if (msg.done === true) break;
    if (typeof msg.id !== "string" || typeof msg.score !== "number") {
      throw new Error(`unexpected response line: ${JSON.stringify(msg)}`);
    }
    scores.set(msg.id, msg.score);
  }
  return scores;
}
