/**
 * textsim/1 sidecar entry point.
 *
 * Wire format over stdin/stdout, one JSON document per line:
 *   out: {"protocol":"textsim/1","backend":<id>}        (once, on startup)
 *   in:  {"id":str,"candidate":str,"reference":str}     (buffered)
 *   in:  {"flush":true}
 *   out: {"id":str,"score":number} per buffered request, then {"done":true}
 * EOF on stdin exits 0. Any protocol violation gets {"error":...} and a
 * nonzero exit.
 */
import * as readline from "node:readline";

import { DEFAULT_CONFIG, SidecarConfig, ScoreTransform, score } from "./scorer.js";

interface ScoreRequest {
  id: string;
  candidate: string;
  reference: string;
}

let failing = false;

function emit(obj: unknown): void {
  process.stdout.write(JSON.stringify(obj) + "\n");
}

/** Emit an error line and exit nonzero once stdout has drained; pipes are
 * async, so a bare process.exit here could truncate the error line. */
function fail(message: string): void {
  if (failing) return;
  failing = true;
  process.stdin.pause();
  process.stdout.write(JSON.stringify({ error: message }) + "\n", () => process.exit(1));
}

export function parseArgs(argv: string[]): SidecarConfig | null {
  const config = { ...DEFAULT_CONFIG };
  for (let i = 0; i < argv.length; i++) {
    if (argv[i] === "--transform") {
      const value = argv[++i];
      if (value !== "clamp01" && value !== "baseline_rescale_then_clamp") {
        fail(`unknown transform ${value}`);
        return null;
      }
      config.transform = value as ScoreTransform;
    } else if (argv[i] === "--device") {
      config.device = argv[++i] ?? "cpu";
    } else {
      fail(`unknown argument ${argv[i]}`);
      return null;
    }
  }
  return config;
}

export function main(): void {
  const config = parseArgs(process.argv.slice(2));
  if (config === null) return;
  emit({ protocol: "textsim/1", backend: config.backend });

  const pending: ScoreRequest[] = [];
  const rl = readline.createInterface({ input: process.stdin, terminal: false });

  rl.on("line", (line: string) => {
    if (failing) return;
    const trimmed = line.trim();
    if (!trimmed) return;

    let message: unknown;
    try {
      message = JSON.parse(trimmed);
    } catch {
      fail(`not valid JSON: ${trimmed.slice(0, 200)}`);
      rl.close();
      return;
    }
    if (typeof message !== "object" || message === null || Array.isArray(message)) {
      fail("each request line must be a JSON object");
      rl.close();
      return;
    }
    const request = message as Record<string, unknown>;

    if (request.flush === true) {
      for (const item of pending) {
        emit({ id: item.id, score: score(item.candidate, item.reference, config) });
      }
      emit({ done: true });
      pending.length = 0;
      return;
    }

    const missing = ["id", "candidate", "reference"].filter(
      (key) => typeof request[key] !== "string"
    );
    if (missing.length > 0) {
      fail(`request missing key(s): ${missing.join(", ")}`);
      rl.close();
      return;
    }
    pending.push({
      id: request.id as string,
      candidate: request.candidate as string,
      reference: request.reference as string,
    });
  });

  rl.on("close", () => {
    if (!failing) process.exit(0);
  });
}

main();
