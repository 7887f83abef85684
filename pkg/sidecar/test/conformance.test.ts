/** textsim/1 conformance against the shared corpus, plus golden scores. */
import { describe, expect, it } from "vitest";
import { spawnSync } from "node:child_process";
import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import * as path from "node:path";

import { MAIN_JS, scoreBatch, startSidecar } from "./harness.js";

const here = path.dirname(fileURLToPath(import.meta.url));
// same corpus the core's protocol client is tested against
const CORPUS = JSON.parse(
  readFileSync(path.join(here, "..", "..", "tests", "data", "textsim_conformance.json"), "utf-8")
);
const GOLDEN = JSON.parse(readFileSync(path.join(here, "golden_scores.json"), "utf-8"));

describe("handshake", () => {
  it("announces the protocol and pinned backend first", async () => {
    const session = await startSidecar();
    expect(session.handshake.protocol).toBe("textsim/1");
    expect(session.handshake.backend).toBe(GOLDEN.backend);
    expect(session.rawLines[0]).toBe(
      JSON.stringify({ protocol: "textsim/1", backend: GOLDEN.backend })
    );
    await session.close();
  });
});

describe("conformance corpus", () => {
  it("answers every id exactly once, in range, with a done marker per flush", async () => {
    const session = await startSidecar();
    for (const testCase of CORPUS.cases) {
      const scores = await scoreBatch(session, testCase.requests);
      const wantIds = testCase.requests.map((r: { id: string }) => r.id).sort();
      expect([...scores.keys()].sort(), testCase.name).toEqual(wantIds);
      for (const value of scores.values()) {
        expect(value).toBeGreaterThanOrEqual(0);
        expect(value).toBeLessThanOrEqual(1);
      }
      for (const id of testCase.identical_ids) {
        expect(scores.get(id), `${testCase.name}: ${id}`).toBeGreaterThanOrEqual(0.99);
      }
    }
    const exitCode = await session.close();
    expect(exitCode).toBe(0);
  });

  it("is order-independent: shuffled batches give identical per-id scores", async () => {
    const session = await startSidecar();
    for (const testCase of CORPUS.cases) {
      const forward = await scoreBatch(session, testCase.requests);
      const reversed = await scoreBatch(session, [...testCase.requests].reverse());
      expect(Object.fromEntries(reversed), testCase.name).toEqual(Object.fromEntries(forward));
    }
    await session.close();
  });

  it("exits 0 on EOF", async () => {
    const session = await startSidecar();
    const exitCode = await session.close();
    expect(exitCode).toBe(0);
  });
});

describe("golden scores", () => {
  it("reproduces the recorded fixture to 1e-4", async () => {
    const session = await startSidecar();
    const scores = await scoreBatch(session, GOLDEN.pairs);
    for (const [id, expected] of Object.entries(GOLDEN.scores)) {
      expect(Math.abs((scores.get(id) ?? NaN) - (expected as number))).toBeLessThan(1e-4);
    }
    await session.close();
  });
});

describe("protocol violations", () => {
  it("answers a request missing 'reference' with an error line and nonzero exit", () => {
    const result = spawnSync("node", [MAIN_JS], {
      input: '{"id":"1","candidate":"x"}\n',
      encoding: "utf-8",
    });
    expect(result.status).not.toBe(0);
    const lines = result.stdout.trim().split("\n").map((l) => JSON.parse(l));
    expect(lines.some((l) => typeof l.error === "string" && l.error.includes("reference"))).toBe(
      true
    );
  });

  it("rejects non-JSON input", () => {
    const result = spawnSync("node", [MAIN_JS], {
      input: "definitely not json\n",
      encoding: "utf-8",
    });
    expect(result.status).not.toBe(0);
    const lines = result.stdout.trim().split("\n").map((l) => JSON.parse(l));
    expect(lines.some((l) => typeof l.error === "string")).toBe(true);
  });

  it("rejects unknown CLI arguments", () => {
    const result = spawnSync("node", [MAIN_JS, "--bogus"], { encoding: "utf-8" });
    expect(result.status).not.toBe(0);
  });
});
