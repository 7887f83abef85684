/**
 * Embedding-similarity scorer: token-level greedy max-cosine matching in
 * both directions, combined as an F1, then transformed into [0, 1].
 */
import { cosine, embedToken, tokenize } from "./embedding.js";

export type ScoreTransform = "clamp01" | "baseline_rescale_then_clamp";

export interface SidecarConfig {
  backend: string;
  device: string;
  transform: ScoreTransform;
}

export const BACKEND_ID = "hashed-ngram-bertscore-f1/256d-v1";

/** Expected similarity of unrelated text under this embedding; used by the
 * optional rescaling transform. Fixed, not corpus-fitted, for determinism. */
export const RESCALE_BASELINE = 0.25;

export const DEFAULT_CONFIG: SidecarConfig = {
  backend: BACKEND_ID,
  device: "cpu",
  transform: "clamp01",
};

function clamp01(value: number): number {
  return value < 0 ? 0 : value > 1 ? 1 : value;
}

export function applyTransform(raw: number, transform: ScoreTransform): number {
  if (transform === "baseline_rescale_then_clamp") {
    return clamp01((raw - RESCALE_BASELINE) / (1 - RESCALE_BASELINE));
  }
  return clamp01(raw);
}

export function rawSimilarity(candidate: string, reference: string): number {
  const candTokens = tokenize(candidate);
  const refTokens = tokenize(reference);
  if (candTokens.length === 0 && refTokens.length === 0) return 1;
  if (candTokens.length === 0 || refTokens.length === 0) return 0;

  const candVecs = candTokens.map(embedToken);
  const refVecs = refTokens.map(embedToken);

  let precision = 0;
  for (const c of candVecs) {
    let best = -Infinity;
    for (const r of refVecs) best = Math.max(best, cosine(c, r));
    precision += best;
  }
  precision /= candVecs.length;

  let recall = 0;
  for (const r of refVecs) {
    let best = -Infinity;
    for (const c of candVecs) best = Math.max(best, cosine(c, r));
    recall += best;
  }
  recall /= refVecs.length;

  if (precision + recall <= 0) return 0;
  return (2 * precision * recall) / (precision + recall);
}

export function score(candidate: string, reference: string, config: SidecarConfig): number {
  return applyTransform(rawSimilarity(candidate, reference), config.transform);
}
