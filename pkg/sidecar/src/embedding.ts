/**
 * Deterministic token embeddings via hashed character n-grams.
 *
 * Each token maps to a fixed-dimension vector by FNV-1a-hashing its padded
 * character trigrams into signed buckets, then L2-normalizing. No model
 * weights, no I/O: the same token embeds identically on every platform,
 * which is what makes golden-score tests meaningful.
 */

export const EMBEDDING_DIM = 256;

const FNV_OFFSET = 0x811c9dc5;
const FNV_PRIME = 0x01000193;

function fnv1a(text: string): number {
  let hash = FNV_OFFSET;
  for (let i = 0; i < text.length; i++) {
    hash ^= text.charCodeAt(i);
    hash = Math.imul(hash, FNV_PRIME) >>> 0;
  }
  return hash >>> 0;
}

/** Lowercase, NFC, collapse whitespace; strip edge punctuation per token;
 * split CJK ideographs and kana into single-character tokens. */
export function tokenize(text: string): string[] {
  const normalized = text.normalize("NFC").toLowerCase();
  const tokens: string[] = [];
  for (const raw of normalized.split(/\s+/)) {
    const word = raw.replace(/^\p{P}+|\p{P}+$/gu, "");
    if (!word) continue;
    let run = "";
    for (const ch of word) {
      if (/[぀-ヿ㐀-䶿一-鿿豈-﫿]/u.test(ch)) {
        if (run) {
          tokens.push(run);
          run = "";
        }
        tokens.push(ch);
      } else {
        run += ch;
      }
    }
    if (run) tokens.push(run);
  }
  return tokens;
}

function charNgrams(token: string, n = 3): string[] {
  const padded = `^${token}$`;
  if (padded.length <= n) return [padded];
  const grams: string[] = [];
  for (let i = 0; i + n <= padded.length; i++) {
    grams.push(padded.slice(i, i + n));
  }
  return grams;
}

export function embedToken(token: string): Float64Array {
  const vec = new Float64Array(EMBEDDING_DIM);
  for (const gram of charNgrams(token)) {
    const hash = fnv1a(gram);
    const index = hash % EMBEDDING_DIM;
    const sign = (hash >>> 8) & 1 ? 1 : -1;
    vec[index] += sign;
  }
  let norm = 0;
  for (const v of vec) norm += v * v;
  norm = Math.sqrt(norm);
  if (norm > 0) {
    for (let i = 0; i < vec.length; i++) vec[i] /= norm;
  }
  return vec;
}

export function cosine(a: Float64Array, b: Float64Array): number {
  let dot = 0;
  for (let i = 0; i < a.length; i++) dot += a[i] * b[i];
  return dot;
}
