/** Attention weight bars: label each source token with its served weight. */

export interface AttentionBar {
  token: string;
  weight: number;
  /** Bar width as a percentage; all bars for one candidate sum to 100. */
  percent: number;
}

/**
 * Pair source tokens with a candidate's attention weights.
 *
 * The server sends a probability vector, but renormalize defensively so the
 * bars always total 100% even if a weight was lost to float serialization.
 */
export function attentionBars(
  tokens: string[],
  weights: number[] | null,
): AttentionBar[] {
  if (!weights || weights.length !== tokens.length) return [];
  const total = weights.reduce((a, b) => a + b, 0);
  if (!(total > 0)) return [];
  return tokens.map((token, i) => ({
    token,
    weight: weights[i],
    percent: (100 * weights[i]) / total,
  }));
}

/** Source tokens as the encoder sees them: item words joined by <eoi>. */
export function sourceTokens(items: string[]): string[] {
  const out: string[] = [];
  for (const item of items) {
    for (const word of item.trim().split(/\s+/)) {
      if (word) out.push(word);
    }
    out.push('<eoi>');
  }
  return out;
}
