import { describe, expect, it } from 'vitest';

import { attentionBars, sourceTokens } from './attention';

describe('sourceTokens', () => {
  it('splits items into words with an <eoi> after each item', () => {
    expect(sourceTokens(['blue printed jeans', 'black bag'])).toEqual([
      'blue', 'printed', 'jeans', '<eoi>', 'black', 'bag', '<eoi>',
    ]);
  });

  it('collapses extra whitespace', () => {
    expect(sourceTokens(['  red   dress '])).toEqual(['red', 'dress', '<eoi>']);
  });
});

describe('attentionBars', () => {
  it('maps server weights onto tokens and sums to 100%', () => {
    const bars = attentionBars(['blue', 'jeans', '<eoi>'], [0.2, 0.5, 0.3]);
    expect(bars.map((b) => b.token)).toEqual(['blue', 'jeans', '<eoi>']);
    expect(bars.map((b) => b.weight)).toEqual([0.2, 0.5, 0.3]);
    const total = bars.reduce((a, b) => a + b.percent, 0);
    expect(total).toBeCloseTo(100, 9);
  });

  it('renormalizes weights that do not quite sum to one', () => {
    const bars = attentionBars(['a', 'b'], [0.3, 0.3]);
    expect(bars[0].percent).toBeCloseTo(50, 9);
    expect(bars[1].percent).toBeCloseTo(50, 9);
  });

  it('preserves the served proportions', () => {
    const bars = attentionBars(['a', 'b', 'c'], [0.1, 0.2, 0.7]);
    expect(bars[2].percent / bars[0].percent).toBeCloseTo(7, 9);
  });

  it('returns no bars without weights or on a length mismatch', () => {
    expect(attentionBars(['a', 'b'], null)).toEqual([]);
    expect(attentionBars(['a', 'b'], [1.0])).toEqual([]);
    expect(attentionBars(['a'], [0])).toEqual([]);
  });
});
