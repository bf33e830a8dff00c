/** Offsets of matched evidence terms inside the displayed note text.
 *
 * The service matches terms on normalized text (NFC, case-folded, collapsed
 * whitespace) delimited by whitespace/punctuation; here each term is located
 * in the raw note with the same semantics so highlight ranges index the
 * string actually rendered.
 */

export interface Highlight {
  start: number;
  end: number;
  term: string;
  label: string;
}

const PUNCT = /[\p{P}\s]/u;

function isBoundary(text: string, index: number): boolean {
  if (index < 0 || index >= text.length) return true;
  const ch = text[index];
  return ch !== undefined && PUNCT.test(ch);
}

function termPattern(term: string): RegExp {
  const tokens = term.split(/\s+/).filter((t) => t.length > 0);
  const escaped = tokens.map((t) => t.replace(/[.*+?^${}()|[\]\\]/g, "\\$&"));
  return new RegExp(escaped.join("\\s+"), "giu");
}

/** All delimited occurrences of `term` in `text`, case-insensitive. */
export function findTermOffsets(text: string, term: string, label = ""): Highlight[] {
  const normalized = text.normalize("NFC");
  const pattern = termPattern(term.normalize("NFC"));
  const out: Highlight[] = [];
  for (const match of normalized.matchAll(pattern)) {
    const start = match.index ?? 0;
    const end = start + match[0].length;
    if (isBoundary(normalized, start - 1) && isBoundary(normalized, end)) {
      out.push({ start, end, term, label });
    }
  }
  return out;
}

/** Non-overlapping highlights for a set of matched terms, sorted by start;
 * longer matches win when ranges collide. */
export function computeHighlights(
  text: string,
  matchedTerms: [string, string][],
): Highlight[] {
  const candidates: Highlight[] = [];
  for (const [term, label] of matchedTerms) {
    candidates.push(...findTermOffsets(text, term, label));
  }
  candidates.sort((a, b) => a.start - b.start || b.end - a.end);
  const out: Highlight[] = [];
  let cursor = 0;
  for (const candidate of candidates) {
    if (candidate.start >= cursor) {
      out.push(candidate);
      cursor = candidate.end;
    }
  }
  return out;
}

/** Split text into plain/highlighted segments for rendering. */
export function segmentText(
  text: string,
  highlights: Highlight[],
): { text: string; highlight: Highlight | null }[] {
  const normalized = text.normalize("NFC");
  const segments: { text: string; highlight: Highlight | null }[] = [];
  let cursor = 0;
  for (const highlight of highlights) {
    if (highlight.start > cursor) {
      segments.push({ text: normalized.slice(cursor, highlight.start), highlight: null });
    }
    segments.push({
      text: normalized.slice(highlight.start, highlight.end),
      highlight,
    });
    cursor = highlight.end;
  }
  if (cursor < normalized.length) {
    segments.push({ text: normalized.slice(cursor), highlight: null });
  }
  return segments;
}
