/**
 * The judgment scale as the service speaks it: seventeen exact rationals
 * from "1/9" to "9/1", written as lowest-terms "p/q" strings.
 *
 * Entries never exist as floats on this side of the wire. Keeping them as
 * strings means a reciprocal is a numerator/denominator swap and a submitted
 * matrix is bit-identical to what the grid shows.
 */

/** Verbal grades for the five whole steps, strongest first. */
export const GRADES: ReadonlyArray<{ strength: number; label: string }> = [
  { strength: 9, label: "extremely more important" },
  { strength: 7, label: "very strongly more important" },
  { strength: 5, label: "strongly more important" },
  { strength: 3, label: "moderately more important" },
  { strength: 1, label: "equally important" },
];

/** Even strengths sit between two verbal grades. */
export function labelForStrength(strength: number): string {
  const grade = GRADES.find((g) => g.strength === strength);
  if (grade) return grade.label;
  const above = GRADES.find((g) => g.strength === strength + 1);
  const below = GRADES.find((g) => g.strength === strength - 1);
  if (!above || !below) throw new Error(`strength out of range: ${strength}`);
  return `between ${below.label.replace(" more important", "")} and ${above.label.replace(" more important", "")}`;
}

/** All seventeen selectable values, ascending: "1/9" ... "1/1" ... "9/1". */
export const SCALE_VALUES: readonly string[] = (() => {
  const out: string[] = [];
  for (let k = 9; k >= 2; k--) out.push(`1/${k}`);
  for (let k = 1; k <= 9; k++) out.push(`${k}/1`);
  return out;
})();

const SCALE_SET = new Set(SCALE_VALUES);

export function isScaleValue(text: string): boolean {
  return SCALE_SET.has(text);
}

/** "p/q" -> "q/p". Lowest terms in, lowest terms out. */
export function reciprocal(text: string): string {
  const [p, q] = splitRational(text);
  return `${q}/${p}`;
}

export function splitRational(text: string): [number, number] {
  const m = /^([1-9][0-9]*)\/([1-9][0-9]*)$/.exec(text);
  if (!m) throw new Error(`not a rational entry: ${JSON.stringify(text)}`);
  return [Number(m[1]), Number(m[2])];
}

/** Numeric value for sorting and charts only; never sent to the service. */
export function toNumber(text: string): number {
  const [p, q] = splitRational(text);
  return p / q;
}

/** Compact display: "3/1" renders as "3", "1/3" stays "1/3". */
export function display(text: string): string {
  const [p, q] = splitRational(text);
  return q === 1 ? String(p) : `${p}/${q}`;
}

/**
 * A cell value decomposed for the selector controls: who dominates and by
 * how many scale steps. strength 1 means the pair is judged equal.
 */
export interface CellChoice {
  dominant: "row" | "column";
  strength: number; // 1..9
}

export function choiceOf(text: string): CellChoice {
  const [p, q] = splitRational(text);
  if (p >= q) return { dominant: "row", strength: p };
  return { dominant: "column", strength: q };
}

export function choiceToValue(choice: CellChoice): string {
  const s = choice.strength;
  if (!Number.isInteger(s) || s < 1 || s > 9) {
    throw new Error(`strength out of range: ${s}`);
  }
  if (s === 1) return "1/1";
  return choice.dominant === "row" ? `${s}/1` : `1/${s}`;
}

/** Human text for any scale value, from the row item's point of view. */
export function describe(text: string): string {
  const { dominant, strength } = choiceOf(text);
  if (strength === 1) return labelForStrength(1);
  const side = dominant === "row" ? "row" : "column";
  return `${side} ${labelForStrength(strength)}`;
}
