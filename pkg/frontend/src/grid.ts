/**
 * Editable pairwise comparison grid.
 *
 * The model stores only the strict upper triangle. The diagonal is fixed at
 * "1/1" and every lower cell is derived as the exact reciprocal at read
 * time, so a non-reciprocal matrix is not representable, let alone
 * submittable. Edits through the DOM and edits through setCell go through
 * the same single code path.
 */

import {
  choiceOf,
  choiceToValue,
  display,
  GRADES,
  isScaleValue,
  labelForStrength,
  reciprocal,
  toNumber,
} from "./scale.js";
import type { MatrixPayload } from "./api.js";

export class ComparisonGridView {
  readonly n: number;
  /** upper triangle only, key "i,j" with i < j */
  private readonly upper = new Map<string, string>();
  private container: HTMLElement | null = null;
  private onEdit: (() => void) | null = null;

  constructor(
    readonly labels: readonly string[],
    initialRows?: readonly (readonly string[])[],
  ) {
    this.n = labels.length;
    if (this.n < 2) throw new Error("a comparison grid needs at least 2 items");
    for (let i = 0; i < this.n; i++) {
      for (let j = i + 1; j < this.n; j++) this.upper.set(`${i},${j}`, "1/1");
    }
    if (initialRows) {
      if (initialRows.length !== this.n) throw new Error("initial rows shape mismatch");
      for (let i = 0; i < this.n; i++) {
        for (let j = i + 1; j < this.n; j++) this.setCell(i, j, initialRows[i][j]);
      }
    }
  }

  /**
   * Set the judgment for (i, j). The mirrored cell is the same stored entry
   * read the other way around, so both change in one action by construction.
   */
  setCell(i: number, j: number, value: string): void {
    if (i === j) throw new Error("the diagonal is fixed at 1/1");
    this.checkIndex(i);
    this.checkIndex(j);
    if (!isScaleValue(value)) {
      throw new Error(`${value} is not on the judgment scale`);
    }
    if (i < j) this.upper.set(`${i},${j}`, value);
    else this.upper.set(`${j},${i}`, reciprocal(value));
    this.refreshCells();
  }

  getCell(i: number, j: number): string {
    this.checkIndex(i);
    this.checkIndex(j);
    if (i === j) return "1/1";
    if (i < j) return this.upper.get(`${i},${j}`)!;
    return reciprocal(this.upper.get(`${j},${i}`)!);
  }

  rows(): string[][] {
    const out: string[][] = [];
    for (let i = 0; i < this.n; i++) {
      const row: string[] = [];
      for (let j = 0; j < this.n; j++) row.push(this.getCell(i, j));
      out.push(row);
    }
    return out;
  }

  payload(): MatrixPayload {
    return { labels: [...this.labels], rows: this.rows() };
  }

  private checkIndex(i: number): void {
    if (!Number.isInteger(i) || i < 0 || i >= this.n) {
      throw new Error(`cell index out of range: ${i}`);
    }
  }

  // ---- DOM ----------------------------------------------------------------

  /**
   * Render into `container`. Each upper cell gets a three-part selector
   * (which item dominates, the verbal grade, an in-between refinement);
   * the mirrored cell shows the derived reciprocal read-only.
   */
  render(container: HTMLElement, onEdit?: () => void): void {
    this.container = container;
    this.onEdit = onEdit ?? null;
    container.textContent = "";
    const table = document.createElement("table");
    table.className = "grid";

    const head = table.insertRow();
    head.insertCell();
    for (const label of this.labels) {
      const th = document.createElement("th");
      th.textContent = label;
      head.appendChild(th);
    }

    for (let i = 0; i < this.n; i++) {
      const tr = table.insertRow();
      const th = document.createElement("th");
      th.textContent = this.labels[i];
      tr.appendChild(th);
      for (let j = 0; j < this.n; j++) {
        const td = tr.insertCell();
        td.dataset.row = String(i);
        td.dataset.col = String(j);
        if (i === j) {
          td.textContent = "1";
          td.className = "diagonal";
        } else if (i < j) {
          this.buildSelector(td, i, j);
        } else {
          td.className = "mirror";
        }
      }
    }
    container.appendChild(table);
    this.refreshCells();
  }

  private buildSelector(td: HTMLElement, i: number, j: number): void {
    const dominant = document.createElement("select");
    dominant.className = "dominant";
    for (const [value, text] of [
      ["row", this.labels[i]],
      ["equal", "equal"],
      ["column", this.labels[j]],
    ] as const) {
      const opt = document.createElement("option");
      opt.value = value;
      opt.textContent = text;
      dominant.appendChild(opt);
    }

    const grade = document.createElement("select");
    grade.className = "grade";
    for (const g of GRADES) {
      if (g.strength === 1) continue; // "equal" lives on the dominant control
      const opt = document.createElement("option");
      opt.value = String(g.strength);
      opt.textContent = g.label;
      grade.appendChild(opt);
    }

    const between = document.createElement("input");
    between.type = "checkbox";
    between.className = "between";
    between.title = "one step in between";

    const valueOut = document.createElement("span");
    valueOut.className = "value";

    const apply = () => {
      let value: string;
      if (dominant.value === "equal") {
        value = "1/1";
      } else {
        // grades are 3,5,7,9; the checkbox steps one down to 2,4,6,8
        const strength = Number(grade.value) - (between.checked ? 1 : 0);
        value = choiceToValue({
          dominant: dominant.value as "row" | "column",
          strength,
        });
      }
      this.setCell(i, j, value);
      this.onEdit?.();
    };
    dominant.addEventListener("change", apply);
    grade.addEventListener("change", apply);
    between.addEventListener("change", apply);

    td.append(dominant, grade, between, valueOut);
  }

  /** Push model values into every rendered cell, mirrors included. */
  private refreshCells(): void {
    if (!this.container) return;
    const cells = this.container.querySelectorAll<HTMLElement>("td[data-row]");
    for (const td of cells) {
      const i = Number(td.dataset.row);
      const j = Number(td.dataset.col);
      if (i === j) continue;
      const value = this.getCell(i, j);
      if (i > j) {
        td.textContent = display(value);
        continue;
      }
      const { dominant, strength } = choiceOf(value);
      const dominantSel = td.querySelector<HTMLSelectElement>("select.dominant")!;
      const gradeSel = td.querySelector<HTMLSelectElement>("select.grade")!;
      const betweenBox = td.querySelector<HTMLInputElement>("input.between")!;
      const valueOut = td.querySelector<HTMLElement>("span.value")!;
      if (strength === 1) {
        dominantSel.value = "equal";
        betweenBox.checked = false;
      } else {
        dominantSel.value = dominant;
        const odd = strength % 2 === 1 ? strength : strength + 1;
        gradeSel.value = String(odd);
        betweenBox.checked = strength % 2 === 0;
      }
      const disabled = dominantSel.value === "equal";
      gradeSel.disabled = disabled;
      betweenBox.disabled = disabled;
      valueOut.textContent = display(value);
      valueOut.title = strength === 1 ? labelForStrength(1) : labelForStrength(strength);
    }
  }

  /**
   * Show a reference value (the group aggregate) inside each cell, next to
   * the member's own judgment. Pass null to clear. Display only; the stored
   * judgments do not change.
   */
  setReference(rows: readonly (readonly string[])[] | null): void {
    if (!this.container) return;
    for (const td of this.container.querySelectorAll<HTMLElement>("td[data-row]")) {
      td.querySelector("span.reference")?.remove();
      if (rows === null) continue;
      const i = Number(td.dataset.row);
      const j = Number(td.dataset.col);
      if (i >= j) continue;
      const note = document.createElement("span");
      note.className = "reference";
      // aggregates are geometric means, usually off the grid; show those as
      // decimals instead of raw long fractions
      const value = rows[i][j];
      note.textContent = `group: ${isScaleValue(value) ? display(value) : toNumber(value).toFixed(2)}`;
      td.appendChild(note);
    }
  }

  /** Clear any cell error marks. */
  clearErrors(): void {
    if (!this.container) return;
    for (const td of this.container.querySelectorAll<HTMLElement>("td.invalid")) {
      td.classList.remove("invalid");
      td.querySelector("span.cell-error")?.remove();
    }
  }

  /** Anchor a service diagnostic to its cell. */
  markError(row: number, col: number, message: string): void {
    if (!this.container) return;
    const td = this.container.querySelector<HTMLElement>(
      `td[data-row="${row}"][data-col="${col}"]`,
    );
    if (!td) return;
    td.classList.add("invalid");
    const note = document.createElement("span");
    note.className = "cell-error";
    note.textContent = message;
    td.appendChild(note);
  }
}

/** One grid per matrix the hierarchy demands, in service key order. */
export class EvaluationGrids {
  readonly criteria: ComparisonGridView;
  readonly alternatives: Map<string, ComparisonGridView>;

  constructor(hierarchy: {
    criteria: string[];
    alternatives: string[];
  }) {
    this.criteria = new ComparisonGridView(hierarchy.criteria);
    this.alternatives = new Map(
      hierarchy.criteria.map((cid) => [
        cid,
        new ComparisonGridView(hierarchy.alternatives),
      ]),
    );
  }

  payload(): { criteria: MatrixPayload; alternatives: Record<string, MatrixPayload> } {
    const alternatives: Record<string, MatrixPayload> = {};
    for (const [cid, grid] of this.alternatives) alternatives[cid] = grid.payload();
    return { criteria: this.criteria.payload(), alternatives };
  }

  gridFor(key: string): ComparisonGridView {
    if (key === "criteria") return this.criteria;
    const cid = key.startsWith("alternatives/") ? key.slice("alternatives/".length) : key;
    const grid = this.alternatives.get(cid);
    if (!grid) throw new Error(`no grid for matrix key ${key}`);
    return grid;
  }

  clearErrors(): void {
    this.criteria.clearErrors();
    for (const grid of this.alternatives.values()) grid.clearErrors();
  }
}
