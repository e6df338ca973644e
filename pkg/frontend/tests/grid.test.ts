/**
 * Grid behavior under real DOM interaction (happy-dom). The central claim:
 * whatever sequence of edits happens, through the controls or through the
 * model API, the payload is always a reciprocal matrix over the 17 grid
 * values.
 */

import { beforeEach, describe, expect, it } from "vitest";
import { ComparisonGridView, EvaluationGrids } from "../src/grid.js";
import { isScaleValue, reciprocal, SCALE_VALUES } from "../src/scale.js";
import type { MatrixPayload } from "../src/api.js";

function expectReciprocal(payload: MatrixPayload): void {
  const n = payload.labels.length;
  expect(payload.rows).toHaveLength(n);
  for (let i = 0; i < n; i++) {
    expect(payload.rows[i]).toHaveLength(n);
    expect(payload.rows[i][i]).toBe("1/1");
    for (let j = 0; j < n; j++) {
      expect(isScaleValue(payload.rows[i][j])).toBe(true);
      expect(payload.rows[i][j]).toBe(reciprocal(payload.rows[j][i]));
    }
  }
}

// deterministic 32-bit PRNG so failures replay
function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function pick<T>(rnd: () => number, items: readonly T[]): T {
  return items[Math.floor(rnd() * items.length)];
}

describe("ComparisonGridView model", () => {
  let grid: ComparisonGridView;
  beforeEach(() => {
    grid = new ComparisonGridView(["x", "y", "z"]);
  });

  it("starts at all ones", () => {
    expect(grid.rows()).toEqual([
      ["1/1", "1/1", "1/1"],
      ["1/1", "1/1", "1/1"],
      ["1/1", "1/1", "1/1"],
    ]);
  });

  it("mirrors an upper edit into the lower cell", () => {
    grid.setCell(0, 1, "5/1");
    expect(grid.getCell(0, 1)).toBe("5/1");
    expect(grid.getCell(1, 0)).toBe("1/5");
  });

  it("mirrors a lower edit into the upper cell", () => {
    grid.setCell(2, 0, "1/7");
    expect(grid.getCell(0, 2)).toBe("7/1");
  });

  it("rejects values off the grid", () => {
    expect(() => grid.setCell(0, 1, "3/2")).toThrow(/not on the judgment scale/);
    expect(() => grid.setCell(0, 1, "10/1")).toThrow();
    expect(grid.getCell(0, 1)).toBe("1/1");
  });

  it("refuses diagonal edits", () => {
    expect(() => grid.setCell(1, 1, "3/1")).toThrow(/diagonal/);
  });

  it("loads initial rows and keeps them reciprocal", () => {
    const loaded = new ComparisonGridView(
      ["a", "b", "c"],
      [
        ["1/1", "3/1", "1/2"],
        ["1/3", "1/1", "9/1"],
        ["2/1", "1/9", "1/1"],
      ],
    );
    expect(loaded.getCell(1, 0)).toBe("1/3");
    expectReciprocal(loaded.payload());
  });
});

describe("ComparisonGridView in the DOM", () => {
  function mounted(labels: string[] = ["price", "speed", "range"]) {
    const host = document.createElement("div");
    document.body.appendChild(host);
    const grid = new ComparisonGridView(labels);
    grid.render(host);
    return { host, grid };
  }

  function cell(host: HTMLElement, i: number, j: number): HTMLElement {
    return host.querySelector(`td[data-row="${i}"][data-col="${j}"]`)!;
  }

  it("editing a_12 updates the a_21 display in the same action", () => {
    const { host } = mounted();
    const editor = cell(host, 0, 1);
    const dominant = editor.querySelector<HTMLSelectElement>("select.dominant")!;
    const grade = editor.querySelector<HTMLSelectElement>("select.grade")!;
    dominant.value = "row";
    grade.value = "5";
    grade.dispatchEvent(new Event("change"));
    expect(editor.querySelector("span.value")!.textContent).toBe("5");
    expect(cell(host, 1, 0).textContent).toBe("1/5");
  });

  it("the intermediate toggle steps one grade down", () => {
    const { host, grid } = mounted();
    const editor = cell(host, 1, 2);
    const dominant = editor.querySelector<HTMLSelectElement>("select.dominant")!;
    const grade = editor.querySelector<HTMLSelectElement>("select.grade")!;
    const between = editor.querySelector<HTMLInputElement>("input.between")!;
    dominant.value = "column";
    grade.value = "7";
    between.checked = true;
    between.dispatchEvent(new Event("change"));
    expect(grid.getCell(1, 2)).toBe("1/6");
    expect(grid.getCell(2, 1)).toBe("6/1");
  });

  it("shows group reference values readably, on or off the grid", () => {
    const { host, grid } = mounted(["x", "y", "z"]);
    grid.setReference([
      ["1/1", "3/1", "4246034448350515/9007199254740992"],
      ["1/3", "1/1", "1/1"],
      ["9007199254740992/4246034448350515", "1/1", "1/1"],
    ]);
    const ref = (i: number, j: number) =>
      cell(host, i, j).querySelector("span.reference")?.textContent;
    expect(ref(0, 1)).toBe("group: 3"); // exact grid value kept as a ratio
    expect(ref(0, 2)).toBe("group: 0.47"); // off-grid aggregate as a decimal
    expect(ref(1, 0)).toBeUndefined(); // mirrors carry no annotation
    grid.setReference(null);
    expect(host.querySelector("span.reference")).toBeNull();
  });

  it("only scale choices are offered by the controls", () => {
    const { host } = mounted();
    const editor = cell(host, 0, 2);
    const grades = [...editor.querySelectorAll<HTMLOptionElement>("select.grade option")];
    expect(grades.map((o) => o.value)).toEqual(["9", "7", "5", "3"]);
    const dominants = [...editor.querySelectorAll<HTMLOptionElement>("select.dominant option")];
    expect(dominants.map((o) => o.value)).toEqual(["row", "equal", "column"]);
  });

  it("no interaction sequence produces a non-reciprocal payload: 100 random edit scripts", () => {
    for (let script = 0; script < 100; script++) {
      const rnd = mulberry32(0xbeef + script);
      const n = 3 + Math.floor(rnd() * 2); // 3 or 4 items
      const labels = Array.from({ length: n }, (_, k) => `item${k}`);
      const { host, grid } = mounted(labels);
      const steps = 5 + Math.floor(rnd() * 20);
      for (let s = 0; s < steps; s++) {
        if (rnd() < 0.5) {
          // drive the DOM controls like a person would
          const i = Math.floor(rnd() * n);
          let j = Math.floor(rnd() * n);
          if (i === j) j = (j + 1) % n;
          const editor = cell(host, Math.min(i, j), Math.max(i, j));
          const dominant = editor.querySelector<HTMLSelectElement>("select.dominant")!;
          const grade = editor.querySelector<HTMLSelectElement>("select.grade")!;
          const between = editor.querySelector<HTMLInputElement>("input.between")!;
          dominant.value = pick(rnd, ["row", "equal", "column"]);
          grade.value = pick(rnd, ["3", "5", "7", "9"]);
          between.checked = rnd() < 0.5;
          pick(rnd, [dominant, grade, between] as HTMLElement[]).dispatchEvent(
            new Event("change"),
          );
        } else {
          // or call the model directly, lower triangle included
          const i = Math.floor(rnd() * n);
          let j = Math.floor(rnd() * n);
          if (i === j) j = (j + 1) % n;
          grid.setCell(i, j, pick(rnd, SCALE_VALUES));
        }
        expectReciprocal(grid.payload());
      }
      // the DOM mirrors what the payload says, cell for cell
      const rows = grid.rows();
      for (let i = 0; i < n; i++) {
        for (let j = 0; j < n; j++) {
          if (i <= j) continue;
          const shown = cell(host, i, j).textContent;
          const [p, q] = rows[i][j].split("/");
          expect(shown).toBe(q === "1" ? p : `${p}/${q}`);
        }
      }
      host.remove();
    }
  });
});

describe("EvaluationGrids", () => {
  it("builds one grid per matrix the hierarchy needs", () => {
    const grids = new EvaluationGrids({
      criteria: ["c1", "c2", "c3"],
      alternatives: ["a1", "a2"],
    });
    grids.criteria.setCell(0, 1, "3/1");
    grids.alternatives.get("c2")!.setCell(1, 0, "1/9");
    const payload = grids.payload();
    expect(Object.keys(payload.alternatives)).toEqual(["c1", "c2", "c3"]);
    expect(payload.criteria.rows[1][0]).toBe("1/3");
    expect(payload.alternatives["c2"].rows[0][1]).toBe("9/1");
    expectReciprocal(payload.criteria);
    for (const m of Object.values(payload.alternatives)) expectReciprocal(m);
  });

  it("maps service matrix keys back to grids", () => {
    const grids = new EvaluationGrids({ criteria: ["c1", "c2"], alternatives: ["a1", "a2"] });
    expect(grids.gridFor("criteria")).toBe(grids.criteria);
    expect(grids.gridFor("alternatives/c2")).toBe(grids.alternatives.get("c2"));
    expect(() => grids.gridFor("alternatives/nope")).toThrow(/no grid/);
  });
});
