/**
 * Read-only views over service state. Everything shown here is a number the
 * service computed; this module formats, it never calculates.
 */

import type { CellDiagnostic, ConsistencyView, ServiceError, SessionView } from "./api.js";
import type { EvaluationGrids } from "./grid.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function fmt(x: number): string {
  return x.toFixed(4);
}

export function phaseBanner(view: SessionView): HTMLElement {
  const banner = el("div", `banner phase-${view.phase}`);
  banner.append(el("strong", undefined, view.phase));
  if (view.phase === "collecting") {
    const missing = view.missing_members;
    banner.append(
      el(
        "span",
        undefined,
        missing.length
          ? ` round ${view.round}, waiting on ${missing.join(", ")}`
          : ` round ${view.round}, all judgments in`,
      ),
    );
  } else if (view.phase === "awaiting-revision" && view.revision_target) {
    banner.append(
      el("span", undefined, ` round ${view.round}, ${view.revision_target} is re-judging`),
    );
  } else {
    banner.append(el("span", undefined, ` after round ${view.round}`));
  }
  return banner;
}

function gauge(label: string, value: number | null, threshold: number): HTMLElement {
  const wrap = el("div", "gauge");
  wrap.append(el("span", "gauge-label", label));
  if (value === null) {
    wrap.append(el("span", "gauge-value", "n/a"));
    return wrap;
  }
  const ok = value < threshold;
  wrap.append(el("span", `gauge-value ${ok ? "ok" : "bad"}`, fmt(value)));
  const bar = el("div", "bar");
  const fill = el("div", `fill ${ok ? "ok" : "bad"}`);
  // scale so the threshold sits at 50% and anything past 2x threshold pegs
  fill.style.width = `${Math.min(100, (value / (2 * threshold)) * 100)}%`;
  bar.append(fill);
  const mark = el("div", "threshold-mark");
  mark.style.left = "50%";
  bar.append(mark);
  wrap.append(bar);
  return wrap;
}

function worstRatio(c: ConsistencyView | null): number | null {
  return c ? c.worst_ratio : null;
}

export function membersTable(view: SessionView): HTMLElement {
  const table = el("table", "members");
  const head = table.insertRow();
  for (const h of ["member", "submitted", "revisions", "worst CR", "influence"]) {
    head.appendChild(el("th", undefined, h));
  }
  const influences = new Map(
    (view.influence?.members ?? []).map((m) => [m.member, m.influence]),
  );
  for (const m of view.members) {
    const tr = table.insertRow();
    tr.dataset.member = m.id;
    tr.append(el("td", undefined, m.name ? `${m.id} (${m.name})` : m.id));
    tr.append(el("td", undefined, m.submitted ? "yes" : "no"));
    tr.append(el("td", undefined, String(m.revisions_used)));
    const ratio = worstRatio(m.consistency);
    tr.append(el("td", undefined, ratio === null ? "n/a" : fmt(ratio)));
    const infl = influences.get(m.id);
    const td = el("td", undefined, infl === undefined ? "n/a" : fmt(infl));
    if (view.influence && view.influence.most_influential === m.id) {
      td.classList.add("most-influential");
    }
    tr.append(td);
  }
  return table;
}

export function trajectoryList(view: SessionView): HTMLElement {
  const wrap = el("div", "trajectory");
  wrap.append(el("h3", undefined, "group consistency by round"));
  const list = el("ol");
  const t = view.trajectory;
  if (t.initial_cr !== null) {
    const li = el("li", undefined, `start: ${fmt(t.initial_cr)}`);
    li.dataset.round = "0";
    list.append(li);
  }
  for (const r of t.rounds) {
    const li = el(
      "li",
      undefined,
      `round ${r.round}: ${fmt(r.group_cr)} after ${r.target_member} revised`,
    );
    li.dataset.round = String(r.round);
    list.append(li);
  }
  wrap.append(list);
  return wrap;
}

export function rankingTable(view: SessionView): HTMLElement | null {
  if (!view.ranking) return null;
  const wrap = el("div", "ranking");
  wrap.append(el("h3", undefined, "group ranking"));
  const table = el("table");
  const head = table.insertRow();
  for (const h of ["#", "alternative", "weight"]) head.appendChild(el("th", undefined, h));
  view.ranking.forEach((row, idx) => {
    const tr = table.insertRow();
    tr.append(el("td", undefined, String(idx + 1)));
    tr.append(el("td", undefined, row.alternative));
    tr.append(el("td", undefined, row.weight.toFixed(6)));
  });
  wrap.append(table);
  return wrap;
}

/** Facilitator dashboard: one call renders the whole session state. */
export function renderDashboard(container: HTMLElement, view: SessionView): void {
  container.textContent = "";
  container.append(phaseBanner(view));
  container.append(
    gauge("group CR", worstRatio(view.group), view.stop_rule.cr_threshold),
  );
  container.append(membersTable(view));
  if (view.influence) {
    container.append(
      el(
        "p",
        "influence-note",
        `largest consistency influence: ${view.influence.most_influential}`,
      ),
    );
  }
  container.append(trajectoryList(view));
  const ranking = rankingTable(view);
  if (ranking) container.append(ranking);
}

/** Per-matrix consistency readout for a member's own judgments. */
export function renderConsistency(container: HTMLElement, report: ConsistencyView): void {
  container.textContent = "";
  const headline = el(
    "p",
    report.acceptable ? "consistency ok" : "consistency bad",
    report.acceptable
      ? `worst CR ${fmt(report.worst_ratio)}, acceptable`
      : `worst CR ${fmt(report.worst_ratio)} in ${report.worst_key}, needs work`,
  );
  container.append(headline);
  const table = el("table", "matrices");
  const head = table.insertRow();
  for (const h of ["matrix", "CR", "ordinal breaks"]) head.appendChild(el("th", undefined, h));
  for (const m of report.matrices) {
    const tr = table.insertRow();
    tr.dataset.key = m.key;
    if (!m.acceptable) tr.classList.add("bad");
    tr.append(el("td", undefined, m.key));
    tr.append(el("td", undefined, m.ratio_defined ? fmt(m.consistency_ratio) : "exact"));
    tr.append(el("td", undefined, String(m.judgment_order_violations.length)));
  }
  container.append(table);
}

/**
 * Route a rejected submission's cell diagnostics onto the grids and return
 * the messages that had no cell anchor.
 */
export function applyCellErrors(grids: EvaluationGrids, err: ServiceError): string[] {
  grids.clearErrors();
  const loose: string[] = [err.message];
  const details = (err.details ?? []) as CellDiagnostic[];
  for (const d of details) {
    if (
      d &&
      typeof d.row === "number" &&
      typeof d.col === "number" &&
      typeof d.matrix === "string"
    ) {
      try {
        grids.gridFor(d.matrix).markError(d.row, d.col, d.message ?? "invalid");
        continue;
      } catch {
        // fall through to the loose list
      }
    }
    loose.push(typeof d?.message === "string" ? d.message : JSON.stringify(d));
  }
  return loose;
}
