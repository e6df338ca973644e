/**
 * Application shell. Hash routes:
 *
 *   #/                              create-session form
 *   #/member/{sid}/{id}/{token}     judgment console for one member
 *   #/facilitator/{sid}/{token}     round control and dashboard
 *
 * All truth lives on the server; the only client-side state is unsubmitted
 * grid edits, which sit in containers the poll loop never re-renders.
 */

import { ServiceClient, ServiceError } from "./api.js";
import type { SessionView } from "./api.js";
import { EvaluationGrids } from "./grid.js";
import {
  applyCellErrors,
  renderConsistency,
  renderDashboard,
} from "./dashboard.js";
import { debounce, SessionWatcher } from "./session.js";

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

function splitIds(raw: string): string[] {
  return raw
    .split(",")
    .map((s) => s.trim())
    .filter((s) => s.length > 0);
}

// ---------------------------------------------------------------------------
// create form

function renderCreate(root: HTMLElement, client: ServiceClient): void {
  root.textContent = "";
  root.append(el("h2", undefined, "new decision session"));
  const form = el("form");

  const field = (label: string, name: string, value: string): HTMLInputElement => {
    const wrap = el("label", "field", label + " ");
    const input = el("input");
    input.name = name;
    input.value = value;
    wrap.append(input);
    form.append(wrap);
    return input;
  };

  const goal = field("goal", "goal", "choose");
  const criteria = field("criteria (comma separated ids)", "criteria", "c1, c2, c3");
  const alternatives = field("alternatives", "alternatives", "a1, a2, a3");
  const members = field("members", "members", "ana, bob");
  const threshold = field("CR threshold", "threshold", "0.1");
  const maxRounds = field("max revision rounds", "rounds", "10");
  const maxRevisions = field("max revisions per member", "revisions", "3");

  const submit = el("button", undefined, "create");
  submit.type = "submit";
  form.append(submit);
  const messages = el("div", "messages");
  const links = el("div", "links");
  root.append(form, messages, links);

  form.addEventListener("submit", (ev) => {
    ev.preventDefault();
    messages.textContent = "";
    links.textContent = "";
    void (async () => {
      try {
        const created = await client.createSession(
          {
            goal: { id: "goal", name: goal.value.trim() || "goal" },
            criteria: splitIds(criteria.value),
            alternatives: splitIds(alternatives.value),
          },
          splitIds(members.value).map((id) => ({ id, name: "" })),
          {
            cr_threshold: Number(threshold.value),
            max_group_iterations: Number(maxRounds.value),
            max_per_member_revisions: Number(maxRevisions.value),
          },
        );
        links.append(el("h3", undefined, `session ${created.session}`));
        links.append(
          el("p", undefined, "hand each person their own link; links carry access tokens"),
        );
        const list = el("ul");
        const add = (text: string, hash: string) => {
          const a = el("a", undefined, text);
          a.href = hash;
          const li = el("li");
          li.append(a);
          list.append(li);
        };
        add("facilitator", `#/facilitator/${created.session}/${created.facilitator_token}`);
        for (const [id, token] of Object.entries(created.member_tokens)) {
          add(`member ${id}`, `#/member/${created.session}/${id}/${token}`);
        }
        links.append(list);
      } catch (err) {
        messages.append(el("p", "error", describeError(err)));
      }
    })();
  });
}

function describeError(err: unknown): string {
  if (err instanceof ServiceError) return `${err.code}: ${err.message}`;
  return err instanceof Error ? err.message : String(err);
}

// ---------------------------------------------------------------------------
// member console

async function renderMember(
  root: HTMLElement,
  client: ServiceClient,
  sid: string,
  memberId: string,
  token: string,
): Promise<SessionWatcher> {
  root.textContent = "";
  const connection = el("div", "connection");
  const status = el("div", "status");
  const revision = el("div", "revision");
  const gridsBox = el("div", "grids");
  const crBox = el("div", "cr");
  const messages = el("div", "messages");
  const submitBtn = el("button", undefined, "submit judgments");
  root.append(
    el("h2", undefined, `judgments of ${memberId}`),
    connection,
    status,
    revision,
    gridsBox,
    crBox,
    el("div", "actions"),
  );
  root.querySelector(".actions")!.append(submitBtn, messages);

  const first = await client.view(sid, token);
  const grids = new EvaluationGrids(first.hierarchy);

  const preview = debounce(() => {
    void client
      .preview(sid, token, grids.payload())
      .then((report) => renderConsistency(crBox, report))
      .catch((err) => {
        crBox.textContent = "";
        crBox.append(el("p", "error", describeError(err)));
      });
  }, 300);

  const onEdit = () => {
    grids.clearErrors();
    messages.textContent = "";
    preview();
  };

  const section = (title: string): HTMLElement => {
    const box = el("div", "matrix-section");
    box.append(el("h3", undefined, title));
    gridsBox.append(box);
    return box;
  };
  grids.criteria.render(section("criteria against the goal"), onEdit);
  for (const cid of first.hierarchy.criteria) {
    grids.alternatives
      .get(cid)!
      .render(section(`alternatives under ${cid}`), onEdit);
  }
  preview();

  const showState = (view: SessionView) => {
    status.textContent = "";
    revision.textContent = "";
    const me = view.members.find((m) => m.id === memberId);
    const parts = [`phase ${view.phase}`, `round ${view.round}`];
    if (me) {
      parts.push(me.submitted ? "your judgments are in" : "not submitted yet");
      parts.push(`revisions used ${me.revisions_used}`);
    }
    status.append(el("p", undefined, parts.join(", ")));

    const targeted = view.phase === "awaiting-revision" && view.revision_target === memberId;
    if (targeted) {
      const own = view.influence?.members.find((m) => m.member === memberId);
      revision.append(
        el(
          "p",
          "banner revise",
          own
            ? `your turn to revise: removing your judgments would move the group CR by ${own.influence.toFixed(4)}`
            : "your turn to revise",
        ),
      );
    }
    // group values appear inside each cell while this member reconsiders
    if (targeted && view.aggregate) {
      grids.criteria.setReference(view.aggregate.criteria.rows);
      for (const [cid, grid] of grids.alternatives) {
        const agg = view.aggregate.alternatives[cid];
        grid.setReference(agg ? agg.rows : null);
      }
    } else {
      grids.criteria.setReference(null);
      for (const grid of grids.alternatives.values()) grid.setReference(null);
    }

    if (view.ranking) {
      const done = el("p", "banner done", "final ranking:");
      view.ranking.forEach((r, i) => {
        done.append(el("span", "rank", ` ${i + 1}. ${r.alternative} (${r.weight.toFixed(4)})`));
      });
      status.append(done);
    }
  };
  showState(first);

  submitBtn.addEventListener("click", () => {
    messages.textContent = "";
    void (async () => {
      try {
        await client.submit(sid, token, grids.payload());
        messages.append(el("p", "ok", "accepted"));
      } catch (err) {
        if (err instanceof ServiceError) {
          for (const line of applyCellErrors(grids, err)) {
            messages.append(el("p", "error", line));
          }
        } else {
          messages.append(el("p", "error", describeError(err)));
        }
      }
    })();
  });

  const watcher = new SessionWatcher(client, sid, token, {
    onUpdate: showState,
    onOffline: () => {
      connection.textContent = "connection lost, retrying";
      connection.className = "connection offline";
    },
    onOnline: () => {
      connection.textContent = "";
      connection.className = "connection";
    },
  });
  void watcher.start();
  return watcher;
}

// ---------------------------------------------------------------------------
// facilitator console

function renderFacilitator(
  root: HTMLElement,
  client: ServiceClient,
  sid: string,
  token: string,
): SessionWatcher {
  root.textContent = "";
  const connection = el("div", "connection");
  const board = el("div", "dashboard");
  const actions = el("div", "actions");
  const messages = el("div", "messages");
  const logBox = el("pre", "log");
  const advanceBtn = el("button", undefined, "advance round");
  const logBtn = el("button", undefined, "show event log");
  actions.append(advanceBtn, logBtn);
  root.append(el("h2", undefined, `session ${sid}`), connection, board, actions, messages, logBox);

  advanceBtn.addEventListener("click", () => {
    messages.textContent = "";
    void client.advance(sid, token).catch((err) => {
      if (err instanceof ServiceError && err.missing.length) {
        messages.append(el("p", "error", `${err.message}; waiting on ${err.missing.join(", ")}`));
      } else {
        messages.append(el("p", "error", describeError(err)));
      }
    });
  });

  logBtn.addEventListener("click", () => {
    void client
      .log(sid, token)
      .then((text) => {
        logBox.textContent = text;
      })
      .catch((err) => messages.append(el("p", "error", describeError(err))));
  });

  const watcher = new SessionWatcher(client, sid, token, {
    onUpdate: (view) => {
      renderDashboard(board, view);
      advanceBtn.disabled = !view.ready_for_advance;
    },
    onOffline: () => {
      connection.textContent = "connection lost, retrying";
      connection.className = "connection offline";
    },
    onOnline: () => {
      connection.textContent = "";
      connection.className = "connection";
    },
  });
  void watcher.start();
  return watcher;
}

// ---------------------------------------------------------------------------
// routing

export function mount(root: HTMLElement, client?: ServiceClient): void {
  const api = client ?? new ServiceClient("");
  let active: SessionWatcher | null = null;

  const route = () => {
    active?.stop();
    active = null;
    const parts = location.hash.replace(/^#\/?/, "").split("/");
    if (parts[0] === "member" && parts.length === 4) {
      void renderMember(root, api, parts[1], parts[2], parts[3]).then((w) => {
        active = w;
      });
    } else if (parts[0] === "facilitator" && parts.length === 3) {
      active = renderFacilitator(root, api, parts[1], parts[2]);
    } else {
      renderCreate(root, api);
    }
  };

  window.addEventListener("hashchange", route);
  route();
}

const rootEl = typeof document !== "undefined" ? document.getElementById("app") : null;
if (rootEl) mount(rootEl);
