/** DOM rendering for one wizard step.
 *
 * The server is authoritative: this module draws exactly what the ScreenView
 * says and forwards clicks to the handlers. Categories are not part of any
 * ScreenView, so nothing category-like can ever reach the DOM from here.
 */

import type { ScreenView, TopicCommentPayload, UiAction } from "./types.js";

export interface RenderOptions {
  /** Topic/comment help text for the current UI language, shown on request. */
  helpText?: string;
}

export type ActionHandler = (action: UiAction) => void;

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

function button(label: string, className: string, onClick: () => void): HTMLButtonElement {
  const b = el("button", className, label);
  b.type = "button";
  b.addEventListener("click", onClick);
  return b;
}

export function errorPanel(message: string): HTMLElement {
  const panel = el("div", "error-panel");
  panel.appendChild(el("p", "error-message", message));
  return panel;
}

function sentencePane(view: ScreenView): HTMLElement {
  const pane = el("div", "sentence-pane");
  const prev = el("div", "sentence sentence-prev");
  prev.appendChild(el("div", "sentence-tag", "previous sentence"));
  prev.appendChild(el("p", "sentence-text", view.sentence_prev ?? ""));
  const curr = el("div", "sentence sentence-curr");
  curr.appendChild(el("div", "sentence-tag", "this sentence"));
  curr.appendChild(el("p", "sentence-text", view.sentence_curr ?? ""));
  pane.appendChild(prev);
  pane.appendChild(curr);
  return pane;
}

function entryList(legend: string, className: string): { wrap: HTMLElement; values: () => string[] } {
  const wrap = el("fieldset", `entry-list ${className}`);
  wrap.appendChild(el("legend", undefined, legend));
  const rows = el("div", "entry-rows");
  wrap.appendChild(rows);

  const addRow = (value = "") => {
    const row = el("div", "entry-row");
    const input = el("input") as HTMLInputElement;
    input.type = "text";
    input.value = value;
    row.appendChild(input);
    row.appendChild(
      button("remove", "remove-entry", () => {
        if (rows.children.length > 1) row.remove();
      }),
    );
    rows.appendChild(row);
  };
  addRow();
  wrap.appendChild(button(`add ${legend.toLowerCase()}`, "add-entry", () => addRow()));

  const values = () =>
    Array.from(rows.querySelectorAll("input"))
      .map((input) => (input as HTMLInputElement).value.trim())
      .filter((v) => v.length > 0);
  return { wrap, values };
}

function topicCommentControls(onSubmit: ActionHandler, options: RenderOptions): HTMLElement {
  const box = el("div", "topic-comment");
  box.appendChild(
    el("p", "stage-hint", "Name what this sentence is about, and what it says about it."),
  );
  if (options.helpText) {
    const help = el("div", "help-panel", options.helpText);
    help.hidden = true;
    box.appendChild(
      button("help", "help-toggle", () => {
        help.hidden = !help.hidden;
      }),
    );
    box.appendChild(help);
  }
  const topics = entryList("Topics", "topics");
  const comments = entryList("Comments", "comments");
  box.appendChild(topics.wrap);
  box.appendChild(comments.wrap);
  box.appendChild(
    button("continue", "submit-topic-comment", () => {
      const payload: TopicCommentPayload = { topics: topics.values(), comments: comments.values() };
      onSubmit({ kind: "topic_comment", payload });
    }),
  );
  return box;
}

export function renderScreen(
  view: ScreenView,
  onAction: ActionHandler,
  options: RenderOptions = {},
): HTMLElement {
  const step = el("section", "wizard-step");
  try {
    if (!view || !view.stage || !view.progress) throw new Error("screen payload is incomplete");

    const header = el("header", "step-header");
    header.appendChild(
      el("span", "progress", `(${view.progress.completed}, ${view.progress.total})`),
    );
    if (view.pair_index !== undefined) {
      header.appendChild(el("span", "pair-indicator", `pair ${view.pair_index}`));
    }
    const back = button("backtrack", "backtrack", () => onAction({ kind: "backtrack" }));
    back.disabled = !view.can_backtrack;
    header.appendChild(back);
    step.appendChild(header);

    if (view.stage === "done") {
      const done = el("div", "done-panel");
      done.appendChild(el("h2", undefined, "Text completed"));
      const list = el("ol", "profile-summary");
      for (const entry of view.profile_summary ?? []) {
        list.appendChild(el("li", "profile-entry", `pair ${entry.pair_index}: ${entry.surface}`));
      }
      done.appendChild(list);
      step.appendChild(done);
      return step;
    }

    step.appendChild(sentencePane(view));

    if (view.stage === "topic_comment") {
      step.appendChild(topicCommentControls(onAction, options));
    } else if (view.stage === "question") {
      if (!view.answers) throw new Error("question screen without answers");
      const box = el("div", "question");
      box.appendChild(el("p", "prompt", view.prompt ?? ""));
      view.answers.forEach((label, index) => {
        box.appendChild(button(label, "answer", () => onAction({ kind: "answer", answerIndex: index })));
      });
      step.appendChild(box);
    } else if (view.stage === "conjunct_screen") {
      if (!view.conjuncts) throw new Error("conjunct screen without conjuncts");
      const box = el("div", "conjunct-screen");
      box.appendChild(el("p", "stage-hint", "Pick the word that fits best at the start of this sentence."));
      for (const conjunct of view.conjuncts) {
        box.appendChild(
          button(conjunct.surface, "conjunct", () =>
            onAction({ kind: "conjunct", conjunctId: conjunct.conjunct_id }),
          ),
        );
      }
      step.appendChild(box);
    } else {
      throw new Error(`unknown stage ${String((view as ScreenView).stage)}`);
    }
    return step;
  } catch (err) {
    return errorPanel(err instanceof Error ? err.message : String(err));
  }
}
