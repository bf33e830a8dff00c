/** DOM rendering: read-only everywhere except the decision form. */

import { QueueItem } from "./api.js";
import { computeHighlights, segmentText } from "./highlight.js";
import { ConsoleState, DIAGNOSIS_LABELS, QueueController } from "./state.js";

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

function renderNote(item: QueueItem): HTMLElement {
  const note = el("p", "note");
  note.lang = item.record.lang.toLowerCase();
  const highlights = computeHighlights(item.record.text, item.verdicts.evidence.matched_terms);
  for (const segment of segmentText(item.record.text, highlights)) {
    if (segment.highlight) {
      const mark = el("mark", "term", segment.text);
      mark.title = `${segment.highlight.term} (${segment.highlight.label})`;
      note.appendChild(mark);
    } else {
      note.appendChild(document.createTextNode(segment.text));
    }
  }
  return note;
}

function renderForm(item: QueueItem, controller: QueueController, rerender: () => void): HTMLElement {
  const form = el("form", "decision-form");
  const select = el("select") as HTMLSelectElement;
  const placeholder = el("option", undefined, "choose label…") as HTMLOptionElement;
  placeholder.value = "";
  placeholder.disabled = true;
  placeholder.selected = true;
  select.appendChild(placeholder);
  for (const label of DIAGNOSIS_LABELS) {
    const option = el("option", undefined, label) as HTMLOptionElement;
    option.value = label;
    select.appendChild(option);
  }
  const reviewer = el("input") as HTMLInputElement;
  reviewer.placeholder = "reviewer id";
  const note = el("input") as HTMLInputElement;
  note.placeholder = "note (optional)";
  const button = el("button", undefined, "record decision") as HTMLButtonElement;
  button.type = "submit";
  button.disabled = true;

  const update = () => {
    button.disabled = !controller.canSubmit(select.value || null, reviewer.value);
  };
  select.addEventListener("change", update);
  reviewer.addEventListener("input", update);

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    button.disabled = true;
    void controller
      .submitDecision(item.case_id, select.value || null, reviewer.value, note.value)
      .then(rerender);
  });

  form.append(select, reviewer, note, button);
  return form;
}

function renderCard(item: QueueItem, controller: QueueController, rerender: () => void): HTMLElement {
  const card = el("article", "case-card");
  const header = el("header");
  header.append(
    el("span", "case-id", `case ${item.case_id}`),
    el("span", `lang lang-${item.record.lang}`, item.record.lang),
    el(
      "span",
      "prediction",
      `${item.prediction.predicted} @ ${item.prediction.confidence.toFixed(3)}`,
    ),
  );
  card.appendChild(header);
  card.appendChild(renderNote(item));

  const verdicts = el("ul", "verdicts");
  verdicts.append(
    el("li", undefined, `evidence: ${item.verdicts.evidence.status}`),
    el(
      "li",
      undefined,
      `language risk: ${item.verdicts.language_risk.level} ` +
        `(purity ${item.verdicts.language_risk.script_purity.toFixed(2)}, ` +
        `terms ${item.verdicts.language_risk.term_coverage})`,
    ),
    el("li", undefined, `gate reasons: ${item.decision.reasons.join(", ") || "none"}`),
  );
  card.appendChild(verdicts);

  const message = controller.getState().caseMessages.get(item.case_id);
  if (message) card.appendChild(el("p", "case-message", message));
  card.appendChild(renderForm(item, controller, rerender));
  return card;
}

export function renderConsole(
  root: HTMLElement,
  state: ConsoleState,
  controller: QueueController,
  rerender: () => void,
): void {
  root.replaceChildren();
  if (state.banner) {
    root.appendChild(el("div", "banner", state.banner));
  }
  root.appendChild(
    el(
      "p",
      "summary",
      `${state.items.length} deferred · ${state.resolvedCount} resolved`,
    ),
  );
  if (state.items.length === 0 && !state.banner) {
    root.appendChild(el("p", "empty", "no deferred cases"));
    return;
  }
  const list = el("section", "case-list");
  for (const item of state.items) {
    list.appendChild(renderCard(item, controller, rerender));
  }
  root.appendChild(list);
}
