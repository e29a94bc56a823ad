import { ApiClient, FetchHttp } from "./api";
import { drawHeatmap } from "./heatmap";
import { SessionFlow, UiSessionView } from "./state";

const client = new ApiClient(new FetchHttp());
const flow = new SessionFlow(client);

const el = {
  start: document.getElementById("start-panel") as HTMLElement,
  session: document.getElementById("session-panel") as HTMLElement,
  selectorPicker: document.getElementById("selector-picker") as HTMLSelectElement,
  startButton: document.getElementById("start-button") as HTMLButtonElement,
  newButton: document.getElementById("new-button") as HTMLButtonElement,
  questionText: document.getElementById("question-text") as HTMLElement,
  selectorName: document.getElementById("selector-name") as HTMLElement,
  progressLabel: document.getElementById("progress-label") as HTMLElement,
  progressFill: document.getElementById("progress-fill") as HTMLElement,
  agree: document.getElementById("agree-button") as HTMLButtonElement,
  disagree: document.getElementById("disagree-button") as HTMLButtonElement,
  skip: document.getElementById("skip-button") as HTMLButtonElement,
  heatmap: document.getElementById("heatmap") as HTMLCanvasElement,
  mapLabel: document.getElementById("map-label") as HTMLElement,
  type1List: document.getElementById("type1-list") as HTMLElement,
  type2List: document.getElementById("type2-list") as HTMLElement,
  doneBanner: document.getElementById("done-banner") as HTMLElement,
  errorBanner: document.getElementById("error-banner") as HTMLElement,
  errorMessage: document.getElementById("error-message") as HTMLElement,
  retryButton: document.getElementById("retry-button") as HTMLButtonElement,
};

function renderList(target: HTMLElement, entries: Array<{ candidate_id: string; distance: number }> | null) {
  target.innerHTML = "";
  if (!entries) {
    const li = document.createElement("li");
    li.className = "muted";
    li.textContent = "available after the first answer";
    target.appendChild(li);
    return;
  }
  for (const entry of entries) {
    const li = document.createElement("li");
    const name = document.createElement("span");
    name.textContent = entry.candidate_id;
    const dist = document.createElement("span");
    dist.className = "distance";
    dist.textContent = entry.distance.toFixed(3);
    li.append(name, dist);
    target.appendChild(li);
  }
}

function render(view: UiSessionView) {
  el.start.hidden = true;
  el.session.hidden = false;
  window.location.hash = view.sessionId;

  el.selectorName.textContent = view.selector;
  const total = view.total;
  const doneCount = view.answered + view.skipped;
  el.progressLabel.textContent =
    `${view.answered} answered, ${view.skipped} skipped of ${total}`;
  el.progressFill.style.width = `${(100 * doneCount) / total}%`;

  if (view.done) {
    el.questionText.textContent = "Questionnaire complete.";
    el.doneBanner.hidden = false;
    el.doneBanner.textContent = view.finalListsMatch === null
      ? "Final recommendation ready (every question was skipped, so it rests on the prior alone)."
      : view.finalListsMatch
        ? "Final recommendation: answered-only and model-completed lists agree."
        : "Final recommendation ready.";
  } else {
    el.questionText.textContent = view.questionText ?? "";
    el.doneBanner.hidden = true;
  }
  for (const button of [el.agree, el.disagree, el.skip]) {
    button.disabled = view.done || flow.busy;
  }
  drawHeatmap(el.heatmap, view.heatmap);
  const [mx, my] = view.mapEstimate;
  el.mapLabel.textContent = `position estimate (${mx.toFixed(1)}, ${my.toFixed(1)})`;
  renderList(el.type1List, view.type1);
  renderList(el.type2List, view.type2);
  el.errorBanner.hidden = true;
}

function renderError(message: string) {
  el.errorBanner.hidden = false;
  el.errorMessage.textContent = message;
  for (const button of [el.agree, el.disagree, el.skip]) button.disabled = false;
}

async function guarded(action: () => Promise<UiSessionView | null>) {
  for (const button of [el.agree, el.disagree, el.skip]) button.disabled = true;
  try {
    const view = await action();
    if (view) render(view);
  } catch (err) {
    renderError(err instanceof Error ? err.message : String(err));
  }
}

async function loadSelectors() {
  const meta = await client.getSelectors();
  el.selectorPicker.innerHTML = "";
  for (const name of meta.selectors) {
    const option = document.createElement("option");
    option.value = name;
    option.textContent = name;
    option.selected = name === meta.default;
    el.selectorPicker.appendChild(option);
  }
}

el.startButton.addEventListener("click", () =>
  guarded(() => flow.start(el.selectorPicker.value)));
el.newButton.addEventListener("click", () => {
  window.location.hash = "";
  el.session.hidden = true;
  el.start.hidden = false;
});
el.agree.addEventListener("click", () => guarded(() => flow.answer(1)));
el.disagree.addEventListener("click", () => guarded(() => flow.answer(0)));
el.skip.addEventListener("click", () => guarded(() => flow.answer("skip")));
el.retryButton.addEventListener("click", () => guarded(() => flow.retry()));

async function restoreFromHash() {
  const sessionId = window.location.hash.replace(/^#/, "");
  if (!sessionId) return;
  if (flow.view?.sessionId === sessionId) return;
  await guarded(() => flow.restore(sessionId)).catch(() => undefined);
  if (!flow.view) {
    window.location.hash = "";
    el.session.hidden = true;
    el.start.hidden = false;
  }
}

// back/forward navigation re-targets the session named in the URL
window.addEventListener("hashchange", () => void restoreFromHash());

async function init() {
  await loadSelectors().catch(() => undefined);
  await restoreFromHash();
}

void init();
