/**
 * DOM glue: wires the session to the page. All logic lives in session.ts
 * and view.ts; this file only forwards events and swaps innerHTML.
 */

import { ApiClient } from "./api.js";
import { DraftSession } from "./session.js";
import { renderVerdict, renderWorkbench } from "./view.js";

const BASE_URL =
  document.querySelector<HTMLMetaElement>('meta[name="crowdreact-base-url"]')
    ?.content ?? "";

const api = new ApiClient(BASE_URL);
let session = new DraftSession(api);

const root = document.getElementById("app");
const compareRoot = document.getElementById("compare");

function redraw(): void {
  if (!root) return;
  root.innerHTML = renderWorkbench(session);
  const draft = root.querySelector<HTMLTextAreaElement>("#draft");
  draft?.addEventListener("input", () => session.setDraft(draft.value));
  root.querySelector<HTMLButtonElement>("#retry")?.addEventListener("click", submit);
  for (const button of root.querySelectorAll<HTMLButtonElement>("[data-choose]")) {
    button.addEventListener("click", () => {
      const state = session.state;
      if (state.kind !== "ready") return;
      const index = Number(button.dataset["choose"]);
      const text = state.result.candidates[index];
      if (text !== undefined) session.chooseText(text);
      redraw();
    });
  }
}

async function submit(): Promise<void> {
  const pending = session.submitDraft();
  redraw(); // show the loading state
  await pending;
  redraw();
}

document.getElementById("submit")?.addEventListener("click", submit);

document.getElementById("compare-run")?.addEventListener("click", async () => {
  const a = document.querySelector<HTMLTextAreaElement>("#compare-a")?.value ?? "";
  const b = document.querySelector<HTMLTextAreaElement>("#compare-b")?.value ?? "";
  const result = await session.compareTwo(a, b);
  if (compareRoot) {
    compareRoot.innerHTML = result
      ? renderVerdict(a, b, result)
      : '<p class="status status--error">enter two different non-empty texts</p>';
  }
});

// Reload: rebuild the timeline from the engine's run log.
DraftSession.reconstruct(api)
  .then((restored) => {
    if (restored.history.length) {
      session = restored;
      redraw();
    }
  })
  .catch(() => {
    // service not reachable yet; the empty workbench still renders
  });

redraw();
