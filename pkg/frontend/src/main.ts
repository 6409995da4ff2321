/** Browser entry point: binds the controller to the page layout. */

import { HttpApi } from "./api.js";
import { Controller } from "./controller.js";
import { drawPane, drawToolbar, drawWarnings } from "./dom.js";
import type { Gesture } from "./gestures.js";
import { renderView } from "./render.js";
import type { ViewModel } from "./types.js";

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node;
}

function sessionFromHash(): string | null {
  const match = /[#&]session=([^&]+)/.exec(window.location.hash);
  return match?.[1] ?? null;
}

async function boot(): Promise<void> {
  const api = new HttpApi("");
  const status = el("status");
  let sessionId = sessionFromHash();
  if (!sessionId) {
    const sessions = await api.listSessions();
    sessionId = sessions[0] ?? null;
  }
  if (!sessionId) {
    status.textContent =
      "No sessions. Create one with POST /sessions, then reload.";
    return;
  }

  const mainPane = el("main-pane");
  const similarPane = el("similar-pane");
  const toolbar = el("toolbar");
  const warnings = el("warnings");

  const controller: Controller = new Controller(api, sessionId, {
    onChange: (pane: string, vm: ViewModel) => {
      const container = pane === "similar" ? similarPane : mainPane;
      const width = Math.max(320, container.clientWidth - 16);
      const plan = renderView(vm, width);
      drawPane(container, plan, pane === "similar" ? "similar" : "main", sink);
      if (pane === "main") {
        drawToolbar(toolbar, vm, sink);
        drawWarnings(warnings, plan.warnings);
      }
    },
    onError: (message: string) => {
      status.textContent = `error: ${message}`;
    },
  });

  const sink = (gesture: Gesture): void => {
    const action = controller.handleGesture(gesture);
    if (action.kind === "ignore") {
      status.textContent = `ignored: ${action.reason}`;
    } else {
      status.textContent = `session ${sessionId}`;
    }
  };

  status.textContent = `session ${sessionId}`;
  await controller.init();
}

boot().catch((err) => {
  const status = document.getElementById("status");
  if (status) {
    status.textContent = `failed to start: ${
      err instanceof Error ? err.message : String(err)
    }`;
  }
});
