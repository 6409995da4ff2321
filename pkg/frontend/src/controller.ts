/**
 * Session controller: owns the last fetched view models and nothing else.
 *
 * All analytic state (filters, sort, zoom, selection, ...) lives in the
 * service; the controller translates gestures into single commands, keeps at
 * most one request in flight, and queues gestures that arrive while a command
 * is outstanding. A failed request leaves the local view models unchanged and
 * the queue keeps draining.
 */

import type { ServiceApi } from "./api.js";
import type { Gesture, Pane, ServiceAction } from "./gestures.js";
import { dispatchGesture } from "./gestures.js";
import type { ViewModel } from "./types.js";

export interface ControllerHooks {
  onChange?: (pane: Pane, vm: ViewModel) => void;
  onError?: (message: string) => void;
}

export class Controller {
  private readonly api: ServiceApi;
  private readonly sessionId: string;
  private readonly hooks: ControllerHooks;
  private mainVm: ViewModel | null = null;
  private similarVm: ViewModel | null = null;
  private queue: ServiceAction[] = [];
  private draining: Promise<void> | null = null;

  constructor(api: ServiceApi, sessionId: string, hooks: ControllerHooks = {}) {
    this.api = api;
    this.sessionId = sessionId;
    this.hooks = hooks;
  }

  get main(): ViewModel | null {
    return this.mainVm;
  }

  get similar(): ViewModel | null {
    return this.similarVm;
  }

  get pendingCount(): number {
    return this.queue.length;
  }

  /** Fetches both panes once so gestures have a view model to validate against. */
  async init(): Promise<void> {
    this.setVm("main", await this.api.getView(this.sessionId));
    this.setVm("similar", await this.api.getSimilarView(this.sessionId));
  }

  /**
   * Translates the gesture against the pane's current view model and, unless
   * it is ignored, queues exactly one service action. Returns the action so
   * callers (and tests) can observe the decision.
   */
  handleGesture(gesture: Gesture): ServiceAction {
    const pane: Pane = gesture.pane ?? "main";
    const vm = pane === "similar" ? this.similarVm : this.mainVm;
    if (!vm) return { kind: "ignore", reason: "view not loaded" };
    const action = dispatchGesture(gesture, vm);
    if (action.kind !== "ignore") {
      this.queue.push(action);
      this.pump();
    }
    return action;
  }

  /** Resolves once every queued action has been executed. */
  async idle(): Promise<void> {
    while (this.draining) {
      await this.draining;
    }
  }

  private setVm(pane: Pane, vm: ViewModel): void {
    if (pane === "similar") this.similarVm = vm;
    else this.mainVm = vm;
    this.hooks.onChange?.(pane, vm);
  }

  private pump(): void {
    if (this.draining) return;
    this.draining = this.drain().finally(() => {
      this.draining = null;
    });
  }

  private async drain(): Promise<void> {
    for (;;) {
      const action = this.queue.shift();
      if (!action) return;
      try {
        await this.execute(action);
      } catch (err) {
        this.hooks.onError?.(err instanceof Error ? err.message : String(err));
      }
    }
  }

  private async execute(action: ServiceAction): Promise<void> {
    switch (action.kind) {
      case "command": {
        const vm = await this.api.sendCommand(
          this.sessionId,
          action.command,
          action.payload,
          action.pane,
        );
        this.setVm(action.pane, vm);
        if (
          action.pane === "main" &&
          (action.command === "select_item" || action.command === "clear_selection")
        ) {
          this.setVm("similar", await this.api.getSimilarView(this.sessionId));
        }
        return;
      }
      case "save-state":
        await this.api.saveState(this.sessionId, action.name, action.pane);
        return;
      case "load-state": {
        const vm = await this.api.loadState(this.sessionId, action.name, action.pane);
        this.setVm(action.pane, vm);
        if (action.pane === "main") {
          this.setVm("similar", await this.api.getSimilarView(this.sessionId));
        }
        return;
      }
      case "ignore":
        return;
    }
  }
}
