/** Thin typed client for the session service HTTP endpoints. */

import type { CommandName, ViewModel } from "./types.js";
import type { Pane } from "./gestures.js";

export interface ServiceApi {
  listSessions(): Promise<string[]>;
  getView(sessionId: string): Promise<ViewModel>;
  getSimilarView(sessionId: string): Promise<ViewModel>;
  sendCommand(
    sessionId: string,
    command: CommandName,
    payload: Record<string, unknown>,
    target: Pane,
  ): Promise<ViewModel>;
  saveState(sessionId: string, name: string, target: Pane): Promise<void>;
  loadState(sessionId: string, name: string, target: Pane): Promise<ViewModel>;
}

export class ApiError extends Error {
  readonly status: number;

  constructor(status: number, detail: string) {
    super(detail);
    this.name = "ApiError";
    this.status = status;
  }
}

async function parseJson<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let detail = `${response.status} ${response.statusText}`;
    try {
      const body = (await response.json()) as { detail?: unknown };
      if (typeof body.detail === "string") detail = body.detail;
    } catch {
      /* non-JSON error body; keep the status line */
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

export class HttpApi implements ServiceApi {
  private readonly base: string;

  constructor(base = "") {
    this.base = base.replace(/\/$/, "");
  }

  async listSessions(): Promise<string[]> {
    const body = await parseJson<{ sessions: string[] }>(
      await fetch(`${this.base}/sessions`),
    );
    return body.sessions;
  }

  async getView(sessionId: string): Promise<ViewModel> {
    return parseJson(await fetch(`${this.base}/sessions/${sessionId}/view`));
  }

  async getSimilarView(sessionId: string): Promise<ViewModel> {
    return parseJson(
      await fetch(`${this.base}/sessions/${sessionId}/similar-view`),
    );
  }

  async sendCommand(
    sessionId: string,
    command: CommandName,
    payload: Record<string, unknown>,
    target: Pane,
  ): Promise<ViewModel> {
    return parseJson(
      await fetch(`${this.base}/sessions/${sessionId}/commands`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ command, payload, target }),
      }),
    );
  }

  async saveState(sessionId: string, name: string, target: Pane): Promise<void> {
    await parseJson(
      await fetch(
        `${this.base}/sessions/${sessionId}/state/${encodeURIComponent(name)}`,
        {
          method: "POST",
          headers: { "content-type": "application/json" },
          body: JSON.stringify({ target }),
        },
      ),
    );
  }

  async loadState(
    sessionId: string,
    name: string,
    target: Pane,
  ): Promise<ViewModel> {
    const query = new URLSearchParams({ target }).toString();
    return parseJson(
      await fetch(
        `${this.base}/sessions/${sessionId}/state/${encodeURIComponent(name)}?${query}`,
      ),
    );
  }
}
