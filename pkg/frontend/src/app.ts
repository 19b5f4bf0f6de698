/** Session controller: owns the in-flight lock, token echo, and re-rendering.
 *
 * The UI keeps no authoritative state. The session id is remembered (in
 * localStorage by default) so a page reload refetches the screen and lands
 * on the identical step; everything else lives on the server.
 */

import { ApiClient, ApiError } from "./api.js";
import { renderScreen, errorPanel } from "./wizard.js";
import type { CreateSessionRequest, ScreenView, UiAction } from "./types.js";

export interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

export interface UiConfig {
  baseUrl: string;
  language: string;
  /** Per-language topic/comment help, shown on request only. */
  helpTexts?: Record<string, string>;
  storage?: StorageLike;
}

export class UiSession {
  readonly client: ApiClient;
  view: ScreenView | null = null;
  /** Rendered screens, display only; the server remains authoritative. */
  readonly history: ScreenView[] = [];
  private inFlight = false;

  constructor(
    readonly config: UiConfig,
    readonly root: HTMLElement,
  ) {
    this.client = new ApiClient(config.baseUrl);
  }

  get sessionId(): string | null {
    return this.view?.session_id ?? null;
  }

  private storageKey(): string {
    return `connprof:${this.config.baseUrl}:session`;
  }

  private storage(): StorageLike {
    return this.config.storage ?? globalThis.localStorage;
  }

  private show(view: ScreenView): void {
    this.view = view;
    this.history.push(view);
    this.root.replaceChildren(
      renderScreen(view, (action) => void this.submit(action), {
        helpText: this.config.helpTexts?.[this.config.language],
      }),
    );
  }

  private showRetry(action: UiAction, message: string): void {
    const banner = errorPanel(`network problem: ${message}`);
    const retry = document.createElement("button");
    retry.type = "button";
    retry.className = "retry";
    retry.textContent = "retry";
    retry.addEventListener("click", () => void this.submit(action));
    banner.appendChild(retry);
    this.root.prepend(banner);
  }

  async start(create: CreateSessionRequest): Promise<void> {
    const created = await this.client.createSession(create);
    this.storage().setItem(this.storageKey(), created.session_id);
    this.show(created.screen);
  }

  /** Refetch the current screen; also how a page reload resumes. */
  async resume(sessionId?: string): Promise<boolean> {
    const stored = sessionId ?? this.storage().getItem(this.storageKey());
    if (!stored) return false;
    try {
      this.show(await this.client.getScreen(stored));
      return true;
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        this.storage().removeItem(this.storageKey());
        return false;
      }
      throw err;
    }
  }

  /** Post one action. Ignored while another request is in flight. */
  async submit(action: UiAction): Promise<void> {
    if (this.inFlight || !this.view) return;
    this.inFlight = true;
    for (const control of this.root.querySelectorAll("button, input")) {
      (control as HTMLButtonElement | HTMLInputElement).disabled = true;
    }
    try {
      const next = await this.client.postAction(this.view.session_id, action, this.view.stage_token);
      this.show(next);
    } catch (err) {
      if (err instanceof ApiError && err.errorCode === "stale-request") {
        // someone clicked twice or another tab won; the server state rules
        this.show(await this.client.getScreen(this.view.session_id));
      } else if (err instanceof ApiError) {
        this.show(await this.client.getScreen(this.view.session_id));
        this.root.prepend(errorPanel(`${err.errorCode}: ${err.message}`));
      } else {
        // network failure: leave the screen alone, offer a retry
        this.showRetry(action, err instanceof Error ? err.message : String(err));
      }
    } finally {
      this.inFlight = false;
    }
  }
}

export async function mountApp(
  root: HTMLElement,
  config: UiConfig,
  create?: CreateSessionRequest,
): Promise<UiSession> {
  const session = new UiSession(config, root);
  if (await session.resume()) return session;
  if (create) {
    await session.start(create);
    return session;
  }
  root.replaceChildren(errorPanel("no stored session and no session request given"));
  return session;
}
