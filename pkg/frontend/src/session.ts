/**
 * Long-poll loop that keeps a live SessionView flowing to the page.
 *
 * The service's view endpoint holds the request open until the session
 * version advances past wait_version or the timeout lapses, so one
 * outstanding request at a time is all the "push" we need.
 */

import type { ServiceClient, SessionView } from "./api.js";

export interface WatcherCallbacks {
  onUpdate: (view: SessionView) => void;
  /** connection trouble; the loop keeps retrying until stop() */
  onOffline?: (err: unknown) => void;
  onOnline?: () => void;
}

export class SessionWatcher {
  private stopped = false;
  private version = -1;
  private offline = false;

  constructor(
    private readonly client: ServiceClient,
    private readonly sessionId: string,
    private readonly token: string,
    private readonly callbacks: WatcherCallbacks,
    private readonly pollTimeoutSeconds = 25,
  ) {}

  /** Fetch once immediately, then long-poll until stop(). */
  async start(): Promise<void> {
    while (!this.stopped) {
      try {
        const view = await this.client.view(this.sessionId, this.token, {
          waitVersion: this.version < 0 ? undefined : this.version,
          timeoutSeconds: this.version < 0 ? undefined : this.pollTimeoutSeconds,
        });
        if (this.stopped) return;
        if (this.offline) {
          this.offline = false;
          this.callbacks.onOnline?.();
        }
        if (view.version !== this.version) {
          this.version = view.version;
          this.callbacks.onUpdate(view);
        }
      } catch (err) {
        if (this.stopped) return;
        if (!this.offline) {
          this.offline = true;
          this.callbacks.onOffline?.(err);
        }
        await delay(2000);
      }
    }
  }

  stop(): void {
    this.stopped = true;
  }
}

function delay(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

/** Trailing-edge debounce for live preview requests while someone edits. */
export function debounce<A extends unknown[]>(
  fn: (...args: A) => void,
  ms: number,
): (...args: A) => void {
  let handle: ReturnType<typeof setTimeout> | null = null;
  return (...args: A) => {
    if (handle !== null) clearTimeout(handle);
    handle = setTimeout(() => {
      handle = null;
      fn(...args);
    }, ms);
  };
}
