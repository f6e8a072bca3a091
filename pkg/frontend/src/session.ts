/** Client-side outfit session: picked items, accepted suggestions, last response. */

import { ApiClient, ApiError, Candidate, CompletionResponse, Method } from './api';

export interface SessionState {
  /** Initial picks followed by accepted suggestions, in order. */
  items: string[];
  /** Item strings of accepted candidates, oldest first. */
  accepted: string[];
  lastResponse: CompletionResponse | null;
  method: Method;
  k: number;
  pending: boolean;
  error: string | null;
}

export type Listener = (state: SessionState) => void;

export class OutfitSession {
  private items: string[] = [];
  private accepted: string[] = [];
  private lastResponse: CompletionResponse | null = null;
  private method: Method = 'model';
  private k = 5;
  private error: string | null = null;
  private inFlight: AbortController | null = null;
  private listeners: Listener[] = [];

  constructor(private readonly api: ApiClient) {}

  subscribe(listener: Listener): void {
    this.listeners.push(listener);
  }

  state(): SessionState {
    return {
      items: [...this.items],
      accepted: [...this.accepted],
      lastResponse: this.lastResponse,
      method: this.method,
      k: this.k,
      pending: this.inFlight !== null,
      error: this.error,
    };
  }

  pickItem(item: string): void {
    const trimmed = item.trim();
    if (!trimmed || this.items.includes(trimmed)) return;
    this.items.push(trimmed);
    this.notify();
  }

  removeItem(item: string): void {
    this.items = this.items.filter((i) => i !== item);
    this.accepted = this.accepted.filter((i) => i !== item);
    this.notify();
  }

  setMethod(method: Method): void {
    this.method = method;
    this.notify();
  }

  setK(k: number): void {
    this.k = Math.min(20, Math.max(1, Math.round(k)));
    this.notify();
  }

  /**
   * Request completions for the current items. Only one request is ever in
   * flight: a new call aborts the previous one and reissues.
   */
  async requestCompletions(): Promise<void> {
    if (this.items.length === 0) {
      this.error = 'pick at least one item first';
      this.notify();
      return;
    }
    this.inFlight?.abort();
    const controller = new AbortController();
    this.inFlight = controller;
    this.error = null;
    this.notify();
    try {
      const response = await this.api.complete(
        [...this.items],
        this.k,
        this.method,
        controller.signal,
      );
      if (controller.signal.aborted) return;
      this.lastResponse = response;
    } catch (err) {
      if (controller.signal.aborted) return; // superseded, not an error
      // failures leave the session (items, last response) untouched
      this.error = err instanceof ApiError
        ? `${err.status}: ${err.message}`
        : 'service unreachable';
    } finally {
      if (this.inFlight === controller) this.inFlight = null;
    }
    this.notify();
  }

  /** Append an accepted candidate and immediately re-query with the grown set. */
  async accept(candidate: Candidate): Promise<void> {
    if (!this.items.includes(candidate.item)) {
      this.items.push(candidate.item);
      this.accepted.push(candidate.item);
    }
    await this.requestCompletions();
  }

  private notify(): void {
    const snapshot = this.state();
    for (const listener of this.listeners) listener(snapshot);
  }
}
