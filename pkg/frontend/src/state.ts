/** Queue view-model. The card list only ever changes after the server
 * confirms; there are no optimistic updates anywhere. */

import { ApiError, QueueFilter, QueueItem, ServiceClient } from "./api.js";

export const DIAGNOSIS_LABELS = [
  "spinal",
  "musculoskeletal",
  "bone",
  "hip",
  "other",
  "unknown",
] as const;

export interface ConsoleState {
  items: QueueItem[];
  resolvedCount: number;
  banner: string | null;
  caseMessages: Map<string, string>;
  lastSyncOk: boolean;
}

export interface SubmitResult {
  ok: boolean;
  conflict: boolean;
  message: string | null;
}

export class QueueController {
  private state: ConsoleState = {
    items: [],
    resolvedCount: 0,
    banner: null,
    caseMessages: new Map(),
    lastSyncOk: false,
  };

  constructor(
    private readonly client: ServiceClient,
    private readonly filter: QueueFilter = { state: "DEFERRED", limit: 100 },
  ) {}

  getState(): ConsoleState {
    return this.state;
  }

  /** Refresh from the service; on failure keep the last list and show a banner. */
  async refresh(): Promise<void> {
    try {
      const [deferred, resolved] = await Promise.all([
        this.client.fetchQueue(this.filter),
        this.client.fetchQueue({ state: "RESOLVED", limit: 1000 }),
      ]);
      this.state = {
        ...this.state,
        items: deferred,
        resolvedCount: resolved.length,
        banner: null,
        lastSyncOk: true,
      };
    } catch (err) {
      this.state = {
        ...this.state,
        banner: `service unreachable: ${err instanceof Error ? err.message : String(err)}`,
        lastSyncOk: false,
      };
    }
  }

  /** Form-level guard: a decision needs an explicit label and a reviewer id. */
  canSubmit(label: string | null, reviewerId: string): boolean {
    return (
      label !== null &&
      (DIAGNOSIS_LABELS as readonly string[]).includes(label) &&
      reviewerId.trim().length > 0
    );
  }

  async submitDecision(
    caseId: string,
    label: string | null,
    reviewerId: string,
    note: string,
  ): Promise<SubmitResult> {
    if (!this.canSubmit(label, reviewerId)) {
      return { ok: false, conflict: false, message: "select a label and enter a reviewer id" };
    }
    try {
      await this.client.submitDecision(caseId, label as string, reviewerId.trim(), note);
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        this.state.caseMessages.set(caseId, "already resolved by another reviewer");
        await this.refresh();
        return { ok: false, conflict: true, message: "already resolved" };
      }
      const message = err instanceof Error ? err.message : String(err);
      this.state.caseMessages.set(caseId, message);
      return { ok: false, conflict: false, message };
    }
    // server confirmed: only now does the card leave the queue
    this.state = {
      ...this.state,
      items: this.state.items.filter((item) => item.case_id !== caseId),
      resolvedCount: this.state.resolvedCount + 1,
    };
    this.state.caseMessages.delete(caseId);
    return { ok: true, conflict: false, message: null };
  }
}
