import type { EventSnapshot } from './types';

export interface PollerCallbacks {
  onSnapshot: (snapshot: EventSnapshot) => void;
  /** connection lost: show the stale-data banner */
  onStale: () => void;
  /** connection back after a stale spell */
  onRecovered: () => void;
}

type Scheduler = (fn: () => void, ms: number) => unknown;

/** Polls GET /events/{id}/trace once a second until the event completes.
 * Poll failures flip a stale flag instead of aborting, and the loop keeps
 * retrying so the view resumes by itself when the service returns. */
export class TracePoller {
  private stale = false;
  private stopped = false;

  constructor(
    private readonly fetchTrace: () => Promise<EventSnapshot>,
    private readonly callbacks: PollerCallbacks,
    private readonly intervalMs = 1000,
    private readonly schedule: Scheduler = (fn, ms) => setTimeout(fn, ms),
  ) {}

  get isStale(): boolean {
    return this.stale;
  }

  stop(): void {
    this.stopped = true;
  }

  async tick(): Promise<'continue' | 'done'> {
    let snapshot: EventSnapshot;
    try {
      snapshot = await this.fetchTrace();
    } catch {
      if (!this.stale) {
        this.stale = true;
        this.callbacks.onStale();
      }
      return 'continue';
    }
    if (this.stale) {
      this.stale = false;
      this.callbacks.onRecovered();
    }
    this.callbacks.onSnapshot(snapshot);
    return snapshot.status === 'complete' ? 'done' : 'continue';
  }

  start(): void {
    const loop = async () => {
      if (this.stopped) return;
      const state = await this.tick();
      if (state === 'continue' && !this.stopped) {
        this.schedule(loop, this.intervalMs);
      }
    };
    void loop();
  }
}
