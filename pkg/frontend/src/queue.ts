/** Serializes async work: one request in flight, later work queued in order. */

export class RequestQueue {
  private tail: Promise<unknown> = Promise.resolve();
  private inFlight = 0;

  get pending(): number {
    return this.inFlight;
  }

  enqueue<T>(work: () => Promise<T>): Promise<T> {
    this.inFlight += 1;
    const run = this.tail.then(work);
    // keep the chain alive even when a job rejects
    this.tail = run.catch(() => undefined).finally(() => {
      this.inFlight -= 1;
    });
    return run;
  }
}
