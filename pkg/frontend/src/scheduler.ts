/**
 * Frame pipeline for one display panel.
 *
 * Invariants it enforces:
 *  - requests are debounced (trailing edge, 150 ms by default), so slider
 *    drags coalesce into one render;
 *  - at most one request is in flight per panel;
 *  - every dispatch carries a sequence number, and a response superseded by
 *    a newer request is dropped instead of displayed.
 */

export interface FrameOutcome<R> {
	seq: number;
	result: R;
}

export type Dispatcher<Q, R> = (request: Q, seq: number) => Promise<R>;

export class FramePipeline<Q, R> {
	private seq = 0;
	private lastDisplayedSeq = 0;
	private timer: ReturnType<typeof setTimeout> | null = null;
	private pending: Q | null = null;
	private inFlight = false;

	constructor(
		private readonly dispatcher: Dispatcher<Q, R>,
		private readonly onFrame: (outcome: FrameOutcome<R>) => void,
		private readonly onError: (err: unknown) => void = () => {},
		private readonly delayMs = 150,
	) {}

	/** Debounced request; restarting the trailing timer on every call. */
	request(req: Q): void {
		this.pending = req;
		if (this.timer !== null) clearTimeout(this.timer);
		this.timer = setTimeout(() => {
			this.timer = null;
			void this.dispatchPending();
		}, this.delayMs);
	}

	/** Skip the debounce delay (initial load, programmatic changes). */
	flush(req?: Q): void {
		if (req !== undefined) this.pending = req;
		if (this.timer !== null) {
			clearTimeout(this.timer);
			this.timer = null;
		}
		void this.dispatchPending();
	}

	get inFlightNow(): boolean {
		return this.inFlight;
	}

	private async dispatchPending(): Promise<void> {
		if (this.inFlight || this.pending === null) return;
		const req = this.pending;
		this.pending = null;
		const seq = ++this.seq;
		this.inFlight = true;
		try {
			const result = await this.dispatcher(req, seq);
			// A newer request was queued while this one was rendering: the
			// response no longer reflects the current state, so drop it.
			const stale = this.pending !== null || seq <= this.lastDisplayedSeq;
			if (!stale) {
				this.lastDisplayedSeq = seq;
				this.onFrame({ seq, result });
			}
		} catch (err) {
			this.onError(err);
		} finally {
			this.inFlight = false;
			if (this.pending !== null) void this.dispatchPending();
		}
	}
}
