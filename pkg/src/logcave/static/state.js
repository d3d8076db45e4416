/** UI state helpers: slider mapping, request rate limiting, and
 * stale-response discard.  Pure logic, no DOM. */
export const L2_MIN = 1e-2;
export const L2_MAX = 1e4;
const LOG_MIN = Math.log10(L2_MIN);
const LOG_MAX = Math.log10(L2_MAX);
/** Map a slider position p in [0, 1] to an L2 loss weight on a log scale
 * spanning [1e-2, 1e4]. */
export function sliderToL2(p) {
    const clamped = Math.min(1, Math.max(0, p));
    return Math.pow(10, LOG_MIN + (LOG_MAX - LOG_MIN) * clamped);
}
/** Inverse of sliderToL2, clamped to the slider range. */
export function l2ToSlider(l2) {
    const clamped = Math.min(L2_MAX, Math.max(L2_MIN, l2));
    return (Math.log10(clamped) - LOG_MIN) / (LOG_MAX - LOG_MIN);
}
/** Trailing-edge debouncer with a minimum interval between executions.
 * With intervalMs = 200 at most 5 calls per second reach the callback;
 * the most recent pending arguments always run eventually. */
export class Debouncer {
    constructor(fn, intervalMs, now = () => Date.now()) {
        this.fn = fn;
        this.intervalMs = intervalMs;
        this.now = now;
        this.timer = null;
        this.lastRun = -Infinity;
    }
    request(arg) {
        if (this.timer !== null)
            clearTimeout(this.timer);
        const wait = Math.max(0, this.lastRun + this.intervalMs - this.now());
        this.timer = setTimeout(() => {
            this.timer = null;
            this.lastRun = this.now();
            this.fn(arg);
        }, wait);
    }
    cancel() {
        if (this.timer !== null)
            clearTimeout(this.timer);
        this.timer = null;
    }
}
/** Orders in-flight fetches: each request takes a sequence number, and a
 * response is accepted only if no newer request's response has already
 * been accepted.  Late responses to superseded requests are discarded. */
export class FetchSequencer {
    constructor() {
        this.nextSeq = 1;
        this.lastAccepted = 0;
    }
    issue() {
        return this.nextSeq++;
    }
    /** Returns true when the response for `seq` should be applied. */
    accept(seq) {
        if (seq <= this.lastAccepted)
            return false;
        this.lastAccepted = seq;
        return true;
    }
}
