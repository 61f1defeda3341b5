// Playback loop: samples the fetched timeline at display refresh rate.
// The frame scheduler is injectable so tests can drive time manually.

export type FrameScheduler = (callback: (now: number) => void) => number;
export type FrameCanceller = (handle: number) => void;

export class Player {
  private handle: number | null = null;
  private lastNow: number | null = null;

  constructor(
    private onTick: (dtMs: number) => void,
    private schedule: FrameScheduler =
      (cb) => (globalThis as any).requestAnimationFrame(cb),
    private cancel: FrameCanceller =
      (h) => (globalThis as any).cancelAnimationFrame(h),
  ) {}

  start(): void {
    if (this.handle !== null) return;
    this.lastNow = null;
    const loop = (now: number) => {
      if (this.lastNow !== null) {
        this.onTick(now - this.lastNow);
      }
      this.lastNow = now;
      this.handle = this.schedule(loop);
    };
    this.handle = this.schedule(loop);
  }

  stop(): void {
    if (this.handle !== null) {
      this.cancel(this.handle);
      this.handle = null;
      this.lastNow = null;
    }
  }

  get running(): boolean {
    return this.handle !== null;
  }
}
