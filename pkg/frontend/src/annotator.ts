/** Wires the annotation loop to the DOM: clicks become point prompts, the
 * latest server mask is overlaid, n/u/Enter drive instance/undo/commit. */

import { AnnotationApi, ApiError } from "./api.js";
import { RequestQueue } from "./queue.js";
import {
  CanvasState,
  addOptimisticMarker,
  applyPromptResult,
  applyUndo,
  beginImage,
  canCommit,
  emptyState,
  formatConfidence,
  markCommitted,
  newInstance,
  rejectPrompt,
  saturated,
} from "./state.js";
import { ViewTransform } from "./transform.js";

const INSTANCE_COLORS = [
  "#22d3ee", // cyan
  "#fb923c", // orange
  "#4ade80", // green
  "#c084fc", // purple
  "#f472b6", // pink
  "#facc15", // yellow
];

export interface AnnotatorElements {
  canvas: HTMLCanvasElement;
  confidence: HTMLElement;
  badge: HTMLElement;
  hint: HTMLElement;
  commitButton: HTMLButtonElement;
}

export class Annotator {
  state: CanvasState = emptyState();
  view = new ViewTransform();
  private queue = new RequestQueue();
  private seq = 0;
  session: string | null = null;
  private imageEl: HTMLImageElement | null = null;
  done = false;

  constructor(
    private api: AnnotationApi,
    private els: AnnotatorElements,
  ) {
    els.canvas.addEventListener("click", (e) => this.onClick(e));
    els.canvas.addEventListener("wheel", (e) => this.onWheel(e), {
      passive: false,
    });
    document.addEventListener("keydown", (e) => this.onKey(e));
    els.commitButton.addEventListener("click", () => void this.commit());
  }

  async start(images: string[]): Promise<void> {
    const { session } = await this.api.openSession(images);
    this.session = session;
    await this.advance();
  }

  async advance(): Promise<void> {
    if (!this.session) return;
    const next = await this.api.nextImage(this.session);
    if (next.done || !next.image || !next.size) {
      this.done = true;
      this.state = emptyState();
      this.render();
      return;
    }
    this.state = beginImage(this.state, next.image, next.size);
    this.view = new ViewTransform();
    this.loadImage(this.api.imageUrl(this.session, next.image));
    this.render();
  }

  private loadImage(url: string): void {
    if (typeof Image === "undefined") return; // non-browser harness
    const img = new Image();
    img.onload = () => {
      this.imageEl = img;
      this.render();
    };
    img.src = url;
  }

  /** Map a click to image pixels and submit it; serialized per contract. */
  onClick(e: { clientX: number; clientY: number }): void {
    const rect = this.els.canvas.getBoundingClientRect();
    const display = { x: e.clientX - rect.left, y: e.clientY - rect.top };
    this.clickAtDisplay(display.x, display.y);
  }

  clickAtDisplay(dx: number, dy: number): void {
    const { image } = this.state;
    if (!image || !this.session || this.state.committed) return;
    if (!this.view.contains({ x: dx, y: dy }, this.state.width, this.state.height)) {
      this.els.hint.textContent = "click inside the image";
      return;
    }
    this.els.hint.textContent = "";
    const p = this.view.displayToImage({ x: dx, y: dy });
    const instance = this.state.currentInstance;
    this.state = addOptimisticMarker(this.state, p.x, p.y);
    this.render();
    const session = this.session;
    void this.queue
      .enqueue(() => {
        const seq = this.seq++;
        return this.api
          .submitPrompt(session, image, instance, [p.x, p.y])
          .then((res) => ({ seq, res }));
      })
      .then(({ seq, res }) => {
        this.state = applyPromptResult(this.state, seq, res);
        this.render();
      })
      .catch((err: unknown) => {
        this.state = rejectPrompt(this.state);
        this.els.hint.textContent =
          err instanceof ApiError ? err.message : "request failed";
        this.render();
      });
  }

  undo(): void {
    const { image } = this.state;
    if (!image || !this.session || this.state.committed) return;
    if (!this.state.markers.length) return;
    const session = this.session;
    void this.queue
      .enqueue(() => {
        const seq = this.seq++;
        return this.api.undoLast(session, image).then((res) => ({ seq, res }));
      })
      .then(({ seq, res }) => {
        this.state = applyUndo(this.state, seq, res);
        this.render();
      })
      .catch(() => {
        this.els.hint.textContent = "nothing to undo";
      });
  }

  async commit(): Promise<void> {
    const { image } = this.state;
    if (!image || !this.session || !canCommit(this.state)) return;
    const session = this.session;
    try {
      await this.queue.enqueue(() => this.api.commit(session, image));
      this.state = markCommitted(this.state);
      await this.advance();
    } catch (err) {
      this.els.hint.textContent =
        err instanceof ApiError ? err.message : "commit failed";
    }
  }

  startNewInstance(): void {
    this.state = newInstance(this.state);
    this.render();
  }

  onKey(e: { key: string }): void {
    if (e.key === "n") this.startNewInstance();
    else if (e.key === "u") this.undo();
    else if (e.key === "Enter") void this.commit();
  }

  onWheel(e: WheelEvent): void {
    e.preventDefault();
    const rect = this.els.canvas.getBoundingClientRect();
    const anchor = { x: e.clientX - rect.left, y: e.clientY - rect.top };
    this.view.zoomAt(e.deltaY < 0 ? 1.25 : 0.8, anchor);
    this.render();
  }

  render(): void {
    const { els, state } = this;
    els.confidence.textContent = formatConfidence(state);
    els.badge.style.display = saturated(state) ? "inline-block" : "none";
    els.commitButton.disabled = !canCommit(state);
    if (state.warning) els.hint.textContent = state.warning;

    let ctx: CanvasRenderingContext2D | null = null;
    try {
      ctx = els.canvas.getContext("2d");
    } catch {
      return; // headless DOM without canvas support
    }
    if (!ctx) return;
    ctx.clearRect(0, 0, els.canvas.width, els.canvas.height);
    ctx.save();
    ctx.setTransform(
      this.view.scale, 0, 0, this.view.scale,
      this.view.offsetX, this.view.offsetY,
    );
    if (this.imageEl) ctx.drawImage(this.imageEl, 0, 0);
    ctx.restore();
    if (state.maskPngBase64) this.drawMask(ctx, state.maskPngBase64);
    for (const m of state.markers) {
      const d = this.view.imageToDisplay(m);
      ctx.beginPath();
      ctx.arc(d.x, d.y, 4, 0, 2 * Math.PI);
      ctx.fillStyle =
        INSTANCE_COLORS[m.instance % INSTANCE_COLORS.length]!;
      ctx.globalAlpha = m.confirmed ? 1.0 : 0.5;
      ctx.fill();
      ctx.globalAlpha = 1.0;
    }
  }

  private drawMask(ctx: CanvasRenderingContext2D, pngBase64: string): void {
    if (typeof Image === "undefined") return;
    const img = new Image();
    img.onload = () => {
      ctx.save();
      ctx.setTransform(
        this.view.scale, 0, 0, this.view.scale,
        this.view.offsetX, this.view.offsetY,
      );
      ctx.globalAlpha = 0.4;
      ctx.drawImage(img, 0, 0);
      ctx.restore();
    };
    img.src = `data:image/png;base64,${pngBase64}`;
  }
}
