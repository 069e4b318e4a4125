/** Zoom/pan display transform between image pixels and display pixels.
 *
 * display = image * scale + offset. Both directions are exact (sub-pixel);
 * the round trip display -> image -> display is lossless up to float64.
 */

export interface Point {
  x: number;
  y: number;
}

export class ViewTransform {
  constructor(
    public scale = 1,
    public offsetX = 0,
    public offsetY = 0,
  ) {}

  displayToImage(p: Point): Point {
    return {
      x: (p.x - this.offsetX) / this.scale,
      y: (p.y - this.offsetY) / this.scale,
    };
  }

  imageToDisplay(p: Point): Point {
    return {
      x: p.x * this.scale + this.offsetX,
      y: p.y * this.scale + this.offsetY,
    };
  }

  /** Zoom by `factor` keeping the display point `anchor` fixed. */
  zoomAt(factor: number, anchor: Point): void {
    const before = this.displayToImage(anchor);
    this.scale *= factor;
    this.offsetX = anchor.x - before.x * this.scale;
    this.offsetY = anchor.y - before.y * this.scale;
  }

  pan(dx: number, dy: number): void {
    this.offsetX += dx;
    this.offsetY += dy;
  }

  /** True when the display point falls inside the image rectangle. */
  contains(p: Point, width: number, height: number): boolean {
    const q = this.displayToImage(p);
    return q.x >= 0 && q.y >= 0 && q.x < width && q.y < height;
  }
}
