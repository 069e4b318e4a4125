/** Entry point: reads the image list from the query string and starts the
 * annotator against the same-origin annotation service. */

import { AnnotationApi } from "./api.js";
import { Annotator, AnnotatorElements } from "./annotator.js";

export function bootstrap(root: Document = document): Annotator {
  const els: AnnotatorElements = {
    canvas: root.getElementById("canvas") as HTMLCanvasElement,
    confidence: root.getElementById("confidence") as HTMLElement,
    badge: root.getElementById("badge") as HTMLElement,
    hint: root.getElementById("hint") as HTMLElement,
    commitButton: root.getElementById("commit") as HTMLButtonElement,
  };
  const api = new AnnotationApi("");
  const annotator = new Annotator(api, els);
  const params = new URLSearchParams(root.location?.search ?? "");
  const images = params.getAll("image");
  if (images.length) void annotator.start(images);
  return annotator;
}

if (typeof document !== "undefined" && document.getElementById("canvas")) {
  bootstrap();
}
