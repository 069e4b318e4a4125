/** Canvas state: markers, mask overlay, confidence. Pure data + transitions.
 *
 * Server responses carry a client-side sequence number; a response older
 * than the newest applied one is discarded, so the confidence readout can
 * never be stale relative to the displayed mask.
 */

export interface Marker {
  instance: number;
  x: number; // image pixels
  y: number;
  confirmed: boolean; // false while rendered optimistically
}

export interface CanvasState {
  image: string | null;
  width: number;
  height: number;
  markers: Marker[];
  currentInstance: number;
  confidence: number | null;
  maskPngBase64: string | null;
  maskEmpty: boolean;
  pending: number;
  committed: boolean;
  lastAppliedSeq: number;
  warning: string | null;
}

export function emptyState(): CanvasState {
  return {
    image: null,
    width: 0,
    height: 0,
    markers: [],
    currentInstance: 0,
    confidence: null,
    maskPngBase64: null,
    maskEmpty: false,
    pending: 0,
    committed: false,
    lastAppliedSeq: -1,
    warning: null,
  };
}

export function beginImage(
  state: CanvasState,
  image: string,
  size: [number, number],
): CanvasState {
  return {
    ...emptyState(),
    image,
    height: size[0],
    width: size[1],
  };
}

export function addOptimisticMarker(
  state: CanvasState,
  x: number,
  y: number,
): CanvasState {
  return {
    ...state,
    markers: [
      ...state.markers,
      { instance: state.currentInstance, x, y, confirmed: false },
    ],
    pending: state.pending + 1,
  };
}

export function applyPromptResult(
  state: CanvasState,
  seq: number,
  result: { confidence: number; mask_png_base64: string },
): CanvasState {
  const pending = Math.max(0, state.pending - 1);
  if (seq <= state.lastAppliedSeq) {
    return { ...state, pending }; // stale; keep the newer mask+confidence
  }
  const confirmed = state.markers.map((m) => ({ ...m, confirmed: true }));
  const empty = result.mask_png_base64.length === 0;
  return {
    ...state,
    markers: confirmed,
    pending,
    lastAppliedSeq: seq,
    confidence: result.confidence,
    maskPngBase64: empty ? null : result.mask_png_base64,
    maskEmpty: empty,
    warning: empty ? "segmenter returned an empty mask" : null,
  };
}

export function rejectPrompt(state: CanvasState): CanvasState {
  // drop the newest unconfirmed marker; server state is unchanged
  const markers = [...state.markers];
  for (let i = markers.length - 1; i >= 0; i--) {
    if (!markers[i]!.confirmed) {
      markers.splice(i, 1);
      break;
    }
  }
  return { ...state, markers, pending: Math.max(0, state.pending - 1) };
}

export function applyUndo(
  state: CanvasState,
  seq: number,
  result: { confidence: number; mask_png_base64: string; points: number },
): CanvasState {
  const markers = state.markers.slice(0, -1);
  const empty = result.points === 0 || result.mask_png_base64.length === 0;
  return {
    ...state,
    markers,
    lastAppliedSeq: Math.max(seq, state.lastAppliedSeq),
    confidence: result.points === 0 ? null : result.confidence,
    maskPngBase64: empty ? null : result.mask_png_base64,
    maskEmpty: false,
    warning: null,
  };
}

export function newInstance(state: CanvasState): CanvasState {
  return { ...state, currentInstance: state.currentInstance + 1 };
}

export function markCommitted(state: CanvasState): CanvasState {
  return { ...state, committed: true };
}

export const canCommit = (state: CanvasState): boolean =>
  state.markers.some((m) => m.confirmed) &&
  !state.committed &&
  state.pending === 0;

export const saturated = (state: CanvasState): boolean =>
  state.confidence !== null && state.confidence >= 1.0;

export const formatConfidence = (state: CanvasState): string =>
  state.confidence === null ? "-" : state.confidence.toFixed(3);
