"""Annotation backend: session-scoped image queues, iterative prompt
submission with live mask and confidence, and durable JSON/mask records.

Storage layout under the service root, one directory per session:

    <root>/<session_id>/session.json        queue order and backend id
    <root>/<session_id>/records/<img>.json  committed prompt records
    <root>/<session_id>/masks/<img>.png     committed masks (8-bit, 0/255)

Record files follow a fixed schema:

    {"version": 1, "image": "<id>", "size": [H, W],
     "instances": [[[x, y], ...], ...], "confidence": c, "backend": "<id>"}

where x is the column and y the row. Commits are atomic (temp file then
rename) and immutable; an interrupted commit leaves no partial record.
"""

from __future__ import annotations

import io
import json
import os
import re
import tempfile
import threading
import time
from concurrent.futures import Future, ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from ..segmenter.base import SegmenterBackend, segment_instances
from ..segmenter.cache import EmbeddingCache, embed_image
from ..types import PointPrompt, PromptSet, SamicError, SegmentationResult


class AnnotationError(SamicError):
    """Base class for annotation workflow failures."""


class UnknownSessionError(AnnotationError, KeyError):
    pass


class UnknownImageError(AnnotationError, KeyError):
    pass


class EmbeddingNotReadyError(AnnotationError, RuntimeError):
    """Retriable: the image's embedding precompute has not finished."""


class EmptyDraftError(AnnotationError, ValueError):
    pass


class AlreadyCommittedError(AnnotationError, ValueError):
    pass


class OutOfBoundsError(AnnotationError, ValueError):
    pass


@dataclass(frozen=True)
class AnnotationRecord:
    image_id: str
    prompts: PromptSet
    mask_path: Path
    confidence: float
    backend_id: str
    size: tuple[int, int]
    committed_at: float

    def to_json_dict(self) -> dict:
        return {
            "version": 1,
            "image": self.image_id,
            "size": [int(self.size[0]), int(self.size[1])],
            "instances": [[[p.x, p.y] for p in group]
                          for group in self.prompts.instances],
            "confidence": self.confidence,
            "backend": self.backend_id,
        }


@dataclass
class _ImageState:
    image_id: str
    path: Path
    lock: threading.Lock = field(default_factory=threading.Lock)
    embedding: Future | None = None
    draft: list[list[PointPrompt]] = field(default_factory=list)
    submit_order: list[int] = field(default_factory=list)
    last_result: SegmentationResult | None = None
    record: AnnotationRecord | None = None
    _pixels: np.ndarray | None = None

    @property
    def pixels(self) -> np.ndarray:
        if self._pixels is None:
            self._pixels = np.asarray(Image.open(self.path).convert("RGB"))
        return self._pixels


@dataclass
class AnnotationSession:
    session_id: str
    queue: list[str]
    images: dict[str, _ImageState]
    directory: Path

    def state(self, image_id: str) -> _ImageState:
        try:
            return self.images[image_id]
        except KeyError:
            raise UnknownImageError(image_id)


def _slug(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_-]+", "_", name) or "image"


def _atomic_write(path: Path, blob: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    with os.fdopen(fd, "wb") as fh:
        fh.write(blob)
    os.replace(tmp, path)


class AnnotationService:
    """Single-user annotation sessions over a promptable segmenter backend.

    Prompt submissions are serialized per image via a lock, so concurrent
    requests queue rather than clobber each other. Committed records found
    on disk at startup are reloaded; drafts are in-memory only.
    """

    def __init__(self, backend: SegmenterBackend, root: str | Path,
                 cache: EmbeddingCache | None = None, workers: int = 2):
        self.backend = backend
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.cache = cache or EmbeddingCache(self.root / "embedding-cache")
        self._pool = ThreadPoolExecutor(max_workers=workers)
        self._lock = threading.Lock()
        self.sessions: dict[str, AnnotationSession] = {}
        self._reload()

    # -- session lifecycle -------------------------------------------------

    def open_session(self, image_paths: list[str | Path]) -> AnnotationSession:
        if not image_paths:
            raise ValueError("a session needs at least one image")
        problems = []
        for p in image_paths:
            try:
                with Image.open(p) as im:
                    im.verify()
            except Exception as exc:
                problems.append(f"{p}: {exc}")
        if problems:
            raise ValueError("unreadable image(s):\n  " + "\n  ".join(problems))

        with self._lock:
            session_id = f"s{len(self.sessions):04d}-{os.urandom(3).hex()}"
            sdir = self.root / session_id
        images: dict[str, _ImageState] = {}
        queue = []
        for path in image_paths:
            base = _slug(Path(path).stem)
            image_id = base
            n = 1
            while image_id in images:
                image_id = f"{base}_{n}"
                n += 1
            images[image_id] = _ImageState(image_id=image_id, path=Path(path))
            queue.append(image_id)
        session = AnnotationSession(session_id, queue, images, sdir)
        sdir.mkdir(parents=True, exist_ok=True)
        _atomic_write(sdir / "session.json", json.dumps({
            "session": session_id,
            "backend": self.backend.producer_id,
            "queue": queue,
            "paths": {iid: str(st.path) for iid, st in images.items()},
        }, indent=2).encode())
        for state in images.values():
            state.embedding = self._pool.submit(
                embed_image, state.pixels, self.backend, self.cache)
        with self._lock:
            self.sessions[session_id] = session
        return session

    def session(self, session_id: str) -> AnnotationSession:
        try:
            return self.sessions[session_id]
        except KeyError:
            raise UnknownSessionError(session_id)

    def next_image(self, session_id: str) -> str | None:
        """First queued image without a committed record, or None when done."""
        session = self.session(session_id)
        for image_id in session.queue:
            if session.images[image_id].record is None:
                return image_id
        return None

    # -- annotation loop ---------------------------------------------------

    def submit_prompt(self, session_id: str, image_id: str,
                      instance_index: int, point: PointPrompt) -> SegmentationResult:
        session = self.session(session_id)
        state = session.state(image_id)
        if state.record is not None:
            raise AlreadyCommittedError(image_id)
        if state.embedding is not None and not state.embedding.done():
            raise EmbeddingNotReadyError(image_id)
        h, w = state.pixels.shape[:2]
        if not point.inside(h, w):
            raise OutOfBoundsError(
                f"point ({point.x}, {point.y}) outside {h}x{w} image")
        if instance_index < 0 or instance_index > len(state.draft):
            raise ValueError(
                f"instance index {instance_index} skips past {len(state.draft)}")
        with state.lock:
            if instance_index == len(state.draft):
                state.draft.append([])
            state.draft[instance_index].append(point)
            state.submit_order.append(instance_index)
            return self._refresh(state)

    def undo_last(self, session_id: str, image_id: str) -> SegmentationResult | None:
        """Remove the most recently submitted point and re-segment."""
        session = self.session(session_id)
        state = session.state(image_id)
        if state.record is not None:
            raise AlreadyCommittedError(image_id)
        with state.lock:
            if not state.submit_order:
                raise EmptyDraftError(f"nothing to undo for {image_id}")
            idx = state.submit_order.pop()
            state.draft[idx].pop()
            while state.draft and not state.draft[-1]:
                state.draft.pop()
            if not any(state.draft):
                state.draft.clear()
                state.last_result = None
                return None
            return self._refresh(state)

    def _refresh(self, state: _ImageState) -> SegmentationResult:
        prompts = PromptSet([list(g) for g in state.draft if g],
                            image_id=state.image_id)
        result = segment_instances(self.backend, state.pixels, prompts)
        state.last_result = result
        return result

    def current_mask(self, session_id: str, image_id: str) -> np.ndarray:
        session = self.session(session_id)
        state = session.state(image_id)
        if state.record is not None:
            return np.asarray(Image.open(state.record.mask_path)) >= 128
        if state.last_result is None:
            raise EmptyDraftError(f"no mask yet for {image_id}")
        return state.last_result.mask

    # -- persistence -------------------------------------------------------

    def commit_annotation(self, session_id: str, image_id: str) -> AnnotationRecord:
        session = self.session(session_id)
        state = session.state(image_id)
        with state.lock:
            if state.record is not None:
                raise AlreadyCommittedError(f"{image_id} is already committed")
            if not any(state.draft):
                raise EmptyDraftError(f"draft for {image_id} is empty")
            result = state.last_result or self._refresh(state)
            h, w = state.pixels.shape[:2]
            mask_path = session.directory / "masks" / f"{image_id}.png"
            record = AnnotationRecord(
                image_id=image_id,
                prompts=PromptSet([list(g) for g in state.draft if g],
                                  image_id=image_id),
                mask_path=mask_path,
                confidence=result.confidence,
                backend_id=self.backend.producer_id,
                size=(h, w),
                committed_at=time.time(),
            )
            mask_img = Image.fromarray(
                (result.mask.astype(np.uint8)) * 255, mode="L")
            buf = io.BytesIO()
            mask_img.save(buf, format="PNG")
            _atomic_write(mask_path, buf.getvalue())
            record_path = session.directory / "records" / f"{image_id}.json"
            _atomic_write(record_path, json.dumps(
                record.to_json_dict(), indent=2, sort_keys=True).encode())
            state.record = record
            state.draft.clear()
            state.submit_order.clear()
            state.last_result = None
            return record

    def _reload(self) -> None:
        for sdir in sorted(self.root.glob("s*")):
            meta_path = sdir / "session.json"
            if not meta_path.is_file():
                continue
            try:
                meta = json.loads(meta_path.read_text())
            except json.JSONDecodeError:
                continue
            images = {}
            for image_id in meta["queue"]:
                state = _ImageState(image_id=image_id,
                                    path=Path(meta["paths"][image_id]))
                record_path = sdir / "records" / f"{image_id}.json"
                if record_path.is_file():
                    state.record = load_record(record_path,
                                               sdir / "masks" / f"{image_id}.png")
                images[image_id] = state
            self.sessions[meta["session"]] = AnnotationSession(
                meta["session"], list(meta["queue"]), images, sdir)

    # -- export ------------------------------------------------------------

    def export_dataset(self, session_id: str, out_dir: str | Path,
                       class_id: str = "annotated") -> Path:
        """Write images/, prompts/, masks/ and a manifest for training."""
        session = self.session(session_id)
        records = [(iid, session.images[iid].record)
                   for iid in session.queue
                   if session.images[iid].record is not None]
        if not records:
            raise EmptyDraftError("no committed records to export")
        out = Path(out_dir)
        for sub in ("images", "prompts", "masks"):
            (out / sub).mkdir(parents=True, exist_ok=True)
        items = []
        for image_id, record in records:
            state = session.images[image_id]
            img_rel = f"images/{image_id}.png"
            Image.fromarray(state.pixels).save(out / img_rel)
            prompts_rel = f"prompts/{image_id}.json"
            (out / prompts_rel).write_text(
                json.dumps(record.to_json_dict(), indent=2, sort_keys=True))
            mask_rel = f"masks/{image_id}.png"
            (out / mask_rel).write_bytes(record.mask_path.read_bytes())
            items.append({"id": image_id, "class": class_id, "split": "train",
                          "image": img_rel, "prompts": prompts_rel,
                          "mask": mask_rel})
        manifest = {"classes": [class_id], "items": items}
        _atomic_write(out / "manifest.json",
                      json.dumps(manifest, indent=2, sort_keys=True).encode())
        return out


def load_record(record_path: Path, mask_path: Path) -> AnnotationRecord:
    data = json.loads(record_path.read_text())
    groups = [[PointPrompt(float(x), float(y)) for x, y in inst]
              for inst in data["instances"]]
    return AnnotationRecord(
        image_id=data["image"],
        prompts=PromptSet(groups, image_id=data["image"]),
        mask_path=mask_path,
        confidence=float(data["confidence"]),
        backend_id=data["backend"],
        size=(int(data["size"][0]), int(data["size"][1])),
        committed_at=record_path.stat().st_mtime,
    )


def replay_records(service: AnnotationService, session_id: str) -> dict[str, bool]:
    """Check each committed mask equals a fresh run over its stored prompts."""
    session = service.session(session_id)
    results = {}
    for image_id, state in session.images.items():
        if state.record is None:
            continue
        stored = np.asarray(Image.open(state.record.mask_path)) >= 128
        fresh = segment_instances(service.backend, state.pixels,
                                  state.record.prompts)
        results[image_id] = bool(np.array_equal(stored, fresh.mask))
    return results
