"""HTTP front for the annotation service, versioned under /v1.

Endpoints:
    POST   /v1/sessions                              open a session
    GET    /v1/sessions/{sid}/next                   next unannotated image
    GET    /v1/sessions/{sid}/images/{img}           image pixels (PNG)
    POST   /v1/sessions/{sid}/images/{img}/prompts   submit one point
    DELETE /v1/sessions/{sid}/images/{img}/prompts/last
    POST   /v1/sessions/{sid}/images/{img}/commit
    GET    /v1/sessions/{sid}/images/{img}/mask.png  latest mask
    GET    /v1/sessions/{sid}/export                 write dataset directory

Segmentation responses carry the mask inline (base64 PNG) plus confidence;
the mask.png route serves the same bytes for direct display.
"""

from __future__ import annotations

import base64
import io
import json

import numpy as np
from fastapi import FastAPI, HTTPException, Response
from PIL import Image
from pydantic import BaseModel

from ..types import EmptyPromptError, PointPrompt, SegmentationResult
from .service import (
    AlreadyCommittedError,
    AnnotationService,
    EmbeddingNotReadyError,
    EmptyDraftError,
    OutOfBoundsError,
    UnknownImageError,
    UnknownSessionError,
)


class OpenSessionRequest(BaseModel):
    images: list[str]


class PromptRequest(BaseModel):
    instance: int
    point: tuple[float, float]


def _mask_png(mask: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(mask.astype(np.uint8) * 255, mode="L").save(buf, format="PNG")
    return buf.getvalue()


def _result_payload(result: SegmentationResult | None) -> dict:
    if result is None:
        return {"confidence": None, "mask_png_base64": None, "points": 0}
    prompts = result.prompts
    return {
        "confidence": result.confidence,
        "mask_png_base64": base64.b64encode(_mask_png(result.mask)).decode(),
        "points": len(prompts.all_points()) if prompts else 0,
        "instances": [[[p.x, p.y] for p in g] for g in prompts.instances]
        if prompts else [],
    }


def create_app(service: AnnotationService) -> FastAPI:
    app = FastAPI(title="samic annotation service")
    app.state.service = service

    def _translate(exc: Exception) -> HTTPException:
        if isinstance(exc, (UnknownSessionError, UnknownImageError)):
            return HTTPException(404, str(exc))
        if isinstance(exc, EmbeddingNotReadyError):
            return HTTPException(503, f"embedding not ready: {exc}",
                                 headers={"Retry-After": "1"})
        if isinstance(exc, AlreadyCommittedError):
            return HTTPException(409, str(exc))
        if isinstance(exc, (EmptyDraftError, EmptyPromptError)):
            return HTTPException(409, str(exc))
        if isinstance(exc, (OutOfBoundsError, ValueError)):
            return HTTPException(422, str(exc))
        return HTTPException(500, str(exc))

    @app.post("/v1/sessions")
    def open_session(req: OpenSessionRequest):
        try:
            session = service.open_session(req.images)
        except Exception as exc:
            raise _translate(exc)
        return {"session": session.session_id, "queue": session.queue,
                "backend": service.backend.producer_id}

    @app.get("/v1/sessions/{sid}/next")
    def next_image(sid: str):
        try:
            session = service.session(sid)
            image_id = service.next_image(sid)
        except Exception as exc:
            raise _translate(exc)
        if image_id is None:
            return {"image": None, "done": True, "total": len(session.queue)}
        state = session.state(image_id)
        h, w = state.pixels.shape[:2]
        return {
            "image": image_id,
            "done": False,
            "index": session.queue.index(image_id),
            "total": len(session.queue),
            "size": [h, w],
            "ready": state.embedding is None or state.embedding.done(),
        }

    @app.get("/v1/sessions/{sid}/images/{img}")
    def image_pixels(sid: str, img: str):
        try:
            state = service.session(sid).state(img)
        except Exception as exc:
            raise _translate(exc)
        buf = io.BytesIO()
        Image.fromarray(state.pixels).save(buf, format="PNG")
        return Response(buf.getvalue(), media_type="image/png")

    @app.post("/v1/sessions/{sid}/images/{img}/prompts")
    def submit_prompt(sid: str, img: str, req: PromptRequest):
        try:
            result = service.submit_prompt(
                sid, img, req.instance,
                PointPrompt(float(req.point[0]), float(req.point[1])))
        except Exception as exc:
            raise _translate(exc)
        return _result_payload(result)

    @app.delete("/v1/sessions/{sid}/images/{img}/prompts/last")
    def undo_last(sid: str, img: str):
        try:
            result = service.undo_last(sid, img)
        except Exception as exc:
            raise _translate(exc)
        return _result_payload(result)

    @app.post("/v1/sessions/{sid}/images/{img}/commit")
    def commit(sid: str, img: str):
        try:
            record = service.commit_annotation(sid, img)
        except Exception as exc:
            raise _translate(exc)
        payload = record.to_json_dict()
        payload["next"] = service.next_image(sid)
        return payload

    @app.get("/v1/sessions/{sid}/images/{img}/mask.png")
    def mask_png(sid: str, img: str):
        try:
            mask = service.current_mask(sid, img)
        except Exception as exc:
            raise _translate(exc)
        return Response(_mask_png(mask), media_type="image/png")

    @app.get("/v1/sessions/{sid}/export")
    def export(sid: str):
        try:
            session = service.session(sid)
            out = service.export_dataset(sid, session.directory / "export")
        except Exception as exc:
            raise _translate(exc)
        manifest = json.loads((out / "manifest.json").read_text())
        return {"path": str(out), "manifest": manifest}

    return app
