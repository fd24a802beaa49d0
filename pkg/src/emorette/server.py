"""HTTP chat service: /v1/chat, /v1/rate, /v1/health."""

from __future__ import annotations

import logging
import os
import uuid
from pathlib import Path

from fastapi import FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .persistence import OutOfOrderWriteError
from .service import ChatService, ConversationEndedError

logger = logging.getLogger(__name__)


class ChatRequestBody(BaseModel):
    session_id: str = Field(min_length=1)
    user_id: str | None = None
    utterance: str
    asr_hypotheses: list[str] | None = None


class RateRequestBody(BaseModel):
    session_id: str = Field(min_length=1)
    rating: float


def create_app(service: ChatService, ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="emorette", docs_url=None, redoc_url=None)

    @app.exception_handler(RequestValidationError)
    async def malformed_request(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": "malformed request", "detail": exc.errors()})

    @app.post("/v1/chat")
    def chat(body: ChatRequestBody, debug: int = Query(default=0)):
        if not body.utterance.strip():
            return JSONResponse(status_code=400, content={"error": "utterance must be nonempty"})
        if body.asr_hypotheses is not None and any(not h for h in body.asr_hypotheses):
            return JSONResponse(status_code=400, content={"error": "asr hypotheses must be nonempty strings"})
        try:
            result = service.chat(
                body.session_id, body.utterance, user_id=body.user_id, debug=bool(debug)
            )
        except ValueError as exc:
            return JSONResponse(status_code=400, content={"error": str(exc)})
        except Exception:
            # The last durable snapshot stays authoritative; nothing partial is kept.
            incident = uuid.uuid4().hex[:12]
            logger.exception("chat failed (incident %s)", incident)
            return JSONResponse(status_code=500, content={"error": "internal error", "incident_id": incident})
        payload: dict = {
            "response": result.response,
            "session_id": result.session_id,
            "turn_index": result.turn_index,
        }
        if result.debug is not None:
            payload["debug"] = result.debug
        return payload

    @app.post("/v1/rate")
    def rate(body: RateRequestBody):
        try:
            record = service.rate(body.session_id, body.rating)
        except KeyError:
            return JSONResponse(status_code=404, content={"error": f"unknown session {body.session_id!r}"})
        except ValueError as exc:
            return JSONResponse(status_code=400, content={"error": str(exc)})
        except (ConversationEndedError, OutOfOrderWriteError) as exc:
            return JSONResponse(status_code=409, content={"error": str(exc)})
        return {"ok": True, "session_id": record.conversation_id, "rating": record.rating}

    @app.get("/v1/health")
    def health():
        return service.health()

    ui = ui_dir or os.environ.get("EMORETTE_UI_DIR")
    if ui and Path(ui).is_dir():
        app.mount("/", StaticFiles(directory=str(ui), html=True), name="ui")

    return app
