"""
ADENet Service - HTTP front for detection and enhancement on a prepared corpus
"""

from datetime import datetime
from pathlib import Path

import uvicorn
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from adenet import __version__
from adenet.errors import AdenetError, UnknownClipError
from adenet.harness.checkpoint import load_checkpoint, model_from_checkpoint
from adenet.harness.inference import detect_clip, enhance_clip
from adenet.log import get_logger
from adenet.signalio import read_manifest

logger = get_logger(__name__)


class DetectRequest(BaseModel):
    clip_id: str = Field(..., min_length=1)


class FrameScore(BaseModel):
    frame: int
    score: float


class DetectResponse(BaseModel):
    clip_id: str
    scores: list[FrameScore]
    speaking_frames: int
    timestamp: str


class EnhanceRequest(BaseModel):
    clip_id: str = Field(..., min_length=1)
    out_path: str = Field(..., min_length=1)


class EnhanceResponse(BaseModel):
    clip_id: str
    out_path: str
    num_samples: int
    duration_s: float
    timestamp: str


def create_app(ckpt_path: str | Path, data_dir: str | Path, split: str = "test") -> FastAPI:
    """Load the checkpoint and manifest once and expose them over HTTP"""
    ckpt = load_checkpoint(ckpt_path)
    model = model_from_checkpoint(ckpt)
    manifest = read_manifest(data_dir, split)
    logger.info("service_ready", checkpoint=str(ckpt_path), split=split, clips=len(manifest))

    app = FastAPI(title="ADENet", version=__version__)

    @app.exception_handler(AdenetError)
    async def adenet_error(request: Request, exc: AdenetError) -> JSONResponse:
        logger.warning("request_failed", path=request.url.path, error=type(exc).__name__, detail=str(exc))
        return JSONResponse(status_code=400, content={"detail": str(exc), "error": type(exc).__name__})

    @app.exception_handler(UnknownClipError)
    async def unknown_clip(request: Request, exc: UnknownClipError) -> JSONResponse:
        logger.warning("clip_not_found", path=request.url.path, detail=str(exc))
        return JSONResponse(status_code=404, content={"detail": str(exc), "error": type(exc).__name__})

    @app.get("/health")
    async def health() -> dict[str, object]:
        return {
            "status": "healthy",
            "service": "adenet",
            "variant": ckpt.config.model.variant,
            "epoch": ckpt.epoch,
            "clips": len(manifest),
            "timestamp": datetime.now().isoformat(),
        }

    @app.post("/api/v1/detect", response_model=DetectResponse)
    def detect(request: DetectRequest) -> DetectResponse:
        scores = detect_clip(model, manifest, request.clip_id)
        return DetectResponse(
            clip_id=request.clip_id,
            scores=[FrameScore(frame=t, score=float(s)) for t, s in enumerate(scores)],
            speaking_frames=int((scores >= 0.5).sum()),
            timestamp=datetime.now().isoformat(),
        )

    @app.post("/api/v1/enhance", response_model=EnhanceResponse)
    def enhance(request: EnhanceRequest) -> EnhanceResponse:
        wave = enhance_clip(model, manifest, request.clip_id, request.out_path)
        return EnhanceResponse(
            clip_id=request.clip_id,
            out_path=request.out_path,
            num_samples=len(wave),
            duration_s=wave.duration_s,
            timestamp=datetime.now().isoformat(),
        )

    return app


def serve(ckpt_path: str | Path, data_dir: str | Path, split: str = "test", host: str = "127.0.0.1", port: int = 8004) -> None:
    uvicorn.run(create_app(ckpt_path, data_dir, split), host=host, port=port)
