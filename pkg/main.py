# main.py
import asyncio
import base64
import binascii
import hashlib
import logging
from typing import Optional

from fastapi import FastAPI, HTTPException, Request
from fastapi.encoders import jsonable_encoder
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from config.settings import RunConfig, load_settings
from engine.phish_engine import build_engine
from models.errors import CassetteMissError, GatewayUnavailableError, PreconditionError, ToolUnavailableError
from models.records import validate_sample


# Define Pydantic Models for Request

class AnalyzeRequest(BaseModel):
    id: Optional[str] = None
    url: str
    html: str = ""
    screenshot: Optional[str] = None  # base64
    logo: Optional[str] = None  # base64


def _decode_image(field: str, value: Optional[str]) -> Optional[bytes]:
    if value is None:
        return None
    try:
        return base64.b64decode(value, validate=True)
    except (binascii.Error, ValueError) as e:
        raise HTTPException(status_code=400, detail=f"{field} is not valid base64: {e}")


def _default_id(url: str) -> str:
    return "req-" + hashlib.sha256(url.encode("utf-8")).hexdigest()[:12]


def create_app(config: Optional[RunConfig] = None) -> FastAPI:
    """Build the service; refuses to start when the configured mode cannot run (e.g. live without credentials)."""
    config = config or load_settings()
    engine = build_engine(config)
    semaphore = asyncio.Semaphore(config.concurrency)

    app = FastAPI(title="GEPAgent phishing detection")

    @app.exception_handler(RequestValidationError)
    async def invalid_payload(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": jsonable_encoder(exc.errors())})

    # Define API Endpoints

    @app.post("/analyze", response_model=dict)
    async def analyze(request: AnalyzeRequest):
        try:
            sample = validate_sample({
                "id": request.id or _default_id(request.url),
                "url": request.url,
                "html": request.html,
                "screenshot": _decode_image("screenshot", request.screenshot),
                "logo_crop": _decode_image("logo", request.logo),
            })
        except ValueError as e:
            raise HTTPException(status_code=400, detail=str(e))

        async with semaphore:
            try:
                result = await engine.analyze(sample)
            except (ToolUnavailableError, GatewayUnavailableError, CassetteMissError) as e:
                logging.error(f"Error in /analyze for {sample.id}: {e}")
                raise HTTPException(status_code=503, detail=str(e))
            except PreconditionError as e:
                raise HTTPException(status_code=400, detail=str(e))
            except Exception as e:
                logging.error(f"Unexpected error in /analyze for {sample.id}: {e!r}")
                raise HTTPException(status_code=500, detail="internal error")
        return result.summary()

    @app.get("/healthz", response_model=dict)
    async def healthz():
        return {"status": "ok", **engine.clients.status()}

    return app


if __name__ == "__main__":
    import sys

    from cli import main

    sys.exit(main(["serve", *sys.argv[1:]]))
