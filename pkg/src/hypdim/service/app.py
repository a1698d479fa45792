"""HTTP surface: FastAPI routes delegating to the shared handlers.

POST bodies are RunConfig documents; config errors map to 400,
numeric pipeline failures to 422.
"""

from __future__ import annotations

from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..config import RunConfig
from ..errors import ConfigError, HypdimError
from . import handlers, models


def create_app() -> FastAPI:
    app = FastAPI(
        title="hypdim",
        version=__version__,
        description=(
            "Lower bounds for the hyperbolic dimension of meromorphic Julia "
            "sets: pole-based conformal IFS, critical-exponent estimation, "
            "closed-form bound verdicts, and escape renders."
        ),
    )

    @app.exception_handler(ConfigError)
    async def _config_error(request: Request, exc: ConfigError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(HypdimError)
    async def _pipeline_error(request: Request, exc: HypdimError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.get("/health", response_model=models.Health)
    def health() -> models.Health:
        return handlers.health()

    @app.get("/corollaries", response_model=models.CorollaryTable)
    def corollaries() -> models.CorollaryTable:
        return handlers.corollaries()

    @app.post("/bound", response_model=models.BoundResponse)
    def bound(
        config: RunConfig, table_only: bool = Query(default=False)
    ) -> models.BoundResponse:
        return handlers.bound(config, table_only=table_only)

    @app.post("/theta", response_model=models.ThetaResponse)
    def theta(config: RunConfig) -> models.ThetaResponse:
        return handlers.theta(config)

    @app.post("/preimages", response_model=models.PreimagesResponse)
    def preimages(config: RunConfig) -> models.PreimagesResponse:
        return handlers.preimages(config)

    @app.post("/render", response_model=models.RenderResponse)
    def render_frame(
        config: RunConfig, include_image: bool = Query(default=False)
    ) -> models.RenderResponse:
        return handlers.render_frame(config, include_image=include_image)

    @app.post("/report", response_model=models.ReportResponse)
    def report(config: RunConfig) -> models.ReportResponse:
        return handlers.report(config)

    return app


app = create_app()
