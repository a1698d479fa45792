"""Service layer: typed handlers shared by the HTTP app and the CLI."""

from .app import app, create_app
from .handlers import bound, corollaries, health, preimages, render_frame, report, theta

__all__ = [
    "app",
    "bound",
    "corollaries",
    "create_app",
    "health",
    "preimages",
    "render_frame",
    "report",
    "theta",
]
