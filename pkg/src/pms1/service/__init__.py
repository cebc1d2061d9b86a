"""HTTP service layer: pydantic schemas and the FastAPI application."""

from .app import ROUTES, create_app

__all__ = ["ROUTES", "create_app"]
