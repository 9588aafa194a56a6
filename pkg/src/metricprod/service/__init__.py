"""HTTP service front end: request/response models, handlers, app factory."""
from .app import create_app

__all__ = ["create_app"]
