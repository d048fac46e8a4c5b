"""Embedding sidecar: /embed, /health, /project plus a batch EMB1 exporter."""

from .app import create_app
from .config import ServiceConfig
from .encoder import Encoder, EncoderNotLoaded, SentenceTransformerEncoder

__version__ = "0.1.0"

__all__ = [
    "Encoder",
    "EncoderNotLoaded",
    "SentenceTransformerEncoder",
    "ServiceConfig",
    "create_app",
    "__version__",
]
