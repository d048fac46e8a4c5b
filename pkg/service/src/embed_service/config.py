"""Service configuration."""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional

DEFAULT_MODEL = "sentence-transformers/all-mpnet-base-v2"
DEFAULT_DIM = 768

# Model weights cache; falls back to the sentence-transformers default.
CACHE_ENV_VAR = "EMBED_SERVICE_CACHE"


@dataclass(frozen=True)
class ServiceConfig:
    """Model identity and serving limits.

    ``dim`` is the advertised output dimension; the encoder refuses to load
    a model whose real output dimension differs.
    """

    model_name: str = DEFAULT_MODEL
    revision: Optional[str] = None
    dim: int = DEFAULT_DIM
    port: int = 8300
    max_batch_size: int = 512
    normalize: bool = True

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError(f"dim must be positive, got {self.dim}")
        if self.max_batch_size < 1:
            raise ValueError(f"max_batch_size must be positive, got {self.max_batch_size}")

    @property
    def cache_dir(self) -> Optional[str]:
        return os.environ.get(CACHE_ENV_VAR)

    def provider_tag(self) -> str:
        pin = self.model_name if self.revision is None else f"{self.model_name}@{self.revision}"
        return f"{pin}:dim={self.dim}:norm={int(self.normalize)}"
