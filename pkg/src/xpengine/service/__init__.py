"""HTTP service over the engine."""

from .api import create_app
from .engine import EngineService, PromptBroker

__all__ = ["EngineService", "PromptBroker", "create_app"]
