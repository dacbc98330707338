from .app import create_app, create_app_from_config, parse_stream
from .config import ServiceConfig
from .state import AppState

__all__ = ["create_app", "create_app_from_config", "parse_stream", "ServiceConfig", "AppState"]
