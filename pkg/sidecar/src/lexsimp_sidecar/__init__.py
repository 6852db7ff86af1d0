"""HTTP inference service implementing the lexsimp provider wire protocol."""

from lexsimp_sidecar.config import ServiceConfig
from lexsimp_sidecar.service import create_app, serve

__version__ = "0.1.0"
