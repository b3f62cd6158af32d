"""Channel FSI Lab"""

from .main import cli
__all__ = ["cli"]
