"""A workbench for Syntactic Control of Interference and its trace semantics."""

from .events import Bounds
from .syntax import parse, pretty

__all__ = ["Bounds", "parse", "pretty"]
__version__ = "0.1.0"
