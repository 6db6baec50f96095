"""Graph-stage exceptions."""

from src.errors import CnnDhmError


class GraphError(CnnDhmError):
    """Raised when an actor graph is malformed (arity, dangling channel, cycle)."""


class UnsupportedLayerError(GraphError):
    """Raised for layers that have no hardware mapping (fully connected)."""
