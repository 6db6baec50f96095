"""Simulation exceptions."""

from src.errors import CnnDhmError


class SimulationError(CnnDhmError):
    """Raised when a stream does not fit the graph or firing counts disagree."""


class DeadlockError(SimulationError):
    """Raised when tokens are pending but no actor can fire."""

    def __init__(self, actor: str, message: str):
        super().__init__(f"deadlock at actor '{actor}': {message}")
        self.actor = actor
