"""HDL emission types and exceptions."""

from dataclasses import dataclass, field

from src.errors import CnnDhmError


class EmissionError(CnnDhmError):
    """Raised when a graph cannot be emitted or output files cannot be written."""


@dataclass
class ManifestEntry:
    """One library entity (or signal-level construct) and its instances.

    ``bindings`` lists each distinct generic binding with its instance count.
    """

    entity: str
    instances: int = 0
    kind: str = "entity"
    bindings: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"entity": self.entity, "kind": self.kind, "instances": self.instances, "bindings": self.bindings}


@dataclass
class HdlDesign:
    name: str
    toplevel_source: str
    params_source: str
    manifest: list[ManifestEntry]

    def instance_counts(self) -> dict[str, int]:
        return {entry.entity: entry.instances for entry in self.manifest}
