"""Structural VHDL emission from a specialized actor graph."""

from .base import EmissionError, HdlDesign, ManifestEntry
from .check import check_library, check_vhdl, library_entities, parse_params, read_params_file
from .emitter import (
    LIBRARY_DIR,
    build_manifest,
    design_files,
    design_name,
    emit_design,
    emit_params,
    emit_project,
    emit_toplevel,
    from_bits,
    manifest_document,
    to_bits,
    vhdl_identifier,
)

__all__ = [
    "EmissionError",
    "HdlDesign",
    "LIBRARY_DIR",
    "ManifestEntry",
    "build_manifest",
    "check_library",
    "check_vhdl",
    "design_files",
    "design_name",
    "emit_design",
    "emit_params",
    "emit_project",
    "emit_toplevel",
    "from_bits",
    "library_entities",
    "manifest_document",
    "parse_params",
    "read_params_file",
    "to_bits",
    "vhdl_identifier",
]
