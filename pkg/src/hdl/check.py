"""Lightweight syntactic checks of generated VHDL and a params reader.

This is not a VHDL parser: it verifies balanced parentheses, matched
design-unit and statement blocks, and that every ``entity work.X``
instantiation names a known entity.
"""

import re
from pathlib import Path

from .base import EmissionError
from .emitter import LIBRARY_DIR, from_bits

_COMMENT_RE = re.compile(r"--[^\n]*")
_STRING_RE = re.compile(r'"[^"\n]*"')
_CHAR_RE = re.compile(r"'.'")


def library_entities() -> set[str]:
    names = set()
    for path in LIBRARY_DIR.glob("*.vhd"):
        names |= set(re.findall(r"\bentity\s+(\w+)\s+is\b", path.read_text(encoding="utf-8"), re.I))
    return {name.lower() for name in names}


def _strip(text: str) -> str:
    text = _COMMENT_RE.sub("", text)
    text = _STRING_RE.sub('""', text)
    text = _CHAR_RE.sub("''", text)
    return " ".join(text.lower().split())


def _count(pattern: str, text: str) -> int:
    return len(re.findall(pattern, text))


def check_vhdl(text: str, known_entities: set[str] | None = None) -> list[str]:
    """Return a list of problems; an empty list means the text passed.

    Args:
        text: VHDL source
        known_entities: Entities defined elsewhere (default: the leaf library)
    """
    known = library_entities() if known_entities is None else {n.lower() for n in known_entities}
    code = _strip(text)
    problems = []

    depth = 0
    for position, char in enumerate(code):
        if char == "(":
            depth += 1
        elif char == ")":
            depth -= 1
            if depth < 0:
                problems.append(f"unbalanced ')' near: {code[max(0, position - 40):position + 1]!r}")
                depth = 0
    if depth:
        problems.append(f"{depth} unclosed '('")

    entities = re.findall(r"\bentity (\w+) is\b", code)
    for name in entities:
        if not re.search(rf"\bend( entity)?( {name})? ;|\bend( entity)?( {name})?;", code):
            problems.append(f"entity '{name}' is never closed")
    for name, of in re.findall(r"\barchitecture (\w+) of (\w+) is\b", code):
        if of not in entities and of not in known:
            problems.append(f"architecture '{name}' of undeclared entity '{of}'")
    opened = _count(r"\barchitecture \w+ of \w+ is\b", code)
    closed = _count(r"\bend architecture\b", code)
    if opened != closed:
        problems.append(f"{opened} architecture(s) opened, {closed} closed with 'end architecture'")

    packages = re.findall(r"\bpackage (?!body\b)(\w+) is\b", code)
    for name in packages:
        if not re.search(rf"\bend package {name} ?;", code):
            problems.append(f"package '{name}' is never closed")
    for name in re.findall(r"\bpackage body (\w+) is\b", code):
        if not re.search(rf"\bend package body {name} ?;", code):
            problems.append(f"package body '{name}' is never closed")

    blocks = {
        "process": (r"(?<!end )\bprocess\b", r"\bend process\b"),
        "loop": (r"(?<!end )\bloop\b", r"\bend loop\b"),
        "generate": (r"(?<!end )\bgenerate\b", r"\bend generate\b"),
        "if": (r"(?<!end )(?<!\w)if\b[^;]*?\bthen\b", r"\bend if\b"),
        "function": (r"\breturn \w+ is\b", r"\bend function\b"),
    }
    for block, (open_re, close_re) in blocks.items():
        opened, closed = _count(open_re, code), _count(close_re, code)
        if opened != closed:
            problems.append(f"{opened} '{block}' block(s) opened, {closed} closed")

    for name in re.findall(r"\bentity work\.(\w+)", code):
        if name not in entities and name not in known:
            problems.append(f"instantiation of unknown entity 'work.{name}'")

    return problems


def check_library() -> dict[str, list[str]]:
    """check_vhdl over every leaf library file."""
    known = library_entities()
    return {path.name: check_vhdl(path.read_text(encoding="utf-8"), known)
            for path in sorted(LIBRARY_DIR.glob("*.vhd"))}


_WORD_ARRAY_RE = re.compile(
    r"constant\s+(\w+)\s*:\s*word_array\s*\(\s*0\s+to\s+(\d+)\s*\)\s*:=\s*\((.*?)\)\s*;", re.S | re.I
)
_INT_ARRAY_RE = re.compile(
    r"constant\s+(\w+)\s*:\s*integer_array\s*\(\s*0\s+to\s+(\d+)\s*\)\s*:=\s*\((.*?)\)\s*;", re.S | re.I
)
_INT_RE = re.compile(r"constant\s+(\w+)\s*:\s*integer\s*:=\s*(-?\d+)\s*;", re.I)


def _elements(body: str) -> list[str]:
    body = _COMMENT_RE.sub("", body)
    named = re.fullmatch(r"\s*0\s*=>\s*(.+?)\s*", body, re.S)
    if named:
        return [named.group(1)]
    return [item.strip() for item in body.split(",") if item.strip()]


def parse_params(text: str) -> dict[str, int | list[int]]:
    """Read integer constants and arrays of a params package back.

    Word arrays are decoded as two's complement.

    Raises:
        EmissionError: an array whose length disagrees with its range
    """
    values: dict[str, int | list[int]] = {}
    for name, value in _INT_RE.findall(text):
        values[name] = int(value)
    for name, last, body in _WORD_ARRAY_RE.findall(text):
        values[name] = [from_bits(item.strip('"')) for item in _elements(body)]
        if len(values[name]) != int(last) + 1:
            raise EmissionError(f"{name}: range has {int(last) + 1} elements, aggregate {len(values[name])}")
    for name, last, body in _INT_ARRAY_RE.findall(text):
        values[name] = [int(item) for item in _elements(body)]
        if len(values[name]) != int(last) + 1:
            raise EmissionError(f"{name}: range has {int(last) + 1} elements, aggregate {len(values[name])}")
    return values


def read_params_file(path: str | Path) -> dict[str, int | list[int]]:
    return parse_params(Path(path).read_text(encoding="utf-8"))
