"""Topology parser for a documented subset of the prototxt text format.

Grammar (see docs/format-topology.md)::

    message := field*
    field   := IDENT ':' scalar | IDENT ':'? '{' message '}'
    scalar  := NUMBER | STRING | IDENT

``#`` starts a comment that runs to the end of the line.
"""

import re
from dataclasses import dataclass

from src.logger import setup_logger
from .base import (
    Activation,
    ActivationFn,
    CnnModel,
    Conv,
    FullyConnected,
    LayerSpec,
    ModelError,
    Pool,
    PoolMode,
    TopologySyntaxError,
)
from .validate import Diagnostic, Severity, has_errors, validate_model

logger = setup_logger()

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<newline>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*"|'(?:[^'\\\n]|\\.)*')
  | (?P<number>[-+]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][-+]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_.]*)
  | (?P<punct>[:{}])
    """,
    re.VERBOSE,
)

# Keys that real deploy files carry but that do not affect the mapping.
_SILENT_KEYS = {"bottom", "top", "param", "weight_filler", "bias_filler", "include", "phase"}

_ACTIVATION_TYPES = {"ReLU": ActivationFn.RELU, "TanH": ActivationFn.TANH}
_POOL_MODES = {"MAX": PoolMode.MAX, "AVE": PoolMode.AVG}


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int
    column: int


@dataclass
class _Field:
    key: str
    value: object  # str scalar or list[_Field]
    line: int
    column: int


def _tokenize(source_text: str) -> list[_Token]:
    tokens = []
    line, line_start, pos = 1, 0, 0
    while pos < len(source_text):
        match = _TOKEN_RE.match(source_text, pos)
        column = pos - line_start + 1
        if match is None:
            raise TopologySyntaxError(f"unexpected character {source_text[pos]!r}", line, column)
        kind = match.lastgroup
        if kind == "newline":
            line += 1
            line_start = match.end()
        elif kind not in ("ws", "comment"):
            tokens.append(_Token(kind, match.group(), line, column))
        pos = match.end()
    tokens.append(_Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def take(self) -> _Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def expect_punct(self, text: str) -> _Token:
        token = self.take()
        if token.kind != "punct" or token.text != text:
            shown = token.text or "end of file"
            raise TopologySyntaxError(f"expected '{text}', found '{shown}'", token.line, token.column)
        return token

    def message(self, closing: bool) -> list[_Field]:
        fields = []
        while True:
            token = self.peek()
            if token.kind == "eof":
                if closing:
                    raise TopologySyntaxError("unterminated block, expected '}'", token.line, token.column)
                return fields
            if token.kind == "punct" and token.text == "}":
                if not closing:
                    raise TopologySyntaxError("unbalanced '}'", token.line, token.column)
                self.take()
                return fields
            fields.append(self.field())

    def field(self) -> _Field:
        key = self.take()
        if key.kind != "ident":
            shown = key.text or "end of file"
            raise TopologySyntaxError(f"expected a field name, found '{shown}'", key.line, key.column)
        token = self.peek()
        if token.kind == "punct" and token.text == ":":
            self.take()
            token = self.peek()
        elif not (token.kind == "punct" and token.text == "{"):
            raise TopologySyntaxError(f"expected ':' or '{{' after '{key.text}'", token.line, token.column)
        if token.kind == "punct" and token.text == "{":
            self.take()
            return _Field(key.text, self.message(closing=True), key.line, key.column)
        value = self.take()
        if value.kind not in ("number", "string", "ident"):
            shown = value.text or "end of file"
            raise TopologySyntaxError(f"expected a value for '{key.text}', found '{shown}'", value.line, value.column)
        text = value.text[1:-1] if value.kind == "string" else value.text
        return _Field(key.text, text, key.line, key.column)


def _as_int(item: _Field) -> int:
    if not isinstance(item.value, str) or not re.fullmatch(r"[-+]?\d+", item.value):
        raise TopologySyntaxError(f"'{item.key}' expects an integer, got {item.value!r}", item.line, item.column)
    return int(item.value)


def _as_bool(item: _Field) -> bool:
    if item.value not in ("true", "false"):
        raise TopologySyntaxError(f"'{item.key}' expects true or false, got {item.value!r}", item.line, item.column)
    return item.value == "true"


def _as_str(item: _Field) -> str:
    if not isinstance(item.value, str):
        raise TopologySyntaxError(f"'{item.key}' expects a scalar value", item.line, item.column)
    return item.value


def _as_block(item: _Field) -> list[_Field]:
    if not isinstance(item.value, list):
        raise TopologySyntaxError(f"'{item.key}' expects a {{ }} block", item.line, item.column)
    return item.value


class _Interpreter:
    """Turns the generic field tree into layer specs."""

    def __init__(self, diagnostics: list[Diagnostic] | None):
        self.diagnostics = diagnostics

    def ignore(self, layer: str, item: _Field) -> None:
        if item.key in _SILENT_KEYS:
            return
        message = f"ignoring unrecognized key '{item.key}' (line {item.line})"
        logger.warning(f"{layer or 'network'}: {message}")
        if self.diagnostics is not None:
            self.diagnostics.append(Diagnostic(Severity.WARNING, layer, message))

    def shape(self, items: list[_Field], layer: str) -> tuple[int, int, int]:
        dims = []
        for item in items:
            if item.key == "dim":
                dims.append(_as_int(item))
            else:
                self.ignore(layer, item)
        return _input_dims(dims, items[0] if items else None)

    def params(self, layer: str, block: list[_Field], known: set[str]) -> dict[str, _Field]:
        found = {}
        for item in block:
            if item.key in known:
                if item.key in found:
                    raise TopologySyntaxError(f"repeated key '{item.key}'", item.line, item.column)
                found[item.key] = item
            elif item.key in ("kernel_h", "kernel_w", "stride_h", "stride_w", "pad_h", "pad_w"):
                raise ModelError(f"layer '{layer}': non-square '{item.key}' is not supported")
            elif item.key in ("group", "dilation"):
                raise ModelError(f"layer '{layer}': '{item.key}' is not supported")
            else:
                self.ignore(layer, item)
        return found

    def layer(self, block: list[_Field], channels: int, anchor: _Field) -> LayerSpec | tuple:
        name = layer_type = None
        param_blocks = {}
        for item in block:
            if item.key == "name":
                name = _as_str(item)
            elif item.key == "type":
                layer_type = _as_str(item)
            elif item.key.endswith("_param"):
                param_blocks[item.key] = item
            else:
                self.ignore(name or "", item)
        if name is None:
            raise TopologySyntaxError("layer without a name", anchor.line, anchor.column)
        if layer_type is None:
            raise TopologySyntaxError(f"layer '{name}' without a type", anchor.line, anchor.column)

        def block_of(key: str) -> list[_Field]:
            return _as_block(param_blocks.pop(key)) if key in param_blocks else []

        if layer_type == "Input":
            shape_fields = []
            for item in block_of("input_param"):
                if item.key == "shape":
                    shape_fields = _as_block(item)
                else:
                    self.ignore(name, item)
            result = ("input", self.shape(shape_fields, name))
        elif layer_type == "Convolution":
            found = self.params(name, block_of("convolution_param"),
                                {"num_output", "kernel_size", "stride", "pad", "bias_term"})
            for required in ("num_output", "kernel_size"):
                if required not in found:
                    raise ModelError(f"layer '{name}': convolution_param lacks '{required}'")
            result = LayerSpec(name, Conv(
                num_output=_as_int(found["num_output"]),
                channels=channels,
                kernel=_as_int(found["kernel_size"]),
                stride=_as_int(found["stride"]) if "stride" in found else 1,
                pad=_as_int(found["pad"]) if "pad" in found else 0,
                bias=_as_bool(found["bias_term"]) if "bias_term" in found else True,
            ))
        elif layer_type == "Pooling":
            found = self.params(name, block_of("pooling_param"), {"pool", "kernel_size", "stride", "pad"})
            if "kernel_size" not in found:
                raise ModelError(f"layer '{name}': pooling_param lacks 'kernel_size'")
            if "pad" in found and _as_int(found["pad"]) != 0:
                raise ModelError(f"layer '{name}': padded pooling is not supported")
            mode_text = _as_str(found["pool"]) if "pool" in found else "MAX"
            if mode_text not in _POOL_MODES:
                raise ModelError(f"layer '{name}': unsupported pooling mode '{mode_text}'")
            kernel = _as_int(found["kernel_size"])
            result = LayerSpec(name, Pool(
                kernel=kernel,
                stride=_as_int(found["stride"]) if "stride" in found else kernel,
                mode=_POOL_MODES[mode_text],
            ))
        elif layer_type in _ACTIVATION_TYPES:
            result = LayerSpec(name, Activation(_ACTIVATION_TYPES[layer_type]))
        elif layer_type == "InnerProduct":
            found = self.params(name, block_of("inner_product_param"), {"num_output", "bias_term"})
            if "num_output" not in found:
                raise ModelError(f"layer '{name}': inner_product_param lacks 'num_output'")
            result = LayerSpec(name, FullyConnected(
                num_output=_as_int(found["num_output"]),
                channels=channels,
                bias=_as_bool(found["bias_term"]) if "bias_term" in found else True,
            ))
        else:
            raise ModelError(f"layer '{name}': unsupported layer kind '{layer_type}'")

        for leftover in param_blocks.values():
            self.ignore(name, leftover)
        return result


def _input_dims(dims: list[int], anchor: _Field | None) -> tuple[int, int, int]:
    line, column = (anchor.line, anchor.column) if anchor else (1, 1)
    if len(dims) == 4:
        if dims[0] != 1:
            raise TopologySyntaxError(f"batch dimension must be 1, got {dims[0]}", line, column)
        dims = dims[1:]
    if len(dims) != 3 or min(dims) < 1:
        raise TopologySyntaxError(f"input needs three positive dims (C, H, W), got {dims}", line, column)
    return dims[0], dims[1], dims[2]


def parse_topology(source_text: str, diagnostics: list[Diagnostic] | None = None) -> CnnModel:
    """Parse topology text into a shape-checked, weightless CnnModel.

    Args:
        source_text: Topology file contents
        diagnostics: Optional list that receives warning diagnostics
            (unrecognized keys)

    Returns:
        CnnModel with layers in file order

    Raises:
        TopologySyntaxError: malformed text, with line/column
        ModelError: empty network, shape mismatch, duplicate name,
            unsupported layer kind
    """
    fields = _Parser(_tokenize(source_text)).message(closing=False)
    interpreter = _Interpreter(diagnostics)

    name = "network"
    input_shape = None
    input_dims: list[int] = []
    layers: list[LayerSpec] = []
    channels = 0

    for item in fields:
        if item.key == "name":
            name = _as_str(item)
        elif item.key == "input":
            _as_str(item)
        elif item.key == "input_dim":
            input_dims.append(_as_int(item))
            if len(input_dims) == 4:
                input_shape = _input_dims(input_dims, item)
                channels = input_shape[0]
        elif item.key == "input_shape":
            input_shape = interpreter.shape(_as_block(item), "")
            channels = input_shape[0]
        elif item.key == "layer":
            if input_shape is None and not _declares_input(item):
                raise TopologySyntaxError("layer declared before the network input", item.line, item.column)
            result = interpreter.layer(_as_block(item), channels, item)
            if isinstance(result, tuple):
                if input_shape is not None:
                    raise TopologySyntaxError("network input declared twice", item.line, item.column)
                input_shape = result[1]
                channels = input_shape[0]
                continue
            layers.append(result)
            if isinstance(result.kind, (Conv, FullyConnected)):
                channels = result.kind.num_output
        else:
            interpreter.ignore("", item)

    if input_shape is None:
        raise ModelError("topology declares no network input")
    if not layers:
        raise ModelError("empty network")

    model = CnnModel(name=name, input_shape=input_shape, layers=tuple(layers))
    problems = validate_model(model)
    if has_errors(problems):
        raise ModelError("; ".join(str(p) for p in problems if p.severity is Severity.ERROR))
    return model


def _declares_input(item: _Field) -> bool:
    return isinstance(item.value, list) and any(
        sub.key == "type" and sub.value == "Input" for sub in item.value
    )


def serialize_topology(model: CnnModel) -> str:
    """Render a model in the same subset parse_topology accepts."""
    channels, height, width = model.input_shape
    lines = [
        f'name: "{model.name}"',
        'input: "data"',
        f"input_shape {{ dim: 1 dim: {channels} dim: {height} dim: {width} }}",
    ]
    for spec in model.layers:
        kind = spec.kind
        lines.append("layer {")
        lines.append(f'  name: "{spec.name}"')
        if isinstance(kind, Conv):
            lines += [
                '  type: "Convolution"',
                "  convolution_param {",
                f"    num_output: {kind.num_output}",
                f"    kernel_size: {kind.kernel}",
                f"    stride: {kind.stride}",
                f"    pad: {kind.pad}",
                f"    bias_term: {str(kind.bias).lower()}",
                "  }",
            ]
        elif isinstance(kind, Pool):
            mode = "MAX" if kind.mode is PoolMode.MAX else "AVE"
            lines += [
                '  type: "Pooling"',
                "  pooling_param {",
                f"    pool: {mode}",
                f"    kernel_size: {kind.kernel}",
                f"    stride: {kind.stride}",
                "  }",
            ]
        elif isinstance(kind, Activation):
            layer_type = {v: k for k, v in _ACTIVATION_TYPES.items()}[kind.fn]
            lines.append(f'  type: "{layer_type}"')
        elif isinstance(kind, FullyConnected):
            lines += [
                '  type: "InnerProduct"',
                "  inner_product_param {",
                f"    num_output: {kind.num_output}",
                f"    bias_term: {str(kind.bias).lower()}",
                "  }",
            ]
        lines.append("}")
    return "\n".join(lines) + "\n"
