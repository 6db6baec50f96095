"""Network-level resource, memory and throughput estimates."""

import json
from dataclasses import asdict, dataclass, field, replace

from src.graph.actor_graph import ActorGraph
from src.graph.actors import (
    ActivationUnit,
    AdderTree,
    Constant,
    Mult,
    NeighborhoodExtractor,
    NeuronSum,
    PoolUnit,
    Shift,
)
from src.graph.census import MemoryMode, buffer_words
from src.logger import setup_logger
from src.model.base import CnnModel, Conv, Pool
from src.model.validate import layer_shapes
from src.quant.quantizer import QuantizedModel
from src.specialize.stats import count_classes
from .cost_model import Calibration, EstimateError, load_calibration

logger = setup_logger()

_CLASS_KEYS = ("zero", "one", "pow2", "generic")


def layer_ops(model: CnnModel) -> dict[str, float]:
    """Operations per input pixel, per layer.

    A conv layer counts N*C*K*K multiply-accumulates plus one bias and one
    activation per neuron; a pooling layer counts K*K-1 comparisons per
    channel. Every layer is counted at the input pixel rate.
    """
    ops = {}
    channels = model.input_shape[0]
    for spec in model.layers:
        kind = spec.kind
        if isinstance(kind, Conv):
            ops[spec.name] = float(kind.num_output * kind.channels * kind.kernel ** 2 + 2 * kind.num_output)
            channels = kind.num_output
        elif isinstance(kind, Pool):
            ops[spec.name] = float(channels * (kind.kernel ** 2 - 1))
        else:
            ops[spec.name] = 0.0
            if hasattr(kind, "num_output"):
                channels = kind.num_output
    return ops


def ops_per_pixel(model: CnnModel) -> float:
    return sum(layer_ops(model).values())


def throughput_gops(ops: float, fmax_hz: float) -> float:
    """ops/pixel at one pixel per clock, in GOPs/s."""
    if fmax_hz < 0:
        raise EstimateError(f"fmax must be >= 0, got {fmax_hz}")
    return ops * fmax_hz / 1e9


def throughput(model: CnnModel, fmax_hz: float) -> float:
    return throughput_gops(ops_per_pixel(model), fmax_hz)


@dataclass
class LayerResources:
    logic_elements: float = 0.0
    buffer_bits: int = 0
    window_buffer_bits: int = 0
    multipliers: dict[str, int] = field(default_factory=lambda: dict.fromkeys(_CLASS_KEYS, 0))
    remaining_multipliers: int = 0
    dsp_blocks: float = 0.0
    ops_per_pixel: float = 0.0
    throughput_gops: float = 0.0

    def add(self, other: "LayerResources") -> None:
        self.logic_elements += other.logic_elements
        self.buffer_bits += other.buffer_bits
        self.window_buffer_bits += other.window_buffer_bits
        for key in _CLASS_KEYS:
            self.multipliers[key] += other.multipliers[key]
        self.remaining_multipliers += other.remaining_multipliers
        self.dsp_blocks += other.dsp_blocks
        self.ops_per_pixel += other.ops_per_pixel
        self.throughput_gops += other.throughput_gops


@dataclass
class ResourceReport:
    name: str
    bits: int
    fmax_hz: float
    specialized: bool
    layers: dict[str, LayerResources] = field(default_factory=dict)
    total: LayerResources = field(default_factory=LayerResources)

    def to_dict(self) -> dict:
        return asdict(self)


def report_to_json(report: ResourceReport) -> str:
    return json.dumps(report.to_dict(), indent=2)


def report_from_json(text: str) -> ResourceReport:
    """Inverse of report_to_json.

    Raises:
        EstimateError: text is not a report document
    """
    try:
        data = json.loads(text)
        return ResourceReport(
            name=data["name"],
            bits=int(data["bits"]),
            fmax_hz=float(data["fmax_hz"]),
            specialized=bool(data["specialized"]),
            layers={name: LayerResources(**layer) for name, layer in data["layers"].items()},
            total=LayerResources(**data["total"]),
        )
    except (ValueError, KeyError, TypeError) as e:
        raise EstimateError(f"not a resource report: {e}") from e


def estimate_network(
    qm: QuantizedModel,
    graph: ActorGraph,
    image_width: int | None = None,
    fmax_hz: float = 0.0,
    calibration: Calibration | None = None,
) -> ResourceReport:
    """Aggregate entity costs, buffer memory and throughput into one report.

    Args:
        qm: Quantized model the graph was built from
        graph: Actor graph, specialized or not; unspecialized Mult actors
            are costed as variable multipliers
        image_width: Frame width to size line buffers for (default: the
            model's input width)
        fmax_hz: Clock frequency for the throughput column (0 = unknown)
        calibration: Coefficients (default: the configured file)

    Returns:
        ResourceReport whose total is the sum of its layers
    """
    cal = calibration or load_calibration()
    bits = qm.total_bits
    model = qm.model
    if image_width is not None:
        if image_width < 1:
            raise EstimateError(f"image width must be >= 1, got {image_width}")
        channels, height, _ = model.input_shape
        model = replace(model, input_shape=(channels, height, image_width))
    shapes = layer_shapes(model)
    ops = layer_ops(model)

    report = ResourceReport(name=graph.name, bits=bits, fmax_hz=fmax_hz, specialized=graph.specialized)
    for layer in graph.layers:
        report.layers[layer] = LayerResources(
            ops_per_pixel=ops[layer],
            throughput_gops=throughput_gops(ops[layer], fmax_hz),
        )
        spec = model.layer(layer)
        if isinstance(spec.kind, Conv):
            classes = count_classes(qm.int_weights[layer])
            report.layers[layer].multipliers = {key: getattr(classes, key) for key in _CLASS_KEYS}

    for actor in graph.actors:
        layer = report.layers.get(actor.layer)
        if layer is None:
            continue
        if isinstance(actor, Mult):
            layer.logic_elements += cal.generic_mult(bits)
            layer.remaining_multipliers += 1
            layer.dsp_blocks += cal.dsp_per_multiplier
        elif isinstance(actor, Shift):
            layer.logic_elements += cal.shift(bits)
        elif isinstance(actor, AdderTree):
            layer.logic_elements += cal.adder_tree(actor.arity, bits)
        elif isinstance(actor, Constant):
            layer.logic_elements += cal.adder_tree(0, bits)
        elif isinstance(actor, NeuronSum):
            layer.logic_elements += cal.neuron_sum(actor.arity, bits)
        elif isinstance(actor, ActivationUnit):
            layer.logic_elements += cal.activation(actor.fn, bits)
        elif isinstance(actor, NeighborhoodExtractor):
            layer.logic_elements += cal.extractor(actor.kernel, bits)
            width = shapes[actor.layer][0][2] + 2 * actor.pad
            layer.buffer_bits += buffer_words(actor.kernel, width, MemoryMode.ARCHITECTURAL) * bits
            layer.window_buffer_bits += buffer_words(actor.kernel, width, MemoryMode.WINDOW_ONLY) * bits
        elif isinstance(actor, PoolUnit):
            layer.logic_elements += cal.pool(actor.kernel, bits)
            width = shapes[actor.layer][0][2]
            layer.buffer_bits += buffer_words(actor.kernel, width, MemoryMode.ARCHITECTURAL) * bits
            layer.window_buffer_bits += buffer_words(actor.kernel, width, MemoryMode.WINDOW_ONLY) * bits

    for layer in report.layers.values():
        report.total.add(layer)
    logger.debug(
        f"estimate '{graph.name}': {report.total.logic_elements:.0f} ALM, "
        f"{report.total.buffer_bits} buffer bits, specialized={graph.specialized}"
    )
    return report


def format_report_table(report: ResourceReport) -> str:
    header = (
        f"{'layer':<16}{'ALM':>12}{'buffer bits':>13}{'mults':>8}"
        f"{'DSP alt.':>10}{'Kops/px':>10}{'GOPs/s':>10}"
    )
    lines = [
        f"{report.name}: {report.bits}-bit, "
        f"{'specialized' if report.specialized else 'unspecialized'}, fmax {report.fmax_hz / 1e6:g} MHz",
        header,
        "-" * len(header),
    ]
    for name, layer in list(report.layers.items()) + [("TOTAL", report.total)]:
        lines.append(
            f"{name:<16}{layer.logic_elements:>12.1f}{layer.buffer_bits:>13}"
            f"{layer.remaining_multipliers:>8}{layer.dsp_blocks:>10.0f}"
            f"{layer.ops_per_pixel / 1e3:>10.2f}{layer.throughput_gops:>10.1f}"
        )
    return "\n".join(lines)
