"""Structural VHDL emission: a toplevel netlist and a params package.

The toplevel holds one structural entity per hardware layer, instantiating
the static leaf library (src/hdl/library) once per actor, plus the top
entity chaining the layers in model order. Every constant lives in the
params package; the netlist only indexes into it.
"""

import json
import re
import shutil
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from mako.lookup import TemplateLookup

from src.config import TOOL_VERSION
from src.graph.actor_graph import ActorGraph
from src.graph.actors import (
    ActivationUnit,
    Actor,
    AdderTree,
    Constant,
    Mult,
    NeighborhoodExtractor,
    NeuronSum,
    PoolUnit,
    Shift,
    Sink,
    Source,
    Wire,
)
from src.graph.census import count_entities
from src.logger import setup_logger
from src.model.base import ActivationFn, Conv, PoolMode
from src.quant.activation import tanh_lut
from src.quant.fixed_point import FixedPointFormat, QuantizationError
from src.quant.quantizer import QuantizedModel
from .base import EmissionError, HdlDesign, ManifestEntry

logger = setup_logger()

TEMPLATE_DIR = Path(__file__).parent / "templates"
LIBRARY_DIR = Path(__file__).parent / "library"

# Census field backing each manifest entry; activations split by entity.
MANIFEST_CENSUS = {
    "neighborhood_extractor": "neighborhood_extractors",
    "const_mult": "multipliers",
    "const_shift": "shifts",
    "wire": "wires",
    "constant": "constants",
    "adder_tree": "adder_trees",
    "neuron_sum": "neuron_sums",
    "activation": "activations",
    "activation_lut": "activations",
    "pool_unit": "pool_units",
}

_lookup = TemplateLookup(directories=[str(TEMPLATE_DIR)], input_encoding="utf-8")


def vhdl_identifier(text: str) -> str:
    """Map an arbitrary name onto a legal VHDL basic identifier."""
    name = re.sub(r"_+", "_", re.sub(r"[^A-Za-z0-9]", "_", text)).strip("_")
    if not name or not name[0].isalpha():
        name = f"x_{name}" if name else "x"
    return name.lower()


def to_bits(value: int, width: int) -> str:
    """Two's-complement bit string of value in width bits."""
    if not -(1 << (width - 1)) <= value < (1 << (width - 1)):
        raise EmissionError(f"value {value} does not fit in {width} signed bits")
    return format(value & ((1 << width) - 1), f"0{width}b")


def from_bits(bits: str) -> int:
    value = int(bits, 2)
    return value - (1 << len(bits)) if bits[0] == "1" else value


def natural_key(text: str) -> list:
    """Sort key that orders embedded numbers numerically (n2 before n10)."""
    return [int(part) if part.isdigit() else part for part in re.split(r"(\d+)", text)]


def vhdl_aggregate(items: list[str], per_line: int = 8) -> str:
    """Positional array aggregate; a single element needs named association."""
    if len(items) == 1:
        return f"(0 => {items[0]})"
    rows = [", ".join(items[i:i + per_line]) for i in range(0, len(items), per_line)]
    return "(\n    " + ",\n    ".join(rows) + "\n  )"


def tanh_table_name(fmt: FixedPointFormat) -> str:
    return f"TANH_Q{fmt.total_bits}_{fmt.frac_bits}"


@dataclass
class Instance:
    label: str
    entity: str
    generics: list[tuple[str, str]]
    ports: list[tuple[str, str]]
    bindings: dict


@dataclass
class LayerBlock:
    layer: str
    entity: str
    in_ports: list[str]
    out_ports: list[str]
    signals: list[tuple[str, int]] = field(default_factory=list)
    instances: list[Instance] = field(default_factory=list)
    assignments: list[str] = field(default_factory=list)
    registered: list[str] = field(default_factory=list)
    out_assignments: list[str] = field(default_factory=list)


class _NetlistBuilder:
    def __init__(self, graph: ActorGraph, qm: QuantizedModel, design: str):
        self.graph = graph
        self.qm = qm
        self.design = design
        self.bits = qm.total_bits
        self.entity_names: set[str] = set()

    def constant_prefix(self, layer: str) -> str:
        return vhdl_identifier(layer).upper()

    def signal(self, actor: Actor) -> str:
        return f"s_{vhdl_identifier(actor.id.split('/', 1)[1])}"

    def width(self, actor: Actor) -> int:
        if isinstance(actor, NeighborhoodExtractor):
            return actor.kernel * actor.kernel * self.bits
        if isinstance(actor, (ActivationUnit, PoolUnit)):
            return self.bits
        return self.qm.formats[actor.layer].accumulator_bits

    def block(self, layer: str) -> LayerBlock:
        graph = self.graph
        actors = graph.actors_of_layer(layer)
        members = {actor.id for actor in actors}
        entity = f"{self.design}_{vhdl_identifier(layer)}"
        if entity in self.entity_names:
            raise EmissionError(f"layer '{layer}' maps onto VHDL name '{entity}' used by another layer")
        self.entity_names.add(entity)

        feeds = sorted(
            {c.src for a in actors for c in graph.inputs_of.get(a.id, []) if c.src not in members},
            key=natural_key,
        )
        out_sources = sorted(
            {c.src for a in actors for c in graph.outputs_of.get(a.id, []) if c.dst not in members},
            key=natural_key,
        )
        block = LayerBlock(
            layer=layer,
            entity=entity,
            in_ports=[f"in_data_{i}" for i in range(len(feeds))],
            out_ports=[f"out_data_{i}" for i in range(len(out_sources))],
        )
        external = {src: (f"in_data_{i}", "in_valid") for i, src in enumerate(feeds)}

        def source_of(actor: Actor, port: int = 0) -> tuple[str, str]:
            channel = graph.inputs_of[actor.id][port]
            if channel.src in external:
                return external[channel.src]
            producer = graph.by_id[channel.src]
            name = self.signal(producer)
            if isinstance(producer, NeighborhoodExtractor):
                lo = channel.src_port * self.bits
                return f"{name}_d({lo + self.bits - 1} downto {lo})", f"{name}_v"
            return f"{name}_d", f"{name}_v"

        prefix = self.constant_prefix(layer)
        for actor in actors:
            name = self.signal(actor)
            block.signals.append((f"{name}_d", self.width(actor)))
            block.signals.append((f"{name}_v", 1))
            if isinstance(actor, (Wire, Constant)):
                data, valid = source_of(actor)
                acc = self.width(actor)
                if isinstance(actor, Wire):
                    block.registered.append(f"{name}_d <= std_logic_vector(resize(signed({data}), {acc}));")
                    block.registered.append(f"{name}_v <= {valid};")
                else:
                    # stands in for a multiplier plus its adder tree: two cycles
                    block.signals.append((f"{name}_p", 1))
                    block.registered.append(f"{name}_d <= (others => '0');")
                    block.registered.append(f"{name}_p <= {valid};")
                    block.registered.append(f"{name}_v <= {name}_p;")
                continue
            if isinstance(actor, (AdderTree, NeuronSum)):
                acc = self.width(actor)
                block.signals.append((f"{name}_in", actor.arity * acc))
                valids = []
                for port in range(actor.arity):
                    data, port_valid = source_of(actor, port)
                    valids.append(port_valid)
                    lo = port * acc
                    block.assignments.append(f"{name}_in({lo + acc - 1} downto {lo}) <= {data};")
                data, valid = f"{name}_in", valids[0]
                if len(set(valids)) > 1:
                    valid = f"{name}_all_v"
                    block.signals.append((valid, 1))
                    block.assignments.append(f"{valid} <= {' and '.join(valids)};")
            else:
                data, valid = source_of(actor)
            block.instances.append(self.instance(actor, name, data, valid, prefix))

        for i, src in enumerate(out_sources):
            block.out_assignments.append(f"out_data_{i} <= {self.signal(graph.by_id[src])}_d;")
        if out_sources:
            block.out_assignments.append(f"out_valid <= {self.signal(graph.by_id[out_sources[0]])}_v;")
        return block

    def instance(self, actor: Actor, name: str, data: str, valid: str, prefix: str) -> Instance:
        formats = self.qm.formats[actor.layer]
        bits = self.bits
        frame = isinstance(actor, (NeighborhoodExtractor, PoolUnit))
        generics: list[tuple[str, str]]
        bindings: dict
        if isinstance(actor, NeighborhoodExtractor):
            bindings = {"BITWIDTH": bits, "KERNEL": actor.kernel, "IMAGE_WIDTH": actor.image_width,
                        "IMAGE_HEIGHT": actor.image_height, "STRIDE": actor.stride, "PAD": actor.pad}
            generics = [(key, str(value)) for key, value in bindings.items()]
        elif isinstance(actor, Mult):
            acc = formats.accumulator_bits
            bindings = {"IN_BITS": bits, "OUT_BITS": acc, "WEIGHT": actor.weight}
            generics = [("IN_BITS", str(bits)), ("OUT_BITS", str(acc)),
                        ("WEIGHT", f"to_integer(signed({prefix}_WEIGHTS({actor.index})))")]
        elif isinstance(actor, Shift):
            acc = formats.accumulator_bits
            bindings = {"IN_BITS": bits, "OUT_BITS": acc, "SHIFT": actor.shift, "NEGATIVE": actor.negative}
            generics = [("IN_BITS", str(bits)), ("OUT_BITS", str(acc)), ("SHIFT", str(actor.shift)),
                        ("NEGATIVE", "true" if actor.negative else "false")]
        elif isinstance(actor, AdderTree):
            acc = formats.accumulator_bits
            bindings = {"BITWIDTH": acc, "ARITY": actor.arity}
            generics = [(key, str(value)) for key, value in bindings.items()]
        elif isinstance(actor, NeuronSum):
            acc = formats.accumulator_bits
            biases = self.qm.int_biases.get(actor.layer)
            bias = 0 if biases is None else int(biases[actor.neuron])
            bindings = {"BITWIDTH": acc, "ARITY": actor.arity, "BIAS": bias,
                        "BIAS_SHIFT": formats.input.frac_bits}
            bias_expr = "ZERO_WORD" if biases is None else f"{prefix}_BIASES({actor.neuron})"
            generics = [("BITWIDTH", str(acc)), ("ARITY", str(actor.arity)), ("BIAS", bias_expr),
                        ("BIAS_SHIFT", f"{prefix}_IN_FRAC")]
        elif isinstance(actor, ActivationUnit):
            in_bits = formats.accumulator_bits if formats.weights is not None else bits
            shift = actor.acc_frac - actor.out_format.frac_bits
            bindings = {"IN_BITS": in_bits, "OUT_BITS": bits, "SHIFT": shift}
            generics = [("IN_BITS", str(in_bits)), ("OUT_BITS", str(bits)), ("SHIFT", str(shift))]
            if actor.fn is ActivationFn.TANH:
                bindings["TABLE"] = tanh_table_name(actor.out_format)
                generics.append(("TABLE", tanh_table_name(actor.out_format)))
            else:
                bindings["RELU"] = actor.fn is ActivationFn.RELU
                generics.append(("RELU", "true" if actor.fn is ActivationFn.RELU else "false"))
        elif isinstance(actor, PoolUnit):
            bindings = {"BITWIDTH": bits, "KERNEL": actor.kernel, "STRIDE": actor.stride,
                        "IMAGE_WIDTH": actor.image_width, "IMAGE_HEIGHT": actor.image_height,
                        "AVERAGE": actor.mode is PoolMode.AVG}
            generics = [(key, str(value).lower() if isinstance(value, bool) else str(value))
                        for key, value in bindings.items()]
        else:
            raise EmissionError(f"actor '{actor.id}' ({type(actor).__name__}) has no library entity")

        ports = [("clk", "clk"), ("reset_n", "reset_n")]
        if frame:
            ports.append(("frame_start", "frame_start"))
        ports += [("in_data", data), ("in_valid", valid), ("out_data", f"{name}_d"), ("out_valid", f"{name}_v")]
        return Instance(label=f"u_{name[2:]}", entity=actor.entity, generics=generics, ports=ports,
                        bindings=bindings)


def _check_emittable(graph: ActorGraph, qm: QuantizedModel) -> None:
    for actor in graph.actors:
        if isinstance(actor, (Source, Sink)):
            continue
        if actor.layer not in qm.formats:
            raise EmissionError(f"actor '{actor.id}' belongs to unknown layer '{actor.layer}'")


def design_name(qm: QuantizedModel) -> str:
    return vhdl_identifier(qm.name)


def emit_params(qm: QuantizedModel) -> str:
    """Render the params package: formats, weight/bias arrays and tanh tables."""
    bits = qm.total_bits
    layers = []
    prefixes = set()
    tables = {}
    for spec in qm.model.layers:
        formats = qm.formats[spec.name]
        if getattr(spec.kind, "fn", None) is ActivationFn.TANH:
            tables[tanh_table_name(formats.output)] = formats.output
        if not isinstance(spec.kind, Conv):
            continue
        prefix = vhdl_identifier(spec.name).upper()
        if prefix in prefixes:
            raise EmissionError(f"layer '{spec.name}' maps onto constant prefix '{prefix}' used by another layer")
        prefixes.add(prefix)
        biases = qm.int_biases.get(spec.name)
        layers.append({
            "name": spec.name,
            "prefix": prefix,
            "kind": spec.kind,
            "formats": formats,
            "weights": [f'"{to_bits(int(w), bits)}"' for w in qm.int_weights[spec.name].reshape(-1)],
            "biases": None if biases is None else [f'"{to_bits(int(b), bits)}"' for b in biases],
        })
    try:
        lut = {name: list(tanh_lut(fmt)) for name, fmt in sorted(tables.items())}
    except QuantizationError as e:
        raise EmissionError(str(e)) from e
    template = _lookup.get_template("params.vhd.mako")
    return template.render(
        design=design_name(qm), version=TOOL_VERSION, qm=qm, bits=bits, layers=layers, tables=lut,
        aggregate=vhdl_aggregate,
    )


def emit_toplevel(graph: ActorGraph, qm: QuantizedModel) -> str:
    """Render the structural netlist of a (specialized) conv/pool/activation graph."""
    _check_emittable(graph, qm)
    design = design_name(qm)
    builder = _NetlistBuilder(graph, qm, design)
    blocks = [builder.block(layer) for layer in graph.layers]
    channels, _, _ = graph.input_shape
    template = _lookup.get_template("toplevel.vhd.mako")
    return template.render(
        design=design, version=TOOL_VERSION, blocks=blocks,
        in_channels=channels, out_channels=graph.output_shape[0],
    )


def build_manifest(graph: ActorGraph, qm: QuantizedModel) -> list[ManifestEntry]:
    """Instance count and distinct generic bindings per library entity."""
    builder = _NetlistBuilder(graph, qm, design_name(qm))
    counts = Counter()
    bindings: dict[str, Counter] = {}
    prefix_cache = {}
    for actor in graph.actors:
        if isinstance(actor, (Source, Sink)):
            continue
        if isinstance(actor, (Wire, Constant)):
            counts[type(actor).__name__.lower()] += 1
            continue
        prefix = prefix_cache.setdefault(actor.layer, builder.constant_prefix(actor.layer))
        instance = builder.instance(actor, "s_x", "", "", prefix)
        counts[instance.entity] += 1
        key = json.dumps(instance.bindings, sort_keys=True)
        bindings.setdefault(instance.entity, Counter())[key] += 1

    manifest = []
    for entity in MANIFEST_CENSUS:
        kind = "signal" if entity in ("wire", "constant") else "entity"
        entry = ManifestEntry(entity=entity, instances=counts.get(entity, 0), kind=kind)
        for key, count in sorted(bindings.get(entity, Counter()).items()):
            entry.bindings.append({"generics": json.loads(key), "count": count})
        manifest.append(entry)
    return manifest


def emit_design(graph: ActorGraph, qm: QuantizedModel) -> HdlDesign:
    design = HdlDesign(
        name=design_name(qm),
        toplevel_source=emit_toplevel(graph, qm),
        params_source=emit_params(qm),
        manifest=build_manifest(graph, qm),
    )
    census = count_entities(graph).total
    emitted = Counter()
    for entry in design.manifest:
        emitted[MANIFEST_CENSUS[entry.entity]] += entry.instances
    for census_field, instances in emitted.items():
        expected = getattr(census, census_field)
        if instances != expected:
            raise EmissionError(f"netlist holds {instances} {census_field}, graph has {expected}")
    return design


def manifest_document(design: HdlDesign, graph: ActorGraph, qm: QuantizedModel, options: dict) -> dict:
    return {
        "tool_version": TOOL_VERSION,
        "design": design.name,
        "model": qm.name,
        "bits": qm.total_bits,
        "options": options,
        "input_shape": list(graph.input_shape),
        "output_shape": list(graph.output_shape),
        "formats": {
            "input": qm.input_format.to_dict(),
            "layers": {name: formats.to_dict() for name, formats in qm.formats.items()},
        },
        "census": count_entities(graph).to_dict(),
        "entities": [entry.to_dict() for entry in design.manifest],
        "files": design_files(design),
    }


def design_files(design: HdlDesign) -> list[str]:
    return [f"{design.name}_toplevel.vhd", f"{design.name}_params.vhd", "manifest.json", "README.md"]


def emit_project(
    design: HdlDesign,
    manifest: dict,
    output_dir: str | Path,
    sources: dict[str, str],
    dry_run: bool = False,
    include_library: bool = False,
) -> list[Path]:
    """Write the design files to output_dir.

    Args:
        design: Emitted design
        manifest: Document from manifest_document
        output_dir: Target directory (created if missing)
        sources: Input file paths to record in the README
        dry_run: Only compute the file list
        include_library: Also copy the leaf VHDL library into ``lib/``

    Returns:
        Paths written (or that would be written)

    Raises:
        EmissionError: a file cannot be written; the message names the path
    """
    output_dir = Path(output_dir)
    names = design_files(design)
    paths = [output_dir / name for name in names]
    library = sorted(LIBRARY_DIR.glob("*.vhd")) if include_library else []
    paths += [output_dir / "lib" / source.name for source in library]
    if dry_run:
        return paths

    readme = _lookup.get_template("README.md.mako").render(
        design=design, manifest=manifest, sources=sources, version=TOOL_VERSION,
    )
    contents = {
        names[0]: design.toplevel_source,
        names[1]: design.params_source,
        names[2]: json.dumps(manifest, indent=2, sort_keys=True) + "\n",
        names[3]: readme,
    }
    current = output_dir
    try:
        output_dir.mkdir(parents=True, exist_ok=True)
        for name, text in contents.items():
            current = output_dir / name
            current.write_text(text, encoding="utf-8", newline="\n")
        if library:
            (output_dir / "lib").mkdir(exist_ok=True)
            for source in library:
                current = output_dir / "lib" / source.name
                shutil.copyfile(source, current)
    except OSError as e:
        raise EmissionError(f"cannot write {current}: {e.strerror or e}") from e
    logger.info(f"Wrote {len(paths)} file(s) to {output_dir}")
    return paths
