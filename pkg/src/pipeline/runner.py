"""Pipeline runner: the stages behind each CLI command.

Every command walks the same front of the pipeline (parse, load weights,
quantize) and then branches:

- compile:  build graph -> specialize -> emit HDL project
- simulate: golden model -> build graph -> simulate -> compare
- stats:    kernel statistics
- estimate: build graph -> specialize -> resource report
- graph:    build graph -> specialize -> DOT dump
"""

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from src.config import DEFAULT_BITS, DEFAULT_FMAX_HZ, DEFAULT_OUTPUT_DIR, DEFAULT_SEED, MAX_BITS, MIN_BITS
from src.errors import ConfigError
from src.estimate import estimate_network, format_report_table, report_to_json
from src.graph import ActorGraph, build_actor_graph, count_entities, to_dot
from src.hdl import emit_design, emit_project, manifest_document
from src.logger import setup_logger
from src.model import CnnModel, Diagnostic, load_weights, parse_topology
from src.quant import INPUT_KEY, QuantizedModel, quantize_model
from src.sim import compare, golden_inference, load_image, load_real_image, random_image, simulate, write_raw
from src.specialize import format_stats_table, kernel_statistics, specialize

logger = setup_logger()

COMMANDS = ("compile", "simulate", "stats", "estimate", "graph")

_FRAC_PATTERN = re.compile(r"^([^=]+)=(-?\d*):(-?\d*)$")


def parse_frac(values: list[str] | None) -> dict[str, dict[str, int]]:
    """Parse ``layer=weights:data`` overrides; either side may be left empty.

    Raises:
        ConfigError: an item does not match the grammar
    """
    overrides: dict[str, dict[str, int]] = {}
    for item in values or []:
        match = _FRAC_PATTERN.match(item.strip())
        if match is None:
            raise ConfigError(f"--frac expects layer=weights:data (e.g. conv1=6:4 or {INPUT_KEY}=:7), got '{item}'")
        layer, weights, data = match.groups()
        entry = overrides.setdefault(layer.strip(), {})
        if weights:
            entry["weights"] = int(weights)
        if data:
            entry["data"] = int(data)
    return overrides


@dataclass
class RunConfig:
    command: str
    topology: Path
    weights: Path | None = None
    bits: int = DEFAULT_BITS
    frac: dict[str, dict[str, int]] = field(default_factory=dict)
    nef: bool = True
    specialize: bool = True
    fmax_hz: float = DEFAULT_FMAX_HZ
    output_dir: Path = Path(DEFAULT_OUTPUT_DIR)
    json_output: bool = False
    dry_run: bool = False
    include_library: bool = False
    image: Path | None = None
    seed: int = DEFAULT_SEED
    dump_dir: Path | None = None
    golden_only: bool = False
    compare_unspecialized: bool = False
    graph_output: Path | None = None
    calibrate: Path | None = None

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command '{self.command}'; expected one of {', '.join(COMMANDS)}")
        if not MIN_BITS <= self.bits <= MAX_BITS:
            raise ConfigError(f"--bits must be in [{MIN_BITS}, {MAX_BITS}], got {self.bits}")
        if self.fmax_hz < 0:
            raise ConfigError(f"--fmax must be >= 0 Hz, got {self.fmax_hz}")
        required = [
            ("topology", self.topology), ("weights", self.weights), ("image", self.image),
            ("calibration image", self.calibrate),
        ]
        for label, path in required:
            if path is None:
                if label == "weights":
                    raise ConfigError(f"'{self.command}' needs a weights container")
                continue
            if not Path(path).is_file():
                raise ConfigError(f"{label} file not found: {path}")


@dataclass
class CommandResult:
    """What a command produced: a JSON-ready document and its text rendering.

    ``ok`` is False when the command ran but its check failed (a simulation
    mismatch); the CLI maps that to exit code 1.
    """

    data: dict
    text: str
    ok: bool = True


def _stage(number: int, name: str) -> None:
    logger.info("\n" + "=" * 40)
    logger.info(f"Stage {number}: {name}")
    logger.info("=" * 40)


def load_model(config: RunConfig) -> CnnModel:
    diagnostics: list[Diagnostic] = []
    text = Path(config.topology).read_text(encoding="utf-8")
    model = parse_topology(text, diagnostics)
    container = Path(config.weights).read_bytes()
    model = load_weights(container, model)
    logger.info(
        f"Loaded '{model.name}': {len(model.layers)} layers, input {model.input_shape}, "
        f"{len(diagnostics)} warning(s)"
    )
    return model


def quantize(config: RunConfig, model: CnnModel) -> QuantizedModel:
    calibration = None
    if config.calibrate is not None:
        calibration = load_real_image(config.calibrate)
        logger.info(f"Choosing data formats from calibration image {config.calibrate}")
    qm = quantize_model(model, config.bits, frac_override=config.frac or None, calibration_image=calibration)
    logger.info(f"Quantized to {config.bits} bits, input format {qm.input_format}")
    return qm


def build_graph(config: RunConfig, qm: QuantizedModel, specialized: bool | None = None) -> ActorGraph:
    graph = build_actor_graph(qm, nef=config.nef)
    census = count_entities(graph).total
    logger.info(
        f"Graph: {len(graph.actors)} actors, {census.multipliers} multipliers, "
        f"{census.neighborhood_extractors} extractors (nef={config.nef})"
    )
    if config.specialize if specialized is None else specialized:
        graph = specialize(graph)
        census = count_entities(graph).total
        logger.info(
            f"Specialized: {census.multipliers} generic multipliers, {census.shifts} shifts, "
            f"{census.wires} wires, {census.constants} constants"
        )
    return graph


def _front(config: RunConfig) -> QuantizedModel:
    _stage(1, "Parse")
    model = load_model(config)
    _stage(2, "Quantize")
    return quantize(config, model)


def run_compile(config: RunConfig) -> CommandResult:
    qm = _front(config)
    _stage(3, "Build graph")
    graph = build_graph(config, qm)

    _stage(4, "Emit HDL")
    design = emit_design(graph, qm)
    options = {
        "nef": config.nef, "specialize": config.specialize, "frac": config.frac,
        "calibrate": Path(config.calibrate).name if config.calibrate else None,
    }
    manifest = manifest_document(design, graph, qm, options)
    sources = {"topology": Path(config.topology).name, "weights": Path(config.weights).name}
    paths = emit_project(
        design, manifest, config.output_dir, sources,
        dry_run=config.dry_run, include_library=config.include_library,
    )
    data = {"design": design.name, "dry_run": config.dry_run, "files": [str(p) for p in paths]}
    if config.dry_run:
        data["manifest"] = manifest
        return CommandResult(data, json.dumps(manifest, indent=2, sort_keys=True))
    return CommandResult(data, "\n".join(str(p) for p in paths))


def run_simulate(config: RunConfig) -> CommandResult:
    qm = _front(config)
    if config.image is not None:
        image = load_image(config.image, qm.input_format)
        logger.info(f"Using image {config.image}")
    else:
        image = random_image(tuple(qm.model.input_shape), qm.input_format, config.seed)
        logger.info(f"Using random image (seed {config.seed})")

    _stage(3, "Golden model")
    golden = golden_inference(qm, image)
    last = qm.model.layers[-1].name
    data = {"model": qm.name, "layers": {name: list(maps.shape) for name, maps in golden.items()}}
    if config.dump_dir is not None:
        for name, maps in golden.items():
            write_raw(maps.data, maps.fmt, Path(config.dump_dir) / f"golden_{name}")

    if config.golden_only:
        data["golden_only"] = True
        return CommandResult(data, f"golden model evaluated {len(golden)} layers; output {golden[last].shape}")

    _stage(4, "Build graph")
    graph = build_graph(config, qm)
    _stage(5, "Simulate")
    result = simulate(graph, image)
    report = compare(result.output, golden[last])
    if config.dump_dir is not None:
        write_raw(result.output.data, result.output.fmt, Path(config.dump_dir) / "simulated")

    data.update({
        "diff": report.to_dict(),
        "exact": report.exact,
        "max_channel_occupancy": result.max_occupancy,
        "firings": sum(result.firings.values()),
        "warmup": result.warmup,
    })
    if report.exact:
        logger.info("Simulation matches the golden model exactly")
    else:
        logger.error(f"Simulation differs from the golden model: {report.summary()}")
    return CommandResult(data, report.summary(), ok=report.exact)


def run_stats(config: RunConfig) -> CommandResult:
    qm = _front(config)
    _stage(3, "Kernel statistics")
    stats = kernel_statistics(qm)
    return CommandResult(stats.to_dict(), format_stats_table(stats))


def run_estimate(config: RunConfig) -> CommandResult:
    qm = _front(config)
    _stage(3, "Build graph")
    graph = build_graph(config, qm)
    _stage(4, "Estimate")
    report = estimate_network(qm, graph, fmax_hz=config.fmax_hz)
    data = {"report": json.loads(report_to_json(report))}
    text = format_report_table(report)
    if config.compare_unspecialized:
        baseline = estimate_network(qm, build_graph(config, qm, specialized=False), fmax_hz=config.fmax_hz)
        data["unspecialized"] = json.loads(report_to_json(baseline))
        ratio = baseline.total.logic_elements / report.total.logic_elements if report.total.logic_elements else 0.0
        data["reduction"] = ratio
        text += "\n\nunspecialized:\n" + format_report_table(baseline) + f"\n\nreduction: {ratio:.2f}x"
    return CommandResult(data, text)


def run_graph(config: RunConfig) -> CommandResult:
    qm = _front(config)
    _stage(3, "Build graph")
    graph = build_graph(config, qm)
    dot = to_dot(graph)
    data = {"graph": graph.name, "actors": len(graph.actors), "channels": len(graph.channels)}
    if config.graph_output is not None:
        path = Path(config.graph_output)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(dot, encoding="utf-8", newline="\n")
        data["output"] = str(path)
        logger.info(f"Wrote DOT graph to {path}")
        return CommandResult(data, str(path))
    return CommandResult(data, dot)
