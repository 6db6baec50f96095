"""Actor kinds of the Direct Hardware Mapping graph.

Each class is one kind of hardware entity. Ports are numbered from 0;
an actor fires once per complete set of input tokens.
"""

from dataclasses import dataclass
from typing import ClassVar

from src.model.base import ActivationFn, PoolMode
from src.quant.fixed_point import FixedPointFormat


@dataclass(frozen=True)
class Actor:
    id: str
    layer: str

    census_field: ClassVar[str | None] = None
    entity: ClassVar[str] = ""

    @property
    def input_arity(self) -> int:
        return 1

    @property
    def output_arity(self) -> int:
        return 1


@dataclass(frozen=True)
class Source(Actor):
    channel: int = 0

    @property
    def input_arity(self) -> int:
        return 0


@dataclass(frozen=True)
class Sink(Actor):
    channel: int = 0

    @property
    def output_arity(self) -> int:
        return 0


@dataclass(frozen=True)
class NeighborhoodExtractor(Actor):
    """Line-buffered window extractor; emits K*K taps per valid window.

    Tap ``t`` is the window element at row ``t // K``, column ``t % K``.
    ``image_width``/``image_height`` describe the unpadded input frame.
    """

    channel: int = 0
    kernel: int = 1
    image_width: int = 1
    image_height: int = 1
    stride: int = 1
    pad: int = 0

    census_field: ClassVar[str] = "neighborhood_extractors"
    entity: ClassVar[str] = "neighborhood_extractor"

    @property
    def output_arity(self) -> int:
        return self.kernel * self.kernel

    @property
    def padded_width(self) -> int:
        return self.image_width + 2 * self.pad

    @property
    def padded_height(self) -> int:
        return self.image_height + 2 * self.pad

    @property
    def windows(self) -> int:
        rows = (self.padded_height - self.kernel) // self.stride + 1
        cols = (self.padded_width - self.kernel) // self.stride + 1
        return rows * cols


@dataclass(frozen=True)
class Mult(Actor):
    """Constant multiplier.

    ``index`` is the flat position of ``weight`` in its layer's [N][C][K][K] tensor.
    """

    weight: int = 0
    index: int = 0

    census_field: ClassVar[str] = "multipliers"
    entity: ClassVar[str] = "const_mult"

    @property
    def mult_class(self):
        from src.specialize.classify import classify_weight

        return classify_weight(self.weight)


@dataclass(frozen=True)
class Shift(Actor):
    """Multiplication by +-2**shift."""

    weight: int = 0
    index: int = 0
    shift: int = 0
    negative: bool = False

    census_field: ClassVar[str] = "shifts"
    entity: ClassVar[str] = "const_shift"


@dataclass(frozen=True)
class Wire(Actor):
    census_field: ClassVar[str] = "wires"


@dataclass(frozen=True)
class Constant(Actor):
    """Emits ``value`` once per token on its strobe input."""

    value: int = 0

    census_field: ClassVar[str] = "constants"


@dataclass(frozen=True)
class AdderTree(Actor):
    arity: int = 1

    census_field: ClassVar[str] = "adder_trees"
    entity: ClassVar[str] = "adder_tree"

    @property
    def input_arity(self) -> int:
        return self.arity


@dataclass(frozen=True)
class NeuronSum(Actor):
    """Adds the C convolution results of a neuron and its bias.

    ``bias`` is already in accumulator scale.
    """

    arity: int = 1
    bias: int = 0
    neuron: int = 0

    census_field: ClassVar[str] = "neuron_sums"
    entity: ClassVar[str] = "neuron_sum"

    @property
    def input_arity(self) -> int:
        return self.arity


@dataclass(frozen=True)
class ActivationUnit(Actor):
    """Requantizes from ``acc_frac`` into ``out_format``, then applies ``fn``.

    ``fn`` None is the identity.
    """

    fn: ActivationFn | None = None
    acc_frac: int = 0
    out_format: FixedPointFormat | None = None

    census_field: ClassVar[str] = "activations"

    @property
    def entity(self) -> str:
        return "activation_lut" if self.fn is ActivationFn.TANH else "activation"


@dataclass(frozen=True)
class PoolUnit(Actor):
    channel: int = 0
    kernel: int = 2
    stride: int = 2
    mode: PoolMode = PoolMode.MAX
    image_width: int = 1
    image_height: int = 1

    census_field: ClassVar[str] = "pool_units"
    entity: ClassVar[str] = "pool_unit"

    @property
    def windows(self) -> int:
        rows = (self.image_height - self.kernel) // self.stride + 1
        cols = (self.image_width - self.kernel) // self.stride + 1
        return rows * cols


@dataclass(frozen=True)
class Channel:
    """Unidirectional FIFO from one output port to one input port."""

    src: str
    src_port: int
    dst: str
    dst_port: int
