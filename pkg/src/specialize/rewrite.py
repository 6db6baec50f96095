"""Constant-multiplier specialization of an actor graph.

Zero multipliers disappear together with their adder-tree input, unit
multipliers become wires and +-2^k multipliers become shifts. An adder
tree left with no inputs turns into a Constant 0 that is strobed by the
extractor tap which used to feed its first multiplier, so the neuron sum
still receives one token per window.
"""

from collections import defaultdict

from src.graph.actor_graph import ActorGraph
from src.graph.actors import AdderTree, Channel, Constant, Mult, Shift, Wire
from src.logger import setup_logger
from .classify import MultKind

logger = setup_logger()


def specialize(graph: ActorGraph) -> ActorGraph:
    """Rewrite every Mult actor according to its MultClass.

    The result is bit-identical in behaviour; applying it twice changes
    nothing further.
    """
    removed: set[str] = set()
    replacements = {}
    for actor in graph.actors:
        if not isinstance(actor, Mult):
            continue
        mult_class = actor.mult_class
        if mult_class.kind is MultKind.ZERO:
            removed.add(actor.id)
        elif mult_class.kind is MultKind.ONE:
            replacements[actor.id] = Wire(actor.id, actor.layer)
        elif mult_class.kind is MultKind.POWER_OF_TWO:
            replacements[actor.id] = Shift(
                actor.id, actor.layer, weight=actor.weight, index=actor.index,
                shift=mult_class.shift, negative=mult_class.negative,
            )

    # Surviving inputs of each tree, in original port order.
    tree_inputs: dict[str, list[Channel]] = defaultdict(list)
    first_feed: dict[str, Channel] = {}
    for actor in graph.actors:
        if not isinstance(actor, AdderTree):
            continue
        for channel in graph.inputs_of.get(actor.id, []):
            if channel.src in removed:
                first_feed.setdefault(actor.id, graph.inputs_of[channel.src][0])
            else:
                tree_inputs[actor.id].append(channel)

    actors = []
    for actor in graph.actors:
        if actor.id in removed:
            continue
        if isinstance(actor, AdderTree):
            arity = len(tree_inputs[actor.id])
            if arity == 0:
                actor = Constant(actor.id, actor.layer, value=0)
            elif arity != actor.arity:
                actor = AdderTree(actor.id, actor.layer, arity=arity)
        actors.append(replacements.get(actor.id, actor))

    channels = []
    for channel in graph.channels:
        if channel.src in removed or channel.dst in removed:
            continue
        if channel.dst in tree_inputs:
            port = tree_inputs[channel.dst].index(channel)
            channel = Channel(channel.src, channel.src_port, channel.dst, port)
        channels.append(channel)
    for tree_id, strobe in first_feed.items():
        if not tree_inputs[tree_id]:
            channels.append(Channel(strobe.src, strobe.src_port, tree_id, 0))

    result = graph.with_contents(actors, channels, specialized=True)
    result.validate()
    logger.debug(
        f"specialized '{graph.name}': removed {len(removed)} zero multiplier(s), "
        f"rewrote {len(replacements)}, collapsed "
        f"{sum(1 for t in first_feed if not tree_inputs[t])} engine(s) to constants"
    )
    return result
