"""Graphviz DOT dump of an actor graph, for inspection."""

from mako.template import Template

from .actor_graph import ActorGraph
from .actors import Actor, Mult, NeighborhoodExtractor, PoolUnit, Shift

_DOT = Template("""\
digraph "${graph.name}" {
  rankdir=LR;
  node [shape=box, fontname="monospace"];
% for layer in layers:
  subgraph "cluster_${layer}" {
    label="${layer}";
%   for actor in members[layer]:
    "${actor.id}" [label="${label(actor)}"];
%   endfor
  }
% endfor
% for channel in graph.channels:
  "${channel.src}" -> "${channel.dst}" [taillabel="${channel.src_port}", headlabel="${channel.dst_port}"];
% endfor
}
""")


def _label(actor: Actor) -> str:
    kind = type(actor).__name__
    if isinstance(actor, Mult):
        return f"{kind} x{actor.weight}"
    if isinstance(actor, Shift):
        sign = "-" if actor.negative else ""
        return f"{kind} {sign}<<{actor.shift}"
    if isinstance(actor, (NeighborhoodExtractor, PoolUnit)):
        return f"{kind} {actor.kernel}x{actor.kernel}"
    return kind


def to_dot(graph: ActorGraph) -> str:
    members: dict[str, list[Actor]] = {}
    for actor in graph.actors:
        members.setdefault(actor.layer, []).append(actor)
    return _DOT.render(graph=graph, layers=list(members), members=members, label=_label)
