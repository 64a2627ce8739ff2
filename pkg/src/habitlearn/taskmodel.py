"""Task-model extraction and DOT export.

The predicted paths for a prompt are merged into one graph whose nodes
are ``(rank, token)`` pairs, so a menu shared by several tasks shows up
once.  Conditional probabilities depend on the whole conditioning
context, so an edge is keyed by ``(source, target, context)``: when two
paths cross the same pair of nodes under different contexts they get
parallel edges, each with its own probability.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .abith import DEFAULT_MAX_RESULTS, DEFAULT_P_MIN, HabitModel, PathPrediction

NodeKey = Tuple[int, str]

HIGHLIGHT_COLORS = ("red", "green", "blue")


@dataclass(frozen=True)
class Edge:
    src: NodeKey
    dst: NodeKey
    prob: float
    context: Tuple[str, ...]
    paths: Tuple[int, ...]


@dataclass
class TaskGraph:
    prompt: Tuple[str, ...]
    paths: List[PathPrediction]
    nodes: List[NodeKey]
    edges: List[Edge]
    highlights: int = 3
    colors: Tuple[str, ...] = field(default=HIGHLIGHT_COLORS)

    @property
    def root(self) -> NodeKey:
        return (len(self.prompt), "")

    def path_rank(self, path_id: int) -> Optional[int]:
        """1-based highlight rank of a path, None when not highlighted."""
        return path_id + 1 if path_id < self.highlights else None

    def traverse(self, path_id: int) -> Tuple[str, ...]:
        """Tokens met when following a path's own edges from the root."""
        outgoing: Dict[NodeKey, Edge] = {
            e.src: e for e in self.edges if path_id in e.paths
        }
        node = self.root
        tokens = []
        while node in outgoing:
            node = outgoing.pop(node).dst
            tokens.append(node[1])
        return tuple(tokens)


def extract(
    model: HabitModel,
    prompt: Sequence[str] = (),
    p_min: float = DEFAULT_P_MIN,
    max_paths: int = DEFAULT_MAX_RESULTS,
    highlights: int = 3,
) -> TaskGraph:
    if not 0 <= highlights <= len(HIGHLIGHT_COLORS):
        raise ValueError(f"highlights must be in [0, {len(HIGHLIGHT_COLORS)}]")
    prompt = tuple(prompt)
    paths = model.predict(prompt, max_paths, p_min)
    root: NodeKey = (len(prompt), "")
    nodes = {root}
    owners: Dict[Tuple[NodeKey, NodeKey, Tuple[str, ...]], List[int]] = {}
    probs: Dict[Tuple[NodeKey, NodeKey, Tuple[str, ...]], float] = {}
    for pid, path in enumerate(paths):
        src = root
        for i, (tok, p) in enumerate(zip(path.tokens, path.step_probs)):
            dst = (len(prompt) + i + 1, tok)
            nodes.add(dst)
            key = (src, dst, model.context_of(prompt + path.tokens[:i]))
            owners.setdefault(key, []).append(pid)
            probs[key] = p
            src = dst
    edges = [
        Edge(src, dst, probs[(src, dst, ctx)], ctx, tuple(owners[(src, dst, ctx)]))
        for (src, dst, ctx) in sorted(owners)
    ]
    return TaskGraph(prompt, paths, sorted(nodes), edges, min(highlights, len(paths)))


# ---------------------------------------------------------------------------
# DOT
# ---------------------------------------------------------------------------


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _node_id(graph: TaskGraph, node: NodeKey) -> str:
    if node == graph.root:
        return _quote("root")
    return _quote(f"r{node[0]}:{node[1]}")


def _attrs(**kw: object) -> str:
    parts = [
        f"{key}={_quote(str(value)) if key == 'label' else value}"
        for key, value in kw.items()
        if value is not None
    ]
    return " [" + ", ".join(parts) + "]" if parts else ""


def to_dot(graph: TaskGraph, name: str = "task_model") -> str:
    """Render the graph as a GraphViz digraph (byte-deterministic)."""
    root_label = " ".join(graph.prompt) if graph.prompt else "root"
    lines = [f"digraph {_quote(name)} {{"]
    for node in graph.nodes:
        label = root_label if node == graph.root else node[1]
        lines.append(f"  {_node_id(graph, node)}{_attrs(label=label)};")
    for edge in graph.edges:
        src, dst = _node_id(graph, edge.src), _node_id(graph, edge.dst)
        ranks = sorted({r for r in map(graph.path_rank, edge.paths) if r is not None})
        if not ranks:
            lines.append(f"  {src} -> {dst}{_attrs(label=f'{edge.prob:.2f}')};")
        for rank in ranks:
            color = graph.colors[rank - 1]
            label = f"{edge.prob:.2f} ({rank})"
            lines.append(
                f"  {src} -> {dst}"
                f"{_attrs(label=label, color=color, fontcolor=color, penwidth=2)};"
            )
    for pid, path in enumerate(graph.paths):
        if not path.tokens:
            continue
        end = _quote(f"end{pid + 1}")
        leaf = _node_id(graph, (len(graph.prompt) + len(path.tokens), path.tokens[-1]))
        rank = graph.path_rank(pid)
        color = graph.colors[rank - 1] if rank is not None else None
        label = f"({path.evidence_db} dB)"
        if rank is not None:
            label = f"({rank}) {label}"
        lines.append(f"  {end}{_attrs(label=label, color=color, fontcolor=color)};")
        lines.append(f"  {leaf} -> {end}{_attrs(color=color)};")
    lines.append("}")
    return "\n".join(lines) + "\n"
