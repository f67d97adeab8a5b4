"""The DD embedding graph: idle windows joined by crosstalk channels."""
from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Optional

from .schedule import DeviceModel, IdleWindow, Time


@dataclass(frozen=True)
class DDEdge:
    node_a: int
    node_b: int
    overlap_start: Time
    overlap_end: Time


@dataclass
class DDGraph:
    nodes: dict
    edges: list
    adjacency: dict = field(default_factory=dict)

    def neighbors(self, node: int) -> list:
        out = []
        for idx in self.adjacency.get(node, ()):
            edge = self.edges[idx]
            out.append(edge.node_b if edge.node_a == node else edge.node_a)
        return out

    def edge_between(self, a: int, b: int) -> Optional[DDEdge]:
        for idx in self.adjacency.get(a, ()):
            edge = self.edges[idx]
            if (edge.node_b if edge.node_a == a else edge.node_a) == b:
                return edge
        return None

    def cycle_rank(self) -> int:
        return len(self.edges) - len(self.nodes) + len(connected_components(self))

    def to_dict(self) -> dict:
        from .schedule import _time_to_json

        return {
            "nodes": [
                {"id": n.id, "qubit": n.qubit, "start": _time_to_json(n.start), "end": _time_to_json(n.end)}
                for n in self.nodes.values()
            ],
            "edges": [[e.node_a, e.node_b] for e in self.edges],
        }


@dataclass(frozen=True)
class TraversalPlan:
    order: tuple
    parent: dict
    fvs: frozenset


def build_graph(idles, device: DeviceModel) -> DDGraph:
    """Join idles on coupled qubits whose intervals share positive time."""
    nodes = {w.id: w for w in idles}
    per_qubit = defaultdict(list)
    for w in idles:
        per_qubit[w.qubit].append(w)
    for ws in per_qubit.values():
        ws.sort(key=lambda w: w.start)

    found = []
    for qa, qb in sorted(device.coupling):
        wa, wb = per_qubit.get(qa), per_qubit.get(qb)
        if not wa or not wb:
            continue
        i = j = 0
        while i < len(wa) and j < len(wb):
            a, b = wa[i], wb[j]
            lo, hi = max(a.start, b.start), min(a.end, b.end)
            if hi > lo:
                found.append(DDEdge(min(a.id, b.id), max(a.id, b.id), lo, hi))
            # advance whichever window finishes first
            if a.end <= b.end:
                i += 1
            else:
                j += 1
    found.sort(key=lambda e: (e.node_a, e.node_b))
    adjacency = {n: [] for n in nodes}
    for idx, e in enumerate(found):
        adjacency[e.node_a].append(idx)
        adjacency[e.node_b].append(idx)
    return DDGraph(nodes=nodes, edges=found, adjacency=adjacency)


def connected_components(graph: DDGraph) -> list:
    seen = set()
    comps = []
    for root in sorted(graph.nodes):
        if root in seen:
            continue
        comp = {root}
        seen.add(root)
        stack = [root]
        while stack:
            n = stack.pop()
            for m in graph.neighbors(n):
                if m not in seen:
                    seen.add(m)
                    comp.add(m)
                    stack.append(m)
        comps.append(comp)
    return comps


def _rank(window: IdleWindow):
    return (window.start, window.qubit, window.id)


def bfs_traversal(graph: DDGraph) -> TraversalPlan:
    """Breadth-first order per component, collecting multi-ancestor nodes.

    A node is put in the feedback vertex set when, at the moment it is
    dequeued, two or more of its neighbours were dequeued before it and are
    not themselves in the set.  Those nodes go to the end of the order.
    """
    nodes = graph.nodes
    order = []
    fvs = []
    fvs_set = set()
    parent = {}
    visited = set()
    comps = connected_components(graph)
    for comp in comps:
        root = min(comp, key=lambda n: _rank(nodes[n]))
        queue = deque([root])
        queued = {root}
        while queue:
            n = queue.popleft()
            nbrs = sorted(graph.neighbors(n), key=lambda m: _rank(nodes[m]))
            earlier = [m for m in nbrs if m in visited and m not in fvs_set]
            visited.add(n)
            if len(earlier) >= 2:
                fvs.append(n)
                fvs_set.add(n)
                parent[n] = None
            else:
                order.append(n)
                parent[n] = earlier[0] if earlier else None
            for m in nbrs:
                if m not in queued:
                    queued.add(m)
                    queue.append(m)
    return TraversalPlan(order=tuple(order + fvs), parent=parent, fvs=frozenset(fvs))
