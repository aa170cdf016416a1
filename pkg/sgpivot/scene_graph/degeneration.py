"""
Relation degeneration and inflation

The augmentors work on a labelled graph whose nodes are the objects and attributes of a scene graph.
Each relation node becomes a labelled edge subject -> object, and each object -> attribute edge gets
the reserved label ``attr``. Inflation is the inverse.
"""
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import breadth_first_order

from ..exceptions import GraphFormatError
from .scene_graph import ATTRIBUTE, OBJECT, RELATION, Node, SceneGraph, check

ATTR = "attr"


class LabeledGraph:
    """
    Scene graph without relation nodes

    Args:
        modality (:obj:`str`): modality of the scene graph it came from

        nodes (:obj:`list`): (id, kind, label) of objects and attributes with dense ids

        edges (:obj:`list`): (source, destination, label) triples

        source_ids (:obj:`list`, optional): id each node had in the scene graph it came from
    """

    def __init__(self, modality: str, nodes: Iterable, edges: Iterable, source_ids: Sequence[int] = None):
        self.modality = modality
        self.nodes = tuple(Node(int(n[0]), str(n[1]), str(n[2])) for n in nodes)
        self.edges = tuple((int(e[0]), int(e[1]), str(e[2])) for e in edges)
        self.source_ids = tuple(source_ids) if source_ids is not None else tuple(n.id for n in self.nodes)

    def __repr__(self) -> str:
        return f"LabeledGraph({self.modality}, {len(self.nodes)} nodes, {len(self.edges)} edges)"

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    def kind(self, node_id: int) -> str:
        return self.nodes[node_id].kind

    def label(self, node_id: int) -> str:
        return self.nodes[node_id].label

    def objects(self) -> List[int]:
        return [n.id for n in self.nodes if n.kind == OBJECT]

    @cached_property
    def _undirected(self):
        n = self.num_nodes
        rows = [s for s, d, _ in self.edges] + [d for s, d, _ in self.edges]
        cols = [d for s, d, _ in self.edges] + [s for s, d, _ in self.edges]
        matrix = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n)).tocsr()
        matrix.sum_duplicates()
        matrix.sort_indices()
        return matrix

    @cached_property
    def _edge_set(self) -> Dict[Tuple[int, int], str]:
        return {(s, d): lbl for s, d, lbl in self.edges}

    def edge_label(self, source: int, destination: int) -> Optional[str]:
        return self._edge_set.get((source, destination))

    def adjacent(self, a: int, b: int) -> bool:
        """Whether an edge joins the two nodes in either direction"""
        return (a, b) in self._edge_set or (b, a) in self._edge_set

    def neighbors(self, node_id: int, hops: int = 1) -> List[int]:
        """Nodes within *hops* undirected steps, excluding the node itself, sorted by id"""
        matrix = self._undirected
        seen = {node_id}
        frontier = [node_id]
        for _ in range(hops):
            following = []
            for v in frontier:
                for w in matrix.indices[matrix.indptr[v]:matrix.indptr[v + 1]]:
                    if w not in seen:
                        seen.add(int(w))
                        following.append(int(w))
            frontier = following
        seen.discard(node_id)
        return sorted(seen)

    def shortest_path(self, source: int, destination: int) -> List[int]:
        """
        Breadth-first undirected path including both endpoints. Neighbours are explored in id order.
        Returns an empty list when the nodes are disconnected
        """
        if source == destination:
            return [source]
        _, predecessors = breadth_first_order(self._undirected, source, directed=False,
                                              return_predecessors=True)
        if predecessors[destination] < 0:
            return []
        path = [destination]
        while path[-1] != source:
            path.append(int(predecessors[path[-1]]))
        return path[::-1]

    def extended(self, nodes: Iterable = (), edges: Iterable = ()):
        """New labelled graph with nodes and edges appended"""
        new_nodes = list(self.nodes) + [tuple(n) for n in nodes]
        ids = list(self.source_ids) + [-1] * (len(new_nodes) - len(self.nodes))
        return LabeledGraph(self.modality, new_nodes, list(self.edges) + [tuple(e) for e in edges], ids)


def degenerate_relations(g: SceneGraph) -> LabeledGraph:
    """
    Removes relation nodes from a valid scene graph

    Object and attribute nodes keep their relative order and are renumbered densely. Each relation node
    becomes an edge labelled with its own label; object -> attribute edges are labelled ``attr``.
    """
    check(g, max_components=None)
    kept = [n for n in sorted(g.nodes, key=lambda n: n.id) if n.kind != RELATION]
    new_id = {n.id: k for k, n in enumerate(kept)}
    edges = []
    for n in g.nodes:
        if n.kind == RELATION:
            subject, obj = g.relation_endpoints(n.id)
            edges.append((new_id[subject], new_id[obj], n.label))
        elif n.kind == ATTRIBUTE:
            edges.append((new_id[g.attribute_owner(n.id)], new_id[n.id], ATTR))
    nodes = [(new_id[n.id], n.kind, n.label) for n in kept]
    return LabeledGraph(g.modality, nodes, sorted(edges), [n.id for n in kept])


def inflate_relations(lg: LabeledGraph, relation_labels: Optional[Iterable[str]] = None) -> SceneGraph:
    """
    Turns every non-``attr`` edge of a labelled graph back into a relation node

    Object and attribute nodes keep their ids. Relation nodes are appended after them, one per edge, in
    edge order.

    Args:
        lg (:obj:`LabeledGraph`): graph to inflate

        relation_labels (:obj:`Iterable[str]`, optional): Allowed relation labels. Any label is accepted if None

    Raises:
        :obj:`GraphFormatError` for unknown edge labels and badly typed edges
    """
    allowed = None if relation_labels is None else set(relation_labels)
    n = lg.num_nodes
    nodes = [(node.id, node.kind, node.label) for node in lg.nodes]
    edges = []
    for k, (s, d, label) in enumerate(lg.edges):
        if not (0 <= s < n and 0 <= d < n):
            raise GraphFormatError(f"Edge {k} ({s}, {d}) references a missing node")
        if label == ATTR:
            if lg.kind(s) != OBJECT or lg.kind(d) != ATTRIBUTE:
                raise GraphFormatError(f"Edge {k} labelled '{ATTR}' must go from an object to an attribute")
            edges.append((s, d))
            continue
        if allowed is not None and label not in allowed:
            raise GraphFormatError(f"Edge {k} has unknown relation label '{label}'")
        if lg.kind(s) != OBJECT or lg.kind(d) != OBJECT:
            raise GraphFormatError(f"Relation edge {k} must join two objects")
        rel = len(nodes)
        nodes.append((rel, RELATION, label))
        edges.extend([(s, rel), (rel, d)])
    return SceneGraph(lg.modality, nodes, sorted(edges))
