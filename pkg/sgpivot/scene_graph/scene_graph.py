"""
Typed scene graphs shared by the language and visual modalities

A scene graph has object, attribute and relation nodes. Edges are directed
subject -> relation -> object and object -> attribute.

Canonical file format (UTF-8 JSON)::

    {"modality": "language", "nodes": [{"id": 0, "kind": "object", "label": "boy"},
                                       {"id": 1, "kind": "relation", "label": "kick"},
                                       {"id": 2, "kind": "object", "label": "ball"}],
     "edges": [[0, 1], [1, 2]]}
"""
import json
from functools import cached_property
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from ..exceptions import GraphFormatError, SceneGraphValidationError

OBJECT = "object"
ATTRIBUTE = "attribute"
RELATION = "relation"
node_kinds = [OBJECT, ATTRIBUTE, RELATION]

LANGUAGE = "language"
VISUAL = "visual"
MIXED = "mixed"
modalities = [LANGUAGE, VISUAL, MIXED]

DEFAULT_MAX_COMPONENTS = 3


class Node(NamedTuple):
    id: int
    kind: str
    label: str


class SceneGraph:
    """
    Immutable scene graph

    ::

        from sgpivot.scene_graph import SceneGraph

        g = SceneGraph("language",
                       [(0, "object", "boy"), (1, "relation", "kick"), (2, "object", "ball")],
                       [(0, 1), (1, 2)])
        g.num_nodes
      3
        g.objects()
      [0, 2]

    Args:
        modality (:obj:`str`): 'language', 'visual' or 'mixed'

        nodes (:obj:`list`): (id, kind, label) triples

        edges (:obj:`list`): (source id, destination id) pairs
    """

    def __init__(self, modality: str, nodes: Iterable, edges: Iterable) -> None:
        if modality not in modalities:
            raise ValueError(f"Modality needs to be one of: {', '.join(modalities)}")
        self.__dict__["modality"] = modality
        self.__dict__["nodes"] = tuple(Node(int(n[0]), str(n[1]), str(n[2])) for n in nodes)
        self.__dict__["edges"] = tuple((int(e[0]), int(e[1])) for e in edges)

    def __setattr__(self, key, value):
        raise AttributeError("Scene graphs are immutable. Build a new one instead")

    def __eq__(self, other) -> bool:
        if not isinstance(other, SceneGraph):
            return NotImplemented
        return (self.modality, self.nodes, self.edges) == (other.modality, other.nodes, other.edges)

    def __hash__(self) -> int:
        return hash((self.modality, self.nodes, self.edges))

    def __repr__(self) -> str:
        return f"SceneGraph({self.modality}, {self.num_nodes} nodes, {len(self.edges)} edges)"

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    @cached_property
    def _by_id(self) -> Dict[int, Node]:
        return {n.id: n for n in self.nodes}

    @cached_property
    def _successors(self) -> Dict[int, List[int]]:
        succ = {n.id: [] for n in self.nodes}
        for s, d in self.edges:
            succ.setdefault(s, []).append(d)
        return succ

    @cached_property
    def _predecessors(self) -> Dict[int, List[int]]:
        pred = {n.id: [] for n in self.nodes}
        for s, d in self.edges:
            pred.setdefault(d, []).append(s)
        return pred

    def node(self, node_id: int) -> Node:
        return self._by_id[node_id]

    def kind(self, node_id: int) -> str:
        return self._by_id[node_id].kind

    def label(self, node_id: int) -> str:
        return self._by_id[node_id].label

    def successors(self, node_id: int) -> List[int]:
        return list(self._successors.get(node_id, []))

    def predecessors(self, node_id: int) -> List[int]:
        return list(self._predecessors.get(node_id, []))

    def nodes_of_kind(self, kind: str) -> List[int]:
        return [n.id for n in self.nodes if n.kind == kind]

    def objects(self) -> List[int]:
        return self.nodes_of_kind(OBJECT)

    def kind_counts(self) -> Dict[str, int]:
        counts = {k: 0 for k in node_kinds}
        for n in self.nodes:
            counts[n.kind] = counts.get(n.kind, 0) + 1
        return counts

    def labels(self) -> List[str]:
        return [n.label for n in sorted(self.nodes, key=lambda n: n.id)]

    def relation_endpoints(self, node_id: int) -> Tuple[int, int]:
        """(subject, object) of a relation node"""
        return self.predecessors(node_id)[0], self.successors(node_id)[0]

    def attribute_owner(self, node_id: int) -> int:
        return self.predecessors(node_id)[0]

    def with_modality(self, modality: str):
        return SceneGraph(modality, self.nodes, self.edges)

    def with_labels(self, labels: Dict[int, str]):
        """New graph with some node labels replaced"""
        return SceneGraph(self.modality, [(n.id, n.kind, labels.get(n.id, n.label)) for n in self.nodes],
                          self.edges)

    def permuted(self, permutation: Sequence[int]):
        """New graph where node i becomes node permutation[i]. Nodes are listed by their new id"""
        perm = list(permutation)
        nodes = sorted([(perm[n.id], n.kind, n.label) for n in self.nodes])
        edges = sorted((perm[s], perm[d]) for s, d in self.edges)
        return SceneGraph(self.modality, nodes, edges)

    def components(self) -> Tuple[int, np.ndarray]:
        """Number of weakly connected components and the component of each node id"""
        n = self.num_nodes
        if n == 0:
            return 0, np.zeros(0, np.int64)
        rows = [s for s, _ in self.edges]
        cols = [d for _, d in self.edges]
        adjacency = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n)).tocsr()
        count, labels = connected_components(adjacency, directed=True, connection="weak")
        return int(count), labels


def validate(g: SceneGraph, max_components: Optional[int] = DEFAULT_MAX_COMPONENTS) -> List[str]:
    """
    Lists every violated structural invariant of a scene graph

    Args:
        g (:obj:`SceneGraph`): graph to check

        max_components (:obj:`int`, optional): Largest number of weakly connected components allowed.
        None disables the limit. Defaults to 3

    Returns:
        *violations* (:obj:`list`): Human-readable violations naming node/edge ids. Empty if the graph is valid
    """
    violations = []
    ids = [n.id for n in g.nodes]
    n = len(ids)
    if len(set(ids)) != n:
        dup = sorted({i for i in ids if ids.count(i) > 1})
        violations.append(f"duplicate node ids {dup}")
    if sorted(ids) != list(range(n)):
        violations.append(f"node ids are not dense 0..{n - 1}")
    for node in g.nodes:
        if node.kind not in node_kinds:
            violations.append(f"node {node.id} has unknown kind '{node.kind}'")
        if node.label == "":
            violations.append(f"node {node.id} has an empty label")
    if not any(node.kind == OBJECT for node in g.nodes):
        violations.append("no Object node")

    known = set(ids)
    seen = set()
    for s, d in g.edges:
        if s not in known or d not in known:
            violations.append(f"edge ({s}, {d}) references a missing node")
            continue
        if s == d:
            violations.append(f"self-loop on node {s}")
        if (s, d) in seen:
            violations.append(f"duplicate edge ({s}, {d})")
        seen.add((s, d))
        if g.kind(s) == OBJECT and g.kind(d) == OBJECT:
            violations.append(f"edge ({s}, {d}) joins two objects without a relation node")
    if violations:
        return violations

    for node in g.nodes:
        preds, succs = g.predecessors(node.id), g.successors(node.id)
        if node.kind == RELATION:
            if len(preds) != 1 or g.kind(preds[0]) != OBJECT:
                violations.append(f"relation node {node.id} needs exactly one incoming edge from an object")
            if len(succs) != 1 or g.kind(succs[0]) != OBJECT:
                violations.append(f"relation node {node.id} needs exactly one outgoing edge to an object")
        elif node.kind == ATTRIBUTE:
            if len(preds) != 1 or g.kind(preds[0]) != OBJECT:
                violations.append(f"attribute node {node.id} needs exactly one incoming edge from an object")
            if succs:
                violations.append(f"attribute node {node.id} has outgoing edges")

    if g.modality != MIXED:
        # a fused graph may keep the language and the visual copy of one relation
        triples = {}
        for node in sorted(g.nodes_of_kind(RELATION)):
            preds, succs = g.predecessors(node), g.successors(node)
            if len(preds) != 1 or len(succs) != 1:
                continue
            key = (preds[0], succs[0], g.label(node))
            if key in triples:
                violations.append(f"relation node {node} repeats label '{key[2]}' of relation node {triples[key]} "
                                  f"between objects {key[0]} and {key[1]}")
            else:
                triples[key] = node

    count, labels = g.components()
    if count > 1:
        if max_components is not None and count > max_components:
            violations.append(f"graph has {count} connected components, more than {max_components}")
        for c in range(count):
            members = [i for i in range(n) if labels[i] == c]
            if not any(g.kind(i) == OBJECT for i in members):
                violations.append(f"component with nodes {members} has no object")
    return violations


def is_valid(g: SceneGraph, max_components: Optional[int] = DEFAULT_MAX_COMPONENTS) -> bool:
    return not validate(g, max_components)


def check(g: SceneGraph, max_components: Optional[int] = DEFAULT_MAX_COMPONENTS) -> None:
    """Raises :obj:`SceneGraphValidationError` listing all violations if the graph is not valid"""
    violations = validate(g, max_components)
    if violations:
        raise SceneGraphValidationError(violations)


def to_dict(g: SceneGraph) -> dict:
    nodes = [{"id": n.id, "kind": n.kind, "label": n.label} for n in sorted(g.nodes, key=lambda n: n.id)]
    return {"modality": g.modality, "nodes": nodes, "edges": [list(e) for e in sorted(g.edges)]}


def serialize(g: SceneGraph) -> str:
    """Canonical text of a scene graph: nodes sorted by id, edges sorted lexicographically"""
    return json.dumps(to_dict(g), ensure_ascii=False)


def from_dict(data, text: str = "") -> SceneGraph:
    def fail(message, needle=None):
        position = text.find(needle) if needle is not None and text else -1
        raise GraphFormatError(message, position)

    if not isinstance(data, dict):
        fail("Scene graph must be a JSON object")
    for key in ["modality", "nodes", "edges"]:
        if key not in data:
            fail(f"Scene graph is missing the '{key}' field")
    if data["modality"] not in modalities:
        fail(f"Unknown modality '{data['modality']}'", f'"{data["modality"]}"')
    if not isinstance(data["nodes"], list) or not isinstance(data["edges"], list):
        fail("'nodes' and 'edges' must be lists")

    nodes = []
    for k, node in enumerate(data["nodes"]):
        if not isinstance(node, dict) or set(node.keys()) != {"id", "kind", "label"}:
            fail(f"nodes[{k}] must have exactly the fields id, kind and label")
        if not isinstance(node["id"], int) or isinstance(node["id"], bool):
            fail(f"nodes[{k}].id must be an integer")
        if node["kind"] not in node_kinds:
            fail(f"nodes[{k}] has unknown kind '{node['kind']}'", f'"{node["kind"]}"')
        if not isinstance(node["label"], str):
            fail(f"nodes[{k}].label must be a string")
        nodes.append((node["id"], node["kind"], node["label"]))

    edges = []
    for k, edge in enumerate(data["edges"]):
        if not isinstance(edge, list) or len(edge) != 2 or not all(isinstance(x, int) for x in edge):
            fail(f"edges[{k}] must be a pair of integers")
        edges.append(tuple(edge))
    return SceneGraph(data["modality"], sorted(nodes), sorted(edges))


def deserialize(text: str) -> SceneGraph:
    """
    Reads a scene graph from its JSON text

    Raises:
        :obj:`GraphFormatError` with the character position of the problem
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise GraphFormatError(f"Malformed scene graph: {err.msg}", err.pos) from err
    return from_dict(data, text)


def save(g: SceneGraph, file_name: str) -> None:
    with open(file_name, "w", encoding="utf-8") as f:
        f.write(serialize(g))
        f.write("\n")


def load(file_name: str) -> SceneGraph:
    with open(file_name, "r", encoding="utf-8") as f:
        return deserialize(f.read())


def canonical_form(g: SceneGraph) -> tuple:
    """
    Relabelling-invariant form of a scene graph

    Colour refinement over (kind, label) and directed neighbourhoods. While a colour class holds more
    than one node, every member of the first such class is individualised in turn and the smallest
    resulting form is kept, so two scene graphs are isomorphic exactly when their canonical forms are
    equal. The search only branches on graphs with symmetric parts.
    """
    order = sorted(g.nodes, key=lambda n: n.id)
    index = {n.id: k for k, n in enumerate(order)}
    n = len(order)
    succ = [[index[d] for d in g.successors(node.id)] for node in order]
    pred = [[index[s] for s in g.predecessors(node.id)] for node in order]
    kinds = [(node.kind, node.label) for node in order]

    def rank(signatures):
        table = {s: r for r, s in enumerate(sorted(set(signatures)))}
        return [table[s] for s in signatures]

    def refine(colors):
        while True:
            refined = rank([(colors[i], tuple(sorted(colors[j] for j in succ[i])),
                             tuple(sorted(colors[j] for j in pred[i]))) for i in range(n)])
            if len(set(refined)) == len(set(colors)):
                return refined
            colors = refined

    def form(position):
        labels = [None] * n
        for i in range(n):
            labels[position[i]] = kinds[i]
        edges = sorted((position[index[s]], position[index[d]]) for s, d in g.edges)
        return tuple(labels), tuple(edges)

    def search(colors):
        colors = refine(colors)
        if len(set(colors)) == n:
            return form(colors)
        ambiguous = min(c for c in set(colors) if colors.count(c) > 1)
        members = [i for i in range(n) if colors[i] == ambiguous]
        return min(search(rank([(colors[i], 0 if i == chosen else 1) for i in range(n)])) for chosen in members)

    labels, edges = search(rank(kinds)) if n else ((), ())
    return g.modality, labels, edges


def isomorphic(a: SceneGraph, b: SceneGraph) -> bool:
    return a.num_nodes == b.num_nodes and len(a.edges) == len(b.edges) and canonical_form(a) == canonical_form(b)
