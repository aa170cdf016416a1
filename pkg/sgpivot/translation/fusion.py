"""
Cross-modal alignment and fusion of a language and a visual scene graph

Same-kind node pairs whose cosine similarity exceeds the threshold are merged greedily, best score first
(ties by lowest (i, j)). Objects are matched first. An attribute pair merges only if its owners merged; a
relation pair merges only if both endpoints merged correspondingly. Merged nodes keep the language label
and start from the mean of their two rows; everything else is carried over and the edges are unioned.
"""
from typing import Dict, List, NamedTuple, Optional, Tuple

import numpy as np

from ..encoder import EncoderParams, NodeReps, gcn_forward
from ..exceptions import ContractError, SceneGraphValidationError
from ..numerics import Tensor, einsum
from ..scene_graph import ATTRIBUTE, MIXED, OBJECT, RELATION, SceneGraph, validate
from ..scene_graph.scene_graph import DEFAULT_MAX_COMPONENTS

FROM_LSG = "lsg"
FROM_VSG = "vsg"
MERGED = "merged"


class Provenance(NamedTuple):
    origin: str
    lsg_id: Optional[int]
    vsg_id: Optional[int]


class FusedGraph:
    """
    Mixed scene graph with the origin and the initial representation of every node

    Results:
        graph (:obj:`SceneGraph`): fused graph. Language nodes keep their ids, then unmatched visual nodes follow
        in id order

        provenance (:obj:`list`): :obj:`Provenance` per fused node id

        initial_rows (:obj:`Tensor`): one row per fused node, differentiable w.r.t. both input representations

        merged (:obj:`list`): matched (language id, visual id) pairs in matching order
    """

    def __init__(self, graph: SceneGraph, provenance: List[Provenance], initial_rows: Tensor,
                 merged: List[Tuple[int, int]]) -> None:
        self.graph = graph
        self.provenance = provenance
        self.initial_rows = initial_rows
        self.merged = merged

    @property
    def num_merged(self) -> int:
        return len(self.merged)


def _unit_rows(values: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(values, axis=1, keepdims=True)
    return np.divide(values, norms, out=np.zeros_like(values), where=norms > 0)


def match_nodes(lsg: SceneGraph, lsg_reps: np.ndarray, vsg: SceneGraph, vsg_reps: np.ndarray,
                alpha: float) -> List[Tuple[int, int]]:
    """Greedy same-kind matching on cosine similarity above *alpha*"""
    scores = _unit_rows(lsg_reps) @ _unit_rows(vsg_reps).T
    left, right = {}, {}

    def greedy(candidates):
        for _, i, j in sorted(candidates):
            if i not in left and j not in right:
                left[i], right[j] = j, i

    def above(kind):
        return [(-scores[i, j], i, j) for i in lsg.nodes_of_kind(kind) for j in vsg.nodes_of_kind(kind)
                if scores[i, j] > alpha]

    greedy(above(OBJECT))
    candidates = []
    for _, i, j in above(ATTRIBUTE) + above(RELATION):
        if lsg.kind(i) == ATTRIBUTE:
            owner = lsg.attribute_owner(i)
            consistent = left.get(owner) == vsg.attribute_owner(j)
        else:
            s_l, o_l = lsg.relation_endpoints(i)
            s_v, o_v = vsg.relation_endpoints(j)
            consistent = left.get(s_l) == s_v and left.get(o_l) == o_v
        if consistent:
            candidates.append((-scores[i, j], i, j))
    greedy(candidates)
    return sorted(left.items(), key=lambda p: (-scores[p[0], p[1]], p[0], p[1]))


def align_and_fuse(lsg: SceneGraph, lsg_reps: NodeReps, vsg: SceneGraph, vsg_reps: NodeReps,
                   alpha: float = 0.5) -> FusedGraph:
    """
    Fuses a language and a visual scene graph into one mixed graph

    Args:
        lsg (:obj:`SceneGraph`): language scene graph

        lsg_reps (:obj:`NodeReps`): its node representations

        vsg (:obj:`SceneGraph`): visual scene graph

        vsg_reps (:obj:`NodeReps`): its node representations

        alpha (:obj:`float`, optional): merge threshold on cosine similarity. Defaults to 0.5

    Returns:
        *fused* (:obj:`FusedGraph`)
    """
    if len(lsg_reps) != lsg.num_nodes or len(vsg_reps) != vsg.num_nodes:
        raise ContractError("Need one representation row per node of each graph")
    if lsg_reps.dimension != vsg_reps.dimension:
        raise ContractError(f"Representation widths differ: {lsg_reps.dimension} vs {vsg_reps.dimension}")

    merged = match_nodes(lsg, lsg_reps.matrix.values, vsg, vsg_reps.matrix.values, alpha)
    vsg_to_fused = {j: i for i, j in merged}
    lsg_to_vsg = dict(merged)

    nodes = [(n.id, n.kind, n.label) for n in sorted(lsg.nodes, key=lambda n: n.id)]
    provenance = [Provenance(MERGED, i, lsg_to_vsg[i]) if i in lsg_to_vsg else Provenance(FROM_LSG, i, None)
                  for i, _, _ in nodes]
    for n in sorted(vsg.nodes, key=lambda n: n.id):
        if n.id not in vsg_to_fused:
            vsg_to_fused[n.id] = len(nodes)
            nodes.append((len(nodes), n.kind, n.label))
            provenance.append(Provenance(FROM_VSG, None, n.id))

    edges = set(lsg.edges)
    edges.update((vsg_to_fused[s], vsg_to_fused[d]) for s, d in vsg.edges)
    graph = SceneGraph(MIXED, nodes, sorted(edges))

    limit = lsg.components()[0] + vsg.components()[0]
    violations = validate(graph, max(limit, DEFAULT_MAX_COMPONENTS))
    if violations:
        raise SceneGraphValidationError(["fused graph: " + v for v in violations])

    select_l = np.zeros((len(nodes), lsg.num_nodes))
    select_v = np.zeros((len(nodes), vsg.num_nodes))
    for k, p in enumerate(provenance):
        if p.origin == MERGED:
            select_l[k, p.lsg_id] = 0.5
            select_v[k, p.vsg_id] = 0.5
        elif p.origin == FROM_LSG:
            select_l[k, p.lsg_id] = 1.0
        else:
            select_v[k, p.vsg_id] = 1.0
    rows = einsum("fn,nd->fd", select_l, lsg_reps.matrix) + einsum("fm,md->fd", select_v, vsg_reps.matrix)
    return FusedGraph(graph, provenance, rows, merged)


def encode_and_pool(fused: FusedGraph, encoder: EncoderParams) -> Tuple[NodeReps, Tensor]:
    """Runs the mixed-graph encoder from the provenance rows and mean-pools the result"""
    reps = gcn_forward(fused.graph, fused.initial_rows, encoder)
    return reps, reps.pooled()
