"""
Node augmentor, relation-label head and triaffine relation augmentor

All three read node representations of a degenerated visual scene graph (rows aligned with the labelled
graph's node ids) and produce probability vectors over the vocabularies in :obj:`VsgVocabularies`.
"""
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from ..exceptions import ConfigurationError, ContractError
from ..numerics import Tensor, concat, einsum, linear, log_softmax, pool_mean, relu, sigmoid, softmax
from ..numerics import stack, take_rows
from ..scene_graph import OBJECT, RELATION, LabeledGraph
from .vocabularies import VsgVocabularies


class AugmentorParams:
    """
    Learnable tensors of the hallucination heads

    Output layers start at zero, so before training every head is uniform except for the empty label,
    whose bias is *epsilon_logit*.

    Args:
        vocabularies (:obj:`VsgVocabularies`): label tables the heads predict over

        dimension (:obj:`int`): node representation width *d*

        triaffine_hidden (:obj:`int`, optional): number of triaffine slices *h*. Defaults to 4

        epsilon_logit (:obj:`float`, optional): initial bias of the empty label. Defaults to 2.0

        rng (:obj:`np.random.Generator`, optional): initializer source
    """

    def __init__(self, vocabularies: VsgVocabularies, dimension: int, triaffine_hidden: int = 4,
                 epsilon_logit: float = 2.0, rng: Optional[np.random.Generator] = None) -> None:
        rng = np.random.default_rng(0) if rng is None else rng
        d, h = dimension, triaffine_hidden
        n_na, n_r, n_pa = len(vocabularies.na_labels), len(vocabularies.relations), len(vocabularies.pa_labels)
        self.vocabularies = vocabularies
        self.dimension = d

        def param(name, values):
            return Tensor(values, requires_grad=True, name=f"augmentor.{name}")

        limit = np.sqrt(6.0 / (2 * d))
        self.node_hidden = param("node_hidden", rng.uniform(-limit, limit, (d, d)))
        self.node_hidden_bias = param("node_hidden_bias", np.zeros(d))
        self.node_out = param("node_out", np.zeros((d, n_na)))
        na_bias = np.zeros(n_na)
        na_bias[vocabularies.na_epsilon] = epsilon_logit
        self.node_out_bias = param("node_out_bias", na_bias)

        limit = np.sqrt(6.0 / (3 * d))
        self.relation_hidden = param("relation_hidden", rng.uniform(-limit, limit, (2 * d, d)))
        self.relation_hidden_bias = param("relation_hidden_bias", np.zeros(d))
        self.relation_out = param("relation_out", np.zeros((d, n_r)))
        self.relation_out_bias = param("relation_out_bias", np.zeros(n_r))

        self.triaffine = param("triaffine", rng.normal(0.0, 1.0 / d, (h, d + 1, d, d + 1)))
        self.pair_out = param("pair_out", np.zeros((h, n_pa)))
        pa_bias = np.zeros(n_pa)
        pa_bias[vocabularies.pa_epsilon] = epsilon_logit
        self.pair_out_bias = param("pair_out_bias", pa_bias)

    def parameters(self) -> List[Tensor]:
        return [self.node_hidden, self.node_hidden_bias, self.node_out, self.node_out_bias,
                self.relation_hidden, self.relation_hidden_bias, self.relation_out, self.relation_out_bias,
                self.triaffine, self.pair_out, self.pair_out_bias]


class NodeAugmentation(NamedTuple):
    logits: Tensor
    probabilities: Tensor
    hidden: Tensor
    attention: np.ndarray
    neighbors: List[int]

    def log_probabilities(self) -> Tensor:
        return log_softmax(self.logits)


class PairAugmentation(NamedTuple):
    logits: Tensor
    probabilities: Tensor
    path: List[int]

    def log_probabilities(self) -> Tensor:
        return log_softmax(self.logits)


def _check_reps(lg: LabeledGraph, reps: Tensor) -> None:
    if reps.ndim != 2 or reps.shape[0] != lg.num_nodes:
        raise ContractError(f"Need one representation row per node ({lg.num_nodes}), got shape {reps.shape}")


def node_augment_scores(node: int, lg: LabeledGraph, reps: Tensor, params: AugmentorParams,
                        hops: int = 1) -> NodeAugmentation:
    """
    Distribution over new neighbours (objects, attributes or nothing) for an object node

    Neighbours within *hops* undirected steps are routed with dot-product attention;
    h = r_i + sum_k alpha_k r_k, or h = r_i for an isolated node.

    Args:
        node (:obj:`int`): object id in the labelled graph

        lg (:obj:`LabeledGraph`): degenerated visual scene graph

        reps (:obj:`Tensor`): node representations aligned with *lg*

        params (:obj:`AugmentorParams`): heads

        hops (:obj:`int`, optional): routing radius. Defaults to 1
    """
    _check_reps(lg, reps)
    if lg.kind(node) != OBJECT:
        raise ContractError(f"Node augmentation applies to objects only; node {node} is {lg.kind(node)}")
    r_i = reps[node]
    neighbors = lg.neighbors(node, hops)
    if neighbors:
        r_k = take_rows(reps, neighbors)
        alpha = softmax(einsum("d,nd->n", r_i, r_k))
        h = r_i + einsum("n,nd->d", alpha, r_k)
        attention = alpha.values.copy()
    else:
        h = r_i
        attention = np.zeros(0)
    hidden = relu(linear(h, params.node_hidden, params.node_hidden_bias))
    logits = linear(hidden, params.node_out, params.node_out_bias)
    return NodeAugmentation(logits, softmax(logits), h, attention, neighbors)


def relation_label_logits(h_na: Tensor, r_i: Tensor, params: AugmentorParams) -> Tensor:
    if not params.vocabularies.relations:
        raise ConfigurationError("Relation vocabulary is empty; new objects cannot be attached")
    if h_na.shape != (params.dimension,) or r_i.shape != (params.dimension,):
        raise ContractError("Relation-label head needs two vectors of the model dimension")
    hidden = relu(linear(concat([h_na, r_i]), params.relation_hidden, params.relation_hidden_bias))
    return linear(hidden, params.relation_out, params.relation_out_bias)


def node_relation_label(h_na: Tensor, r_i: Tensor, params: AugmentorParams) -> Tensor:
    """Distribution over relation labels linking an object to the new object predicted for it"""
    return softmax(relation_label_logits(h_na, r_i, params))


def path_representation(lg: LabeledGraph, reps: Tensor, source: int, destination: int) -> Tuple[Tensor, List[int]]:
    """Mean of the rows on the shortest undirected path (zero vector when disconnected)"""
    path = lg.shortest_path(source, destination)
    if not path:
        return Tensor(np.zeros(reps.shape[1])), path
    return pool_mean(take_rows(reps, path)), path


def pair_logits(r_i: Tensor, r_j: Tensor, r_path: Tensor, params: AugmentorParams) -> Tensor:
    """
    Triaffine scores for a batch of ordered pairs

    Args:
        r_i, r_j, r_path (:obj:`Tensor`): (pairs x d) rows for the subject, the object and the path

    Returns:
        *logits* (:obj:`Tensor`): pairs x |D^pa|
    """
    ones = Tensor(np.ones((r_i.shape[0], 1)))
    left = concat([r_i, ones], axis=1)
    right = concat([r_path, ones], axis=1)
    hidden = sigmoid(einsum("hadb,pa,pd,pb->ph", params.triaffine, left, r_j, right))
    return linear(hidden, params.pair_out, params.pair_out_bias)


def relation_augment_scores(source: int, destination: int, lg: LabeledGraph, reps: Tensor,
                            params: AugmentorParams) -> PairAugmentation:
    """
    Distribution over a new directed relation source -> destination (or nothing)

    Raises:
        :obj:`ContractError` if the nodes are equal, are relations, or are already joined by an edge
    """
    _check_reps(lg, reps)
    if source == destination:
        raise ContractError("Relation augmentation needs two distinct nodes")
    if RELATION in [lg.kind(source), lg.kind(destination)]:
        raise ContractError("Relation augmentation does not apply to relation nodes")
    if lg.adjacent(source, destination):
        raise ContractError(f"Nodes {source} and {destination} are already joined by an edge")
    r_path, path = path_representation(lg, reps, source, destination)
    logits = pair_logits(reps[source].reshape(1, -1), reps[destination].reshape(1, -1), r_path.reshape(1, -1),
                         params)[0]
    return PairAugmentation(logits, softmax(logits), path)


def candidate_pairs(lg: LabeledGraph, limit: int = 500) -> List[Tuple[int, int]]:
    """Object pairs i < j with no edge in either direction, in id order, at most *limit* of them"""
    objects = lg.objects()
    pairs = []
    for a, i in enumerate(objects):
        for j in objects[a + 1:]:
            if not lg.adjacent(i, j):
                pairs.append((i, j))
                if len(pairs) >= limit:
                    return pairs
    return pairs


def pair_batch_logits(pairs: Sequence[Tuple[int, int]], lg: LabeledGraph, reps: Tensor,
                      params: AugmentorParams) -> Tensor:
    """Triaffine logits for many candidate pairs at once (pairs x |D^pa|)"""
    _check_reps(lg, reps)
    paths = [path_representation(lg, reps, i, j)[0] for i, j in pairs]
    r_path = Tensor(np.zeros((0, reps.shape[1]))) if not paths else stack(paths, axis=0)
    return pair_logits(take_rows(reps, [i for i, _ in pairs]), take_rows(reps, [j for _, j in pairs]), r_path,
                       params)
