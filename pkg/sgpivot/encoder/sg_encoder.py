"""
Graph convolution encoder for scene graphs

Each layer computes, for every node i::

    h'_i = act(W_self h_i + mean_{j -> i} W_in h_j + mean_{i -> j} W_out h_j + b)

The mean over an empty neighbourhood is zero. Hidden layers use ReLU and the last layer of a multi-layer
stack is linear. A single-layer encoder is treated as a hidden layer and keeps its ReLU.
"""
from typing import List, Optional, Tuple

import numpy as np

from ..exceptions import ContractError
from ..numerics import Tensor, einsum, pool_mean, relu, take_rows
from ..scene_graph import SceneGraph
from .vocabulary import Vocabulary


class NodeReps:
    """Node representations (one row per node id) of a scene graph"""

    def __init__(self, matrix: Tensor, modality: str) -> None:
        self.matrix = matrix
        self.modality = modality

    def __len__(self) -> int:
        return self.matrix.shape[0]

    @property
    def dimension(self) -> int:
        return self.matrix.shape[1]

    def rows(self, ids) -> Tensor:
        return take_rows(self.matrix, list(ids))

    def pooled(self) -> Tensor:
        return pool_mean(self.matrix)


class EncoderParams:
    """
    Learnable tensors of one scene-graph encoder

    Args:
        name (:obj:`str`): prefix of the tensor names (e.g. 'lsg_encoder')

        dimension (:obj:`int`): width of every layer

        layers (:obj:`int`, optional): number of graph-convolution layers. Defaults to 2

        vocabulary (:obj:`Vocabulary`, optional): node labels. Without one the encoder has no embedding
        table and must be given input features

        rng (:obj:`np.random.Generator`, optional): initializer source
    """

    def __init__(self, name: str, dimension: int, layers: int = 2, vocabulary: Optional[Vocabulary] = None,
                 rng: Optional[np.random.Generator] = None) -> None:
        if layers < 1 or dimension < 1:
            raise ContractError("Encoders need at least one layer and a positive dimension")
        rng = np.random.default_rng(0) if rng is None else rng
        self.name = name
        self.dimension = dimension
        self.vocabulary = vocabulary
        self.init_limit = 1.0 / np.sqrt(dimension)

        def draw(shape, tensor_name):
            values = rng.uniform(-self.init_limit, self.init_limit, shape)
            return Tensor(values, requires_grad=True, name=f"{name}.{tensor_name}")

        self.embedding = None  # type: Tensor
        if vocabulary is not None:
            self.embedding = draw((len(vocabulary), dimension), "embedding")

        self.layers = []  # type: List[dict]
        for k in range(layers):
            layer = {w: draw((dimension, dimension), f"layer{k}.{w}") for w in ["w_self", "w_in", "w_out"]}
            layer["bias"] = draw(dimension, f"layer{k}.bias")
            self.layers.append(layer)

    def parameters(self) -> List[Tensor]:
        params = [] if self.embedding is None else [self.embedding]
        for layer in self.layers:
            params.extend(layer[w] for w in ["w_self", "w_in", "w_out", "bias"])
        return params


def neighbourhood_means(g: SceneGraph) -> Tuple[np.ndarray, np.ndarray]:
    """Row-normalized incoming and outgoing adjacency matrices (zero rows for empty neighbourhoods)"""
    n = g.num_nodes
    a_in = np.zeros((n, n))
    a_out = np.zeros((n, n))
    for s, d in g.edges:
        a_in[d, s] = 1.0
        a_out[s, d] = 1.0
    for a in [a_in, a_out]:
        degree = a.sum(axis=1, keepdims=True)
        np.divide(a, degree, out=a, where=degree > 0)
    return a_in, a_out


def embed_nodes(g: SceneGraph, params: EncoderParams) -> Tensor:
    """Embedding rows of the node labels, ordered by node id"""
    if params.embedding is None:
        raise ContractError(f"Encoder '{params.name}' has no embedding table")
    return take_rows(params.embedding, params.vocabulary.indices(g.labels()))


def gcn_forward(g: SceneGraph, features: Tensor, params: EncoderParams) -> NodeReps:
    """
    Runs the graph convolution stack

    Args:
        g (:obj:`SceneGraph`): graph whose edges drive the message passing

        features (:obj:`Tensor`): initial node rows (num_nodes x dimension), ordered by node id

        params (:obj:`EncoderParams`): encoder weights

    Returns:
        *reps* (:obj:`NodeReps`)
    """
    if features.ndim != 2 or features.shape != (g.num_nodes, params.dimension):
        raise ContractError(f"Encoder '{params.name}' needs {g.num_nodes}x{params.dimension} features, "
                            f"got {features.shape}")
    a_in, a_out = neighbourhood_means(g)
    h = features
    last = len(params.layers) - 1
    for k, layer in enumerate(params.layers):
        out = einsum("nd,de->ne", h, layer["w_self"])
        out = out + einsum("nm,md,de->ne", a_in, h, layer["w_in"])
        out = out + einsum("nm,md,de->ne", a_out, h, layer["w_out"])
        out = out + layer["bias"]
        h = relu(out) if k < last or last == 0 else out
    return NodeReps(h, g.modality)


def encode(g: SceneGraph, params: EncoderParams) -> NodeReps:
    """Embeds the node labels and runs the graph convolution stack"""
    return gcn_forward(g, embed_nodes(g, params), params)
