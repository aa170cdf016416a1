"""
Completing vision: one or more augmentation passes over a skeleton
"""
from typing import NamedTuple

import numpy as np

from ..encoder import EncoderParams, encode
from ..exceptions import SceneGraphValidationError
from ..numerics import Tensor, no_grad, take_rows
from ..scene_graph import ATTR, OBJECT, SceneGraph, check, degenerate_relations, inflate_relations, validate
from ..scene_graph.degeneration import LabeledGraph
from ..scene_graph.scene_graph import DEFAULT_MAX_COMPONENTS
from .augmentors import (AugmentorParams, candidate_pairs, node_augment_scores, pair_batch_logits,
                         relation_label_logits)
from .vocabularies import EPSILON


class HallucinationConfig(NamedTuple):
    hops: int = 1
    max_pairs: int = 500
    passes: int = 1
    max_components: int = DEFAULT_MAX_COMPONENTS

    @staticmethod
    def from_parameters(vsh: dict):
        return HallucinationConfig(int(vsh["k_hops"]), int(vsh["max_pairs"]), int(vsh["passes"]),
                                   int(vsh["max_components"]))


def labeled_reps(g: SceneGraph, lg: LabeledGraph, encoder: EncoderParams) -> Tensor:
    """Encodes the node-form graph and keeps the rows of the labelled graph's nodes"""
    reps = encode(g, encoder).matrix
    return take_rows(reps, list(lg.source_ids))


def augmentation_pass(g: SceneGraph, encoder: EncoderParams, params: AugmentorParams,
                      config: HallucinationConfig = HallucinationConfig()) -> SceneGraph:
    vocab = params.vocabularies
    lg = degenerate_relations(g)
    reps = labeled_reps(g, lg, encoder)

    new_nodes, new_edges = [], []
    for i in lg.objects():
        scores = node_augment_scores(i, lg, reps, params, config.hops)
        k = int(np.argmax(scores.probabilities.values))
        if vocab.na_labels[k] == EPSILON:
            continue
        nid = lg.num_nodes + len(new_nodes)
        kind = vocab.na_kind(k)
        new_nodes.append((nid, kind, vocab.na_labels[k]))
        if kind == OBJECT:
            rel = int(np.argmax(relation_label_logits(scores.hidden, reps[i], params).values))
            new_edges.append((i, nid, vocab.relations[rel]))
        else:
            new_edges.append((i, nid, ATTR))

    pairs = candidate_pairs(lg, config.max_pairs)
    if pairs:
        choices = np.argmax(pair_batch_logits(pairs, lg, reps, params).values, axis=1)
        for (i, j), k in zip(pairs, choices):
            if vocab.pa_labels[k] != EPSILON:
                new_edges.append((i, j, vocab.pa_labels[k]))

    if not new_nodes and not new_edges:
        return g
    grown = lg.extended(new_nodes, new_edges)
    return inflate_relations(grown, vocab.relations)


def complete_vision(skeleton: SceneGraph, encoder: EncoderParams, params: AugmentorParams,
                    config: HallucinationConfig = HallucinationConfig()) -> SceneGraph:
    """
    Hallucinates the visual content a skeleton leaves out

    Each pass degenerates relations, encodes with the visual encoder, lets every object (in id order)
    gain at most one new object or attribute, adds relations between unlinked object pairs (in id order),
    and inflates the result. All decisions are arg-max.

    Args:
        skeleton (:obj:`SceneGraph`): visual skeleton

        encoder (:obj:`EncoderParams`): visual scene-graph encoder

        params (:obj:`AugmentorParams`): hallucination heads

        config (:obj:`HallucinationConfig`, optional): routing radius, pair cap, number of passes
    """
    check(skeleton, config.max_components)
    g = skeleton
    with no_grad():
        for _ in range(config.passes):
            g = augmentation_pass(g, encoder, params, config)
    violations = validate(g, config.max_components)
    if violations:
        raise SceneGraphValidationError(["hallucinated graph: " + v for v in violations])
    return g
