"""
Teacher-forced supervision of the hallucination heads

Targets come from comparing the skeleton of a gold language scene graph with the gold visual scene graph:

* skeleton objects are matched to gold objects with the same label (first unused, by id), and skeleton
  attributes to gold attributes with the same label on the matched owner;
* the first unmatched gold node hanging off a matched object (by gold id) is that object's node target,
  together with the relation label of the connecting edge when the new node is an object;
* a gold relation between the matched images of an unlinked skeleton pair (i, j), i < j, is that pair's target.

Everything else targets the empty label.
"""
from typing import Dict, List, NamedTuple, Optional, Tuple

import numpy as np

from sgpivot import logger
from ..encoder import EncoderParams
from ..numerics import Tensor, log_softmax, nll
from ..scene_graph import ATTR, OBJECT, SceneGraph, degenerate_relations
from ..scene_graph.degeneration import LabeledGraph
from .augmentors import AugmentorParams, candidate_pairs, node_augment_scores, pair_batch_logits
from .augmentors import relation_label_logits
from .completion import HallucinationConfig, labeled_reps
from .skeleton import ConceptMatcher, sketch_skeleton
from .vocabularies import VsgVocabularies


class HallucinationTargets(NamedTuple):
    node_targets: Dict[int, int]
    relation_targets: Dict[int, int]
    pair_targets: List[Tuple[Tuple[int, int], int]]


def match_nodes(skeleton: LabeledGraph, gold: LabeledGraph) -> Dict[int, int]:
    """Skeleton node id -> gold node id for objects (by label) and their attributes (by owner and label)"""
    matched = {}
    used = set()
    for i in skeleton.objects():
        for g in gold.objects():
            if g not in used and gold.label(g) == skeleton.label(i):
                matched[i] = g
                used.add(g)
                break
    for owner, a, label in skeleton.edges:
        if label != ATTR or owner not in matched:
            continue
        for s, g, lbl in gold.edges:
            if lbl == ATTR and s == matched[owner] and g not in used and gold.label(g) == skeleton.label(a):
                matched[a] = g
                used.add(g)
                break
    return matched


def hallucination_targets(skeleton: SceneGraph, gold: SceneGraph, vocabularies: VsgVocabularies,
                          max_pairs: int = 500) -> Optional[HallucinationTargets]:
    """
    Node and pair targets for one example. None when no skeleton object has a counterpart in the gold graph
    """
    sk, gd = degenerate_relations(skeleton), degenerate_relations(gold)
    matched = match_nodes(sk, gd)
    if not any(sk.kind(i) == OBJECT for i in matched):
        return None

    taken = set(matched.values())
    node_targets, relation_targets = {}, {}
    for i in sk.objects():
        node_targets[i] = vocabularies.na_epsilon
        if i not in matched:
            continue
        extras = sorted((d, lbl) for s, d, lbl in gd.edges if s == matched[i] and d not in taken)
        for x, lbl in extras:
            if gd.label(x) not in vocabularies.na_labels[:-1]:
                continue
            node_targets[i] = vocabularies.na_index(gd.label(x))
            if gd.kind(x) == OBJECT and lbl in vocabularies.relations:
                relation_targets[i] = vocabularies.relation_index(lbl)
            taken.add(x)
            break

    pair_targets = []
    for i, j in candidate_pairs(sk, max_pairs):
        target = vocabularies.pa_epsilon
        if i in matched and j in matched:
            lbl = gd.edge_label(matched[i], matched[j])
            if lbl is not None and lbl in vocabularies.relations:
                target = vocabularies.pa_index(lbl)
        pair_targets.append(((i, j), target))
    return HallucinationTargets(node_targets, relation_targets, pair_targets)


def vsh_loss(lsg: SceneGraph, gold: SceneGraph, encoder: EncoderParams, params: AugmentorParams,
             matcher: ConceptMatcher, config: HallucinationConfig = HallucinationConfig(),
             counters: Optional[dict] = None) -> Optional[Tensor]:
    """
    Summed negative log-likelihood of the node, relation-label and pair targets

    Returns:
        *loss* (:obj:`Tensor`): scalar, or None when the example cannot be aligned (counted under
        'vsh_unaligned' in *counters*)
    """
    vocab = params.vocabularies
    skeleton = sketch_skeleton(lsg, vocab, matcher)
    targets = hallucination_targets(skeleton, gold, vocab, config.max_pairs)
    if targets is None:
        if counters is not None:
            counters["vsh_unaligned"] = counters.get("vsh_unaligned", 0) + 1
        logger.warning("Skipping hallucination loss: no skeleton object found in the gold scene graph")
        return None

    lg = degenerate_relations(skeleton)
    reps = labeled_reps(skeleton, lg, encoder)
    loss = Tensor(0.0)
    for i, target in targets.node_targets.items():
        scores = node_augment_scores(i, lg, reps, params, config.hops)
        loss = loss - log_softmax(scores.logits)[target]
        if i in targets.relation_targets:
            loss = loss + nll(relation_label_logits(scores.hidden, reps[i], params), [targets.relation_targets[i]])
    if targets.pair_targets:
        pairs = [p for p, _ in targets.pair_targets]
        loss = loss + nll(pair_batch_logits(pairs, lg, reps, params), [t for _, t in targets.pair_targets])
    return loss


def recovery_counts(lsg: SceneGraph, gold: SceneGraph, encoder: EncoderParams, params: AugmentorParams,
                    matcher: ConceptMatcher, config: HallucinationConfig = HallucinationConfig()) -> Tuple[int, int]:
    """(correct, total) top-1 predictions over the non-empty node targets of one example"""
    vocab = params.vocabularies
    skeleton = sketch_skeleton(lsg, vocab, matcher)
    targets = hallucination_targets(skeleton, gold, vocab, config.max_pairs)
    if targets is None:
        return 0, 0
    lg = degenerate_relations(skeleton)
    reps = labeled_reps(skeleton, lg, encoder)
    correct = total = 0
    for i, target in targets.node_targets.items():
        if target == vocab.na_epsilon:
            continue
        scores = node_augment_scores(i, lg, reps, params, config.hops)
        total += 1
        correct += int(np.argmax(scores.probabilities.values)) == target
    return correct, total
