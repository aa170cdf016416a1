"""
Evaluation of trained models on held-out scenes
"""
from multiprocessing.dummy import Pool as ThreadPool
from typing import List, Optional, Sequence, Set, Tuple

import numpy as np

from sgpivot import logger
from ..encoder import encode
from ..hallucination import HallucinationConfig, recovery_counts, sketch_skeleton
from ..numerics import cosine_matrix, no_grad
from ..scene_graph import ATTR, CorpusGrowth, SceneGraph, degenerate_relations, graph_stats
from ..translation import TGT, SgPivotModel, hallucinate, translate
from .bleu import evaluate_bleu
from .corpus import TestExample, TrainExample

HALLUCINATED = "hallucinated"
GOLD = "gold"
visual_modes = [HALLUCINATED, GOLD]


def translate_examples(examples: Sequence[TrainExample], model: SgPivotModel, visual: str = HALLUCINATED,
                       alpha: float = 0.5, config: HallucinationConfig = HallucinationConfig(),
                       cores: int = 1) -> List[List[str]]:
    """
    Target-language translations of source-side examples, in input order

    Args:
        visual (:obj:`str`, optional): 'hallucinated' (image-free) or 'gold' (paired visual scene graph)

        cores (:obj:`int`, optional): worker threads. Output order does not depend on it
    """
    if visual not in visual_modes:
        raise ValueError(f"Visual input must be one of {visual_modes}")

    def work(example):
        vsg = example.vsg if visual == GOLD else None
        return translate(example.tokens, example.lsg, vsg, model, TGT, alpha, config)

    if cores <= 1:
        return [work(ex) for ex in examples]
    pool = ThreadPool(cores)
    try:
        return pool.map(work, examples)
    finally:
        pool.close()
        pool.join()


def evaluate_translation(examples: Sequence[TestExample], model: SgPivotModel, visual: str = HALLUCINATED,
                         alpha: float = 0.5, config: HallucinationConfig = HallucinationConfig(), cores: int = 1,
                         smooth: bool = False) -> float:
    """Corpus BLEU of the translations of the test examples against their references"""
    hypotheses = translate_examples(examples, model, visual, alpha, config, cores)
    score = evaluate_bleu(hypotheses, [ex.reference for ex in examples], smooth=smooth)
    logger.info(f"BLEU ({visual} visual input) over {len(examples)} sentences: {score:.2f}")
    return score


def relation_triples(g: SceneGraph) -> Set[Tuple[str, str, str]]:
    """(subject label, object label, relation label) of every object-to-object relation"""
    lg = degenerate_relations(g)
    return {(lg.label(s), lg.label(d), lbl) for s, d, lbl in lg.edges if lbl != ATTR}


def vsh_recovery(examples: Sequence[TrainExample], model: SgPivotModel,
                 config: HallucinationConfig = HallucinationConfig()) -> dict:
    """
    How much of the planted visual content the hallucination recovers

    *node_accuracy* is the top-1 accuracy of the node augmentor on the gold nodes a caption leaves out.
    *edge_accuracy* is the share of gold relations absent from the caption that reappear, with the same
    labels, in the hallucinated scene graph. Either is None when there is nothing to recover.
    """
    node_correct = node_total = edge_correct = edge_total = 0
    matcher = model.matcher()
    with no_grad():
        for ex in examples:
            c, t = recovery_counts(ex.lsg, ex.vsg, model.vsg_encoder, model.augmentor, matcher, config)
            node_correct += c
            node_total += t
            planted = relation_triples(ex.vsg) - relation_triples(ex.lsg)
            if planted:
                found = relation_triples(hallucinate(ex.lsg, model, config))
                edge_correct += len(planted & found)
                edge_total += len(planted)
    return {"node_accuracy": node_correct / node_total if node_total else None,
            "edge_accuracy": edge_correct / edge_total if edge_total else None,
            "nodes": node_total, "edges": edge_total}


def alignment_gap(examples: Sequence[TrainExample], model: SgPivotModel) -> float:
    """
    Mean cosine of same-kind, same-label (language node, visual node) pairs minus the mean cosine of all other
    pairs, over the given examples
    """
    positives, negatives = [], []
    with no_grad():
        for ex in examples:
            scores = cosine_matrix(encode(ex.lsg, model.lsg_encoder).matrix,
                                   encode(ex.vsg, model.vsg_encoder).matrix).values
            mask = np.zeros(scores.shape, dtype=bool)
            for a in ex.lsg.nodes:
                for b in ex.vsg.nodes:
                    mask[a.id, b.id] = a.kind == b.kind and a.label == b.label
            positives.extend(scores[mask].tolist())
            negatives.extend(scores[~mask].tolist())
    if not positives or not negatives:
        raise ValueError("Alignment gap needs both matching and non-matching node pairs")
    return float(np.mean(positives) - np.mean(negatives))


def corpus_growth(examples: Sequence[TrainExample], model: Optional[SgPivotModel] = None,
                  config: HallucinationConfig = HallucinationConfig()) -> CorpusGrowth:
    """
    Node growth from language scene graphs to visual scene graphs

    With a model, each skeleton is compared with its hallucinated completion. Without one, each language scene
    graph is compared with its gold visual scene graph.
    """
    if model is not None:
        return hallucinate_graphs([ex.lsg for ex in examples], model, config)[1]
    growth = CorpusGrowth()
    for ex in examples:
        growth.add(graph_stats(ex.lsg, ex.vsg))
    return growth


def hallucinate_graphs(lsgs: Sequence[SceneGraph], model: SgPivotModel,
                       config: HallucinationConfig = HallucinationConfig()) -> Tuple[List[SceneGraph], CorpusGrowth]:
    """Hallucinated visual scene graphs, in input order, and their growth over the skeletons"""
    graphs, growth = [], CorpusGrowth()
    with no_grad():
        for lsg in lsgs:
            skeleton = sketch_skeleton(lsg, model.vocabularies, model.matcher())
            graphs.append(hallucinate(lsg, model, config))
            growth.add(graph_stats(skeleton, graphs[-1]))
    return graphs, growth
