"""
Training objectives

``cma``: cross-modal alignment of language and visual nodes (contrastive, positive kept in the denominator)
``rec``: caption reconstruction from the visual graph plus image-feature regression from the language graph
``vcb``: visual-concept back-translation x -> y_bar -> x
``cpb``: back-translation of pseudo caption pairs
``vsh``: supervision of the hallucination heads
"""
from typing import Dict, Iterable, List, Optional, Set, Tuple

import numpy as np

from sgpivot import logger
from ..encoder import NodeReps
from ..hallucination import HallucinationConfig, vsh_loss
from ..exceptions import ContractError, DomainError, GrammarParseError
from ..numerics import Tensor, cosine_matrix, linear, log_softmax, no_grad, tsum
from ..scene_graph import SceneGraph, parse_toy_lsg
from ..translation import SRC, TGT, SgPivotModel, caption, teacher_forced_nll, translate, translation_nll
from .schedule import training_schedule

CMA, REC, VCB, CPB, VSH = "cma", "rec", "vcb", "cpb", "vsh"
loss_names = [CMA, REC, VCB, CPB, VSH]


def _count(counters: Optional[dict], key: str) -> None:
    if counters is not None:
        counters[key] = counters.get(key, 0) + 1


def label_anchors(lsg: SceneGraph, vsg: SceneGraph) -> Set[Tuple[int, int]]:
    """Same-kind, same-label node pairs of an aligned language/visual pair"""
    return {(a.id, b.id) for a in lsg.nodes for b in vsg.nodes if a.kind == b.kind and a.label == b.label}


def loss_cma(lsg_reps: NodeReps, vsg_reps: NodeReps, alpha: float = 0.5, tau: float = 0.1,
             anchors: Optional[Iterable[Tuple[int, int]]] = None) -> Tensor:
    """
    Contrastive alignment of language nodes with visual nodes

    Every visual node j with cosine s_ij > *alpha* (plus any pair listed in *anchors*) is a positive of
    language node i and adds -log softmax_j(s_i / tau). Nodes without positives add nothing; the result is
    averaged over the nodes that have positives and is 0 when there are none.

    Raises:
        :obj:`DomainError` if *tau* is not positive
    """
    if not tau > 0:
        raise DomainError(f"Temperature must be positive, got {tau}")
    if len(lsg_reps) == 0 or len(vsg_reps) == 0:
        raise ContractError("Both graphs need at least one node")
    scores = cosine_matrix(lsg_reps.matrix, vsg_reps.matrix)
    positives = scores.values > alpha
    for i, j in anchors or []:
        positives[i, j] = True
    contributing = int(positives.any(axis=1).sum())
    if contributing == 0:
        return Tensor(0.0)
    log_probs = log_softmax(scores / tau, axis=1)
    return -tsum(log_probs * positives.astype(np.float64)) / float(contributing)


def image_regression(pooled: Tensor, model: SgPivotModel) -> Tensor:
    return linear(pooled, model.image_weight, model.image_bias)


def loss_rec(lsg_reps: NodeReps, vsg_reps: NodeReps, tokens: List[str], z: np.ndarray, model: SgPivotModel,
             language: str = SRC) -> Tensor:
    """
    Caption cross-entropy of *tokens* from the pooled visual representation plus mean squared error of the
    image features regressed from the pooled language representation

    Raises:
        :obj:`ContractError` for empty sentences
    """
    if not tokens:
        raise ContractError("Reconstruction needs a non-empty sentence")
    text = teacher_forced_nll(vsg_reps.pooled(), tokens, model.captioners[language])
    z = np.asarray(z, dtype=np.float64)
    diff = image_regression(lsg_reps.pooled(), model) - z
    return text + tsum(diff * diff) / float(z.size)


def _parse_or_skip(tokens: List[str], language: str, model: SgPivotModel, counters: Optional[dict],
                   key: str) -> Optional[SceneGraph]:
    try:
        return parse_toy_lsg(tokens, model.grammars[language])
    except GrammarParseError as err:
        _count(counters, key)
        logger.debug(f"Skipping pseudo sentence '{' '.join(tokens)}': {err}")
        return None


def loss_vcb(tokens: List[str], lsg: SceneGraph, vsg: SceneGraph, model: SgPivotModel, alpha: float = 0.5,
             alpha_reverse: float = 0.5, counters: Optional[dict] = None,
             pseudo: Optional[List[str]] = None) -> Tensor:
    """
    Back-translation through the visual graph: y_bar = translate(x) without gradient, then the reverse
    translator reconstructs x from (y_bar, visual graph) with teacher forcing

    Empty or unparseable y_bar skips the example (loss 0, counted in *counters*).

    Args:
        pseudo (:obj:`list`, optional): use this sentence as y_bar instead of generating one
    """
    if pseudo is None:
        with no_grad():
            pseudo = translate(tokens, lsg, vsg, model, TGT, alpha)
    if not pseudo:
        _count(counters, "vcb_empty")
        return Tensor(0.0)
    lsg_y = _parse_or_skip(pseudo, TGT, model, counters, "vcb_unparseable")
    if lsg_y is None:
        return Tensor(0.0)
    return translation_nll(lsg_y, vsg, tokens, SRC, model, alpha_reverse)


def loss_cpb(vsg: SceneGraph, model: SgPivotModel, alpha: float = 0.5, alpha_reverse: float = 0.5,
             counters: Optional[dict] = None, pseudo: Optional[Tuple[List[str], List[str]]] = None) -> Tensor:
    """
    Back-translation of a pseudo parallel pair captioned from one visual graph

    x_bar and y_bar are captions in both languages, generated without gradient. The reverse translator
    reconstructs x_bar from y_bar and the forward translator reconstructs y_bar from x_bar.

    Args:
        pseudo (:obj:`tuple`, optional): (x_bar, y_bar) to use instead of generated captions
    """
    if pseudo is None:
        x_bar, y_bar = caption(vsg, SRC, model), caption(vsg, TGT, model)
    else:
        x_bar, y_bar = pseudo
    if not x_bar or not y_bar:
        _count(counters, "cpb_empty")
        return Tensor(0.0)
    lsg_x = _parse_or_skip(x_bar, SRC, model, counters, "cpb_unparseable")
    lsg_y = _parse_or_skip(y_bar, TGT, model, counters, "cpb_unparseable") if lsg_x is not None else None
    if lsg_x is None or lsg_y is None:
        return Tensor(0.0)
    return (translation_nll(lsg_y, vsg, x_bar, SRC, model, alpha_reverse)
            + translation_nll(lsg_x, vsg, y_bar, TGT, model, alpha))


class LossBundle:
    """
    The loss components of one training step

    Args:
        stage (:obj:`int`): training stage, 1 to 3

        components: loss name -> scalar tensor (None or absent when not computed)
    """

    def __init__(self, stage: int, **components) -> None:
        self.active = training_schedule(stage)
        self.stage = stage
        unknown = set(components) - set(loss_names)
        if unknown:
            raise ContractError(f"Unknown loss components: {sorted(unknown)}")
        self.components = {name: components.get(name) for name in loss_names}  # type: Dict[str, Optional[Tensor]]

    def __getitem__(self, name: str) -> Optional[Tensor]:
        return self.components[name]

    def values(self) -> Dict[str, Optional[float]]:
        return {k: (None if v is None else float(np.asarray(v.values if isinstance(v, Tensor) else v)))
                for k, v in self.components.items()}


def total_loss(bundle: LossBundle, weights: Optional[Dict[str, float]] = None) -> Tensor:
    """
    Weighted sum of the components active in the bundle's stage (weights default to 1)

    Raises:
        :obj:`ContractError` if an active component is missing
    """
    weights = weights or {}
    missing = [k for k in loss_names if k in bundle.active and bundle[k] is None]
    if missing:
        raise ContractError(f"Stage {bundle.stage} needs the {', '.join(missing)} loss")
    total = Tensor(0.0)
    for k in loss_names:
        if k in bundle.active:
            component = bundle[k]
            total = total + (component if isinstance(component, Tensor) else Tensor(component)) * weights.get(k, 1.0)
    return total


def loss_vsh(lsg: SceneGraph, vsg: SceneGraph, model: SgPivotModel,
             config: HallucinationConfig = HallucinationConfig(), counters: Optional[dict] = None) -> Tensor:
    """Hallucination-head loss of a gold (language, visual) pair; 0 when the pair cannot be aligned"""
    loss = vsh_loss(lsg, vsg, model.vsg_encoder, model.augmentor, model.matcher(), config, counters)
    return Tensor(0.0) if loss is None else loss
