"""
End-to-end translation and captioning through scene graphs
"""
from typing import List, Optional, Tuple

from ..encoder import NodeReps, encode
from ..numerics import Tensor, no_grad
from ..hallucination import HallucinationConfig, complete_vision, sketch_skeleton
from ..scene_graph import SceneGraph, parse_toy_lsg
from .decoder import decode_sentence, teacher_forced_nll
from .fusion import FusedGraph, align_and_fuse, encode_and_pool
from .model import SRC, TGT, SgPivotModel


def other(language: str) -> str:
    return TGT if language == SRC else SRC


def hallucinate(lsg: SceneGraph, model: SgPivotModel, config: HallucinationConfig = HallucinationConfig()) -> SceneGraph:
    """Visual scene graph imagined from a source-language scene graph"""
    skeleton = sketch_skeleton(lsg, model.vocabularies, model.matcher())
    return complete_vision(skeleton, model.vsg_encoder, model.augmentor, config)


def fuse(lsg: SceneGraph, vsg: SceneGraph, model: SgPivotModel, alpha: float = 0.5) -> FusedGraph:
    lsg_reps = encode(lsg, model.lsg_encoder)
    vsg_reps = encode(vsg, model.vsg_encoder)
    return align_and_fuse(lsg, lsg_reps, vsg, vsg_reps, alpha)


def fused_representation(lsg: SceneGraph, vsg: SceneGraph, model: SgPivotModel,
                         alpha: float = 0.5) -> Tuple[NodeReps, Tensor]:
    """Mixed-graph node representations and pooled vector of a (language, visual) graph pair"""
    return encode_and_pool(fuse(lsg, vsg, model, alpha), model.mix_encoder)


def translation_nll(lsg: SceneGraph, vsg: SceneGraph, tokens: List[str], language: str, model: SgPivotModel,
                    alpha: float = 0.5) -> Tensor:
    """Teacher-forced loss of producing *tokens* in *language* from the fused pair"""
    reps, pooled = fused_representation(lsg, vsg, model, alpha)
    return teacher_forced_nll(pooled, tokens, model.decoders[language], reps.matrix)


def translate(tokens: Optional[List[str]], lsg: Optional[SceneGraph], vsg: Optional[SceneGraph],
              model: SgPivotModel, language: str = TGT, alpha: float = 0.5,
              config: HallucinationConfig = HallucinationConfig()) -> List[str]:
    """
    Translates a sentence into *language*

    Args:
        tokens (:obj:`list`): input sentence. Only used to build *lsg* when that is not given

        lsg (:obj:`SceneGraph`, optional): language scene graph of the input

        vsg (:obj:`SceneGraph`, optional): visual scene graph. Hallucinated from *lsg* when None

        model (:obj:`SgPivotModel`): parameters

        language (:obj:`str`, optional): output language, 'tgt' or 'src'. Defaults to 'tgt'

        alpha (:obj:`float`, optional): fusion threshold

        config (:obj:`HallucinationConfig`, optional): hallucination settings for image-free inference
    """
    if lsg is None:
        lsg = parse_toy_lsg(tokens, model.grammars[other(language)])
    with no_grad():
        if vsg is None:
            vsg = hallucinate(lsg, model, config)
        reps, pooled = fused_representation(lsg, vsg, model, alpha)
        return decode_sentence(pooled, model.decoders[language], model.max_decode_length, reps.matrix)


def caption_pooled(vsg: SceneGraph, model: SgPivotModel) -> Tensor:
    return encode(vsg, model.vsg_encoder).pooled()


def caption(vsg: SceneGraph, language: str, model: SgPivotModel) -> List[str]:
    """Describes a visual scene graph in *language*"""
    with no_grad():
        return decode_sentence(caption_pooled(vsg, model), model.captioners[language], model.max_decode_length)


def caption_nll(vsg: SceneGraph, tokens: List[str], language: str, model: SgPivotModel) -> Tensor:
    return teacher_forced_nll(caption_pooled(vsg, model), tokens, model.captioners[language])
