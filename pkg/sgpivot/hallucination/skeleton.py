"""
Skeleton sketching: the language scene graph re-labelled with visual object concepts
"""
from typing import List

import numpy as np

from ..encoder import Vocabulary
from ..exceptions import ConfigurationError, ContractError
from ..numerics import Tensor
from ..scene_graph import LANGUAGE, OBJECT, VISUAL, SceneGraph, check
from .vocabularies import VsgVocabularies


class ConceptMatcher:
    """
    Nearest visual concept by cosine similarity of embedding rows

    Args:
        embedding (:obj:`Tensor` or :obj:`np.ndarray`): label embedding table

        vocabulary (:obj:`Vocabulary`): labels of the table rows
    """

    def __init__(self, embedding, vocabulary: Vocabulary) -> None:
        values = embedding.values if isinstance(embedding, Tensor) else np.asarray(embedding, dtype=np.float64)
        norms = np.linalg.norm(values, axis=1, keepdims=True)
        self.unit = np.divide(values, norms, out=np.zeros_like(values), where=norms > 0)
        self.vocabulary = vocabulary

    def match(self, label: str, candidates: List[str]) -> str:
        """Candidate with the highest cosine similarity to *label*; ties go to the earliest candidate"""
        if not candidates:
            raise ConfigurationError("No visual object concepts to match against")
        row = self.unit[self.vocabulary.index(label)]
        table = self.unit[self.vocabulary.indices(candidates)]
        return candidates[int(np.argmax(table @ row))]


def sketch_skeleton(lsg: SceneGraph, vocabularies: VsgVocabularies, matcher: ConceptMatcher) -> SceneGraph:
    """
    Visual skeleton of a language scene graph

    Object labels are replaced by their best-matching visual object concept. Attribute and relation nodes
    are copied. Node ids and edges are unchanged.
    """
    if lsg.modality != LANGUAGE:
        raise ContractError(f"Skeletons are sketched from language scene graphs, got {lsg.modality}")
    check(lsg)
    if not vocabularies.objects:
        raise ConfigurationError("Object vocabulary is empty")
    labels = {n.id: matcher.match(n.label, vocabularies.objects) for n in lsg.nodes if n.kind == OBJECT}
    return lsg.with_labels(labels).with_modality(VISUAL)
