"""
Label vocabularies of the visual scene graphs seen in training

Node-augmentation labels are objects then attributes then the empty label; pair-augmentation labels
are relations then the empty label.
"""
from typing import Dict, Iterable, List

from ..exceptions import OutOfVocabularyError, VocabularyDataError
from ..scene_graph import ATTR, ATTRIBUTE, OBJECT, RELATION, SceneGraph

EPSILON = "<eps>"


class VsgVocabularies:
    """
    Object, attribute and relation labels in first-occurrence order

    Args:
        objects (:obj:`list`): object labels

        attributes (:obj:`list`): attribute labels

        relations (:obj:`list`): relation labels
    """

    def __init__(self, objects: Iterable[str], attributes: Iterable[str], relations: Iterable[str]) -> None:
        self.objects = list(objects)  # type: List[str]
        self.attributes = list(attributes)  # type: List[str]
        self.relations = list(relations)  # type: List[str]
        reserved = {EPSILON, ATTR}
        kinds = {}
        for kind, labels in [(OBJECT, self.objects), (ATTRIBUTE, self.attributes), (RELATION, self.relations)]:
            if len(set(labels)) != len(labels):
                raise VocabularyDataError(f"Duplicate {kind} labels")
            for lbl in labels:
                if lbl in reserved:
                    raise VocabularyDataError(f"Label '{lbl}' is reserved")
                if lbl in kinds:
                    raise VocabularyDataError(f"Label '{lbl}' is used as both {kinds[lbl]} and {kind}")
                kinds[lbl] = kind
        self.na_labels = self.objects + self.attributes + [EPSILON]
        self.pa_labels = self.relations + [EPSILON]
        self.__na = {lbl: k for k, lbl in enumerate(self.na_labels)}
        self.__pa = {lbl: k for k, lbl in enumerate(self.pa_labels)}
        self.__relations = {lbl: k for k, lbl in enumerate(self.relations)}

    def __eq__(self, other) -> bool:
        return isinstance(other, VsgVocabularies) and self.to_dict() == other.to_dict()

    @property
    def na_epsilon(self) -> int:
        return len(self.na_labels) - 1

    @property
    def pa_epsilon(self) -> int:
        return len(self.pa_labels) - 1

    def na_kind(self, index: int) -> str:
        """Node kind created by a node-augmentation label"""
        if index < len(self.objects):
            return OBJECT
        if index < len(self.objects) + len(self.attributes):
            return ATTRIBUTE
        return EPSILON

    def na_index(self, label: str) -> int:
        if label not in self.__na:
            raise OutOfVocabularyError(label, "node-augmentation vocabulary")
        return self.__na[label]

    def pa_index(self, label: str) -> int:
        if label not in self.__pa:
            raise OutOfVocabularyError(label, "pair-augmentation vocabulary")
        return self.__pa[label]

    def relation_index(self, label: str) -> int:
        if label not in self.__relations:
            raise OutOfVocabularyError(label, "relation vocabulary")
        return self.__relations[label]

    def to_dict(self) -> Dict[str, List[str]]:
        return {"objects": list(self.objects), "attributes": list(self.attributes),
                "relations": list(self.relations)}

    @staticmethod
    def from_dict(data: dict):
        return VsgVocabularies(data["objects"], data["attributes"], data["relations"])


def build_vocabularies(vsgs: Iterable[SceneGraph]) -> VsgVocabularies:
    """
    Collects the labels of training visual scene graphs, in order of first occurrence (graph order, then node id)

    Raises:
        :obj:`VocabularyDataError` if a label appears under two node kinds
    """
    found = {OBJECT: [], ATTRIBUTE: [], RELATION: []}
    kind_of = {}
    for g in vsgs:
        for node in sorted(g.nodes, key=lambda n: n.id):
            previous = kind_of.setdefault(node.label, node.kind)
            if previous != node.kind:
                raise VocabularyDataError(f"Label '{node.label}' appears as both {previous} and {node.kind}")
            if node.label not in found[node.kind]:
                found[node.kind].append(node.label)
    return VsgVocabularies(found[OBJECT], found[ATTRIBUTE], found[RELATION])
