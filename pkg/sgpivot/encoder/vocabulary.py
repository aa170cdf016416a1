from typing import Iterable, List, Sequence

from ..exceptions import OutOfVocabularyError
from ..scene_graph.toy_grammar import ToyGrammar

BOS = "<s>"
EOS = "</s>"


class Vocabulary:
    """Ordered, duplicate-free list of labels with constant-time lookup"""

    def __init__(self, labels: Iterable[str], name: str = "vocabulary") -> None:
        self.name = name
        self.labels = []  # type: List[str]
        self.__index = {}
        for lbl in labels:
            if lbl not in self.__index:
                self.__index[lbl] = len(self.labels)
                self.labels.append(lbl)

    def __len__(self) -> int:
        return len(self.labels)

    def __contains__(self, label: str) -> bool:
        return label in self.__index

    def __eq__(self, other) -> bool:
        return isinstance(other, Vocabulary) and self.labels == other.labels

    def index(self, label: str) -> int:
        if label not in self.__index:
            raise OutOfVocabularyError(label, self.name)
        return self.__index[label]

    def indices(self, labels: Sequence[str]) -> List[int]:
        return [self.index(lbl) for lbl in labels]

    def label(self, index: int) -> str:
        return self.labels[index]


def node_vocabulary(grammar: ToyGrammar) -> Vocabulary:
    """Every label a scene-graph node can carry: content words of both languages and scene-only concepts"""
    source, target = grammar.source_side(), grammar.target_side()
    visual = grammar.visual_only_labels()
    labels = source.content_tokens + target.content_tokens
    labels += visual["object"] + visual["attribute"] + visual["relation"]
    return Vocabulary(labels, "node vocabulary")


def token_vocabulary(grammar: ToyGrammar) -> Vocabulary:
    """Output vocabulary of a decoder for the grammar's language, led by the sentence markers"""
    return Vocabulary([BOS, EOS] + grammar.tokens, f"{grammar.side} token vocabulary")
