"""
Deterministic parser from toy-grammar sentences to language scene graphs
"""
from typing import List, Optional, Union

from ..exceptions import GrammarParseError
from .scene_graph import ATTRIBUTE, LANGUAGE, OBJECT, RELATION, SceneGraph, check
from .toy_grammar import ADJ, NOUN, PREP, VERB_T, ToyGrammar


def tokenize(sentence: Union[str, List[str]]) -> List[str]:
    return sentence.split() if isinstance(sentence, str) else list(sentence)


def parse_toy_lsg(sentence: Union[str, List[str]], grammar: ToyGrammar,
                  unmapped: Optional[list] = None) -> SceneGraph:
    """
    Parses a sentence of either side of the toy grammar into a language scene graph

    Nodes are numbered in token order. Nouns become objects, adjectives become attributes of the noun that
    follows them, transitive verbs and prepositions become relations from the preceding to the following
    noun. Intransitive verbs and conjunctions have no node.

    Args:
        sentence (:obj:`str` or :obj:`list`): whitespace-separated sentence or token list

        grammar (:obj:`ToyGrammar`): grammar of the sentence's language

        unmapped (:obj:`list`, optional): receives the tokens that produced no node

    Raises:
        :obj:`GrammarParseError` naming the first offending token
    """
    tokens = tokenize(sentence)
    if not tokens:
        raise GrammarParseError("Cannot parse an empty sentence", None, 0)
    cats = []
    for i, t in enumerate(tokens):
        c = grammar.category(t)
        if c is None:
            raise GrammarParseError(f"Unknown token '{t}' at position {i}", t, i)
        cats.append(c)

    template, reach = grammar.match(cats)
    if template is None:
        if reach < len(tokens):
            raise GrammarParseError(f"Unexpected token '{tokens[reach]}' at position {reach}", tokens[reach], reach)
        raise GrammarParseError("Sentence ends before any template is complete", None, reach)

    nodes, edges = [], []
    pending_attributes = []
    pending_relation = None
    last_noun = None
    for t, c in zip(tokens, cats):
        if c == ADJ:
            pending_attributes.append(len(nodes))
            nodes.append((len(nodes), ATTRIBUTE, t))
        elif c == NOUN:
            nid = len(nodes)
            nodes.append((nid, OBJECT, t))
            edges.extend((nid, a) for a in pending_attributes)
            pending_attributes = []
            if pending_relation is not None:
                edges.append((pending_relation, nid))
                pending_relation = None
            last_noun = nid
        elif c in [VERB_T, PREP]:
            nid = len(nodes)
            nodes.append((nid, RELATION, t))
            edges.append((last_noun, nid))
            pending_relation = nid
        elif unmapped is not None:
            unmapped.append(t)

    g = SceneGraph(LANGUAGE, nodes, sorted(edges))
    check(g)
    return g
