from .scene_graph import SceneGraph, Node, validate, is_valid, check, serialize, deserialize, save, load
from .scene_graph import to_dict, from_dict, canonical_form, isomorphic
from .scene_graph import OBJECT, ATTRIBUTE, RELATION, LANGUAGE, VISUAL, MIXED, node_kinds, modalities
from .degeneration import LabeledGraph, degenerate_relations, inflate_relations, ATTR
from .toy_grammar import ToyGrammar
from .toy_parser import parse_toy_lsg, tokenize
from .graph_stats import graph_stats, GrowthReport, CorpusGrowth
