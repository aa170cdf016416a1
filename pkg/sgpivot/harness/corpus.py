"""
Synthetic image-caption corpora drawn from the toy grammar

Every scene is a sentence of the source grammar. Its visual scene graph is the parsed sentence plus the
content the grammar's visual rules plant (objects, attributes and relations no caption mentions), and its
image feature vector is the sum of fixed codebook rows of the scene labels plus Gaussian noise.

Source-side training examples pair an image with an English-side caption, target-side examples pair a
different image with a target-side caption. Only the test set knows the reference translation, and reading
it goes through :obj:`ReferenceAudit`.
"""
import json
import os
from typing import Dict, List, Optional

import numpy as np
import yaml

from sgpivot import logger
from ..exceptions import GraphFormatError, SizingError
from ..scene_graph import ATTR, VISUAL, SceneGraph, ToyGrammar, degenerate_relations, from_dict
from ..scene_graph import inflate_relations, parse_toy_lsg, to_dict

SOURCE_FILE = "train_source.jsonl"
TARGET_FILE = "train_target.jsonl"
TEST_FILE = "test.jsonl"
METADATA_FILE = "corpus.yml"


class ReferenceAudit:
    """Counts every read of a reference translation"""

    def __init__(self) -> None:
        self.reads = 0

    def reset(self) -> None:
        self.reads = 0


reference_audit = ReferenceAudit()


class TrainExample:
    """
    One image with one caption

    Args:
        tokens (:obj:`list`): caption tokens

        language (:obj:`str`): 'src' or 'tgt'

        lsg (:obj:`SceneGraph`): parsed caption

        vsg (:obj:`SceneGraph`): gold visual scene graph

        z (:obj:`np.ndarray`): image feature vector

        template (:obj:`str`): grammar template the scene was drawn from
    """

    def __init__(self, tokens: List[str], language: str, lsg: SceneGraph, vsg: SceneGraph, z: np.ndarray,
                 template: str) -> None:
        self.tokens = list(tokens)
        self.language = language
        self.lsg = lsg
        self.vsg = vsg
        self.z = np.asarray(z, dtype=np.float64)
        self.template = template

    def to_dict(self) -> dict:
        return {"language": self.language, "sentence": " ".join(self.tokens), "template": self.template,
                "lsg": to_dict(self.lsg), "vsg": to_dict(self.vsg), "z": [float(v) for v in self.z]}

    @staticmethod
    def from_dict(data: dict):
        return TrainExample(data["sentence"].split(), data["language"], from_dict(data["lsg"]),
                            from_dict(data["vsg"]), np.array(data["z"], dtype=np.float64), data["template"])


class TestExample(TrainExample):
    """Source-side example that also holds the reference translation"""

    def __init__(self, tokens, language, lsg, vsg, z, template, reference: List[str]) -> None:
        super().__init__(tokens, language, lsg, vsg, z, template)
        self.__reference = list(reference)

    @property
    def reference(self) -> List[str]:
        reference_audit.reads += 1
        return list(self.__reference)

    def to_dict(self) -> dict:
        data = super().to_dict()
        data["reference"] = " ".join(self.__reference)
        return data

    @staticmethod
    def from_dict(data: dict):
        base = TrainExample.from_dict(data)
        return TestExample(base.tokens, base.language, base.lsg, base.vsg, base.z, base.template,
                           data["reference"].split())


class Corpus:
    """Monolingual training sets of both languages plus the test set"""

    def __init__(self, train_source: List[TrainExample], train_target: List[TrainExample],
                 test: List[TestExample], metadata: dict) -> None:
        self.train_source = train_source
        self.train_target = train_target
        self.test = test
        self.metadata = metadata

    @property
    def fingerprint(self) -> str:
        return self.metadata["grammar_fingerprint"]

    def training_examples(self) -> List[TrainExample]:
        return self.train_source + self.train_target

    def save(self, folder: str) -> None:
        """Writes the corpus as JSON-lines files plus a YAML metadata file"""
        os.makedirs(folder, exist_ok=True)
        for name, examples in [(SOURCE_FILE, self.train_source), (TARGET_FILE, self.train_target),
                               (TEST_FILE, self.test)]:
            with open(os.path.join(folder, name), "w", encoding="utf-8", newline="\n") as f:
                for ex in examples:
                    f.write(json.dumps(ex.to_dict(), ensure_ascii=False))
                    f.write("\n")
        with open(os.path.join(folder, METADATA_FILE), "w", encoding="utf-8", newline="\n") as f:
            yaml.dump(self.metadata, f, default_flow_style=False, sort_keys=True)

    @staticmethod
    def load(folder: str):
        metadata_file = os.path.join(folder, METADATA_FILE)
        if not os.path.isfile(metadata_file):
            raise FileNotFoundError(f"No corpus found in {folder}")
        with open(metadata_file, "r", encoding="utf-8") as f:
            metadata = yaml.load(f, Loader=yaml.SafeLoader)

        def read(name, cls):
            examples = []
            with open(os.path.join(folder, name), "r", encoding="utf-8") as f:
                for number, line in enumerate(f):
                    if not line.strip():
                        continue
                    try:
                        examples.append(cls.from_dict(json.loads(line)))
                    except (json.JSONDecodeError, KeyError) as err:
                        raise GraphFormatError(f"{name}, line {number + 1}: {err}") from err
            return examples

        return Corpus(read(SOURCE_FILE, TrainExample), read(TARGET_FILE, TrainExample), read(TEST_FILE, TestExample),
                      metadata)


def plant_scene(lsg: SceneGraph, template: str, grammar: ToyGrammar) -> SceneGraph:
    """
    Gold visual scene graph of a source-language scene graph

    Each object gains the object and/or attribute its label's visual rules name; templates with a pair rule
    relate their first object to their second.
    """
    rules = grammar.visual_rules
    lg = degenerate_relations(lsg)
    nodes, edges = [], []
    objects = lg.objects()
    for i in objects:
        label = lg.label(i)
        if label in rules["objects"]:
            rule = rules["objects"][label]
            nid = lg.num_nodes + len(nodes)
            nodes.append((nid, "object", rule["object"]))
            edges.append((i, nid, rule["relation"]))
        if label in rules["attributes"]:
            nid = lg.num_nodes + len(nodes)
            nodes.append((nid, "attribute", rules["attributes"][label]))
            edges.append((i, nid, ATTR))
    if template in rules["pairs"] and len(objects) >= 2 and not lg.adjacent(objects[0], objects[1]):
        edges.append((objects[0], objects[1], rules["pairs"][template]))
    return inflate_relations(lg.extended(nodes, edges)).with_modality(VISUAL)


def codebook(grammar: ToyGrammar, z_dim: int, seed: int) -> Dict[str, np.ndarray]:
    """Fixed random feature row for every label a scene can contain"""
    visual = grammar.visual_only_labels()
    labels = sorted(set(grammar.source_side().content_tokens + visual["object"] + visual["attribute"]
                        + visual["relation"]))
    rng = np.random.default_rng([seed, 1])
    rows = rng.normal(0.0, 1.0 / np.sqrt(z_dim), (len(labels), z_dim))
    return {lbl: rows[k] for k, lbl in enumerate(labels)}


def gen_corpus(grammar: ToyGrammar, n_train: int, n_test: int, seed: int = 7, n_train_target: Optional[int] = None,
               z_dim: int = 64, noise_sigma: float = 0.1) -> Corpus:
    """
    Draws a corpus with pairwise-disjoint scene sets for source training, target training and test

    Args:
        grammar (:obj:`ToyGrammar`): bilingual grammar

        n_train (:obj:`int`): source-side training examples

        n_test (:obj:`int`): test examples

        seed (:obj:`int`, optional): all randomness derives from it. Defaults to 7

        n_train_target (:obj:`int`, optional): target-side training examples. Defaults to *n_train*

        z_dim (:obj:`int`, optional): image feature width. Defaults to 64

        noise_sigma (:obj:`float`, optional): feature noise standard deviation. Defaults to 0.1

    Raises:
        :obj:`SizingError` when the grammar cannot derive enough distinct sentences
    """
    if n_train < 1 or n_test < 0:
        raise SizingError("Need at least one training example and a non-negative test size")
    n_target = n_train if n_train_target is None else n_train_target
    source, target = grammar.source_side(), grammar.target_side()
    needed = n_train + n_target + n_test
    available = sum(source.sentence_count(t) for t in source.templates)
    if needed > available:
        raise SizingError(f"Grammar derives {available} distinct sentences but {needed} were requested")

    rng = np.random.default_rng(seed)
    seen = set()
    drawn = []
    attempts = 0
    while len(drawn) < needed:
        attempts += 1
        if attempts > 1000 * needed:
            raise SizingError(f"Could only draw {len(drawn)} distinct sentences out of {needed}")
        tokens, template = source.sample(rng)
        if tuple(tokens) in seen:
            continue
        seen.add(tuple(tokens))
        drawn.append((tokens, template.name))

    book = codebook(grammar, z_dim, seed)
    noise = np.random.default_rng([seed, 2])

    def scene(tokens, template):
        lsg = parse_toy_lsg(tokens, source)
        vsg = plant_scene(lsg, template, grammar)
        z = sum(book[lbl] for lbl in vsg.labels()) + noise.normal(0.0, noise_sigma, z_dim)
        return lsg, vsg, z

    train_source, train_target, test = [], [], []
    for k, (tokens, template) in enumerate(drawn):
        lsg, vsg, z = scene(tokens, template)
        if k < n_train:
            train_source.append(TrainExample(tokens, "src", lsg, vsg, z, template))
        elif k < n_train + n_target:
            y = source.translate(tokens)
            train_target.append(TrainExample(y, "tgt", parse_toy_lsg(y, target), vsg, z, template))
        else:
            test.append(TestExample(tokens, "src", lsg, vsg, z, template, source.translate(tokens)))

    metadata = {"grammar_fingerprint": grammar.fingerprint, "seed": seed, "n_train": n_train,
                "n_train_target": n_target, "n_test": n_test, "z_dim": z_dim, "noise_sigma": noise_sigma}
    logger.info(f"Generated corpus: {n_train} source, {n_target} target and {n_test} test examples")
    return Corpus(train_source, train_target, test, metadata)
