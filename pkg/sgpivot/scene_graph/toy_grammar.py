"""
Toy bilingual grammar

Lexicon groups map onto parse categories: ``NOUN_*`` groups are nouns (objects), ``ADJ`` adjectives
(attributes of the next noun), ``VERB_T`` and ``PREP`` relations between the surrounding nouns.
``VERB_I`` and ``CONJ`` carry no scene-graph content.
"""
import hashlib
import json
import os
from math import factorial
from typing import Dict, List, NamedTuple, Optional, Tuple

import numpy as np
import yaml

from ..exceptions import ConfigurationError

ADJ, NOUN, VERB_T, VERB_I, PREP, CONJ = "ADJ", "NOUN", "VERB_T", "VERB_I", "PREP", "CONJ"
categories = [ADJ, NOUN, VERB_T, VERB_I, PREP, CONJ]

SOURCE = "source"
TARGET = "target"


class Slot(NamedTuple):
    group: str
    optional: bool

    @property
    def category(self) -> str:
        return NOUN if self.group.startswith(NOUN) else self.group


class Template(NamedTuple):
    name: str
    slots: Tuple[Slot, ...]
    weight: float


def _parse_pattern(pattern: str) -> Tuple[Slot, ...]:
    slots = []
    for item in pattern.split():
        optional = item.startswith("[") and item.endswith("]")
        slots.append(Slot(item.strip("[]"), optional))
    return tuple(slots)


class ToyGrammar:
    """
    Template grammar over a small two-language lexicon

    ::

        from sgpivot.scene_graph import ToyGrammar

        grammar = ToyGrammar.load()  # the packaged grammar
        target = grammar.target_side()
        target.category("hund")
      'NOUN'
    """

    def __init__(self, definition: dict, side: str = SOURCE) -> None:
        self.definition = definition
        self.side = side
        self.__validate()

        translations = definition["translations"]
        self.lexicon = {}  # type: Dict[str, List[str]]
        for group, tokens in definition["lexicon"].items():
            self.lexicon[group] = [translations[t] if side == TARGET else t for t in tokens]
        self.templates = [Template(t["name"], _parse_pattern(t["pattern"]), float(t["weight"]))
                          for t in definition["templates"]]
        self.__group = {tok: group for group, tokens in self.lexicon.items() for tok in tokens}
        if side == SOURCE:
            self.__to_other = dict(translations)
        else:
            self.__to_other = {v: k for k, v in translations.items()}

    @staticmethod
    def load(file_name: Optional[str] = None):
        """Loads a grammar from YAML. Without a file name, the packaged grammar is used"""
        if file_name is None:
            file_name = os.path.join(os.path.dirname(os.path.realpath(__file__)), "toy_grammar.yml")
        with open(file_name, "r", encoding="utf-8") as yml:
            definition = yaml.load(yml, Loader=yaml.SafeLoader)
        return ToyGrammar(definition)

    def __validate(self) -> None:
        d = self.definition
        for key in ["lexicon", "translations", "templates"]:
            if key not in d:
                raise ConfigurationError(f"Grammar definition is missing '{key}'")
        seen = set()
        for group, tokens in d["lexicon"].items():
            if group != ADJ and group not in categories and not group.startswith(NOUN):
                raise ConfigurationError(f"Unknown lexicon group '{group}'")
            for t in tokens:
                if not isinstance(t, str):
                    raise ConfigurationError(f"Lexicon group '{group}': token {t!r} is not a string")
                if t in seen:
                    raise ConfigurationError(f"Token '{t}' appears in more than one lexicon group")
                seen.add(t)
        translations = d["translations"]
        if set(translations.keys()) != seen:
            missing = sorted(map(str, seen.symmetric_difference(translations.keys())))
            raise ConfigurationError(f"Translations do not cover the lexicon exactly: {missing}")
        images = list(translations.values())
        if not all(isinstance(t, str) for t in images):
            raise ConfigurationError("Every translation must be a string")
        if len(set(images)) != len(images) or set(images) & seen:
            raise ConfigurationError("Translations must be one-to-one and disjoint from the source lexicon")
        for t in d["templates"]:
            for slot in _parse_pattern(t["pattern"]):
                if slot.group not in d["lexicon"]:
                    raise ConfigurationError(f"Template '{t['name']}' uses unknown group '{slot.group}'")
            if not float(t["weight"]) > 0:
                raise ConfigurationError(f"Template '{t['name']}' needs a positive weight")
        self.__validate_visual_rules()

    def __validate_visual_rules(self) -> None:
        # YAML reads bare on/off/yes/no as booleans
        rules = self.visual_rules
        labels = [("visual_rules.objects", noun) for noun in rules["objects"]]
        for noun, rule in rules["objects"].items():
            if not isinstance(rule, dict) or set(rule) != {"object", "relation"}:
                raise ConfigurationError(f"Visual rule for '{noun}' needs exactly an object and a relation")
            labels += [(f"visual_rules.objects.{noun}", rule["object"]),
                       (f"visual_rules.objects.{noun}", rule["relation"])]
        labels += [("visual_rules.attributes", label) for pair in rules["attributes"].items() for label in pair]
        labels += [("visual_rules.pairs", label) for label in rules["pairs"].values()]
        for where, label in labels:
            if not isinstance(label, str):
                raise ConfigurationError(f"{where}: label {label!r} is not a string (quote it in the YAML file)")

    def target_side(self):
        """The same grammar over the target-language lexicon"""
        return ToyGrammar(self.definition, TARGET)

    def source_side(self):
        return ToyGrammar(self.definition, SOURCE)

    @property
    def fingerprint(self) -> str:
        text = json.dumps(self.definition, sort_keys=True, ensure_ascii=False)
        return hashlib.sha256(text.encode("utf-8")).hexdigest()

    @property
    def tokens(self) -> List[str]:
        return [t for group in self.lexicon.values() for t in group]

    @property
    def content_tokens(self) -> List[str]:
        """Tokens that become scene-graph nodes"""
        return [t for t in self.tokens if self.category(t) in [ADJ, NOUN, VERB_T, PREP]]

    def group(self, token: str) -> Optional[str]:
        return self.__group.get(token)

    def category(self, token: str) -> Optional[str]:
        group = self.__group.get(token)
        if group is None:
            return None
        return NOUN if group.startswith(NOUN) else group

    def translate(self, tokens: List[str]) -> List[str]:
        """Token-by-token mapping into the other language"""
        return [self.__to_other[t] for t in tokens]

    def template(self, name: str) -> Template:
        for t in self.templates:
            if t.name == name:
                return t
        raise ConfigurationError(f"Grammar has no template '{name}'")

    def match(self, cats: List[str]) -> Tuple[Optional[Template], int]:
        """
        First template deriving a category sequence

        Returns:
            (template or None, index of the first category no template could consume)
        """
        furthest = 0
        for template in self.templates:
            ok, reach = _match(template.slots, cats, 0, 0)
            if ok:
                return template, len(cats)
            furthest = max(furthest, reach)
        return None, furthest

    def sentence_count(self, template: Template) -> int:
        """Number of distinct sentences a template derives (nouns within a sentence are distinct)"""
        count = 1
        uses = {}
        for slot in template.slots:
            size = len(self.lexicon[slot.group])
            if slot.category == NOUN:
                uses[slot.group] = uses.get(slot.group, 0) + 1
            else:
                count *= size + 1 if slot.optional else size
        for group, k in uses.items():
            n = len(self.lexicon[group])
            count *= factorial(n) // factorial(n - k) if k <= n else 0
        return count

    def sample(self, rng: np.random.Generator) -> Tuple[List[str], Template]:
        """Draws one sentence: template by weight, optional slots with probability 1/2, distinct nouns"""
        weights = np.array([t.weight for t in self.templates])
        template = self.templates[int(rng.choice(len(self.templates), p=weights / weights.sum()))]
        tokens = []
        used = set()
        for slot in template.slots:
            if slot.optional and rng.random() < 0.5:
                continue
            pool = [t for t in self.lexicon[slot.group] if t not in used]
            token = pool[int(rng.integers(len(pool)))]
            if slot.category == NOUN:
                used.add(token)
            tokens.append(token)
        return tokens, template

    @property
    def visual_rules(self) -> dict:
        rules = self.definition.get("visual_rules") or {}
        return {"objects": rules.get("objects") or {}, "attributes": rules.get("attributes") or {},
                "pairs": rules.get("pairs") or {}}

    def visual_only_labels(self) -> Dict[str, List[str]]:
        """Labels that only ever appear in scenes, by node kind"""
        rules = self.visual_rules
        objects = sorted({r["object"] for r in rules["objects"].values()})
        attributes = sorted(set(rules["attributes"].values()))
        relations = sorted({r["relation"] for r in rules["objects"].values()} | set(rules["pairs"].values()))
        return {"object": objects, "attribute": attributes, "relation": relations}


def _match(slots, cats, s: int, c: int) -> Tuple[bool, int]:
    if s == len(slots):
        return c == len(cats), c
    slot = slots[s]
    best = c
    if c < len(cats) and cats[c] == slot.category:
        ok, reach = _match(slots, cats, s + 1, c + 1)
        if ok:
            return True, reach
        best = max(best, reach)
    if slot.optional:
        ok, reach = _match(slots, cats, s + 1, c)
        if ok:
            return True, reach
        best = max(best, reach)
    return False, best
