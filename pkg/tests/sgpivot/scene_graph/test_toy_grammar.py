import copy
from unittest import TestCase

import numpy as np

from sgpivot.exceptions import ConfigurationError, GrammarParseError
from sgpivot.scene_graph import CorpusGrowth, SceneGraph, ToyGrammar, graph_stats, is_valid, parse_toy_lsg
from sgpivot.scene_graph.toy_grammar import NOUN, VERB_I


class TestToyGrammar(TestCase):
    def setUp(self) -> None:
        self.grammar = ToyGrammar.load()

    def test_categories(self):
        self.assertEqual(self.grammar.category("dog"), NOUN)
        self.assertEqual(self.grammar.category("rolls"), VERB_I)
        self.assertIsNone(self.grammar.category("hund"))
        self.assertEqual(self.grammar.target_side().category("hund"), NOUN)

    def test_translation_is_a_bijection(self):
        tokens = ["old", "man", "beside", "kite"]
        target = self.grammar.translate(tokens)
        self.assertEqual(target, ["alt", "mann", "neben", "drachen"])
        self.assertEqual(self.grammar.target_side().translate(target), tokens)

    def test_fingerprint(self):
        self.assertEqual(self.grammar.fingerprint, ToyGrammar.load().fingerprint)
        self.assertEqual(self.grammar.fingerprint, self.grammar.target_side().fingerprint)
        changed = copy.deepcopy(self.grammar.definition)
        changed["templates"][0]["weight"] = 0.5
        self.assertNotEqual(ToyGrammar(changed).fingerprint, self.grammar.fingerprint)

    def test_sentence_count(self):
        # [ADJ] NOUN_THING VERB_I: 9 * 8 * 6
        self.assertEqual(self.grammar.sentence_count(self.grammar.template("intransitive")), 432)
        # [ADJ] NOUN_ACTOR VERB_T [ADJ] NOUN_ACTOR with distinct actors: 9 * 6 * 9 * 8 * 7
        self.assertEqual(self.grammar.sentence_count(self.grammar.template("transitive")), 27216)

    def test_samples_parse(self):
        rng = np.random.default_rng(1)
        target = self.grammar.target_side()
        for _ in range(50):
            tokens, template = self.grammar.sample(rng)
            self.assertTrue(is_valid(parse_toy_lsg(tokens, self.grammar)))
            self.assertTrue(is_valid(parse_toy_lsg(self.grammar.translate(tokens), target)))

    def test_invalid_definitions(self):
        broken = copy.deepcopy(self.grammar.definition)
        del broken["translations"]["dog"]
        with self.assertRaises(ConfigurationError):
            ToyGrammar(broken)

        broken = copy.deepcopy(self.grammar.definition)
        broken["lexicon"]["ADJ"].append("dog")
        with self.assertRaises(ConfigurationError):
            ToyGrammar(broken)

        broken = copy.deepcopy(self.grammar.definition)
        broken["templates"][0]["pattern"] = "NOUN_FOOD VERB_I"
        with self.assertRaises(ConfigurationError):
            ToyGrammar(broken)

    def test_visual_only_labels(self):
        labels = self.grammar.visual_only_labels()
        self.assertIn("sky", labels["object"])
        self.assertIn("shiny", labels["attribute"])
        self.assertIn("near", labels["relation"])
        self.assertFalse(set(labels["object"]) & set(self.grammar.tokens))
        self.assertEqual(labels["relation"], ["in", "near", "on", "over"])
        self.assertEqual(self.grammar.visual_rules["objects"]["ball"], {"object": "ground", "relation": "on"})

    def test_labels_must_be_strings(self):
        broken = copy.deepcopy(self.grammar.definition)
        broken["visual_rules"]["objects"]["ball"]["relation"] = True
        with self.assertRaises(ConfigurationError) as ctx:
            ToyGrammar(broken)
        self.assertIn("visual_rules.objects.ball", str(ctx.exception))

        broken = copy.deepcopy(self.grammar.definition)
        broken["visual_rules"]["attributes"]["car"] = False
        with self.assertRaises(ConfigurationError):
            ToyGrammar(broken)

        broken = copy.deepcopy(self.grammar.definition)
        broken["lexicon"]["PREP"].append(True)
        with self.assertRaises(ConfigurationError):
            ToyGrammar(broken)


class TestParser(TestCase):
    def setUp(self) -> None:
        self.grammar = ToyGrammar.load()

    def test_transitive_sentence(self):
        g = parse_toy_lsg("dog chases small cat", self.grammar)
        expected = SceneGraph("language", [(0, "object", "dog"), (1, "relation", "chases"),
                                           (2, "attribute", "small"), (3, "object", "cat")],
                              [(0, 1), (1, 3), (3, 2)])
        self.assertEqual(g, expected)

    def test_function_words_have_no_node(self):
        unmapped = []
        g = parse_toy_lsg("red ball rolls and kite waits", self.grammar, unmapped)
        self.assertEqual(g.labels(), ["red", "ball", "kite"])
        self.assertEqual(unmapped, ["rolls", "and", "waits"])
        self.assertEqual(g.components()[0], 2)

    def test_target_language(self):
        g = parse_toy_lsg(["alt", "mann", "neben", "drachen"], self.grammar.target_side())
        self.assertEqual(g.labels(), ["alt", "mann", "neben", "drachen"])

    def test_unknown_token(self):
        with self.assertRaises(GrammarParseError) as ctx:
            parse_toy_lsg("dog chases zebra", self.grammar)
        self.assertEqual(ctx.exception.token, "zebra")
        self.assertEqual(ctx.exception.index, 2)

    def test_no_template(self):
        with self.assertRaises(GrammarParseError) as ctx:
            parse_toy_lsg("dog ball", self.grammar)
        self.assertEqual(ctx.exception.token, "ball")
        with self.assertRaises(GrammarParseError):
            parse_toy_lsg("", self.grammar)
        with self.assertRaises(GrammarParseError) as ctx:
            parse_toy_lsg("dog chases", self.grammar)
        self.assertIsNone(ctx.exception.token)


class TestGraphStats(TestCase):
    def test_growth(self):
        before = SceneGraph("language", [(0, "object", "kite")], [])
        after = SceneGraph("visual", [(0, "object", "kite"), (1, "relation", "in"), (2, "object", "sky")],
                           [(0, 1), (1, 2)])
        report = graph_stats(before, after)
        self.assertEqual(report.rates["object"], 1.0)
        self.assertIsNone(report.rates["relation"])
        self.assertEqual(report.report()[0], "object: 1 -> 2 (100.0%)")

        corpus = CorpusGrowth()
        corpus.add(report)
        corpus.add(graph_stats(after, after))
        self.assertAlmostEqual(corpus.mean_rates()["object"], 0.5)
        self.assertAlmostEqual(corpus.pooled_rates()["object"], 1 / 3)
        self.assertEqual(corpus.mean_rates()["relation"], 0.0)
        self.assertIsNone(corpus.pooled_rates()["attribute"])
