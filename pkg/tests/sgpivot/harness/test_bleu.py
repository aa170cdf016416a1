from unittest import TestCase

import numpy as np

from sgpivot.exceptions import ContractError
from sgpivot.harness import brevity_penalty, evaluate_bleu, modified_precision


class TestBleu(TestCase):
    def test_identical_corpus(self):
        sentences = [["a", "big", "dog", "runs", "fast"], ["the", "small", "cat", "sleeps", "here", "now"]]
        self.assertAlmostEqual(evaluate_bleu(sentences, sentences), 100.0, places=10)

    def test_disjoint_corpus(self):
        self.assertEqual(evaluate_bleu([["a", "b", "c", "d"]], [["w", "x", "y", "z"]]), 0.0)

    def test_clipped_unigram_precision(self):
        hyp, ref = "the the the cat".split(), "the cat sat down".split()
        self.assertAlmostEqual(modified_precision([hyp], [ref], 1), 0.5)
        self.assertAlmostEqual(modified_precision([hyp], [ref], 2), 1 / 3)

    def test_brevity_penalty(self):
        self.assertAlmostEqual(brevity_penalty(2, 4), np.exp(-1.0))
        self.assertEqual(brevity_penalty(5, 4), 1.0)
        self.assertEqual(brevity_penalty(0, 4), 0.0)

    def test_smoothing(self):
        hyp, ref = [["red", "ball", "rolls"]], [["red", "kite", "rolls"]]
        self.assertEqual(evaluate_bleu(hyp, ref), 0.0)
        self.assertGreater(evaluate_bleu(hyp, ref, smooth=True), 0.0)

    def test_contracts(self):
        with self.assertRaises(ContractError):
            evaluate_bleu([], [])
        with self.assertRaises(ContractError):
            evaluate_bleu([["a"]], [["a"], ["b"]])

    def test_short_identical_corpus(self):
        sentences = [["dog", "sleeps"], ["cat", "runs"]]
        self.assertEqual(evaluate_bleu(sentences, sentences), 100.0)
        self.assertEqual(evaluate_bleu([["ball"]], [["ball"]]), 100.0)
        self.assertEqual(evaluate_bleu(sentences, sentences, smooth=True), 100.0)

    def test_orders_without_ngrams(self):
        self.assertIsNone(modified_precision([["dog", "sleeps"]], [["dog", "sleeps"]], 3))
        # no hypothesis has three tokens: geometric mean of 3/4 and 1/2 only
        score = evaluate_bleu([["big", "dog"], ["cat", "runs"]], [["big", "dog"], ["cat", "sleeps"]])
        self.assertAlmostEqual(score, 100.0 * np.sqrt(3 / 8))
        self.assertEqual(evaluate_bleu([[]], [["dog"]]), 0.0)
