import os
import uuid
from unittest import TestCase

import numpy as np

from sgpivot.exceptions import ConfigurationError, NumericFailure
from sgpivot.harness import Trainer, build_model, load_checkpoint, read_metrics, reference_audit
from sgpivot.harness.trainer import FINAL_CHECKPOINT, LAST_GOOD_CHECKPOINT, METRICS_FILE
from sgpivot.scene_graph import ToyGrammar
from ...data import path_test
from .tiny import one_epoch_each, tiny_corpus, tiny_model


class TestTrainer(TestCase):
    def setUp(self) -> None:
        self.grammar = ToyGrammar.load()
        self.corpus = tiny_corpus()
        self.folder = os.path.join(path_test, f"sgpivot_run_{uuid.uuid4().hex}")

    def trainer(self, output_folder=None, **kwargs):
        return Trainer(self.corpus, self.grammar, one_epoch_each(), output_folder, tiny_model(self.corpus), **kwargs)

    def test_short_run(self):
        reference_audit.reset()
        trainer = self.trainer(self.folder)
        initial = trainer.model.snapshot()
        model = trainer.execute()

        self.assertEqual([(r["stage"], r["epoch"]) for r in trainer.history], [(1, 1), (2, 1), (3, 1)])
        self.assertEqual(reference_audit.reads, 0)
        self.assertTrue(any(not np.array_equal(values, model.snapshot()[name]) for name, values in initial.items()))

        records = read_metrics(os.path.join(self.folder, METRICS_FILE))
        self.assertEqual([r["stage"] for r in records], [1, 2, 3])
        first, second, third = (r["losses"] for r in records)
        self.assertIsNotNone(first["cma"])
        self.assertIsNotNone(first["rec"])
        self.assertIsNone(first["vcb"])
        self.assertIsNone(second["cma"])
        self.assertIsNotNone(second["vsh"])
        self.assertTrue(all(v is not None for v in third.values()))

        for name in ["stage1.sgpv", "stage2.sgpv", "stage3.sgpv", FINAL_CHECKPOINT]:
            self.assertTrue(os.path.isfile(os.path.join(self.folder, name)), name)
        loaded, _ = load_checkpoint(os.path.join(self.folder, FINAL_CHECKPOINT), self.grammar)
        for name, values in model.snapshot().items():
            np.testing.assert_array_equal(loaded.snapshot()[name], values)

    def test_runs_are_repeatable(self):
        a, b = self.trainer(), self.trainer()
        a.execute()
        b.execute()
        strip = [line.rsplit("\t", 1)[0] for line in a.metrics_lines()]
        self.assertEqual(strip, [line.rsplit("\t", 1)[0] for line in b.metrics_lines()])

    def test_disabled_losses(self):
        trainer = self.trainer(disabled_losses=["vcb", "cpb"])
        trainer.execute()
        for record in trainer.history:
            self.assertIsNone(record["losses"]["vcb"])
            self.assertIsNone(record["losses"]["cpb"])
        with self.assertRaises(ConfigurationError):
            self.trainer(disabled_losses=["image"])

    def test_other_grammar(self):
        self.corpus.metadata["grammar_fingerprint"] = "0" * 64
        with self.assertRaises(ConfigurationError):
            self.trainer()

    def test_example_losses(self):
        trainer = self.trainer()
        bundle = trainer.example_losses(self.corpus.train_target[0], 3, frozenset(["cma", "rec", "vcb", "vsh"]))
        values = bundle.values()
        self.assertGreater(values["rec"], 0.0)
        self.assertEqual(values["vcb"], 0.0)
        self.assertEqual(values["vsh"], 0.0)

    def test_build_model_from_parameters(self):
        model = build_model(self.corpus, self.grammar)
        self.assertEqual(model.image_weight.shape[1], self.corpus.metadata["z_dim"])
        for ex in self.corpus.training_examples():
            for i in ex.vsg.objects():
                self.assertIn(ex.vsg.label(i), model.vocabularies.objects)

    def test_numeric_failure_keeps_last_good_model(self):
        trainer = self.trainer(self.folder)
        trainer.model.image_bias.values[:] = np.nan
        with self.assertRaises(NumericFailure):
            trainer.execute()
        self.assertEqual(len(trainer.report), 1)
        self.assertEqual(trainer.history, [])
        self.assertTrue(os.path.isfile(os.path.join(self.folder, LAST_GOOD_CHECKPOINT)))
        self.assertFalse(os.path.isfile(os.path.join(self.folder, FINAL_CHECKPOINT)))
