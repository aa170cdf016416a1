import copy
import os
import uuid
from unittest import TestCase

import numpy as np

from sgpivot.exceptions import CheckpointError
from sgpivot.harness import MAGIC, checkpoint_bytes, load_checkpoint, read_checkpoint, save_checkpoint
from sgpivot.objectives import ScheduleConfig
from sgpivot.scene_graph import ToyGrammar
from ...data import path_test
from .tiny import tiny_corpus, tiny_model


class TestCheckpoint(TestCase):
    def setUp(self) -> None:
        self.grammar = ToyGrammar.load()
        self.model = tiny_model(tiny_corpus())
        self.config = ScheduleConfig(alpha=0.4, epochs_stage3=2)
        self.file_name = os.path.join(path_test, f"sgpivot_{uuid.uuid4().hex}.sgpv")

    def tearDown(self) -> None:
        if os.path.isfile(self.file_name):
            os.remove(self.file_name)

    def test_round_trip_is_byte_identical(self):
        save_checkpoint(self.model, self.config, self.grammar.fingerprint, self.file_name)
        model, config = load_checkpoint(self.file_name, self.grammar)
        self.assertEqual(config.to_dict(), self.config.to_dict())
        self.assertEqual(model.settings, self.model.settings)
        self.assertEqual(model.vocabularies.to_dict(), self.model.vocabularies.to_dict())
        for name, values in self.model.snapshot().items():
            np.testing.assert_array_equal(model.snapshot()[name], values)
        self.assertEqual(checkpoint_bytes(model, config, self.grammar.fingerprint),
                         checkpoint_bytes(self.model, self.config, self.grammar.fingerprint))

    def test_header(self):
        save_checkpoint(self.model, self.config, self.grammar.fingerprint, self.file_name)
        with open(self.file_name, "rb") as f:
            self.assertEqual(f.read(4), MAGIC)
        metadata, tensors = read_checkpoint(self.file_name)
        self.assertEqual(metadata["grammar_fingerprint"], self.grammar.fingerprint)
        self.assertEqual(set(tensors), set(self.model.named_parameters()))

    def test_refuses_other_grammar(self):
        save_checkpoint(self.model, self.config, self.grammar.fingerprint, self.file_name)
        definition = copy.deepcopy(self.grammar.definition)
        definition["templates"][0]["weight"] = 0.5
        with self.assertRaises(CheckpointError):
            load_checkpoint(self.file_name, ToyGrammar(definition))

    def test_malformed_files(self):
        data = checkpoint_bytes(self.model, self.config, self.grammar.fingerprint)
        for broken in [b"NOPE" + data[4:], data[:-3], data + b"\x00"]:
            with open(self.file_name, "wb") as f:
                f.write(broken)
            with self.assertRaises(CheckpointError):
                read_checkpoint(self.file_name)
