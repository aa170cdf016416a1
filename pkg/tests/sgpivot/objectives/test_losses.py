from unittest import TestCase

import numpy as np

from sgpivot.encoder import NodeReps, encode
from sgpivot.exceptions import ContractError, DomainError
from sgpivot.numerics import Tape, Tensor, finite_difference_check
from sgpivot.objectives import CMA, CPB, REC, VCB, VSH, LossBundle, label_anchors, loss_cma, loss_cpb, loss_rec
from sgpivot.objectives import loss_vcb, loss_vsh, total_loss
from sgpivot.scene_graph import SceneGraph, ToyGrammar, parse_toy_lsg
from sgpivot.translation import SRC, TGT
from ..translation.test_translator import red_ball_on_ground, small_model


def rows(values, requires_grad=False, name=None):
    return NodeReps(Tensor(values, requires_grad=requires_grad, name=name), "language")


def gradient_mass(grads, model, group):
    return sum(float(np.abs(grads[p]).sum()) for p in model.parameter_groups()[group])


class TestAlignmentLoss(TestCase):
    def test_single_positive(self):
        lsg = rows([[1.0, 0.0]])
        vsg = rows([[0.9, np.sqrt(1 - 0.81)], [0.1, np.sqrt(1 - 0.01)]])
        self.assertAlmostEqual(loss_cma(lsg, vsg, alpha=0.5, tau=1.0).item(), 0.37110, places=5)

    def test_no_positive_pairs(self):
        lsg = rows([[1.0, 0.0]])
        vsg = rows([[-1.0, 0.0], [0.0, 1.0]])
        self.assertEqual(loss_cma(lsg, vsg, alpha=0.5).item(), 0.0)
        self.assertGreater(loss_cma(lsg, vsg, alpha=0.5, anchors=[(0, 1)]).item(), 0.0)

    def test_temperature(self):
        with self.assertRaises(DomainError):
            loss_cma(rows([[1.0, 0.0]]), rows([[1.0, 0.0]]), tau=0.0)

    def test_gradients(self):
        rng = np.random.default_rng(4)
        lsg = Tensor(rng.normal(size=(2, 3)), requires_grad=True, name="lsg")
        vsg = Tensor(rng.normal(size=(2, 3)), requires_grad=True, name="vsg")

        def f(p):
            return loss_cma(NodeReps(p[0], "language"), NodeReps(p[1], "visual"), alpha=-1.0, tau=0.1)

        self.assertLess(finite_difference_check(f, [lsg, vsg]).max_relative_error, 1e-4)

    def test_label_anchors(self):
        lsg = parse_toy_lsg("red ball rolls", ToyGrammar.load())
        self.assertEqual(label_anchors(lsg, red_ball_on_ground()), {(0, 0), (1, 1)})


class TestModelLosses(TestCase):
    def setUp(self) -> None:
        self.model = small_model()
        self.grammar = ToyGrammar.load()
        self.tokens = ["red", "ball", "rolls"]
        self.lsg = parse_toy_lsg(self.tokens, self.grammar)
        self.vsg = red_ball_on_ground()

    def backward(self, f):
        with Tape() as tape:
            loss = f()
        return loss, tape.backward(loss, self.model.parameters(), accumulate=False)

    def test_reconstruction(self):
        z = np.array([0.5, -0.5, 1.0])

        def f():
            return loss_rec(encode(self.lsg, self.model.lsg_encoder), encode(self.vsg, self.model.vsg_encoder),
                            self.tokens, z, self.model)

        loss, grads = self.backward(f)
        self.assertGreater(loss.item(), 0.0)
        for group in ["lsg_encoder", "vsg_encoder", "src_captioner", "image_head"]:
            self.assertGreater(gradient_mass(grads, self.model, group), 0.0, group)
        for group in ["tgt_captioner", "src_decoder", "tgt_decoder", "mix_encoder"]:
            self.assertEqual(gradient_mass(grads, self.model, group), 0.0, group)
        with self.assertRaises(ContractError):
            loss_rec(encode(self.lsg, self.model.lsg_encoder), encode(self.vsg, self.model.vsg_encoder), [], z,
                     self.model)

    def test_visual_concept_back_translation(self):
        loss, grads = self.backward(lambda: loss_vcb(self.tokens, self.lsg, self.vsg, self.model,
                                                     pseudo=["rot", "kugel", "rollt"]))
        self.assertGreater(loss.item(), 0.0)
        self.assertGreater(gradient_mass(grads, self.model, "src_decoder"), 0.0)
        self.assertEqual(gradient_mass(grads, self.model, "tgt_decoder"), 0.0)

    def test_generated_pseudo_sentence_gets_no_gradient(self):
        counters = {}
        with Tape() as tape:
            loss = loss_vcb(self.tokens, self.lsg, self.vsg, self.model, counters=counters)
        if not loss.tracks:
            # untrained translators often produce nothing parseable
            self.assertEqual(sum(counters.values()), 1)
            return
        grads = tape.backward(loss, self.model.parameters(), accumulate=False)
        self.assertEqual(gradient_mass(grads, self.model, "tgt_decoder"), 0.0)
        self.assertGreater(gradient_mass(grads, self.model, "src_decoder"), 0.0)

    def test_back_translation_skips(self):
        counters = {}
        self.assertEqual(loss_vcb(self.tokens, self.lsg, self.vsg, self.model, counters=counters, pseudo=[]).item(),
                         0.0)
        self.assertEqual(loss_vcb(self.tokens, self.lsg, self.vsg, self.model, counters=counters,
                                  pseudo=["und"]).item(), 0.0)
        self.assertEqual(loss_cpb(self.vsg, self.model, counters=counters, pseudo=(["red"], [])).item(), 0.0)
        self.assertEqual(loss_cpb(self.vsg, self.model, counters=counters, pseudo=(["ball", "red"], ["kugel"])).item(),
                         0.0)
        self.assertEqual(counters, {"vcb_empty": 1, "vcb_unparseable": 1, "cpb_empty": 1, "cpb_unparseable": 1})

    def test_caption_pair_back_translation(self):
        pseudo = (["red", "ball", "rolls"], ["rot", "kugel", "rollt"])
        loss, grads = self.backward(lambda: loss_cpb(self.vsg, self.model, pseudo=pseudo))
        self.assertGreater(loss.item(), 0.0)
        for group in ["src_decoder", "tgt_decoder", "mix_encoder"]:
            self.assertGreater(gradient_mass(grads, self.model, group), 0.0, group)
        for group in ["src_captioner", "tgt_captioner"]:
            self.assertEqual(gradient_mass(grads, self.model, group), 0.0, group)

    def test_hallucination_loss(self):
        gold = SceneGraph("visual", [(0, "object", "ball"), (1, "relation", "on"), (2, "object", "ground")],
                          [(0, 1), (1, 2)])
        lsg = parse_toy_lsg("ball rolls", self.grammar)
        loss, grads = self.backward(lambda: loss_vsh(lsg, gold, self.model))
        self.assertGreater(loss.item(), 0.0)
        self.assertGreater(gradient_mass(grads, self.model, "augmentor"), 0.0)
        self.assertEqual(gradient_mass(grads, self.model, "lsg_encoder"), 0.0)

        counters = {}
        unrelated = SceneGraph("visual", [(0, "object", "sky")], [])
        self.assertEqual(loss_vsh(lsg, unrelated, self.model, counters=counters).item(), 0.0)
        self.assertEqual(counters, {"vsh_unaligned": 1})

    def silence(self, *decoders):
        for params in decoders:
            params.w_o.values[:] = 0.0
            params.b_o.values[:] = 0.0

    def test_uniform_reconstruction(self):
        self.silence(self.model.captioners[SRC])
        self.model.image_weight.values[:] = 0.0
        self.model.image_bias.values[:] = 0.0
        z = np.array([0.5, -0.5, 1.0])
        loss = loss_rec(encode(self.lsg, self.model.lsg_encoder), encode(self.vsg, self.model.vsg_encoder),
                        self.tokens, z, self.model)
        vocabulary = len(self.model.captioners[SRC].vocabulary)
        self.assertAlmostEqual(loss.item(), 4 * np.log(vocabulary) + 0.5, places=10)

    def test_uniform_caption_pair_back_translation(self):
        self.silence(self.model.decoders[SRC], self.model.decoders[TGT])
        loss = loss_cpb(self.vsg, self.model, pseudo=(["red", "ball", "rolls"], ["rot", "kugel", "rollt"]))
        expected = 4 * np.log(len(self.model.decoders[SRC].vocabulary)) + 4 * np.log(
            len(self.model.decoders[TGT].vocabulary))
        self.assertAlmostEqual(loss.item(), expected, places=10)

    def test_uniform_hallucination_heads(self):
        augmentor = self.model.augmentor
        augmentor.node_out_bias.values[:] = 0.0
        augmentor.pair_out_bias.values[:] = 0.0
        gold = SceneGraph("visual", [(0, "object", "ball"), (1, "relation", "on"), (2, "object", "ground")],
                          [(0, 1), (1, 2)])
        loss = loss_vsh(parse_toy_lsg("ball rolls", self.grammar), gold, self.model)
        vocab = augmentor.vocabularies
        # one node target (ground) and its relation label (on)
        self.assertAlmostEqual(loss.item(), np.log(len(vocab.na_labels)) + np.log(len(vocab.relations)), places=10)


class TestTotalLoss(TestCase):
    def test_weighted_sum(self):
        parts = {name: Tensor(float(k + 1)) for k, name in enumerate([CMA, REC, VCB, CPB, VSH])}
        self.assertEqual(total_loss(LossBundle(3, **parts)).item(), 15.0)
        self.assertEqual(total_loss(LossBundle(1, **parts)).item(), 3.0)
        self.assertEqual(total_loss(LossBundle(2, **parts), {VCB: 2.0, VSH: 0.0}).item(), 10.0)

    def test_missing_component(self):
        with self.assertRaises(ContractError):
            total_loss(LossBundle(1, cma=Tensor(1.0)))
        with self.assertRaises(ContractError):
            LossBundle(1, cma=Tensor(1.0), rec=Tensor(1.0), image=Tensor(1.0))

    def test_values(self):
        bundle = LossBundle(1, cma=Tensor(0.5), rec=Tensor(2.0))
        self.assertEqual(bundle.values(), {CMA: 0.5, REC: 2.0, VCB: None, CPB: None, VSH: None})

    def test_gradient_of_sum(self):
        rng = np.random.default_rng(0)
        w = Tensor(rng.normal(size=3), requires_grad=True, name="w")

        def f(p):
            parts = {CMA: (p[0] * p[0]).sum(), REC: (p[0] * 3.0).sum(), VCB: p[0][0] * p[0][1],
                     CPB: p[0].sum() * 0.5, VSH: (p[0] * p[0] * p[0]).sum()}
            return total_loss(LossBundle(3, **parts), {CMA: 0.3, VSH: 2.0})

        self.assertLess(finite_difference_check(f, [w]).max_relative_error, 1e-6)
