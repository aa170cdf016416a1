from unittest import TestCase

import numpy as np

from sgpivot.exceptions import ContractError, NumericFailure
from sgpivot.numerics import Tensor
from sgpivot.objectives import SGD, ScheduleConfig, training_schedule
from sgpivot.parameters import Parameters


class TestTrainingSchedule(TestCase):
    def test_stages(self):
        self.assertEqual(training_schedule(1), {"cma", "rec"})
        self.assertEqual(training_schedule(2), {"vcb", "cpb", "vsh"})
        self.assertEqual(training_schedule(3), {"cma", "rec", "vcb", "cpb", "vsh"})
        for stage in [0, 4]:
            with self.assertRaises(ContractError):
                training_schedule(stage)


class TestScheduleConfig(TestCase):
    def test_defaults_from_parameter_file(self):
        config = ScheduleConfig.from_parameters(Parameters().parameters["training"])
        self.assertGreater(config.epochs(1), 0)
        self.assertEqual(set(config.weights), {"cma", "rec", "vcb", "cpb", "vsh"})

    def test_overrides(self):
        config = ScheduleConfig(epochs_stage2=2, tau=1, weight_vsh=0.5)
        self.assertEqual(config.epochs(2), 2)
        self.assertIsInstance(config.tau, float)
        self.assertEqual(config.weights["vsh"], 0.5)
        config.alpha = 0.7
        self.assertEqual(config.to_dict()["alpha"], 0.7)

    def test_rejects_bad_values(self):
        for kwargs in [{"tau": 0.0}, {"learning_rate": -1.0}, {"epochs_stage1": 0}, {"batch_size": 2.5},
                       {"seed": True}, {"weight_cma": -1.0}, {"cma_anchors": 1}, {"momentum": 0.9}]:
            with self.assertRaises(ValueError):
                ScheduleConfig(**kwargs)
        config = ScheduleConfig()
        with self.assertRaises(ValueError):
            config.tau = -0.1
        with self.assertRaises(ValueError):
            config.momentum = 0.9
        with self.assertRaises(ContractError):
            config.epochs(4)


class TestSGD(TestCase):
    def test_plain_step(self):
        w = Tensor([1.0, 2.0], requires_grad=True)
        w.grad = np.array([0.3, 0.4])
        optimizer = SGD([w], learning_rate=0.1, clip_norm=5.0)
        self.assertAlmostEqual(optimizer.step(), 0.5)
        np.testing.assert_allclose(w.values, [0.97, 1.96])
        np.testing.assert_array_equal(w.grad, [0.0, 0.0])

    def test_clipping(self):
        a = Tensor([0.0, 0.0], requires_grad=True)
        b = Tensor([0.0], requires_grad=True)
        a.grad = np.array([6.0, 0.0])
        b.grad = np.array([8.0])
        optimizer = SGD([a, b], learning_rate=1.0, clip_norm=5.0)
        self.assertAlmostEqual(optimizer.step(), 10.0)
        np.testing.assert_allclose(a.values, [-3.0, 0.0])
        np.testing.assert_allclose(b.values, [-4.0])

    def test_non_finite_gradient(self):
        w = Tensor([1.0], requires_grad=True)
        w.grad = np.array([np.inf])
        with self.assertRaises(NumericFailure):
            SGD([w]).step()
        self.assertEqual(w.values[0], 1.0)
