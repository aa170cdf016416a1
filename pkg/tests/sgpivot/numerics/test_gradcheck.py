from unittest import TestCase

import numpy as np

from sgpivot.exceptions import ContractError, NonDeterministicError
from sgpivot.numerics import Tensor, einsum, finite_difference_check, relative_error, tsum
from sgpivot.numerics.tensor import _make


def wrong_square(a: Tensor) -> Tensor:
    # backward misses the factor 2
    return _make(a.values ** 2, (a,), lambda g: (g * a.values,))


class TestFiniteDifferenceCheck(TestCase):
    def setUp(self) -> None:
        self.rng = np.random.default_rng(0)
        self.w = Tensor(self.rng.normal(size=6), requires_grad=True, name="w")

    def test_linear_function(self):
        c = self.rng.normal(size=6)
        report = finite_difference_check(lambda p: einsum("i,i->", p[0], c), [self.w])
        self.assertLess(report.max_relative_error, 1e-8)
        self.assertEqual(report.checked, 6)
        self.assertTrue(report.passed())

    def test_dead_parameter_is_a_both_zero_match(self):
        dead = Tensor(np.ones(3), requires_grad=True, name="dead")
        report = finite_difference_check(lambda p: tsum(p[0] * p[0]), [self.w, dead])
        self.assertEqual(report.both_zero, 3)
        self.assertEqual(report.per_tensor["dead"], 0.0)
        self.assertTrue(report.passed())

    def test_corrupted_gradient_names_the_tensor(self):
        other = Tensor(self.rng.normal(size=2), requires_grad=True, name="fine")
        report = finite_difference_check(lambda p: tsum(wrong_square(p[0])) + tsum(p[1] * p[1]), [self.w, other])
        self.assertFalse(report.passed())
        self.assertEqual(report.failing_tensors(), ["w"])
        self.assertEqual(report.worst[0], "w")

    def test_non_deterministic_function(self):
        calls = [0]

        def f(p):
            calls[0] += 1
            return tsum(p[0] * p[0]) + float(calls[0])

        with self.assertRaises(NonDeterministicError):
            finite_difference_check(f, [self.w])

    def test_sampled_coordinates(self):
        big = Tensor(self.rng.normal(size=(30, 10)), requires_grad=True, name="big")
        report = finite_difference_check(lambda p: tsum(p[0] * p[0]), [big], max_coordinates=50)
        self.assertEqual(report.checked, 50)
        self.assertTrue(report.passed())

    def test_needs_gradient_tensors(self):
        with self.assertRaises(ContractError):
            finite_difference_check(lambda p: tsum(p[0]), [Tensor([1.0])])

    def test_relative_error(self):
        self.assertEqual(relative_error(0.0, 0.0), 0.0)
        self.assertAlmostEqual(relative_error(1.0, 1.1), 0.1 / 1.1)
        self.assertAlmostEqual(relative_error(0.0, 1e-9), 1e-3)
