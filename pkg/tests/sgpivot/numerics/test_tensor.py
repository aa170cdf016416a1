import threading
from unittest import TestCase

import numpy as np

from sgpivot.exceptions import ContractError, DomainError, NumericFailure
from sgpivot.numerics import Tape, Tensor, active_tape, backward, einsum, exp, finite_difference_check, log
from sgpivot.numerics import log_softmax, no_grad, relu, sigmoid, stack, take_rows, tanh, tsum


class TestTensor(TestCase):
    def test_rejects_non_finite_values(self):
        with self.assertRaises(DomainError):
            Tensor([1.0, np.nan])

    def test_backward_of_sum(self):
        w = Tensor([0.3, -1.2, 4.0], requires_grad=True, name="w")
        with Tape():
            loss = tsum(w)
        grads = backward(loss)
        np.testing.assert_array_equal(grads[w], [1.0, 1.0, 1.0])
        np.testing.assert_array_equal(w.grad, [1.0, 1.0, 1.0])

    def test_backward_of_squared_norm(self):
        w = Tensor([0.3, -1.2, 4.0], requires_grad=True, name="w")
        with Tape() as tape:
            loss = tsum(w * w)
        grads = tape.backward(loss)
        np.testing.assert_allclose(grads[w], 2 * w.values, rtol=0, atol=1e-15)

    def test_backward_needs_scalar(self):
        w = Tensor([1.0, 2.0], requires_grad=True)
        with Tape():
            y = w * 2.0
        with self.assertRaises(ContractError):
            backward(y)

    def test_tape_runs_backward_once(self):
        w = Tensor([1.0, 2.0], requires_grad=True)
        with Tape() as tape:
            loss = tsum(w * w)
        tape.backward(loss)
        with self.assertRaises(ContractError):
            tape.backward(loss)

        tape.reset()
        self.assertEqual(tape.records, [])
        with tape:
            loss = tsum(w * w)
        np.testing.assert_allclose(tape.backward(loss, accumulate=False)[w], [2.0, 4.0])

    def test_gradients_accumulate_until_reset(self):
        w = Tensor([1.0, 2.0], requires_grad=True)
        for _ in range(2):
            with Tape() as tape:
                loss = tsum(w * 3.0)
            tape.backward(loss)
        np.testing.assert_array_equal(w.grad, [6.0, 6.0])
        w.zero_grad()
        np.testing.assert_array_equal(w.grad, [0.0, 0.0])

    def test_unused_parameters_get_zero_gradient(self):
        w = Tensor([1.0, 2.0], requires_grad=True)
        dead = Tensor([[1.0, 1.0]], requires_grad=True)
        with Tape() as tape:
            loss = tsum(w)
        grads = tape.backward(loss, [w, dead])
        np.testing.assert_array_equal(grads[dead], np.zeros((1, 2)))

    def test_no_grad_records_nothing(self):
        w = Tensor([1.0, 2.0], requires_grad=True)
        with Tape() as tape:
            with no_grad():
                y = tsum(w * w)
        self.assertFalse(y.tracks)
        self.assertEqual(tape.records, [])

    def test_non_finite_result_fails(self):
        with self.assertRaises(NumericFailure):
            exp(Tensor([1000.0]))

    def test_log_domain(self):
        with self.assertRaises(DomainError):
            log(Tensor([0.0, 1.0]))

    def test_tape_is_thread_local(self):
        seen = []
        with Tape() as tape:
            worker = threading.Thread(target=lambda: seen.append(active_tape()))
            worker.start()
            worker.join()
            self.assertIs(active_tape(), tape)
        self.assertEqual(seen, [None])
        self.assertIsNone(active_tape())

    def test_primitive_gradients(self):
        rng = np.random.default_rng(3)
        a = Tensor(rng.normal(size=(3, 4)), requires_grad=True, name="a")
        b = Tensor(rng.normal(size=(4, 2)), requires_grad=True, name="b")
        c = Tensor(rng.normal(size=(2,)) + 3.0, requires_grad=True, name="c")

        def f(params):
            a, b, c = params
            h = tanh(einsum("ij,jk->ik", a, b)) + sigmoid(c)
            rows = take_rows(h, [0, 2, 2])
            return tsum(log_softmax(rows, axis=1)) + tsum(stack([c, c * c]) / c) + tsum(relu(a + 5.0))

        report = finite_difference_check(f, [a, b, c])
        self.assertLess(report.max_relative_error, 1e-5)

    def test_trilinear_einsum_gradient(self):
        rng = np.random.default_rng(5)
        w = Tensor(rng.normal(size=(2, 3, 2, 3)), requires_grad=True, name="w")
        x = Tensor(rng.normal(size=(4, 3)), requires_grad=True, name="x")
        y = Tensor(rng.normal(size=(4, 2)), requires_grad=True, name="y")

        def f(params):
            w, x, y = params
            return tsum(sigmoid(einsum("hadb,pa,pd,pb->ph", w, x, y, x)))

        report = finite_difference_check(f, [w, x, y])
        self.assertLess(report.max_relative_error, 1e-5)
