"""ParamStore and Adam: exact first-step value, no-op on zero gradients,
shared step counter, contract errors."""

import numpy as np
import pytest

from rpmkit import tensor as T
from rpmkit.optim import ADAM_EPS, ParamStore
from rpmkit.tensor import Tensor


def _store_with(values: dict) -> ParamStore:
    store = ParamStore()
    for name, arr in values.items():
        store.add(name, Tensor(np.asarray(arr, dtype=np.float64)))
    return store


class TestParamStore:
    def test_duplicate_name_rejected(self):
        store = _store_with({"w": [1.0]})
        with pytest.raises(ValueError, match="already registered"):
            store.add("w", Tensor([2.0]))

    def test_missing_grad_names_parameter(self):
        store = _store_with({"w": [1.0], "b": [2.0]})
        store["w"].grad = np.array([0.1])
        with pytest.raises(ValueError, match="'b'"):
            store.adam_step()

    def test_step_counter_shared_and_incremented(self):
        store = _store_with({"w": [1.0], "b": [2.0]})
        for expected in (1, 2, 3):
            for p in store.tensors():
                p.grad = np.ones_like(p.data)
            store.adam_step()
            assert store.step_count == expected

    def test_grads_cleared_after_step(self):
        store = _store_with({"w": [1.0]})
        store["w"].grad = np.array([1.0])
        store.adam_step()
        assert store["w"].grad is None


class TestAdam:
    def test_zero_gradient_is_noop(self):
        store = _store_with({"w": [[1.0, -2.0], [0.5, 3.0]]})
        before = store["w"].data.copy()
        store["w"].grad = np.zeros_like(before)
        store.adam_step(lr=1e-4)
        np.testing.assert_array_equal(store["w"].data, before)

    def test_first_step_closed_form(self):
        # with g = 1: m-hat = 1, v-hat = 1, so the update is lr / (1 + eps)
        store = _store_with({"w": [2.0]})
        store["w"].grad = np.array([1.0])
        store.adam_step(lr=1e-4)
        expected = 2.0 - 1e-4 * (1.0 / (np.sqrt(1.0) + ADAM_EPS))
        assert store["w"].data[0] == expected
        assert abs((2.0 - store["w"].data[0]) - 1e-4) < 1e-10

    def test_default_lr_is_1e4(self):
        from rpmkit.optim import DEFAULT_LR

        assert DEFAULT_LR == 1e-4

    def test_matches_reference_loop(self):
        rng = np.random.default_rng(5)
        w0 = rng.normal(size=(3, 2))
        grads = [rng.normal(size=(3, 2)) for _ in range(4)]

        store = _store_with({"w": w0})
        for g in grads:
            store["w"].grad = g.copy()
            store.adam_step(lr=0.01)

        # independent textbook Adam recurrence
        theta = w0.copy()
        m = np.zeros_like(theta)
        v = np.zeros_like(theta)
        for t, g in enumerate(grads, start=1):
            m = 0.9 * m + 0.1 * g
            v = 0.999 * v + 0.001 * g * g
            mhat = m / (1 - 0.9**t)
            vhat = v / (1 - 0.999**t)
            theta = theta - 0.01 * mhat / (np.sqrt(vhat) + ADAM_EPS)
        np.testing.assert_allclose(store["w"].data, theta, rtol=0, atol=1e-15)

    def test_descends_a_simple_quadratic(self):
        store = _store_with({"w": [5.0]})
        for _ in range(200):
            w = store["w"]
            loss = T.reduce_sum(w * w)
            loss.backward()
            store.adam_step(lr=0.1)
        assert abs(store["w"].data[0]) < 5.0 * 0.1
