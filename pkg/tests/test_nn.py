"""Network building blocks: forward/backward against finite differences,
Adam closed forms, determinism, output ranges, checkpoint round trip."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gcmi import (
    NumericError,
    ShapeError,
    adam_new,
    adam_step,
    backward,
    backward_with_input_grads,
    forward,
    load_mlp,
    mlp_new,
    save_mlp,
)
from gcmi.nn import Mlp, ParamGrads


def finite_difference_grads(mlp, inputs, output_grads, h=1e-5):
    """Central differences of sum(forward(mlp, x) * output_grads)."""

    def objective():
        return float(np.sum(forward(mlp, inputs) * output_grads))

    d_weights, d_biases = [], []
    for arrs, store in ((mlp.weights, d_weights), (mlp.biases, d_biases)):
        for arr in arrs:
            grad = np.zeros_like(arr)
            it = np.nditer(arr, flags=["multi_index"])
            for _ in it:
                idx = it.multi_index
                orig = arr[idx]
                arr[idx] = orig + h
                up = objective()
                arr[idx] = orig - h
                down = objective()
                arr[idx] = orig
                grad[idx] = (up - down) / (2 * h)
            store.append(grad)
    return ParamGrads(d_weights, d_biases)


def assert_grads_close(analytic, numeric, rtol=1e-4):
    for a, n in zip(analytic.d_weights + analytic.d_biases, numeric.d_weights + numeric.d_biases):
        denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), 1e-3)
        assert np.all(np.abs(a - n) / denom < rtol)


class TestMlpNew:
    def test_single_hidden_layer_dims(self):
        mlp = mlp_new(3, [100], 1, "identity", 42)
        assert [w.shape for w in mlp.weights] == [(3, 100), (100, 1)]

    def test_two_hidden_layer_dims(self):
        mlp = mlp_new(5, [200, 100], 1, "scaled_sigmoid_0_2", 7)
        assert [w.shape for w in mlp.weights] == [(5, 200), (200, 100), (100, 1)]

    def test_same_seed_bit_identical(self):
        a = mlp_new(4, [8], 2, "sigmoid", 123)
        b = mlp_new(4, [8], 2, "sigmoid", 123)
        for wa, wb in zip(a.weights, b.weights):
            assert np.array_equal(wa, wb)

    def test_different_seed_differs(self):
        a = mlp_new(4, [8], 2, "sigmoid", 123)
        b = mlp_new(4, [8], 2, "sigmoid", 124)
        assert not np.array_equal(a.weights[0], b.weights[0])

    @pytest.mark.parametrize("bad", [0, -3])
    def test_nonpositive_dims_rejected(self, bad):
        with pytest.raises(ValueError):
            mlp_new(bad, [4], 1, "identity", 0)
        with pytest.raises(ValueError):
            mlp_new(3, [4], bad, "identity", 0)

    def test_he_scaling(self):
        mlp = mlp_new(1000, [2000], 1, "identity", 5)
        assert mlp.weights[0].std() == pytest.approx(np.sqrt(2.0 / 1000), rel=0.1)

    def test_mismatched_layer_dims_rejected(self):
        with pytest.raises(ShapeError, match="chain"):
            Mlp(
                [np.zeros((3, 4)), np.zeros((5, 1))],
                [np.zeros(4), np.zeros(1)],
                "identity",
            )

    def test_nonfinite_weights_rejected(self):
        with pytest.raises(NumericError):
            Mlp([np.array([[np.inf]])], [np.zeros(1)], "identity")


class TestForward:
    def test_zero_net_identity_outputs_zero(self):
        mlp = mlp_new(3, [4], 2, "identity", 0)
        for w in mlp.weights:
            w[:] = 0.0
        out = forward(mlp, np.random.default_rng(0).normal(size=(5, 3)))
        assert np.array_equal(out, np.zeros((5, 2)))

    def test_single_linear_layer_hand_value(self):
        # one layer: w=[[2]], b=[1]; input 3 -> 7
        mlp = Mlp([np.array([[2.0]])], [np.array([1.0])], "identity")
        assert forward(mlp, np.array([[3.0]]))[0, 0] == 7.0

    def test_scaled_sigmoid_at_zero_preactivation(self):
        mlp = mlp_new(2, [4], 1, "scaled_sigmoid_0_2", 0)
        for w in mlp.weights:
            w[:] = 0.0
        for b in mlp.biases:
            b[:] = 0.0
        assert forward(mlp, np.ones((1, 2)))[0, 0] == pytest.approx(1.0)

    def test_scaled_sigmoid_range_open_interval(self):
        mlp = mlp_new(2, [4], 1, "scaled_sigmoid_0_2", 3)
        extreme = np.array([[1e6, -1e6], [-1e6, 1e6], [1e6, 1e6]])
        out = forward(mlp, extreme)
        assert np.all(out > 0.0) and np.all(out < 2.0)

    def test_sigmoid_range_open_interval(self):
        mlp = mlp_new(2, [4], 1, "sigmoid", 3)
        out = forward(mlp, np.array([[1e6, 1e6], [-1e6, -1e6]]))
        assert np.all(out > 0.0) and np.all(out < 1.0)

    def test_width_mismatch_raises(self):
        mlp = mlp_new(3, [4], 1, "identity", 0)
        with pytest.raises(ShapeError):
            forward(mlp, np.zeros((2, 5)))


class TestBackward:
    def test_zero_output_grads_zero_param_grads(self):
        mlp = mlp_new(3, [4], 2, "identity", 1)
        grads = backward(mlp, np.ones((5, 3)), np.zeros((5, 2)))
        for g in grads.d_weights + grads.d_biases:
            assert np.array_equal(g, np.zeros_like(g))

    def test_one_layer_linear_chain_rule(self):
        # single linear layer: d/dW of sum(g * (xW + b)) = x' g
        rng = np.random.default_rng(7)
        x = rng.normal(size=(6, 3))
        g = rng.normal(size=(6, 2))
        mlp = Mlp([rng.normal(size=(3, 2))], [rng.normal(size=2)], "identity")
        grads = backward(mlp, x, g)
        assert np.allclose(grads.d_weights[0], x.T @ g)
        assert np.allclose(grads.d_biases[0], g.sum(axis=0))

    @pytest.mark.parametrize("activation", ["identity", "sigmoid", "scaled_sigmoid_0_2"])
    def test_matches_finite_differences(self, activation):
        rng = np.random.default_rng(11)
        mlp = mlp_new(3, [4], 1, activation, 11)
        x = rng.normal(size=(5, 3))
        g = rng.normal(size=(5, 1))
        assert_grads_close(backward(mlp, x, g), finite_difference_grads(mlp, x, g))

    def test_input_grads_match_finite_differences(self):
        rng = np.random.default_rng(13)
        mlp = mlp_new(4, [6], 2, "scaled_sigmoid_0_2", 5)
        x = rng.normal(size=(3, 4))
        g = rng.normal(size=(3, 2))
        _, input_grads = backward_with_input_grads(mlp, x, g)
        h = 1e-5
        fd = np.zeros_like(x)
        for idx in np.ndindex(*x.shape):
            xp = x.copy()
            xm = x.copy()
            xp[idx] += h
            xm[idx] -= h
            fd[idx] = (np.sum(forward(mlp, xp) * g) - np.sum(forward(mlp, xm) * g)) / (2 * h)
        denom = np.maximum(np.maximum(np.abs(fd), np.abs(input_grads)), 1e-3)
        assert np.all(np.abs(fd - input_grads) / denom < 1e-4)

    def test_shape_mismatch_raises(self):
        mlp = mlp_new(3, [4], 1, "identity", 0)
        with pytest.raises(ShapeError):
            backward(mlp, np.zeros((2, 3)), np.zeros((2, 2)))


class TestAdam:
    def test_zero_grads_no_l2_fixed_point(self):
        mlp = mlp_new(3, [4], 1, "identity", 2)
        before = [w.copy() for w in mlp.weights]
        state = adam_new(mlp, learning_rate=0.01, l2_coeff=0.0)
        zero = ParamGrads(
            [np.zeros_like(w) for w in mlp.weights], [np.zeros_like(b) for b in mlp.biases]
        )
        adam_step(mlp, zero, state)
        for w, b4 in zip(mlp.weights, before):
            assert np.array_equal(w, b4)
        assert state.step_count == 1

    def test_first_step_is_signed_learning_rate(self):
        # first bias-corrected step: -lr * g / (|g| + eps) ~= -lr * sign(g)
        mlp = mlp_new(2, [3], 1, "identity", 4)
        before = [w.copy() for w in mlp.weights]
        state = adam_new(mlp, learning_rate=1e-3)
        rng = np.random.default_rng(0)
        grads = ParamGrads(
            [rng.normal(size=w.shape) for w in mlp.weights],
            [rng.normal(size=b.shape) for b in mlp.biases],
        )
        adam_step(mlp, grads, state)
        for w, b4, g in zip(mlp.weights, before, grads.d_weights):
            assert np.allclose(w - b4, -1e-3 * np.sign(g), atol=1e-9)

    def test_pure_l2_decay_shrinks_weights(self):
        mlp = mlp_new(2, [3], 1, "identity", 4)
        for w in mlp.weights:
            w[:] = np.where(np.abs(w) < 0.1, 0.5, w)  # keep magnitudes clear of the step size
        before = [w.copy() for w in mlp.weights]
        state = adam_new(mlp, learning_rate=1e-3, l2_coeff=0.0001)
        zero = ParamGrads(
            [np.zeros_like(w) for w in mlp.weights], [np.zeros_like(b) for b in mlp.biases]
        )
        adam_step(mlp, zero, state)
        for w, b4 in zip(mlp.weights, before):
            assert np.all(np.abs(w) < np.abs(b4))
            assert np.all(np.sign(w) == np.sign(b4))

    def test_nonfinite_gradient_names_layer(self):
        mlp = mlp_new(2, [3], 1, "identity", 4)
        state = adam_new(mlp, learning_rate=1e-3)
        grads = ParamGrads(
            [np.zeros_like(w) for w in mlp.weights], [np.zeros_like(b) for b in mlp.biases]
        )
        grads.d_weights[1][0, 0] = np.nan
        with pytest.raises(NumericError, match="layer 1"):
            adam_step(mlp, grads, state)

    @given(seed=st.integers(0, 2**32 - 1))
    @settings(max_examples=20, deadline=None)
    def test_update_deterministic_per_seed(self, seed):
        results = []
        for _ in range(2):
            mlp = mlp_new(3, [5], 2, "sigmoid", seed)
            state = adam_new(mlp, learning_rate=0.01, l2_coeff=1e-4)
            x = np.random.default_rng(seed).normal(size=(4, 3))
            g = np.ones((4, 2))
            adam_step(mlp, backward(mlp, x, g), state)
            results.append(np.concatenate([w.ravel() for w in mlp.weights]))
        assert np.array_equal(results[0], results[1])


class TestCheckpoint:
    def test_round_trip(self, tmp_path):
        mlp = mlp_new(4, [6, 3], 2, "scaled_sigmoid_0_2", 9)
        path = tmp_path / "net.json"
        save_mlp(mlp, path)
        loaded = load_mlp(path)
        assert loaded.output_activation == mlp.output_activation
        for a, b in zip(loaded.weights, mlp.weights):
            assert np.array_equal(a, b)
        for a, b in zip(loaded.biases, mlp.biases):
            assert np.array_equal(a, b)

    def test_rejects_other_files(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"format": "something-else"}')
        with pytest.raises(ValueError):
            load_mlp(path)
