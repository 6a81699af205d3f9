import numpy as np
import pytest

from src.errors import AutogradError, ConfigError, SerializationError, ShapeError
from src.tensor import Adam, Tape, Tensor, adam_step, dumps_weights, loads_weights, parameter, primitive_catalog
from src.tensor import ops
from src.tensor.gradcheck import check_gradients


def _attention(q, k, v):
    mask = np.array([[[True, False, True, True, False]], [[False, True, True, False, True]]])
    return ops.scaled_dot_product_attention(q, k, v, mask)


CASES = {
    "add": (ops.add, [(3, 4), (4,)]),
    "sub": (ops.sub, [(3, 4), (3, 1)]),
    "mul": (ops.mul, [(2, 3), (2, 3)]),
    "scale": (lambda a: ops.scale(a, 2.5), [(4, 3)]),
    "matmul": (ops.matmul, [(2, 3, 4), (4, 5)]),
    "conv1d": (lambda x, w, b: ops.conv1d(x, w, b, padding=1), [(2, 3, 8), (4, 3, 3), (4,)]),
    "conv1d_stride2": (lambda x, w: ops.conv1d(x, w, stride=2, padding=2), [(2, 3, 8), (2, 3, 5)]),
    "conv_transpose1d": (
        lambda x, w, b: ops.conv_transpose1d(x, w, b, stride=2, padding=1),
        [(2, 3, 5), (3, 2, 4), (2,)],
    ),
    "group_norm": (lambda x, g, b: ops.group_norm(x, 2, g, b), [(2, 4, 5), (4,), (4,)]),
    "layer_norm": (ops.layer_norm, [(3, 6), (6,), (6,)]),
    "mish": (ops.mish, [(4, 5)]),
    "gelu": (ops.gelu, [(4, 5)]),
    "softmax": (lambda x: ops.softmax(x, axis=-1), [(3, 5)]),
    "concat": (lambda a, b: ops.concat([a, b], axis=1), [(2, 3), (2, 4)]),
    "index": (lambda x: ops.index(x, (slice(None), slice(1, 3))), [(3, 4)]),
    "index_gather": (lambda x: ops.index(x, np.array([0, 2, 2])), [(3, 4)]),
    "reshape": (lambda x: ops.reshape(x, (3, 4)), [(2, 6)]),
    "transpose": (lambda x: ops.transpose(x, (2, 0, 1)), [(2, 3, 4)]),
    "sum": (lambda x: ops.sum(x, axis=1), [(3, 4)]),
    "mean": (lambda x: ops.mean(x, axis=(0, 2)), [(2, 3, 4)]),
    "scaled_dot_product_attention": (_attention, [(2, 3, 4), (2, 5, 4), (2, 5, 4)]),
}


def _weighted_loss(fn, shapes, rng):
    params = [parameter(rng.standard_normal(shape), name=f"x{i}") for i, shape in enumerate(shapes)]
    weights = Tensor(rng.standard_normal(fn(*params).shape))

    def build():
        return ops.sum(ops.mul(fn(*params), weights))

    return build, params


def test_every_primitive_has_a_gradient_case():
    covered = {name.removesuffix("_stride2").removesuffix("_gather") for name in CASES}
    assert primitive_catalog() <= covered


@pytest.mark.parametrize("name", sorted(CASES))
def test_primitive_gradients_match_central_differences(name):
    fn, shapes = CASES[name]
    for trial in range(20):
        rng = np.random.default_rng(trial)
        build, params = _weighted_loss(fn, shapes, rng)
        result = check_gradients(build, params, rtol=1e-4, entries_per_param=6, rng=rng)
        assert result.ok, f"{name} trial {trial}: {result.failures[:3]}"


def test_gradients_accumulate_across_uses():
    x = parameter(np.array([1.0, 2.0, 3.0]))
    with Tape() as tape:
        loss = ops.sum(ops.add(ops.mul(x, x), x))
    tape.backward(loss)
    np.testing.assert_allclose(x.grad, 2 * x.data + 1)


def test_backward_requires_scalar_loss():
    x = parameter(np.ones((2, 2)))
    with Tape() as tape:
        out = ops.scale(x, 3.0)
    with pytest.raises(AutogradError):
        tape.backward(out)


def test_nothing_is_recorded_without_a_tape():
    x = parameter(np.ones(3))
    out = ops.mul(x, x)
    assert out.tape is None
    with pytest.raises(AutogradError):
        out.backward()


def test_shape_errors_name_the_operation():
    with pytest.raises(ShapeError, match="matmul"):
        ops.matmul(Tensor(np.ones((2, 3))), Tensor(np.ones((2, 3))))
    with pytest.raises(ShapeError, match="group_norm"):
        ops.group_norm(Tensor(np.ones((1, 6, 4))), 4)


def test_group_norm_output_has_unit_variance_per_group():
    rng = np.random.default_rng(3)
    x = Tensor(rng.normal(2.0, 0.7, size=(3, 8, 16)))
    out = ops.group_norm(x, 4).data.reshape(3, 4, -1)
    np.testing.assert_allclose(out.mean(axis=-1), 0.0, atol=1e-9)
    np.testing.assert_allclose(out.var(axis=-1), 1.0, atol=1e-6)


def test_layer_norm_output_is_standardized_per_row():
    rng = np.random.default_rng(5)
    x = Tensor(rng.normal(-3.0, 4.0, size=(6, 32)))
    out = ops.layer_norm(x).data
    np.testing.assert_allclose(out.mean(axis=-1), 0.0, atol=1e-9)
    np.testing.assert_allclose(out.var(axis=-1), 1.0, atol=1e-6)

    gamma, beta = Tensor(np.full(32, 2.0)), Tensor(np.full(32, 0.5))
    affine = ops.layer_norm(x, gamma, beta).data
    np.testing.assert_allclose(affine, 2.0 * out + 0.5, atol=1e-12)


def test_softmax_rows_are_distributions():
    rng = np.random.default_rng(6)
    logits = rng.normal(0.0, 30.0, size=(8, 11))
    logits[0, 3] = 700.0
    out = ops.softmax(Tensor(logits), axis=-1).data
    assert np.all(out >= 0)
    np.testing.assert_allclose(out.sum(axis=-1), 1.0, rtol=0, atol=1e-9)
    assert out[0, 3] == pytest.approx(1.0)


def _chain(x, w, gamma, beta):
    hidden = ops.mish(ops.conv1d(x, w, padding=1))
    hidden = ops.layer_norm(ops.transpose(hidden, (0, 2, 1)), gamma, beta)
    probs = ops.softmax(hidden, axis=-1)
    return ops.sum(ops.mul(probs, probs))


def test_tape_replay_is_bit_identical():
    def run():
        rng = np.random.default_rng(7)
        params = [parameter(rng.standard_normal(shape)) for shape in [(2, 3, 8), (4, 3, 3), (4,), (4,)]]
        with Tape() as tape:
            loss = _chain(*params)
        tape.backward(loss)
        first = [p.grad.copy() for p in params]
        for p in params:
            p.grad = None
        tape.backward(loss)
        return loss.data, first, [p.grad for p in params]

    loss_a, grads_a, replayed_a = run()
    loss_b, grads_b, _ = run()
    assert loss_a.tobytes() == loss_b.tobytes()
    for first, replayed, rerun in zip(grads_a, replayed_a, grads_b):
        assert first.tobytes() == replayed.tobytes() == rerun.tobytes()


def test_attention_mask_excludes_positions():
    rng = np.random.default_rng(0)
    q = Tensor(rng.standard_normal((1, 2, 4)))
    k = Tensor(rng.standard_normal((1, 3, 4)))
    v = Tensor(rng.standard_normal((1, 3, 4)))
    mask = np.array([[[True, True, False]]])
    changed = v.data.copy()
    changed[0, 2] += 100.0
    first = ops.scaled_dot_product_attention(q, k, v, mask).data
    second = ops.scaled_dot_product_attention(q, k, Tensor(changed), mask).data
    np.testing.assert_allclose(first, second, atol=1e-12)


def test_adam_first_step_moves_by_learning_rate():
    x = parameter(np.array([1.0, -2.0]))
    x.grad = np.array([0.5, -3.0])
    optimizer = Adam({"x": x}, lr=0.01)
    optimizer.step()
    np.testing.assert_allclose(x.data, [0.99, -1.99], atol=1e-9)


def test_adam_minimizes_a_quadratic():
    x = parameter(np.array([0.0, 5.0]))
    target = Tensor(np.array([3.0, -1.0]))
    optimizer = Adam({"x": x}, lr=0.05)
    for _ in range(2000):
        optimizer.zero_grad()
        with Tape() as tape:
            diff = ops.sub(x, target)
            loss = ops.sum(ops.mul(diff, diff))
        tape.backward(loss)
        optimizer.step()
    np.testing.assert_allclose(x.data, target.data, atol=0.1)


def test_adam_rejects_non_positive_learning_rate():
    from src.tensor import AdamState

    with pytest.raises(ConfigError):
        adam_step({"x": np.ones(2)}, {"x": np.ones(2)}, AdamState(), lr=0.0)


def test_weight_container_preserves_names_and_values():
    weights = {"layer.weight": np.arange(6.0).reshape(2, 3), "layer.bias": np.array([0.5, -0.25])}
    restored = loads_weights(dumps_weights(weights))
    assert list(restored) == list(weights)
    for name, value in weights.items():
        np.testing.assert_array_equal(restored[name], value)


def test_weight_container_rejects_corruption():
    blob = dumps_weights({"w": np.ones((3, 3))})
    with pytest.raises(SerializationError, match="magic"):
        loads_weights(b"XXXXXXX" + blob[7:])
    with pytest.raises(SerializationError, match="truncated"):
        loads_weights(blob[:-8])
