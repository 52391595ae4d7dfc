import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from risbeam import neural
from risbeam.checks import gradcheck_suite, random_network
from risbeam.errors import NumericalError
from risbeam.numerics import make_rng


def small_actor(rng, a_max=1.5, hidden=(5, 4)):
    return neural.init_params(neural.actor_arch(3, 2, hidden, a_max=a_max, out_init=None), rng)


def small_critic(rng, hidden=(5, 4)):
    return neural.init_params(neural.critic_arch(3, 2, hidden), rng)


def test_zero_parameters_give_zero_actions(rng):
    p = small_actor(rng)
    for name in p.tensors:
        if name.startswith(("fc", "out")):
            p.tensors[name][...] = 0.0
    out, _ = neural.forward(p, rng.normal(size=(4, 3)), "train")
    assert np.all(out == 0.0)


def test_batch_norm_example():
    arch = neural.Architecture("critic", 1, 1, (1,), action_dim=1)
    p = neural.init_params(arch, make_rng(0))
    p.tensors["fc0.weight"][...] = [[1.0], [0.0]]
    p.tensors["fc0.bias"][...] = 0.0
    p.tensors["act0.slope"][...] = 1.0
    _, cache = neural.forward(p, np.array([[0.0, 0.0], [2.0, 0.0]]), "train")
    np.testing.assert_allclose(cache.blocks[0][3][:, 0], [-1.0, 1.0], atol=1e-5)


def test_prelu_example():
    arch = neural.Architecture("critic", 1, 1, (1,), action_dim=1)
    p = neural.init_params(arch, make_rng(0))
    p.tensors["fc0.weight"][...] = [[1.0], [0.0]]
    p.tensors["fc0.bias"][...] = 0.0
    p.tensors["bn0.running_mean"][...] = 0.0
    p.tensors["bn0.running_var"][...] = 1.0 - arch.eps
    p.tensors["out.weight"][...] = 1.0
    p.tensors["out.bias"][...] = 0.0
    out, _ = neural.forward(p, np.array([[-4.0, 0.0], [4.0, 0.0]]), "eval")
    np.testing.assert_allclose(out[:, 0], [-1.0, 4.0])


def test_train_mode_needs_two_samples(rng):
    with pytest.raises(ValueError):
        neural.forward(small_actor(rng), np.zeros((1, 3)), "train")
    out, _ = neural.forward(small_actor(rng), np.zeros((1, 3)), "eval")
    assert out.shape == (1, 2)


def test_input_width_checked(rng):
    with pytest.raises(ValueError):
        neural.forward(small_actor(rng), np.zeros((2, 4)))


@given(st.integers(0, 2**32 - 1), st.floats(0.01, 10.0))
def test_actor_output_bounded(seed, a_max):
    rng = make_rng(seed)
    p = small_actor(rng, a_max)
    p.tensors["out.weight"] *= 100.0
    out, _ = neural.forward(p, 10 * rng.normal(size=(6, 3)), "train")
    assert np.all(np.abs(out) <= a_max)


@given(st.integers(0, 2**32 - 1), st.integers(2, 20))
def test_train_mode_normalises_each_feature(seed, batch):
    rng = make_rng(seed)
    p = small_actor(rng)
    _, cache = neural.forward(p, rng.normal(size=(batch, 3)) * 100 + 2, "train")
    xhat, inv_std = cache.blocks[0][1], cache.blocks[0][2]
    assert np.max(np.abs(xhat.mean(axis=0))) <= 1e-9
    # epsilon shrinks the variance to var / (var + eps)
    batch_var = 1.0 / inv_std ** 2 - p.arch.eps
    np.testing.assert_allclose(xhat.var(axis=0), batch_var / (batch_var + p.arch.eps), rtol=1e-9)
    wide = batch_var > 10.0
    assert np.all(np.abs(xhat.var(axis=0)[wide] - 1.0) <= 1e-6)


def test_running_stats_updated_only_in_train_mode(rng):
    p = small_actor(rng)
    before = p.tensors["bn0.running_mean"].copy()
    neural.forward(p, rng.normal(size=(4, 3)), "eval")
    assert np.array_equal(before, p.tensors["bn0.running_mean"])
    neural.forward(p, rng.normal(size=(4, 3)), "train", update_stats=False)
    assert np.array_equal(before, p.tensors["bn0.running_mean"])
    neural.forward(p, rng.normal(size=(4, 3)) + 3, "train")
    assert not np.array_equal(before, p.tensors["bn0.running_mean"])


def test_linear_layer_gradients():
    # one block whose BN and PReLU are identities in eval mode
    arch = neural.Architecture("critic", 2, 1, (2,), action_dim=1)
    p = neural.init_params(arch, make_rng(0))
    t = p.tensors
    t["bn0.running_mean"][...] = 0.0
    t["bn0.running_var"][...] = 1.0 - arch.eps
    t["act0.slope"][...] = 1.0
    x = np.array([[0.3, -0.7, 1.1]])
    out, cache = neural.forward(p, x, "eval")
    grads, _ = neural.backward(p, cache, np.ones_like(out))
    np.testing.assert_allclose(grads["out.weight"][:, 0], cache.last_hidden[0])
    np.testing.assert_allclose(grads["out.bias"], [1.0])


def test_tanh_input_gradient_at_zero():
    arch = neural.Architecture("actor", 2, 1, (2,), a_max=3.0)
    p = neural.init_params(arch, make_rng(0))
    t = p.tensors
    t["bn0.running_mean"][...] = 0.0
    t["bn0.running_var"][...] = 1.0 - arch.eps
    t["act0.slope"][...] = 1.0
    t["fc0.bias"][...] = 0.0
    t["out.bias"][...] = 0.0
    out, cache = neural.forward(p, np.zeros((1, 2)), "eval")
    assert out[0, 0] == 0.0
    _, gin = neural.backward(p, cache, np.ones((1, 1)))
    expected = 3.0 * (t["fc0.weight"] @ t["out.weight"])[:, 0]
    np.testing.assert_allclose(gin[0], expected, rtol=1e-12)


@pytest.mark.parametrize("mode", ["train", "eval"])
@pytest.mark.parametrize("make", [small_actor, small_critic])
def test_gradients_match_finite_differences(make, mode):
    rng = make_rng(3)
    p = make(rng)
    x = rng.normal(size=(5, p.arch.input_dim))
    assert neural.min_kink_distance(p, x, mode) > 1e-3
    g = rng.normal(size=(5, p.arch.out_dim))
    errors = neural.gradient_check(p, x, g, mode)
    assert max(errors.values()) <= 1e-4, errors


def test_gradcheck_suite_fifty_networks():
    assert gradcheck_suite(50, seed=11).max() <= 1e-4


def test_single_hidden_layer_critic_fuses_at_first_block():
    arch = neural.critic_arch(3, 2, (6,))
    assert arch.fuse_at == 0
    assert arch.block_in_dims() == [5]
    assert neural.critic_arch(3, 2, (6, 4)).block_in_dims() == [3, 8]


def test_cache_single_use_and_staleness(rng):
    p = small_actor(rng)
    x = rng.normal(size=(3, 3))
    out, cache = neural.forward(p, x)
    neural.backward(p, cache, np.ones_like(out))
    with pytest.raises(ValueError, match="already"):
        neural.backward(p, cache, np.ones_like(out))
    out, cache = neural.forward(p, x)
    grads, _ = neural.backward(p, cache, np.ones_like(out))
    _, cache = neural.forward(p, x)
    neural.optimizer_step(p, grads, 0.01)
    with pytest.raises(ValueError, match="current"):
        neural.backward(p, cache, np.ones_like(out))


def test_optimizer_examples(rng):
    p = small_actor(rng)
    before = p.copy()
    zero = {n: np.zeros_like(p.tensors[n]) for n in p.trainable()}
    neural.optimizer_step(p, zero, 0.01, 0.0)
    for n in p.tensors:
        assert np.array_equal(p.tensors[n], before.tensors[n])
    p.tensors["fc0.weight"][0, 0] = 1.0
    p.tensors["fc0.bias"][0] = 1.0
    neural.optimizer_step(p, zero, 0.01, 1e-5)
    assert p.tensors["fc0.weight"][0, 0] == pytest.approx(0.9999999, abs=1e-15)
    assert p.tensors["fc0.bias"][0] == 1.0


def test_optimizer_step_is_descent(rng):
    p = small_actor(rng)
    grads = {n: rng.normal(size=p.tensors[n].shape) for n in p.trainable()}
    before = p.copy()
    neural.optimizer_step(p, grads, 0.1)
    for n in grads:
        np.testing.assert_allclose(p.tensors[n], before.tensors[n] - 0.1 * grads[n])


def test_optimizer_rejects_non_finite(rng):
    p = small_actor(rng)
    grads = {n: np.zeros_like(p.tensors[n]) for n in p.trainable()}
    grads["fc1.weight"][0, 0] = np.nan
    with pytest.raises(NumericalError, match="layer 1"):
        neural.optimizer_step(p, grads, 0.01)
    with pytest.raises(ValueError):
        neural.optimizer_step(p, {"fc0.weight": np.zeros(2)}, 0.01)


def test_blend_examples(rng):
    src, dst = small_actor(rng), small_actor(rng)
    keep = dst.copy()
    neural.blend_params(dst, src, 0.0)
    assert all(np.array_equal(dst.tensors[n], keep.tensors[n]) for n in dst.tensors)
    neural.copy_params(dst, src)
    assert all(np.array_equal(dst.tensors[n], src.tensors[n]) for n in dst.tensors)
    for n in src.tensors:
        src.tensors[n][...] = 1.0
        dst.tensors[n][...] = 0.0
    neural.blend_params(dst, src, 0.005)
    assert np.allclose(dst.tensors["fc0.weight"], 0.005)
    assert np.allclose(dst.tensors["bn0.running_var"], 0.005)


@given(st.integers(0, 2**32 - 1), st.floats(0.0, 1.0))
def test_blend_contracts_distance(seed, rho):
    rng = make_rng(seed)
    src, dst = small_actor(rng), small_actor(rng)
    gap = {n: dst.tensors[n] - src.tensors[n] for n in src.tensors}
    neural.blend_params(dst, src, rho)
    for n in src.tensors:
        np.testing.assert_allclose(dst.tensors[n] - src.tensors[n], (1 - rho) * gap[n],
                                   rtol=1e-9, atol=1e-15)


def test_blend_rejects_mismatch(rng):
    with pytest.raises(ValueError):
        neural.blend_params(small_actor(rng), small_critic(rng), 0.5)
    with pytest.raises(ValueError):
        neural.blend_params(small_actor(rng), small_actor(rng), 1.5)


def test_training_is_deterministic():
    def trajectory():
        rng = make_rng(5)
        p = small_critic(rng)
        for _ in range(10):
            x = rng.normal(size=(4, 5))
            out, cache = neural.forward(p, x)
            grads, _ = neural.backward(p, cache, out - 1.0)
            neural.optimizer_step(p, grads, 0.01, 1e-5)
        return p
    a, b = trajectory(), trajectory()
    assert all(np.array_equal(a.tensors[n], b.tensors[n]) for n in a.tensors)


def test_checkpoint_roundtrip(tmp_path):
    p = random_network(make_rng(8))
    path = tmp_path / "net.json"
    neural.save_checkpoint(p, path)
    back = neural.load_checkpoint(path)
    assert back.arch == p.arch
    assert all(np.array_equal(back.tensors[n], p.tensors[n]) for n in p.tensors)
    data = json.loads(path.read_text())
    data["version"] = 99
    with pytest.raises(ValueError):
        neural.params_from_dict(data)
    with pytest.raises(ValueError):
        neural.params_from_dict({"format": "other"})


def test_architecture_validation():
    with pytest.raises(ValueError):
        neural.Architecture("rnn", 2, 1)
    with pytest.raises(ValueError):
        neural.Architecture("actor", 2, 1, ())
    with pytest.raises(ValueError):
        neural.Architecture("critic", 2, 1, (3,), action_dim=0)
