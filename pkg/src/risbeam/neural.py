"""
Small fully connected networks with hand-written backpropagation.

A network is ``[affine -> batch norm -> PReLU] x H -> affine``. The actor
squashes the output with ``a_max * tanh``; the critic returns a scalar and
receives the action vector concatenated onto the features entering its
second hidden block (or its only block when ``H == 1``). Critic inputs are
passed as one matrix ``[state | action]``.

Parameters live in a flat, ordered dict of arrays so that optimisation,
target blending and checkpointing are uniform loops over names:

    fc{i}.weight, fc{i}.bias            affine block i (weight is in x out)
    bn{i}.gamma, bn{i}.beta             batch-norm scale and shift
    bn{i}.running_mean, bn{i}.running_var
    act{i}.slope                        PReLU negative slopes
    out.weight, out.bias                output layer
"""

import base64
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import NumericalError

CHECKPOINT_FORMAT = "risbeam-mlp"
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class Architecture:
    kind: str
    state_dim: int
    out_dim: int
    hidden: tuple = (256, 128)
    action_dim: int = 0
    a_max: float = 1.0
    momentum: float = 0.1
    eps: float = 1e-5
    slope_init: float = 0.25
    out_init: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))
        if self.kind not in ("actor", "critic"):
            raise ValueError(f"unknown network kind {self.kind!r}")
        if not self.hidden:
            raise ValueError("at least one hidden layer is required")
        if self.kind == "critic" and self.action_dim < 1:
            raise ValueError("critic needs a positive action_dim")
        if not self.eps > 0:
            raise ValueError("batch-norm epsilon must be positive")

    @property
    def input_dim(self):
        return self.state_dim + (self.action_dim if self.kind == "critic" else 0)

    @property
    def fuse_at(self):
        """Hidden block whose input receives the action (critic only)."""
        if self.kind != "critic":
            return None
        return min(1, len(self.hidden) - 1)

    def block_in_dims(self):
        dims, prev = [], self.state_dim
        for i, width in enumerate(self.hidden):
            dims.append(prev + (self.action_dim if i == self.fuse_at else 0))
            prev = width
        return dims


def actor_arch(state_dim, action_dim, hidden=(256, 128), a_max=1.0, **kw):
    return Architecture("actor", state_dim, action_dim, hidden, a_max=a_max,
                        out_init=kw.pop("out_init", 1e-3), **kw)


def critic_arch(state_dim, action_dim, hidden=(256, 128), **kw):
    return Architecture("critic", state_dim, 1, hidden, action_dim=action_dim, **kw)


@dataclass
class MlpParams:
    arch: Architecture
    tensors: dict
    version: int = 0

    def __getitem__(self, name):
        return self.tensors[name]

    def trainable(self):
        return [n for n in self.tensors if not n.split(".")[1].startswith("running")]

    def copy(self):
        return MlpParams(self.arch, {k: v.copy() for k, v in self.tensors.items()})

    def n_params(self):
        return sum(self.tensors[n].size for n in self.trainable())


def init_params(arch, rng):
    """Uniform(+-1/sqrt(fan_in)) weights; the actor output layer uses +-out_init."""
    t = {}
    for i, (fan_in, width) in enumerate(zip(arch.block_in_dims(), arch.hidden)):
        bound = 1.0 / np.sqrt(fan_in)
        t[f"fc{i}.weight"] = rng.uniform(-bound, bound, (fan_in, width))
        t[f"fc{i}.bias"] = rng.uniform(-bound, bound, width)
        t[f"bn{i}.gamma"] = np.ones(width)
        t[f"bn{i}.beta"] = np.zeros(width)
        t[f"bn{i}.running_mean"] = np.zeros(width)
        t[f"bn{i}.running_var"] = np.ones(width)
        t[f"act{i}.slope"] = np.full(width, arch.slope_init)
    fan_in = arch.hidden[-1]
    bound = arch.out_init if arch.out_init is not None else 1.0 / np.sqrt(fan_in)
    t["out.weight"] = rng.uniform(-bound, bound, (fan_in, arch.out_dim))
    t["out.bias"] = rng.uniform(-bound, bound, arch.out_dim)
    return MlpParams(arch, t)


@dataclass
class ForwardCache:
    mode: str
    params_id: int
    version: int
    blocks: list = field(default_factory=list)
    last_hidden: np.ndarray = None
    squashed: np.ndarray = None
    consumed: bool = False


def forward(params, x, mode="train", update_stats=True):
    """Run a batch through the network.

    In ``"train"`` mode batch norm uses the batch statistics (and, unless
    ``update_stats`` is False, folds them into the running estimates); in
    ``"eval"`` mode it uses the running estimates.
    """
    arch, t = params.arch, params.tensors
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] != arch.input_dim:
        raise ValueError(f"expected {arch.input_dim} input features, got {x.shape[1]}")
    if mode not in ("train", "eval"):
        raise ValueError(f"unknown mode {mode!r}")
    batch = x.shape[0]
    if mode == "train" and batch < 2:
        raise ValueError("batch norm in training mode needs a batch of at least 2")

    cache = ForwardCache(mode, id(params), params.version)
    h = x[:, :arch.state_dim]
    action = x[:, arch.state_dim:]
    for i in range(len(arch.hidden)):
        if i == arch.fuse_at:
            h = np.hstack([h, action])
        z = h @ t[f"fc{i}.weight"] + t[f"fc{i}.bias"]
        if mode == "train":
            mean = z.mean(axis=0)
            var = z.var(axis=0)
            if update_stats:
                m = arch.momentum
                t[f"bn{i}.running_mean"] *= 1.0 - m
                t[f"bn{i}.running_mean"] += m * mean
                t[f"bn{i}.running_var"] *= 1.0 - m
                t[f"bn{i}.running_var"] += m * var
        else:
            mean = t[f"bn{i}.running_mean"]
            var = t[f"bn{i}.running_var"]
        inv_std = 1.0 / np.sqrt(var + arch.eps)
        xhat = (z - mean) * inv_std
        y = t[f"bn{i}.gamma"] * xhat + t[f"bn{i}.beta"]
        positive = y > 0
        cache.blocks.append((h, xhat, inv_std, y, positive))
        h = np.where(positive, y, t[f"act{i}.slope"] * y)

    out = h @ t["out.weight"] + t["out.bias"]
    cache.last_hidden = h
    if arch.kind == "actor":
        cache.squashed = np.tanh(out)
        out = arch.a_max * cache.squashed
    return out, cache


def backward(params, cache, grad_output, param_grads=True):
    """Gradients of ``sum(output * grad_output)``.

    Returns ``(grads, grad_input)`` where ``grads`` maps every trainable
    tensor name to its gradient and ``grad_input`` has the shape of the
    forward input. With ``param_grads=False`` only the input gradient is
    computed and ``grads`` is empty. A cache can be used once, and only with
    the parameter state that produced it.
    """
    arch, t = params.arch, params.tensors
    if cache.params_id != id(params) or cache.version != params.version:
        raise ValueError("forward cache does not belong to the current parameters")
    if cache.consumed:
        raise ValueError("forward cache was already used by a backward pass")
    cache.consumed = True

    g = np.asarray(grad_output, dtype=float).reshape(cache.last_hidden.shape[0], arch.out_dim)
    if arch.kind == "actor":
        g = g * arch.a_max * (1.0 - cache.squashed ** 2)
    grads = {}
    if param_grads:
        grads["out.weight"] = cache.last_hidden.T @ g
        grads["out.bias"] = g.sum(axis=0)
    dh = g @ t["out.weight"].T

    d_action = None
    batch = g.shape[0]
    for i in reversed(range(len(arch.hidden))):
        h_in, xhat, inv_std, y, positive = cache.blocks[i]
        slope = t[f"act{i}.slope"]
        dy = np.where(positive, dh, dh * slope)
        if param_grads:
            grads[f"act{i}.slope"] = np.where(positive, 0.0, dh * y).sum(axis=0)
            grads[f"bn{i}.gamma"] = (dy * xhat).sum(axis=0)
            grads[f"bn{i}.beta"] = dy.sum(axis=0)
        dxhat = dy * t[f"bn{i}.gamma"]
        if cache.mode == "train":
            dz = (inv_std / batch) * (batch * dxhat - dxhat.sum(axis=0)
                                      - xhat * (dxhat * xhat).sum(axis=0))
        else:
            dz = dxhat * inv_std
        if param_grads:
            grads[f"fc{i}.weight"] = h_in.T @ dz
            grads[f"fc{i}.bias"] = dz.sum(axis=0)
        dh = dz @ t[f"fc{i}.weight"].T
        if i == arch.fuse_at:
            d_action = dh[:, -arch.action_dim:]
            dh = dh[:, :-arch.action_dim]

    grad_input = dh if d_action is None else np.hstack([dh, d_action])
    return grads, grad_input


def _layer_index(name):
    head = name.split(".")[0]
    return head if head == "out" else int(head.lstrip("fcbnact"))


def optimizer_step(params, grads, learning_rate, weight_decay=0.0, max_grad_norm=None):
    """Gradient descent with L2 weight decay on affine weights, in place.

    ``max_grad_norm`` optionally rescales the whole gradient so its global
    norm does not exceed the given value.
    """
    for name, g in grads.items():
        if name not in params.tensors:
            raise ValueError(f"gradient for unknown tensor {name!r}")
        if g.shape != params.tensors[name].shape:
            raise ValueError(f"gradient for {name} has shape {g.shape}, "
                             f"expected {params.tensors[name].shape}")
        # a sum is non-finite iff some entry is (or the sum overflows)
        if not np.isfinite(g.sum()):
            raise NumericalError(
                f"non-finite gradient in layer {_layer_index(name)} ({name})")
    scale = learning_rate
    if max_grad_norm is not None:
        norm = np.sqrt(sum(float(np.vdot(g, g)) for g in grads.values()))
        if norm > max_grad_norm:
            scale *= max_grad_norm / norm
    for name, g in grads.items():
        p = params.tensors[name]
        if weight_decay and name.endswith(".weight"):
            p *= 1.0 - learning_rate * weight_decay
        p -= scale * g
    params.version += 1
    return params


def _relative_error(a, b, floor):
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(a), np.linalg.norm(b), floor))


def gradient_check(params, x, grad_output, mode="train", step=1e-5, rel_floor=1e-4):
    """Compare backprop with central differences of ``sum(out * grad_output)``.

    Every trainable entry and every input entry is perturbed by ``+-step``.
    Returns a dict of per-tensor relative errors ``|a - n| / max(|a|, |n|,
    rel_floor * G)`` (Frobenius norms), where ``G`` is the norm of the whole
    analytic gradient; the floor keeps tensors whose gradient vanishes
    identically (biases feeding a training-mode batch norm) from dividing
    round-off by zero. The key ``"input"`` covers the input gradient.
    Batch-norm running statistics are left untouched.
    """
    x = np.array(x, dtype=float)
    grad_output = np.asarray(grad_output, dtype=float)

    def objective():
        out, _ = forward(params, x, mode, update_stats=False)
        return float(np.sum(out * grad_output))

    _, cache = forward(params, x, mode, update_stats=False)
    grads, grad_in = backward(params, cache, grad_output)
    total = np.sqrt(sum(float(np.vdot(g, g)) for g in grads.values())
                    + float(np.vdot(grad_in, grad_in)))
    floor = max(rel_floor * total, np.finfo(float).tiny)

    def numeric(arr):
        est = np.empty_like(arr)
        flat, out = arr.reshape(-1), est.reshape(-1)
        for j in range(flat.size):
            keep = flat[j]
            flat[j] = keep + step
            up = objective()
            flat[j] = keep - step
            down = objective()
            flat[j] = keep
            out[j] = (up - down) / (2.0 * step)
        return est

    errors = {name: _relative_error(grads[name], numeric(params.tensors[name]), floor)
              for name in params.trainable()}
    errors["input"] = _relative_error(grad_in, numeric(x), floor)
    return errors


def min_kink_distance(params, x, mode="train"):
    """Smallest ``|y|`` entering any PReLU, for avoiding the kink in checks."""
    _, cache = forward(params, x, mode, update_stats=False)
    return min(float(np.abs(block[3]).min()) for block in cache.blocks)


def _check_same_arch(a, b):
    if a.arch != b.arch or a.tensors.keys() != b.tensors.keys():
        raise ValueError("networks have different architectures")


def blend_params(target, source, blend):
    """``target <- (1 - blend) * target + blend * source``, running stats included."""
    _check_same_arch(target, source)
    if not 0.0 <= blend <= 1.0:
        raise ValueError(f"blend fraction must be in [0, 1], got {blend}")
    for name, src in source.tensors.items():
        dst = target.tensors[name]
        if blend == 1.0:
            np.copyto(dst, src)
        elif blend > 0.0:
            diff = src - dst
            diff *= blend
            dst += diff
    target.version += 1
    return target


def copy_params(target, source):
    return blend_params(target, source, 1.0)


def _encode(a):
    a = np.ascontiguousarray(a, dtype="<f8")
    return {"shape": list(a.shape), "data": base64.b64encode(a.tobytes()).decode("ascii")}


def _decode(entry):
    raw = base64.b64decode(entry["data"])
    return np.frombuffer(raw, dtype="<f8").reshape(entry["shape"]).astype(float)


def checkpoint_dict(params):
    return {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "architecture": asdict(params.arch),
        "tensors": {k: _encode(v) for k, v in params.tensors.items()},
    }


def save_checkpoint(params, path):
    with open(path, "w") as fh:
        json.dump(checkpoint_dict(params), fh, sort_keys=True)


def params_from_dict(d):
    if d.get("format") != CHECKPOINT_FORMAT:
        raise ValueError("not a network checkpoint")
    if d.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {d.get('version')}")
    arch = Architecture(**d["architecture"])
    return MlpParams(arch, {k: _decode(v) for k, v in d["tensors"].items()})


def load_checkpoint(path):
    with open(path) as fh:
        return params_from_dict(json.load(fh))
