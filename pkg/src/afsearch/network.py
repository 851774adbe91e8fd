"""Dense feed-forward classifier with per-layer activation choices.

Forward and backward passes are explicit (no autodiff): each layer computes
z = a W^T + b followed by its activation, and backward chains the exact
vector-Jacobian rules from the activation zoo. Training is full-batch Adam
with accuracy-stall early stopping; a NaN loss marks the run failed instead
of raising.
"""

from dataclasses import dataclass, field

import numpy as np

from .activations import ActivationKind, ActivationState, af_backward, af_forward

HIDDEN_WIDTH = 64


@dataclass
class LinearLayer:
    W: np.ndarray  # (fan_out, fan_in)
    b: np.ndarray  # (fan_out,)


@dataclass
class Network:
    layers: list[LinearLayer]
    afs: tuple[ActivationKind, ...]
    af_states: list[ActivationState]
    n_features: int
    hidden: int
    n_classes: int


@dataclass
class ForwardCache:
    inputs: list[np.ndarray]  # activation entering each layer
    zs: list[np.ndarray]  # pre-activation of each layer


@dataclass
class AdamState:
    m: list[np.ndarray]
    v: list[np.ndarray]
    t: int = 0
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


@dataclass
class TrainConfig:
    max_epochs: int = 300
    patience: int = 10
    min_delta: float = 0.001


@dataclass
class TrainResult:
    history_loss: list[float] = field(default_factory=list)
    history_acc: list[float] = field(default_factory=list)
    failed: bool = False
    epochs: int = 0


def init_network(n_features, n_classes, arch, rng, hidden=HIDDEN_WIDTH) -> Network:
    """Fresh network: W, b ~ Uniform(-k, k) with k = 1/sqrt(fan_in), per layer.

    The draw order is fixed (W then b, layer by layer) so a given seed always
    produces the same network. PReLU layers start at slope 0.25.
    """
    if n_features < 1 or n_classes < 2 or len(arch) < 1:
        raise ValueError(f"invalid network shape: d={n_features}, C={n_classes}, L={len(arch)}")
    dims = [n_features] + [hidden] * (len(arch) - 1) + [n_classes]
    layers = []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        k = 1.0 / np.sqrt(fan_in)
        W = rng.uniform(-k, k, size=(fan_out, fan_in))
        b = rng.uniform(-k, k, size=fan_out)
        layers.append(LinearLayer(W=W, b=b))
    states = [ActivationState() for _ in arch]
    return Network(
        layers=layers,
        afs=tuple(arch),
        af_states=states,
        n_features=n_features,
        hidden=hidden,
        n_classes=n_classes,
    )


def set_mode(net: Network, mode: str) -> None:
    for state in net.af_states:
        state.mode = mode


def forward(net: Network, X, mode="train", rng=None):
    """Run the network on rows of X; returns (cache, outputs).

    The cache keeps every layer input and pre-activation; stochastic draws
    land in the layer states, so an immediately following backward sees
    exactly the values this forward used.
    """
    X = np.asarray(X, dtype=np.float64)
    set_mode(net, mode)
    inputs, zs = [], []
    a = X
    with np.errstate(all="ignore"):
        for layer, kind, state in zip(net.layers, net.afs, net.af_states):
            inputs.append(a)
            z = a @ layer.W.T + layer.b
            zs.append(z)
            a = af_forward(kind, state, z, rng)
    return ForwardCache(inputs=inputs, zs=zs), a


def cross_entropy_loss(outputs, labels):
    """Mean cross entropy treating outputs as logits; returns (loss, grad).

    Computed with the max-shifted logsumexp; the gradient is
    (softmax(row) - onehot) / n. This sits on top of whatever output
    activation the architecture uses, mirroring the usual framework loss
    convention (a Softmax output gets log-softmaxed again).
    """
    outputs = np.asarray(outputs, dtype=np.float64)
    labels = np.asarray(labels)
    n = outputs.shape[0]
    with np.errstate(all="ignore"):
        m = np.max(outputs, axis=1, keepdims=True)
        e = np.exp(outputs - m)
        sums = np.sum(e, axis=1, keepdims=True)
        lse = m[:, 0] + np.log(sums[:, 0])
        loss = float(np.mean(lse - outputs[np.arange(n), labels]))
        grad = e / sums
        grad[np.arange(n), labels] -= 1.0
        grad /= n
    return loss, grad


def trainable_params(net: Network) -> list[np.ndarray]:
    """All trainable arrays in update order: (W, b) per layer, then PReLU slopes."""
    params = [arr for layer in net.layers for arr in (layer.W, layer.b)]
    for kind, state in zip(net.afs, net.af_states):
        if kind.n_trainable_params:
            params.append(state.prelu_slope)
    return params


def backward(net: Network, cache: ForwardCache, grad_outputs) -> list[np.ndarray]:
    """Gradients for every trainable array, in trainable_params order."""
    L = len(net.layers)
    grad_W = [None] * L
    grad_b = [None] * L
    prelu_grads = {}
    delta = np.asarray(grad_outputs, dtype=np.float64)
    if delta.shape != cache.zs[-1].shape:
        raise ValueError(f"grad_outputs shape {delta.shape} does not match outputs {cache.zs[-1].shape}")
    with np.errstate(all="ignore"):
        for l in range(L - 1, -1, -1):
            gz, gparams = af_backward(net.afs[l], net.af_states[l], cache.zs[l], delta)
            grad_W[l] = gz.T @ cache.inputs[l]
            grad_b[l] = np.sum(gz, axis=0)
            if gparams.size:
                prelu_grads[l] = gparams
            if l > 0:
                delta = gz @ net.layers[l].W
    grads = [arr for l in range(L) for arr in (grad_W[l], grad_b[l])]
    for l in range(L):
        if net.afs[l].n_trainable_params:
            grads.append(prelu_grads[l])
    return grads


def init_adam(params, lr=0.001, beta1=0.9, beta2=0.999, eps=1e-8) -> AdamState:
    return AdamState(
        m=[np.zeros_like(p) for p in params],
        v=[np.zeros_like(p) for p in params],
        lr=lr,
        beta1=beta1,
        beta2=beta2,
        eps=eps,
    )


def adam_step(adam: AdamState, params, grads):
    """One bias-corrected Adam update, applied to the params in place."""
    if len(params) != len(grads):
        raise ValueError("params/grads length mismatch")
    adam.t += 1
    c1 = 1.0 - adam.beta1**adam.t
    c2 = 1.0 - adam.beta2**adam.t
    with np.errstate(all="ignore"):
        for p, g, m, v in zip(params, grads, adam.m, adam.v):
            m *= adam.beta1
            m += (1.0 - adam.beta1) * g
            v *= adam.beta2
            v += (1.0 - adam.beta2) * g * g
            p -= adam.lr * (m / c1) / (np.sqrt(v / c2) + adam.eps)
    return params


def accuracy_from_outputs(outputs, y) -> float:
    # argmax breaks ties toward the lowest class index
    pred = np.argmax(outputs, axis=1)
    return float(np.mean(pred == np.asarray(y)))


def train(net: Network, X, y, config: TrainConfig | None = None, rng=None) -> TrainResult:
    """Full-batch Adam training with accuracy-stall early stopping.

    The whole training set is one batch. Each epoch records the loss and
    training accuracy of the forward pass that produced the gradient step;
    training stops once the epoch-over-epoch accuracy improvement stays
    below ``min_delta`` for ``patience`` consecutive epochs, at
    ``max_epochs``, or immediately (failed flag, no exception) on a
    non-finite loss.
    """
    if config is None:
        config = TrainConfig()
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    params = trainable_params(net)
    adam = init_adam(params)
    result = TrainResult()
    prev_acc = None
    stall = 0
    for _ in range(config.max_epochs):
        cache, outputs = forward(net, X, mode="train", rng=rng)
        loss, grad_out = cross_entropy_loss(outputs, y)
        if not np.isfinite(loss):
            result.failed = True
            break
        acc = accuracy_from_outputs(outputs, y)
        result.history_loss.append(loss)
        result.history_acc.append(acc)
        result.epochs += 1
        grads = backward(net, cache, grad_out)
        adam_step(adam, params, grads)
        if prev_acc is not None:
            if acc - prev_acc < config.min_delta:
                stall += 1
            else:
                stall = 0
            if stall >= config.patience:
                break
        prev_acc = acc
    return result


def predict_accuracy(net: Network, X, y, rng=None) -> float:
    """Eval-mode accuracy: RReLU uses its fixed mean slope, GumbelSoftmax
    draws from ``rng`` (pass a generator seeded per replicate for
    reproducible scores)."""
    _, outputs = forward(net, X, mode="eval", rng=rng)
    return accuracy_from_outputs(outputs, y)
