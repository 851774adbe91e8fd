"""The 48-function activation zoo: forwards, exact backwards, and the registry.

Elementwise kinds map each component independently; the four vectorwise
kinds (Softmin, Softmax, LogSoftmax, GumbelSoftmax) normalise along the
last axis, so a 2-D input is treated as a batch of row vectors. Domain
violations (Log of a negative, Acos outside [-1, 1], overflow) silently
produce NaN/inf per floating-point semantics; nothing clamps or raises.

Backward rules return the exact vector-Jacobian product. Step functions
(Ceil, Floor, Round, Trunc) and the step part of Frac use zero gradient;
piecewise kinds use a one-sided convention at their kinks, with
ReLU'(0) = 0 and PReLU/LeakyReLU taking the negative-side slope at 0.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import special_functions as sf

HARDSHRINK_LAMBDA = 0.5
SOFTSHRINK_LAMBDA = 0.5
HARDTANH_MIN = -1.0
HARDTANH_MAX = 1.0
LEAKY_RELU_SLOPE = 0.01
ELU_ALPHA = 1.0
CELU_ALPHA = 1.0
SELU_ALPHA = 1.6732632423543772
SELU_SCALE = 1.0507009873554805
SOFTPLUS_THRESHOLD = 20.0
RRELU_LOWER = 1.0 / 8.0
RRELU_UPPER = 1.0 / 3.0
RRELU_EVAL_SLOPE = (RRELU_LOWER + RRELU_UPPER) / 2.0
GUMBEL_TAU = 1.0
PRELU_INIT = 0.25

_INV_SQRT2 = 1.0 / math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
_TWO_OVER_SQRT_PI = 2.0 / math.sqrt(math.pi)
_LN10 = math.log(10.0)


@dataclass(frozen=True)
class ActivationKind:
    """One entry of the activation menu, identified by its canonical name."""

    name: str
    arity: str  # "elementwise" | "vectorwise"
    stochastic: bool = False
    n_trainable_params: int = 0


@dataclass
class ActivationState:
    """Per-layer mutable activation state: trainable slope and cached draws.

    Cached noise/slopes are overwritten by each training forward and are
    exactly the values the matching backward consumes. In eval mode RReLU
    uses the fixed mean slope and samples nothing; GumbelSoftmax samples in
    both modes because its noise is part of the function.
    """

    mode: str = "train"
    prelu_slope: np.ndarray = field(default_factory=lambda: np.array([PRELU_INIT]))
    rrelu_cached_slopes: np.ndarray | None = None
    gumbel_cached_noise: np.ndarray | None = None


def _sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _softplus(x):
    # linear passthrough above the threshold keeps exp() from overflowing
    clipped = np.minimum(x, SOFTPLUS_THRESHOLD)
    return np.where(x > SOFTPLUS_THRESHOLD, x, np.log1p(np.exp(clipped)))


def _softmax(x):
    z = x - np.max(x, axis=-1, keepdims=True)
    e = np.exp(z)
    return e / np.sum(e, axis=-1, keepdims=True)


def _row_dot(a, b):
    return np.sum(a * b, axis=-1, keepdims=True)


def elu(x):
    return np.where(x > 0, x, ELU_ALPHA * np.expm1(x))


def d_elu(x):
    return np.where(x > 0, 1.0, ELU_ALPHA * np.exp(x))


def hardshrink(x):
    return np.where(np.abs(x) > HARDSHRINK_LAMBDA, x, 0.0 * x)


def d_hardshrink(x):
    return np.where(np.abs(x) > HARDSHRINK_LAMBDA, 1.0, 0.0 * x)


def hardtanh(x):
    return np.clip(x, HARDTANH_MIN, HARDTANH_MAX)


def d_hardtanh(x):
    inside = (x > HARDTANH_MIN) & (x < HARDTANH_MAX)
    return np.where(inside, 1.0, 0.0 * x)


def leaky_relu(x):
    return np.where(x > 0, x, LEAKY_RELU_SLOPE * x)


def d_leaky_relu(x):
    return np.where(x > 0, 1.0, LEAKY_RELU_SLOPE + 0.0 * x)


def log_sigmoid(x):
    return -_softplus(-x)


def d_log_sigmoid(x):
    return 1.0 - _sigmoid(x)


def relu(x):
    return np.maximum(x, 0.0)


def d_relu(x):
    return np.where(x > 0, 1.0, 0.0 * x)


def relu6(x):
    return np.minimum(np.maximum(x, 0.0), 6.0)


def d_relu6(x):
    return np.where((x > 0) & (x < 6.0), 1.0, 0.0 * x)


def selu(x):
    return SELU_SCALE * np.where(x > 0, x, SELU_ALPHA * np.expm1(x))


def d_selu(x):
    return SELU_SCALE * np.where(x > 0, 1.0, SELU_ALPHA * np.exp(x))


def celu(x):
    return np.where(x > 0, x, CELU_ALPHA * np.expm1(x / CELU_ALPHA))


def d_celu(x):
    return np.where(x > 0, 1.0, np.exp(x / CELU_ALPHA))


def gelu(x):
    return 0.5 * x * (1.0 + sf.erf(x * _INV_SQRT2))


def d_gelu(x):
    return 0.5 * (1.0 + sf.erf(x * _INV_SQRT2)) + x * np.exp(-0.5 * x * x) * _INV_SQRT_2PI


def sigmoid(x):
    return _sigmoid(x)


def d_sigmoid(x):
    s = _sigmoid(x)
    return s * (1.0 - s)


def softplus(x):
    return _softplus(x)


def d_softplus(x):
    return _sigmoid(x)


def softshrink(x):
    return np.where(
        x > SOFTSHRINK_LAMBDA, x - SOFTSHRINK_LAMBDA, np.where(x < -SOFTSHRINK_LAMBDA, x + SOFTSHRINK_LAMBDA, 0.0 * x)
    )


def d_softshrink(x):
    return np.where(np.abs(x) > SOFTSHRINK_LAMBDA, 1.0, 0.0 * x)


def softsign(x):
    return x / (1.0 + np.abs(x))


def d_softsign(x):
    d = 1.0 + np.abs(x)
    return 1.0 / (d * d)


def tanhshrink(x):
    return x - np.tanh(x)


def d_tanhshrink(x):
    t = np.tanh(x)
    return t * t


def d_tanh(x):
    t = np.tanh(x)
    return 1.0 - t * t


def d_abs(x):
    return np.sign(x)


def angle(x):
    # complex argument restricted to the real line: 0 for x >= 0, pi for x < 0
    out = np.where(x < 0, math.pi, 0.0 * x)
    return np.where(np.isnan(x), np.nan, out)


def d_angle(x):
    return 0.0 * x


def d_acos(x):
    return -1.0 / np.sqrt(1.0 - x * x)


def d_asin(x):
    return 1.0 / np.sqrt(1.0 - x * x)


def d_atan(x):
    return 1.0 / (1.0 + x * x)


def frac(x):
    return x - np.trunc(x)


def d_frac(x):
    return np.ones_like(x)


def d_log(x):
    return 1.0 / x


def d_log10(x):
    return 1.0 / (x * _LN10)


def neg(x):
    return -x


def d_neg(x):
    return -np.ones_like(x)


def d_cos(x):
    return -np.sin(x)


def d_tan(x):
    t = np.tan(x)
    return 1.0 + t * t


def d_erf(x):
    return _TWO_OVER_SQRT_PI * np.exp(-x * x)


def d_erfc(x):
    return -_TWO_OVER_SQRT_PI * np.exp(-x * x)


def mish(x):
    return x * np.tanh(_softplus(x))


def d_mish(x):
    t = np.tanh(_softplus(x))
    return t + x * (1.0 - t * t) * _sigmoid(x)


def generalized_swish(x):
    return x * _sigmoid(np.exp(-x))


def d_generalized_swish(x):
    z = np.exp(-x)
    s = _sigmoid(z)
    term = x * z * s * (1.0 - s)
    # z = inf makes the term inf*0; its true limit is 0
    term = np.where(np.isinf(z), 0.0, term)
    return s - term


def sigmoid_derivative(x):
    # e^-x * sigmoid(x)^2 written in its overflow-free equivalent form
    s = _sigmoid(x)
    return s * (1.0 - s)


def d_sigmoid_derivative(x):
    s = _sigmoid(x)
    return s * (1.0 - s) * (1.0 - 2.0 * s)


def cloglogm(x):
    return 1.0 - 2.0 * np.exp(-0.7 * np.exp(x))


def d_cloglogm(x):
    z = np.exp(x)
    g = 1.4 * z * np.exp(-0.7 * z)
    return np.where(np.isinf(z), 0.0, g)


def _zero_grad(x):
    return 0.0 * x


# name -> (forward, d/dx) for the stateless deterministic elementwise kinds
_SIMPLE = {
    "ELU": (elu, d_elu),
    "Hardshrink": (hardshrink, d_hardshrink),
    "Hardtanh": (hardtanh, d_hardtanh),
    "LeakyReLU": (leaky_relu, d_leaky_relu),
    "LogSigmoid": (log_sigmoid, d_log_sigmoid),
    "ReLU": (relu, d_relu),
    "ReLU6": (relu6, d_relu6),
    "SELU": (selu, d_selu),
    "CELU": (celu, d_celu),
    "GELU": (gelu, d_gelu),
    "Sigmoid": (sigmoid, d_sigmoid),
    "Softplus": (softplus, d_softplus),
    "Softshrink": (softshrink, d_softshrink),
    "Softsign": (softsign, d_softsign),
    "Tanh": (np.tanh, d_tanh),
    "Tanhshrink": (tanhshrink, d_tanhshrink),
    "Abs": (np.abs, d_abs),
    "Acos": (np.arccos, d_acos),
    "Angle": (angle, d_angle),
    "Asin": (np.arcsin, d_asin),
    "Atan": (np.arctan, d_atan),
    "Ceil": (np.ceil, _zero_grad),
    "Cos": (np.cos, d_cos),
    "Cosh": (np.cosh, np.sinh),
    "Digamma": (sf.digamma, sf.trigamma),
    "Erf": (sf.erf, d_erf),
    "Erfc": (sf.erfc, d_erfc),
    "Exp": (np.exp, np.exp),
    "Floor": (np.floor, _zero_grad),
    "Frac": (frac, d_frac),
    "Log": (np.log, d_log),
    "Log10": (np.log10, d_log10),
    "Neg": (neg, d_neg),
    "Round": (np.rint, _zero_grad),  # half-to-even rounding
    "Sin": (np.sin, np.cos),
    "Sinh": (np.sinh, np.cosh),
    "Tan": (np.tan, d_tan),
    "Trunc": (np.trunc, _zero_grad),
    "Mish": (mish, d_mish),
    "GeneralizedSwish": (generalized_swish, d_generalized_swish),
    "SigmoidDerivative": (sigmoid_derivative, d_sigmoid_derivative),
    "CLogLogM": (cloglogm, d_cloglogm),
}

# canonical menu order; the list position is the categorical index 0..47
# that all samplers use
_REGISTRY_ROWS = [
    ("ELU", "elementwise", False, 0),
    ("Hardshrink", "elementwise", False, 0),
    ("Hardtanh", "elementwise", False, 0),
    ("LeakyReLU", "elementwise", False, 0),
    ("LogSigmoid", "elementwise", False, 0),
    ("PReLU", "elementwise", False, 1),
    ("ReLU", "elementwise", False, 0),
    ("ReLU6", "elementwise", False, 0),
    ("RReLU", "elementwise", True, 0),
    ("SELU", "elementwise", False, 0),
    ("CELU", "elementwise", False, 0),
    ("GELU", "elementwise", False, 0),
    ("Sigmoid", "elementwise", False, 0),
    ("Softplus", "elementwise", False, 0),
    ("Softshrink", "elementwise", False, 0),
    ("Softsign", "elementwise", False, 0),
    ("Tanh", "elementwise", False, 0),
    ("Tanhshrink", "elementwise", False, 0),
    ("Softmin", "vectorwise", False, 0),
    ("Softmax", "vectorwise", False, 0),
    ("LogSoftmax", "vectorwise", False, 0),
    ("Abs", "elementwise", False, 0),
    ("Acos", "elementwise", False, 0),
    ("Angle", "elementwise", False, 0),
    ("Asin", "elementwise", False, 0),
    ("Atan", "elementwise", False, 0),
    ("Ceil", "elementwise", False, 0),
    ("Cos", "elementwise", False, 0),
    ("Cosh", "elementwise", False, 0),
    ("Digamma", "elementwise", False, 0),
    ("Erf", "elementwise", False, 0),
    ("Erfc", "elementwise", False, 0),
    ("Exp", "elementwise", False, 0),
    ("Floor", "elementwise", False, 0),
    ("Frac", "elementwise", False, 0),
    ("GumbelSoftmax", "vectorwise", True, 0),
    ("Log", "elementwise", False, 0),
    ("Log10", "elementwise", False, 0),
    ("Neg", "elementwise", False, 0),
    ("Round", "elementwise", False, 0),
    ("Sin", "elementwise", False, 0),
    ("Sinh", "elementwise", False, 0),
    ("Tan", "elementwise", False, 0),
    ("Trunc", "elementwise", False, 0),
    ("Mish", "elementwise", False, 0),
    ("GeneralizedSwish", "elementwise", False, 0),
    ("SigmoidDerivative", "elementwise", False, 0),
    ("CLogLogM", "elementwise", False, 0),
]

REGISTRY: tuple[ActivationKind, ...] = tuple(ActivationKind(*row) for row in _REGISTRY_ROWS)
_BY_NAME = {kind.name: kind for kind in REGISTRY}
_INDEX_BY_NAME = {kind.name: i for i, kind in enumerate(REGISTRY)}

Architecture = tuple[ActivationKind, ...]

STEP_KINDS = frozenset({"Ceil", "Floor", "Round", "Trunc"})


def af_registry() -> list[ActivationKind]:
    """All 48 kinds in canonical menu order (index 0..47 for the samplers)."""
    return list(REGISTRY)


def parse_af_name(name: str) -> ActivationKind:
    """Case-sensitive lookup of a canonical activation name."""
    try:
        return _BY_NAME[name]
    except KeyError:
        valid = ", ".join(k.name for k in REGISTRY)
        raise ValueError(f"unknown activation {name!r}; valid names: {valid}") from None


def af_index(kind: ActivationKind | str) -> int:
    name = kind if isinstance(kind, str) else kind.name
    try:
        return _INDEX_BY_NAME[name]
    except KeyError:
        raise ValueError(f"unknown activation {name!r}") from None


def kind_at(index: int) -> ActivationKind:
    return REGISTRY[index]


def architecture_names(arch) -> list[str]:
    return [kind.name if isinstance(kind, ActivationKind) else str(kind) for kind in arch]


def architecture_from_names(names) -> Architecture:
    return tuple(parse_af_name(n) for n in names)


def _require_rng(kind, rng):
    if rng is None:
        raise ValueError(f"{kind.name} requires an rng in this mode")
    return rng


def af_forward(kind: ActivationKind, state: ActivationState | None, x, rng=None):
    """Evaluate one activation on a vector or a batch of row vectors.

    Stochastic kinds draw from ``rng`` (RReLU only while training,
    GumbelSoftmax always) and cache the draws in ``state`` for the matching
    backward. Deterministic kinds ignore ``state`` and ``rng``.
    """
    x = np.asarray(x, dtype=np.float64)
    if state is None:
        state = ActivationState()
    name = kind.name
    with np.errstate(all="ignore"):
        if name in _SIMPLE:
            return _SIMPLE[name][0](x)
        if name == "PReLU":
            return np.where(x > 0, x, state.prelu_slope[0] * x)
        if name == "RReLU":
            if state.mode == "train":
                slopes = _require_rng(kind, rng).uniform(RRELU_LOWER, RRELU_UPPER, size=x.shape)
                state.rrelu_cached_slopes = slopes
            else:
                slopes = RRELU_EVAL_SLOPE
            return np.where(x > 0, x, slopes * x)
        if name == "Softmin":
            return _softmax(-x)
        if name == "Softmax":
            return _softmax(x)
        if name == "LogSoftmax":
            z = x - np.max(x, axis=-1, keepdims=True)
            return z - np.log(np.sum(np.exp(z), axis=-1, keepdims=True))
        if name == "GumbelSoftmax":
            noise = sf.sample_gumbel(_require_rng(kind, rng), size=x.shape)
            state.gumbel_cached_noise = noise
            return _softmax((x + noise) / GUMBEL_TAU)
    raise ValueError(f"unknown activation {name!r}")


def af_backward(kind: ActivationKind, state: ActivationState | None, x, upstream):
    """Vector-Jacobian product of one activation: (grad_x, grad_params).

    ``x`` is the input the matching forward saw; stochastic kinds reuse the
    draws cached by that forward (missing cache is a contract error).
    ``grad_params`` is empty except for PReLU's single slope.
    """
    x = np.asarray(x, dtype=np.float64)
    upstream = np.asarray(upstream, dtype=np.float64)
    if state is None:
        state = ActivationState()
    name = kind.name
    no_params = np.zeros(0)
    with np.errstate(all="ignore"):
        if name in _SIMPLE:
            return upstream * _SIMPLE[name][1](x), no_params
        if name == "PReLU":
            a = state.prelu_slope[0]
            grad_x = upstream * np.where(x > 0, 1.0, a + 0.0 * x)
            grad_a = np.array([np.sum(upstream * np.minimum(x, 0.0))])
            return grad_x, grad_a
        if name == "RReLU":
            if state.mode == "train":
                if state.rrelu_cached_slopes is None or state.rrelu_cached_slopes.shape != x.shape:
                    raise ValueError("RReLU backward requires the cached slopes of a matching forward")
                slopes = state.rrelu_cached_slopes
            else:
                slopes = RRELU_EVAL_SLOPE
            return upstream * np.where(x > 0, 1.0, slopes + 0.0 * x), no_params
        if name == "Softmin":
            s = _softmax(-x)
            return -(s * (upstream - _row_dot(s, upstream))), no_params
        if name == "Softmax":
            s = _softmax(x)
            return s * (upstream - _row_dot(s, upstream)), no_params
        if name == "LogSoftmax":
            s = _softmax(x)
            return upstream - s * np.sum(upstream, axis=-1, keepdims=True), no_params
        if name == "GumbelSoftmax":
            noise = state.gumbel_cached_noise
            if noise is None or noise.shape != x.shape:
                raise ValueError("GumbelSoftmax backward requires the cached noise of a matching forward")
            s = _softmax((x + noise) / GUMBEL_TAU)
            return s * (upstream - _row_dot(s, upstream)) / GUMBEL_TAU, no_params
    raise ValueError(f"unknown activation {name!r}")
