"""Finite-difference verification of the activation and network gradients.

Points are drawn from per-kind safe sub-domains: at least 1e-3 away from
kinks and discontinuities, inside open domains, and further from poles
where the third derivative would dominate the central-difference error.
Stochastic kinds are checked with their noise frozen by reseeding the same
generator for every forward evaluation.
"""

import math
from dataclasses import dataclass

import numpy as np

from .activations import (
    STEP_KINDS,
    ActivationState,
    af_backward,
    af_forward,
    af_index,
    af_registry,
    parse_af_name,
)
from .network import backward, cross_entropy_loss, forward, init_network, trainable_params

ABS_TOL = 1e-5
REL_TOL = 1e-4
FD_STEP = 1e-5
_KINK_MARGIN = 1e-3

# sampling range and excluded neighbourhoods per kind; default is (-3, 3)
# with no exclusions. "integers" / "half_integers" exclude the lattice of
# discontinuities, wider margins keep pole curvature out of the FD error.
_DOMAINS = {
    "ELU": {"kinks": (0.0,)},
    "Hardshrink": {"kinks": (-0.5, 0.5)},
    "Hardtanh": {"kinks": (-1.0, 1.0)},
    "LeakyReLU": {"kinks": (0.0,)},
    "PReLU": {"kinks": (0.0,)},
    "ReLU": {"kinks": (0.0,)},
    "ReLU6": {"kinks": (0.0, 6.0)},
    "RReLU": {"kinks": (0.0,)},
    "SELU": {"kinks": (0.0,)},
    "CELU": {"kinks": (0.0,)},
    "Softshrink": {"kinks": (-0.5, 0.5)},
    "Abs": {"kinks": (0.0,)},
    "Angle": {"kinks": (0.0,)},
    "Acos": {"low": -1.0 + 1e-3, "high": 1.0 - 1e-3},
    "Asin": {"low": -1.0 + 1e-3, "high": 1.0 - 1e-3},
    "Log": {"low": 1e-3, "high": 6.0},
    "Log10": {"low": 1e-3, "high": 6.0},
    "Digamma": {"low": 0.05, "high": 6.0},
    "Tan": {"low": -math.pi / 2 + 0.02, "high": math.pi / 2 - 0.02},
    "Ceil": {"lattice": "integers"},
    "Floor": {"lattice": "integers"},
    "Trunc": {"lattice": "integers"},
    "Frac": {"lattice": "integers"},
    "Round": {"lattice": "half_integers"},
}


@dataclass
class KindGradReport:
    name: str
    max_abs_diff: float
    worst_excess: float  # max over points of |diff| - allowed; <= 0 passes
    passed: bool


@dataclass
class NetworkGradReport:
    arch_names: tuple[str, ...]
    n_params: int
    frac_within_tight: float  # share of entries with rel diff <= 1e-4
    max_rel_diff: float
    passed: bool


def sample_safe_points(name: str, rng, n: int) -> np.ndarray:
    spec = _DOMAINS.get(name, {})
    low = spec.get("low", -3.0)
    high = spec.get("high", 3.0)
    kinks = spec.get("kinks", ())
    lattice = spec.get("lattice")
    points = []
    while len(points) < n:
        draw = rng.uniform(low, high, size=2 * n)
        ok = np.ones(draw.shape, dtype=bool)
        for k in kinks:
            ok &= np.abs(draw - k) >= _KINK_MARGIN
        if lattice == "integers":
            ok &= np.abs(draw - np.rint(draw)) >= _KINK_MARGIN
        elif lattice == "half_integers":
            ok &= np.abs(draw - (np.floor(draw) + 0.5)) >= _KINK_MARGIN
        points.extend(draw[ok].tolist())
    return np.array(points[:n])


def _frozen_forward(kind, x, noise_seed, mode="train"):
    """Forward pass with a fresh state; stochastic draws fixed by the seed."""
    state = ActivationState(mode=mode)
    rng = np.random.default_rng(noise_seed) if kind.stochastic else None
    out = af_forward(kind, state, x, rng)
    return out, state


def _tolerance(analytic, numeric):
    return np.maximum(ABS_TOL, REL_TOL * np.maximum(np.abs(analytic), np.abs(numeric)))


def check_elementwise_kind(kind, n_points=100, h=FD_STEP, seed=0) -> KindGradReport:
    rng = np.random.default_rng([af_index(kind), seed])
    x = sample_safe_points(kind.name, rng, n_points)
    noise_seed = 104729 + af_index(kind)
    _, state = _frozen_forward(kind, x, noise_seed)
    analytic, _ = af_backward(kind, state, x, np.ones_like(x))
    fp, _ = _frozen_forward(kind, x + h, noise_seed)
    fm, _ = _frozen_forward(kind, x - h, noise_seed)
    numeric = (fp - fm) / (2.0 * h)
    diff = np.abs(analytic - numeric)
    excess = diff - _tolerance(analytic, numeric)
    return KindGradReport(
        name=kind.name,
        max_abs_diff=float(np.max(diff)),
        worst_excess=float(np.max(excess)),
        passed=bool(np.all(excess <= 0.0)),
    )


def check_vectorwise_kind(kind, n_points=100, dim=5, h=FD_STEP, seed=0) -> KindGradReport:
    rng = np.random.default_rng([af_index(kind), seed])
    worst_excess = -np.inf
    max_diff = 0.0
    for i in range(n_points):
        x = rng.uniform(-3.0, 3.0, size=dim)
        upstream = rng.normal(size=dim)
        noise_seed = 15485863 + 1000 * af_index(kind) + i
        _, state = _frozen_forward(kind, x, noise_seed)
        analytic, _ = af_backward(kind, state, x, upstream)
        numeric = np.empty(dim)
        for j in range(dim):
            e = np.zeros(dim)
            e[j] = h
            fp, _ = _frozen_forward(kind, x + e, noise_seed)
            fm, _ = _frozen_forward(kind, x - e, noise_seed)
            numeric[j] = float(upstream @ (fp - fm)) / (2.0 * h)
        diff = np.abs(analytic - numeric)
        excess = diff - _tolerance(analytic, numeric)
        worst_excess = max(worst_excess, float(np.max(excess)))
        max_diff = max(max_diff, float(np.max(diff)))
    return KindGradReport(kind.name, max_diff, worst_excess, worst_excess <= 0.0)


def check_step_kind(kind, n_points=100, h=FD_STEP, seed=0) -> KindGradReport:
    """Step functions must report exact-zero analytic and numeric gradients."""
    rng = np.random.default_rng([af_index(kind), seed])
    x = sample_safe_points(kind.name, rng, n_points)
    analytic, _ = af_backward(kind, ActivationState(), x, np.ones_like(x))
    fp = af_forward(kind, ActivationState(), x + h)
    fm = af_forward(kind, ActivationState(), x - h)
    numeric = (fp - fm) / (2.0 * h)
    ok = bool(np.all(analytic == 0.0) and np.all(numeric == 0.0))
    diff = float(np.max(np.abs(analytic - numeric)))
    return KindGradReport(kind.name, diff, 0.0 if ok else np.inf, ok)


def check_activation_gradients(n_points=100, seed=0) -> dict[str, KindGradReport]:
    """Finite-difference check of every registry kind at safe points."""
    reports = {}
    for kind in af_registry():
        if kind.name in STEP_KINDS:
            reports[kind.name] = check_step_kind(kind, n_points, seed=seed)
        elif kind.arity == "vectorwise":
            reports[kind.name] = check_vectorwise_kind(kind, n_points, seed=seed)
        else:
            reports[kind.name] = check_elementwise_kind(kind, n_points, seed=seed)
    return reports


def check_prelu_slope_gradient(n_points=100, h=FD_STEP, seed=0) -> float:
    """Max abs difference between the analytic slope gradient and an FD probe."""
    kind = parse_af_name("PReLU")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_points):
        x = rng.uniform(-3.0, 3.0, size=7)
        upstream = rng.normal(size=7)
        state = ActivationState()
        af_forward(kind, state, x)
        _, grad_a = af_backward(kind, state, x, upstream)
        up = ActivationState(prelu_slope=state.prelu_slope + h)
        dn = ActivationState(prelu_slope=state.prelu_slope - h)
        numeric = float(upstream @ (af_forward(kind, up, x) - af_forward(kind, dn, x))) / (2.0 * h)
        worst = max(worst, abs(float(grad_a[0]) - numeric))
    return worst


_NETWORK_CHECK_ARCHS = [
    ("Tanh", "GELU", "Softmax"),
    ("Mish", "Sigmoid", "LogSoftmax"),
    ("PReLU", "Softsign", "Softmin"),
]


def check_network_gradients(seed=0, h=1e-6) -> list[NetworkGradReport]:
    """End-to-end loss gradients of small deterministic nets vs central differences."""
    reports = []
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(8, 3))
    y = rng.integers(0, 3, size=8)
    for names in _NETWORK_CHECK_ARCHS:
        arch = tuple(parse_af_name(n) for n in names)
        net = init_network(3, 3, arch, np.random.default_rng([seed, 1]), hidden=6)
        params = trainable_params(net)

        def loss_of_current():
            _, out = forward(net, X, mode="train")
            return cross_entropy_loss(out, y)[0]

        cache, out = forward(net, X, mode="train")
        _, grad_out = cross_entropy_loss(out, y)
        grads = backward(net, cache, grad_out)

        rel_diffs = []
        for p, g in zip(params, grads):
            flat_p = p.ravel()
            flat_g = g.ravel()
            for i in range(flat_p.size):
                orig = flat_p[i]
                flat_p[i] = orig + h
                lp = loss_of_current()
                flat_p[i] = orig - h
                lm = loss_of_current()
                flat_p[i] = orig
                numeric = (lp - lm) / (2.0 * h)
                denom = max(abs(flat_g[i]), abs(numeric), 1e-6)
                rel_diffs.append(abs(flat_g[i] - numeric) / denom)
        rel_diffs = np.array(rel_diffs)
        frac_tight = float(np.mean(rel_diffs <= 1e-4))
        max_rel = float(np.max(rel_diffs))
        reports.append(
            NetworkGradReport(
                arch_names=names,
                n_params=int(rel_diffs.size),
                frac_within_tight=frac_tight,
                max_rel_diff=max_rel,
                passed=frac_tight >= 0.95 and max_rel <= 1e-3,
            )
        )
    return reports
