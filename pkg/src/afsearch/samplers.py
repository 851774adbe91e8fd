"""Architecture search strategies over the categorical per-layer menu.

Three samplers share one study loop:

* ``random``  - every layer position i.i.d. uniform over the menu.
* ``tpe``     - Tree-structured Parzen Estimator with independent per-position
  categorical densities. After ``n_startup`` non-failed trials the history is
  split into a "good" top quantile and a "bad" rest; each position draws
  candidates from the smoothed good density l(c) and keeps the candidate with
  the largest ratio l(c)/g(c).
* ``cmaes``   - CMA-ES over a continuous relaxation of the categorical space
  (one real coordinate per layer, floor-decoded to a menu index), so the
  sampler genuinely models relations between positions. Standard weighted
  recombination, cumulative step-size adaptation and rank-one plus rank-mu
  covariance updates with the usual dimension-dependent rates.

All randomness flows through explicit generators; a study is bit-reproducible
given its seed.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .activations import Architecture, ActivationKind, af_index, architecture_names, kind_at

MIN_EIGENVALUE = 1e-12
DECODE_UPPER_MARGIN = 1e-9

SAMPLER_NAMES = ("random", "tpe", "cmaes")


@dataclass(frozen=True)
class SearchSpace:
    """L layer positions, each one of K menu categories (registry order)."""

    n_layers: int
    n_categories: int = 48

    def __post_init__(self):
        if self.n_layers < 1 or not (1 <= self.n_categories <= 48):
            raise ValueError(f"invalid search space ({self.n_layers}, {self.n_categories})")


@dataclass
class TrialRecord:
    trial_id: int
    architecture: Architecture
    objective: float
    failed: bool = False


@dataclass
class StudyResult:
    best: TrialRecord
    history: list[TrialRecord]


@dataclass
class TpeState:
    """History plus the sampler knobs (canonical published defaults)."""

    history: list[TrialRecord] = field(default_factory=list)
    n_startup: int = 10
    n_ei_candidates: int = 24
    prior_weight: float = 1.0
    good_fraction: float = 0.1
    max_good: int = 25


def random_suggest(space: SearchSpace, rng) -> Architecture:
    """Uniform architecture: each position i.i.d. over the menu."""
    idx = rng.integers(0, space.n_categories, size=space.n_layers)
    return tuple(kind_at(int(i)) for i in idx)


def tpe_category_masses(good_counts, bad_counts, prior_weight=1.0):
    """Smoothed categorical densities (l, g) from good/bad occurrence counts.

    Dirichlet-style pseudocounts: every category gains prior_weight before
    normalising, so unseen categories keep nonzero mass and the ratio l/g is
    always finite. The per-category pseudocount also makes repeated
    suggestions self-correcting: duplicates of one architecture pile into
    the bad density and push its ratio below fresh alternatives.
    """
    l = np.asarray(good_counts, dtype=float) + prior_weight
    g = np.asarray(bad_counts, dtype=float) + prior_weight
    return l / l.sum(), g / g.sum()


def _tpe_n_good(n_ok: int, state: TpeState) -> int:
    return min(math.ceil(state.good_fraction * n_ok), state.max_good)


def tpe_suggest(space: SearchSpace, state: TpeState, rng) -> Architecture:
    """One TPE suggestion; uniform random until n_startup non-failed trials.

    Non-failed trials are ranked by objective descending (ties keep the
    earlier trial first); the top min(ceil(0.1 n), 25) form the good set.
    Independently per position, n_ei_candidates categories are drawn from
    l and the one maximising l(c)/g(c) wins, ties to the lowest index.
    """
    ok = [t for t in state.history if not t.failed]
    if len(ok) < state.n_startup:
        return random_suggest(space, rng)
    order = sorted(range(len(ok)), key=lambda i: (-ok[i].objective, ok[i].trial_id))
    good = set(order[: _tpe_n_good(len(ok), state)])
    indices = [tuple(af_index(kind) for kind in t.architecture) for t in ok]
    k = space.n_categories
    chosen = []
    for pos in range(space.n_layers):
        good_counts = np.zeros(k)
        bad_counts = np.zeros(k)
        for i, idx in enumerate(indices):
            (good_counts if i in good else bad_counts)[idx[pos]] += 1.0
        l, g = tpe_category_masses(good_counts, bad_counts, state.prior_weight)
        cands = rng.choice(k, size=state.n_ei_candidates, p=l)
        ratio = l[cands] / g[cands]
        chosen.append(int(cands[ratio == ratio.max()].min()))
    return tuple(kind_at(c) for c in chosen)


@dataclass
class CmaEsState:
    """Full CMA-ES state: distribution parameters, paths, and constants."""

    mean: np.ndarray
    sigma: float
    C: np.ndarray
    p_sigma: np.ndarray
    p_c: np.ndarray
    generation: int
    lam: int
    mu: int
    weights: np.ndarray
    mu_eff: float
    c_c: float
    c_s: float
    c_1: float
    c_mu: float
    d_s: float
    chi_n: float
    B: np.ndarray  # eigenbasis of C
    D: np.ndarray  # sqrt eigenvalues of C


def _decompose(C):
    """Symmetric eigendecomposition with an eigenvalue floor; repairs C.

    Returns (C_repaired, B, D) with C = B diag(D^2) B^T, D >= sqrt(floor).
    A failed decomposition gets one jittered retry.
    """
    C = 0.5 * (C + C.T)
    try:
        vals, vecs = np.linalg.eigh(C)
    except np.linalg.LinAlgError:
        C = C + MIN_EIGENVALUE * np.eye(C.shape[0])
        vals, vecs = np.linalg.eigh(C)
    vals = np.maximum(vals, MIN_EIGENVALUE)
    C = (vecs * vals) @ vecs.T
    C = 0.5 * (C + C.T)
    return C, vecs, np.sqrt(vals)


def cmaes_init(dim: int, mean0=None, sigma0=1.0, lam=None) -> CmaEsState:
    """Fresh CMA-ES state with the standard dimension-dependent constants."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    mean = np.zeros(dim) if mean0 is None else np.asarray(mean0, dtype=float).copy()
    if mean.shape != (dim,):
        raise ValueError(f"mean0 must have shape ({dim},)")
    if sigma0 <= 0:
        raise ValueError("sigma0 must be positive")
    lam = int(lam) if lam is not None else 4 + int(3 * math.log(dim))
    mu = lam // 2
    raw = np.log(mu + 0.5) - np.log(np.arange(1, mu + 1))
    weights = raw / raw.sum()
    mu_eff = 1.0 / np.sum(weights**2)
    c_c = (4.0 + mu_eff / dim) / (dim + 4.0 + 2.0 * mu_eff / dim)
    c_s = (mu_eff + 2.0) / (dim + mu_eff + 5.0)
    c_1 = 2.0 / ((dim + 1.3) ** 2 + mu_eff)
    c_mu = min(1.0 - c_1, 2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((dim + 2.0) ** 2 + mu_eff))
    d_s = 1.0 + 2.0 * max(0.0, math.sqrt((mu_eff - 1.0) / (dim + 1.0)) - 1.0) + c_s
    chi_n = math.sqrt(dim) * (1.0 - 1.0 / (4.0 * dim) + 1.0 / (21.0 * dim * dim))
    return CmaEsState(
        mean=mean,
        sigma=float(sigma0),
        C=np.eye(dim),
        p_sigma=np.zeros(dim),
        p_c=np.zeros(dim),
        generation=0,
        lam=lam,
        mu=mu,
        weights=weights,
        mu_eff=float(mu_eff),
        c_c=c_c,
        c_s=c_s,
        c_1=c_1,
        c_mu=c_mu,
        d_s=d_s,
        chi_n=chi_n,
        B=np.eye(dim),
        D=np.ones(dim),
    )


def cmaes_ask(state: CmaEsState, rng) -> np.ndarray:
    """Sample lam candidates x_k = mean + sigma * B D z_k, z_k ~ N(0, I).

    Raw (unclipped) vectors are returned; clipping into the categorical box
    happens only at decode time so tell sees the actual sampled points.
    """
    dim = state.mean.shape[0]
    z = rng.standard_normal(size=(state.lam, dim))
    return state.mean + state.sigma * (z * state.D) @ state.B.T


def cmaes_tell(state: CmaEsState, candidates, objectives) -> CmaEsState:
    """Standard CMA-ES update from one evaluated generation.

    ``objectives`` are maximisation values (negated internally); non-finite
    objectives rank worst. Ties are broken by candidate index (stable sort).
    After the update C is re-symmetrised and its eigenvalues floored, so the
    state invariants (symmetry, positive definiteness, sigma > 0) hold.
    """
    X = np.asarray(candidates, dtype=float)
    if X.shape[0] != state.lam:
        raise ValueError(f"expected {state.lam} candidates, got {X.shape[0]}")
    fit = -np.asarray(objectives, dtype=float)
    fit = np.where(np.isfinite(fit), fit, np.inf)
    order = np.argsort(fit, kind="stable")
    sel = X[order[: state.mu]]

    mean_old = state.mean
    y = (sel - mean_old) / state.sigma
    y_w = state.weights @ y
    state.mean = mean_old + state.sigma * y_w

    state.generation += 1
    inv_sqrt_step = state.B @ ((state.B.T @ y_w) / state.D)
    cs = state.c_s
    state.p_sigma = (1.0 - cs) * state.p_sigma + math.sqrt(cs * (2.0 - cs) * state.mu_eff) * inv_sqrt_step
    norm_ps = float(np.linalg.norm(state.p_sigma))
    denom = math.sqrt(1.0 - (1.0 - cs) ** (2 * state.generation))
    h_sig = 1.0 if norm_ps / denom < (1.4 + 2.0 / (state.mean.shape[0] + 1.0)) * state.chi_n else 0.0

    cc = state.c_c
    state.p_c = (1.0 - cc) * state.p_c + h_sig * math.sqrt(cc * (2.0 - cc) * state.mu_eff) * y_w

    c1a = state.c_1 * (1.0 - (1.0 - h_sig) * cc * (2.0 - cc))
    rank_mu = y.T @ (y * state.weights[:, None])
    state.C = (
        (1.0 - c1a - state.c_mu) * state.C
        + state.c_1 * np.outer(state.p_c, state.p_c)
        + state.c_mu * rank_mu
    )

    # exponent capped at 1 so adversarial objectives cannot overflow sigma
    state.sigma *= math.exp(min(1.0, (cs / state.d_s) * (norm_ps / state.chi_n - 1.0)))

    state.C, state.B, state.D = _decompose(state.C)
    return state


def decode_continuous(x, space: SearchSpace) -> Architecture:
    """Floor-decode a real vector into an architecture, clipping into the box."""
    x = np.asarray(x, dtype=float)
    if x.shape != (space.n_layers,):
        raise ValueError(f"expected vector of length {space.n_layers}")
    clipped = np.clip(x, 0.0, space.n_categories - DECODE_UPPER_MARGIN)
    return tuple(kind_at(int(i)) for i in np.floor(clipped).astype(int))


def _best_of(history):
    best = None
    for rec in history:
        if rec.failed:
            continue
        if best is None or rec.objective > best.objective:
            best = rec
    return best if best is not None else history[0]


def study_run(objective, sampler: str, space: SearchSpace, n_trials: int, rng) -> StudyResult:
    """Run one study: exactly ``n_trials`` objective evaluations.

    ``objective(architecture) -> (value, failed)`` with value maximised.
    The best trial is the highest-objective non-failed one (earliest wins
    ties); if every trial failed the first trial is returned with its
    failed flag set. CMA-ES evaluates in generations of lam and skips the
    distribution update for a final truncated generation.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    history: list[TrialRecord] = []

    def run_one(arch):
        value, failed = objective(arch)
        rec = TrialRecord(trial_id=len(history), architecture=arch, objective=float(value), failed=bool(failed))
        history.append(rec)
        return rec

    if sampler == "random":
        for _ in range(n_trials):
            run_one(random_suggest(space, rng))
    elif sampler == "tpe":
        state = TpeState()
        for _ in range(n_trials):
            rec = run_one(tpe_suggest(space, state, rng))
            state.history.append(rec)
    elif sampler == "cmaes":
        state = cmaes_init(
            space.n_layers,
            mean0=np.full(space.n_layers, space.n_categories / 2.0),
            sigma0=space.n_categories / 6.0,
        )
        while len(history) < n_trials:
            X = cmaes_ask(state, rng)
            n_eval = min(state.lam, n_trials - len(history))
            objs = []
            for k in range(n_eval):
                rec = run_one(decode_continuous(X[k], space))
                objs.append(-math.inf if rec.failed else rec.objective)
            if n_eval == state.lam:
                cmaes_tell(state, X, np.array(objs))
    else:
        raise ValueError(f"unknown sampler {sampler!r}; expected one of {SAMPLER_NAMES}")

    return StudyResult(best=_best_of(history), history=history)


def save_trial_history(path, method: str, history, seed) -> None:
    """Persist a study history as JSON lines, one trial per line."""
    with open(path, "w", encoding="utf-8") as fh:
        for rec in history:
            fh.write(
                json.dumps(
                    {
                        "trial_id": rec.trial_id,
                        "method": method,
                        "architecture": architecture_names(rec.architecture),
                        "objective": rec.objective,
                        "failed": rec.failed,
                        "seed": seed,
                    },
                    sort_keys=True,
                )
                + "\n"
            )


@dataclass
class SphereBenchmarkResult:
    bests: list[float]
    evals_used: list[int]
    n_converged: int
    target: float


def benchmark_sphere(n_seeds=10, dim=10, max_evals=5000, target=1e-10, sigma0=2.0) -> SphereBenchmarkResult:
    """Minimise sum(x^2) from mean 3*ones; the classic convergence check."""
    bests, evals_used = [], []
    for seed in range(n_seeds):
        rng = np.random.default_rng([981, seed])
        state = cmaes_init(dim, mean0=np.full(dim, 3.0), sigma0=sigma0)
        best = math.inf
        evals = 0
        while evals + state.lam <= max_evals and best > target:
            X = cmaes_ask(state, rng)
            f = np.sum(X * X, axis=1)
            best = min(best, float(f.min()))
            cmaes_tell(state, X, -f)
            evals += state.lam
        bests.append(best)
        evals_used.append(evals)
    return SphereBenchmarkResult(bests, evals_used, sum(b <= target for b in bests), target)


@dataclass
class PlantedBenchmarkResult:
    tpe_best_matches: list[int]
    random_best_matches: list[int]
    n_tpe_wins_or_ties: int
    tpe_median: float
    random_median: float


def benchmark_planted_categorical(n_seeds=30, n_layers=5, n_categories=10, n_trials=200) -> PlantedBenchmarkResult:
    """Paired TPE vs random on a planted-target objective.

    The objective is the fraction of positions matching a hidden target
    architecture; each seed plants its own target and runs both samplers
    with the same trial budget.
    """
    space = SearchSpace(n_layers, n_categories)
    tpe_bests, random_bests = [], []
    for seed in range(n_seeds):
        target = np.random.default_rng([77, seed]).integers(0, n_categories, size=n_layers)
        target_arch = tuple(kind_at(int(i)) for i in target)

        def objective(arch):
            matches = sum(a is b for a, b in zip(arch, target_arch))
            return matches / n_layers, False

        tpe_res = study_run(objective, "tpe", space, n_trials, np.random.default_rng([78, seed]))
        rnd_res = study_run(objective, "random", space, n_trials, np.random.default_rng([79, seed]))
        tpe_bests.append(round(tpe_res.best.objective * n_layers))
        random_bests.append(round(rnd_res.best.objective * n_layers))
    wins = sum(t >= r for t, r in zip(tpe_bests, random_bests))
    return PlantedBenchmarkResult(
        tpe_best_matches=tpe_bests,
        random_best_matches=random_bests,
        n_tpe_wins_or_ties=wins,
        tpe_median=float(np.median(tpe_bests)),
        random_median=float(np.median(random_bests)),
    )
