"""Random, TPE, and CMA-ES samplers plus the shared study loop."""

import json
import math

import numpy as np
import pytest

from afsearch.activations import af_index, kind_at
from afsearch.samplers import (
    CmaEsState,
    SearchSpace,
    TpeState,
    TrialRecord,
    cmaes_ask,
    cmaes_init,
    cmaes_tell,
    decode_continuous,
    random_suggest,
    save_trial_history,
    study_run,
    tpe_category_masses,
    tpe_suggest,
)


def indices(arch):
    return [af_index(k) for k in arch]


class TestRandom:
    def test_length_and_determinism(self):
        space = SearchSpace(5)
        a = random_suggest(space, np.random.default_rng(3))
        b = random_suggest(space, np.random.default_rng(3))
        assert len(a) == 5 and a == b

    def test_uniformity_chi_square(self):
        space = SearchSpace(1)
        rng = np.random.default_rng(17)
        counts = np.zeros(48)
        n = 48_000
        for _ in range(n):
            counts[indices(random_suggest(space, rng))[0]] += 1
        expected = n / 48
        # 3-sigma binomial band per category for this fixed seed
        band = 3 * math.sqrt(expected * 47 / 48)
        assert np.all(np.abs(counts - expected) <= band)
        chi2 = float(np.sum((counts - expected) ** 2 / expected))
        assert chi2 < 84.0  # ~0.999 quantile of chi2(47)

    def test_reduced_space_stays_in_range(self):
        space = SearchSpace(4, n_categories=10)
        rng = np.random.default_rng(0)
        for _ in range(200):
            assert all(i < 10 for i in indices(random_suggest(space, rng)))


def make_history(rows):
    """rows: list of (position_indices, objective, failed)."""
    out = []
    for tid, (idx, obj, failed) in enumerate(rows):
        out.append(TrialRecord(tid, tuple(kind_at(i) for i in idx), obj, failed))
    return out


class TestTpe:
    def test_startup_equals_random(self):
        space = SearchSpace(5)
        state = TpeState()
        assert tpe_suggest(space, state, np.random.default_rng(9)) == random_suggest(space, np.random.default_rng(9))

    def test_all_failed_behaves_like_empty(self):
        space = SearchSpace(5)
        state = TpeState(history=make_history([([0] * 5, 0.0, True)] * 30))
        assert tpe_suggest(space, state, np.random.default_rng(9)) == random_suggest(space, np.random.default_rng(9))

    def test_planted_history_prefers_winning_category(self):
        # 4 good trials carry category 7 at position 0 and score 1.0; the 36
        # bad trials never use 7 there
        space = SearchSpace(3, n_categories=48)
        rows = [([7, 1, 2], 1.0, False) for _ in range(4)]
        rng0 = np.random.default_rng(5)
        for _ in range(36):
            rows.append(([int(rng0.integers(8, 48)), 3, 4], 0.1, False))
        state = TpeState(history=make_history(rows))
        rng = np.random.default_rng(123)
        hits = sum(indices(tpe_suggest(space, state, rng))[0] == 7 for _ in range(1000))
        assert hits > 500

    def test_mass_ratio_strictly_increases_when_count_moves_to_good(self):
        good = np.array([2.0, 0.0, 1.0])
        bad = np.array([5.0, 3.0, 1.0])
        l0, g0 = tpe_category_masses(good, bad)
        before = l0[0] / g0[0]
        l1, g1 = tpe_category_masses(good + np.array([1.0, 0, 0]), bad - np.array([1.0, 0, 0]))
        after = l1[0] / g1[0]
        assert after > before

    def test_suggestion_frequency_increases_when_count_moves_to_good(self):
        space = SearchSpace(1, n_categories=6)
        base = [([0], 1.0, False)] * 3 + [([1], 0.5, False)] * 3 + [([2], 0.1, False)] * 6
        moved = [([0], 1.0, False)] * 3 + [([1], 0.9, False), ([1], 0.5, False), ([1], 0.5, False)] + [
            ([2], 0.1, False)
        ] * 6
        # n_startup met in both; in "moved" one extra category-1 trial ranks good
        def freq(rows, n=800):
            state = TpeState(history=make_history(rows), n_startup=10)
            rng = np.random.default_rng(77)
            return sum(indices(tpe_suggest(space, state, rng))[0] == 1 for _ in range(n)) / n

        assert freq(moved) > freq(base)

    def test_good_set_rule(self):
        # 40 non-failed trials: n_good = ceil(0.1 * 40) = 4
        from afsearch.samplers import _tpe_n_good

        assert _tpe_n_good(40, TpeState()) == 4
        assert _tpe_n_good(10, TpeState()) == 1
        assert _tpe_n_good(1000, TpeState()) == 25  # capped


class TestCmaEs:
    def test_degenerate_sigma_collapses_to_mean(self):
        state = cmaes_init(4, mean0=np.array([1.0, 2.0, 3.0, 4.0]), sigma0=1e-12)
        X = cmaes_ask(state, np.random.default_rng(0))
        assert np.max(np.abs(X - state.mean)) <= 1e-9 * math.sqrt(4) * float(np.max(state.D)) * 10

    def test_identity_sampling_covariance(self):
        state = cmaes_init(3, sigma0=1.0, lam=100_000)
        X = cmaes_ask(state, np.random.default_rng(1))
        cov = np.cov(X.T)
        assert np.max(np.abs(cov - np.eye(3))) < 0.02

    def test_ask_deterministic(self):
        state1 = cmaes_init(5, sigma0=2.0)
        state2 = cmaes_init(5, sigma0=2.0)
        a = cmaes_ask(state1, np.random.default_rng(3))
        b = cmaes_ask(state2, np.random.default_rng(3))
        assert np.array_equal(a, b)

    def test_tell_keeps_invariants(self):
        state = cmaes_init(6, sigma0=1.5)
        rng = np.random.default_rng(5)
        for _ in range(50):
            X = cmaes_ask(state, rng)
            objs = rng.normal(size=state.lam)
            cmaes_tell(state, X, objs)
            assert state.sigma > 0
            assert np.max(np.abs(state.C - state.C.T)) <= 1e-12
            assert np.min(np.linalg.eigvalsh(state.C)) >= 1e-12 * 0.999

    def test_sigma_positive_over_many_random_updates(self):
        state = cmaes_init(3, sigma0=0.5)
        rng = np.random.default_rng(6)
        for _ in range(2000):
            X = cmaes_ask(state, rng)
            cmaes_tell(state, X, rng.normal(size=state.lam))
        assert state.sigma > 0 and np.isfinite(state.sigma)

    def test_nonfinite_objectives_rank_worst(self):
        state = cmaes_init(2, sigma0=1.0, lam=4)
        X = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])
        # maximisation: nan should lose to every finite value
        cmaes_tell(state, X, np.array([np.nan, 1.0, 2.0, np.inf]))
        # mean moves toward rows 2 and 1 (mu = 2), never toward the nan/inf rows
        assert state.mean[0] < 2.5

    def test_equal_objectives_mean_is_weighted_head_average(self):
        state = cmaes_init(2, mean0=np.zeros(2), sigma0=1.0, lam=6)
        X = np.arange(12, dtype=float).reshape(6, 2)
        w = state.weights
        expected = w @ X[: state.mu]
        cmaes_tell(state, X, np.ones(6))
        assert np.allclose(state.mean, expected, atol=1e-12)

    def test_population_size_default(self):
        assert cmaes_init(5).lam == 4 + int(3 * math.log(5))
        assert cmaes_init(10).lam == 4 + int(3 * math.log(10))

    def test_sphere_converges(self):
        rng = np.random.default_rng(0)
        state = cmaes_init(10, mean0=np.full(10, 3.0), sigma0=2.0)
        best = math.inf
        evals = 0
        while evals + state.lam <= 5000 and best > 1e-10:
            X = cmaes_ask(state, rng)
            f = np.sum(X * X, axis=1)
            best = min(best, float(f.min()))
            cmaes_tell(state, X, -f)
            evals += state.lam
        assert best <= 1e-10


class TestDecode:
    def test_floor_rule(self):
        space = SearchSpace(5)
        arch = decode_continuous([0.2, 47.9, 23.5, 1.0, 46.99], space)
        assert indices(arch) == [0, 47, 23, 1, 46]

    def test_clips_low_and_high(self):
        space = SearchSpace(2)
        assert indices(decode_continuous([-3.0, 48.0], space)) == [0, 47]

    def test_total_on_any_reals(self):
        space = SearchSpace(3)
        assert indices(decode_continuous([1e30, -1e30, 47.99999], space)) == [47, 0, 47]


class TestStudyRun:
    def planted(self, space, target):
        target_arch = tuple(kind_at(i) for i in target)

        def objective(arch):
            return sum(a is b for a, b in zip(arch, target_arch)) / space.n_layers, False

        return objective

    def test_single_trial(self):
        space = SearchSpace(5, 10)
        res = study_run(self.planted(space, [0] * 5), "random", space, 1, np.random.default_rng(0))
        assert len(res.history) == 1
        assert res.best is res.history[0]

    def test_exact_evaluation_count(self):
        space = SearchSpace(5, 10)
        for sampler in ("random", "tpe", "cmaes"):
            calls = {"n": 0}

            def objective(arch):
                calls["n"] += 1
                return 0.5, False

            study_run(objective, sampler, space, 23, np.random.default_rng(1))
            assert calls["n"] == 23, sampler

    def test_deterministic_histories(self):
        space = SearchSpace(5, 10)
        for sampler in ("random", "tpe", "cmaes"):
            runs = []
            for _ in range(2):
                res = study_run(self.planted(space, [1, 2, 3, 4, 5]), sampler, space, 40, np.random.default_rng(9))
                runs.append([(r.trial_id, indices(r.architecture), r.objective) for r in res.history])
            assert runs[0] == runs[1], sampler

    def test_best_is_earliest_on_ties(self):
        space = SearchSpace(2, 4)

        def objective(arch):
            return 1.0, False

        res = study_run(objective, "random", space, 5, np.random.default_rng(0))
        assert res.best.trial_id == 0

    def test_all_failed_returns_flagged_best(self):
        space = SearchSpace(2, 4)

        def objective(arch):
            return 0.0, True

        res = study_run(objective, "random", space, 4, np.random.default_rng(0))
        assert res.best.failed

    def test_failed_trials_excluded_from_best(self):
        space = SearchSpace(2, 4)
        values = iter([(0.9, True), (0.2, False), (0.5, False), (0.4, False)])

        def objective(arch):
            return next(values)

        res = study_run(objective, "random", space, 4, np.random.default_rng(0))
        assert res.best.objective == 0.5 and not res.best.failed

    def test_unknown_sampler_rejected(self):
        with pytest.raises(ValueError, match="unknown sampler"):
            study_run(lambda a: (0.0, False), "anneal", SearchSpace(2, 4), 2, np.random.default_rng(0))

    def test_tpe_beats_random_on_planted_small(self):
        space = SearchSpace(5, 10)
        wins = 0
        for seed in range(8):
            target = np.random.default_rng([1, seed]).integers(0, 10, size=5)
            obj = self.planted(space, [int(t) for t in target])
            tpe = study_run(obj, "tpe", space, 120, np.random.default_rng([2, seed]))
            rnd = study_run(obj, "random", space, 120, np.random.default_rng([3, seed]))
            wins += tpe.best.objective >= rnd.best.objective
        assert wins >= 6

    def test_trial_history_schema(self, tmp_path):
        space = SearchSpace(3, 8)
        res = study_run(lambda a: (0.25, False), "random", space, 3, np.random.default_rng(4))
        path = tmp_path / "history.jsonl"
        save_trial_history(path, "random", res.history, seed=4)
        lines = path.read_text().strip().split("\n")
        assert len(lines) == 3
        rec = json.loads(lines[0])
        assert set(rec) == {"trial_id", "method", "architecture", "objective", "failed", "seed"}
        assert rec["method"] == "random" and len(rec["architecture"]) == 3
