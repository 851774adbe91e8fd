"""Finite-difference gradient suites for the activation zoo and the network."""

import numpy as np

from afsearch.activations import STEP_KINDS, af_registry
from afsearch.gradcheck import (
    check_activation_gradients,
    check_network_gradients,
    check_prelu_slope_gradient,
    sample_safe_points,
)


def test_all_activation_gradients_pass():
    reports = check_activation_gradients(n_points=100, seed=0)
    assert len(reports) == 48
    failures = [name for name, rep in reports.items() if not rep.passed]
    assert failures == []


def test_step_kinds_report_exact_zero():
    reports = check_activation_gradients(n_points=50, seed=1)
    for name in STEP_KINDS:
        assert reports[name].max_abs_diff == 0.0
        assert reports[name].passed


def test_non_step_count_is_44():
    assert len([k for k in af_registry() if k.name not in STEP_KINDS]) == 44


def test_safe_points_respect_margins():
    rng = np.random.default_rng(0)
    pts = sample_safe_points("ReLU", rng, 500)
    assert np.all(np.abs(pts) >= 1e-3)
    pts = sample_safe_points("Acos", rng, 500)
    assert np.all(pts >= -1 + 1e-3) and np.all(pts <= 1 - 1e-3)
    pts = sample_safe_points("Frac", rng, 500)
    assert np.all(np.abs(pts - np.rint(pts)) >= 1e-3)
    pts = sample_safe_points("Round", rng, 500)
    assert np.all(np.abs(pts - (np.floor(pts) + 0.5)) >= 1e-3)


def test_prelu_slope_gradient_matches_fd():
    assert check_prelu_slope_gradient(n_points=50, seed=3) < 1e-7


def test_network_end_to_end_gradients():
    reports = check_network_gradients(seed=0)
    assert len(reports) == 3
    for rep in reports:
        assert rep.passed, rep
        assert rep.frac_within_tight >= 0.95
        assert rep.max_rel_diff <= 1e-3
