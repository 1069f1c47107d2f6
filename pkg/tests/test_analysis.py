import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scgvb.analysis import (
    LinearDependenceError,
    all_weights,
    alternative_weights,
    chirgwin_coulson,
    inverse_sqrt,
    jacobi_eigh,
    matrix_sqrt,
    solve_generalized,
)

from .helpers import random_spd

seeds = st.integers(0, 2**32 - 1)


def _sym(rng, n):
    A = rng.standard_normal((n, n))
    return 0.5 * (A + A.T)


@settings(max_examples=30)
@given(seeds, st.integers(1, 7))
def test_jacobi_against_numpy(seed, n):
    A = _sym(np.random.default_rng(seed), n)
    w, V = jacobi_eigh(A)
    assert np.allclose(w, np.linalg.eigvalsh(A), atol=1e-12)
    assert np.allclose(V.T @ V, np.eye(n), atol=1e-12)
    assert np.allclose(A @ V, V * w, atol=1e-11)


def test_jacobi_rejects_asymmetric():
    with pytest.raises(ValueError):
        jacobi_eigh([[1.0, 2.0], [0.0, 1.0]])


@pytest.mark.parametrize("s", [0.0, 0.3, -0.7, 0.95])
def test_inverse_sqrt_closed_form(s):
    X = inverse_sqrt([[1, s], [s, 1]])
    a, b = 1 / np.sqrt(1 + s), 1 / np.sqrt(1 - s)
    assert X[0, 0] == pytest.approx(0.5 * (a + b), abs=1e-14)
    assert X[0, 1] == pytest.approx(0.5 * (a - b), abs=1e-14)


def test_inverse_sqrt_identity_and_residual():
    assert np.allclose(inverse_sqrt(np.eye(3)), np.eye(3))
    S = random_spd(np.random.default_rng(0), 5)
    X = inverse_sqrt(S)
    assert np.allclose(X.T @ S @ X, np.eye(5), atol=1e-10)
    R = matrix_sqrt(S)
    assert np.allclose(R @ R, S, atol=1e-12)


def test_linear_dependence_rejected():
    with pytest.raises(LinearDependenceError):
        inverse_sqrt([[1.0, 1.0], [1.0, 1.0]])


@settings(max_examples=25)
@given(seeds)
def test_generalized_residual(seed):
    rng = np.random.default_rng(seed)
    S = random_spd(rng, 6)
    H = _sym(rng, 6)
    sol = solve_generalized(H, S)
    assert np.all(np.diff(sol.energies) >= -1e-12)
    # backward error, since random S can be nearly singular
    R = H @ sol.C - S @ sol.C * sol.energies
    scale = np.linalg.norm(H) * np.linalg.norm(sol.C) + np.linalg.norm(S) * np.linalg.norm(sol.C * sol.energies)
    assert np.linalg.norm(R) <= 1e-13 * scale
    assert np.allclose(sol.C.T @ S @ sol.C, np.eye(6), atol=1e-13 * np.linalg.cond(S))
    c = sol.ground
    assert c[np.argmax(np.abs(c))] > 0
    assert sol.min_overlap_eigenvalue == pytest.approx(np.linalg.eigvalsh(S)[0])


@settings(max_examples=25)
@given(seeds)
def test_scaling_invariance(seed):
    rng = np.random.default_rng(seed)
    S, H = random_spd(rng, 4), _sym(rng, 4)
    D = np.diag(rng.uniform(0.5, 2.0, 4))
    a = solve_generalized(H, S)
    b = solve_generalized(D @ H @ D, D @ S @ D)
    assert np.allclose(a.energies, b.energies, atol=1e-10)
    w1, w2 = chirgwin_coulson(a.ground, S).cc, chirgwin_coulson(b.ground, D @ S @ D).cc
    assert np.allclose(w1, w2, atol=1e-9)


def test_identity_overlap_reduces_to_squares():
    c = np.array([0.6, -0.8])
    rep = all_weights(c, np.eye(2))
    assert np.allclose(rep.cc, c**2)
    assert np.allclose(rep.lowdin, c**2)
    assert np.allclose(rep.inverse, c**2)


@settings(max_examples=25)
@given(seeds)
def test_weight_sums(seed):
    rng = np.random.default_rng(seed)
    S, H = random_spd(rng, 3), _sym(rng, 3)
    c = solve_generalized(H, S).ground
    rep = all_weights(c, S)
    assert rep.sums["cc"] == pytest.approx(1.0, abs=1e-12)
    assert rep.sums["lowdin"] == pytest.approx(1.0, abs=1e-12)
    assert rep.sums["inverse"] == pytest.approx(1.0, abs=1e-15)


def test_two_structure_form_and_flags():
    S = np.array([[1.0, 0.8], [0.8, 1.0]])
    c = np.array([1.0, 0.5])
    c = c / np.sqrt(c @ S @ c)
    rep = chirgwin_coulson(c, S)
    assert rep.cc[0] == pytest.approx(c[0] ** 2 + c[0] * c[1] * 0.8)
    assert rep.cc_out_of_range == (False, False)
    # opposite signs on a strongly overlapping pair push the weights outside [0, 1]
    c = np.array([1.2, -0.4])
    c = c / np.sqrt(c @ S @ c)
    rep = chirgwin_coulson(c, S)
    assert rep.cc_out_of_range == (True, True)
    assert sum(rep.cc) == pytest.approx(1.0)


def test_unnormalized_input_warns():
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        rep = alternative_weights([2.0, 0.0], np.eye(2))
    assert rec and np.allclose(rep.lowdin, [1, 0])


def test_square_structures(square):
    S, H = square.lowdin
    an = square.structure_analysis(S, H)
    c1, c2 = an.solution.ground
    assert abs(abs(c1) - abs(c2)) < 1e-9
    assert (c1, c2) == pytest.approx((-0.3122, 0.3122), abs=1e-4)
    assert an.weights.cc == pytest.approx((0.5, 0.5), abs=1e-9)
