"""Shared fixtures, independent numeric oracles, and acceptance reporting."""

from __future__ import annotations

import numpy as np
import pytest

import stackgrad as sg

# ---------------------------------------------------------------------------
# Reference problems
# ---------------------------------------------------------------------------


def make_hand_game() -> sg.QuadraticGame:
    """1-D instance with r(x) = -x, f(x) = 1.5 x^2, grad f(x) = 3x."""
    return sg.QuadraticGame(
        n=1, m=1, p1=[[2.0]], q1=[[0.0]], s1=[[1.0]], p2=[[2.0]], q2=[[1.0]], s2=[[1.0]]
    )


def make_collaborative(game: sg.QuadraticGame) -> sg.QuadraticGame:
    """Copy the follower's blocks into the leader: f_1 = f_2."""
    return sg.QuadraticGame(
        n=game.n,
        m=game.m,
        p1=game.p2,
        q1=game.q2,
        s1=game.s2,
        p2=game.p2,
        q2=game.q2,
        s2=game.s2,
        seed=game.seed,
    )


@pytest.fixture
def hand_game() -> sg.QuadraticGame:
    return make_hand_game()


@pytest.fixture(scope="session")
def game_5x4() -> sg.QuadraticGame:
    game, _ = sg.generate_instance(5, 4, seed=1, options=sg.InstanceOptions(shift=1.0))
    return game


# ---------------------------------------------------------------------------
# Independent oracles (never reuse the code paths they check)
# ---------------------------------------------------------------------------


def minimize_follower(game: sg.QuadraticGame, x: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Damped gradient descent on f_2(x, .) run to stationarity."""
    y = np.zeros(game.m)
    step = 0.5 / float(np.linalg.norm(game.s2, 2))
    for _ in range(200_000):
        grad = game.q2.T @ x + game.s2 @ y
        if np.linalg.norm(grad) <= tol:
            break
        y = y - step * grad
    return y


def fd_leader_gradient(game: sg.QuadraticGame, x: np.ndarray, h: float = 1e-6) -> np.ndarray:
    """Central finite differences of f_1(x, r(x)) through the closed-form response."""
    grad = np.zeros_like(x, dtype=float)
    for j in range(len(x)):
        xp, xm = x.astype(float).copy(), x.astype(float).copy()
        xp[j] += h
        xm[j] -= h
        fp = game.f1(xp, sg.best_response(game, xp))
        fm = game.f1(xm, sg.best_response(game, xm))
        grad[j] = (fp - fm) / (2 * h)
    return grad


def power_iteration_extremes(a: np.ndarray, iters: int = 20_000) -> tuple[float, float]:
    """(lambda_min, lambda_max) of a symmetric PD matrix by power iteration."""
    rng = np.random.default_rng(0)
    v = rng.standard_normal(a.shape[0])
    for _ in range(iters):
        v = a @ v
        v /= np.linalg.norm(v)
    lam_max = float(v @ a @ v)
    shifted = lam_max * np.eye(a.shape[0]) - a
    w = rng.standard_normal(a.shape[0])
    for _ in range(iters):
        w = shifted @ w
        norm = np.linalg.norm(w)
        if norm == 0.0:  # a is a multiple of the identity
            return lam_max, lam_max
        w /= norm
    lam_min = float(w @ a @ w)
    return lam_min, lam_max


# ---------------------------------------------------------------------------
# Acceptance reporting: one pass/fail line per criterion
# ---------------------------------------------------------------------------

_acceptance_results: dict[str, bool] = {}


def criterion(label: str):
    """Tag an acceptance test with its criterion label."""

    def mark(fn):
        fn._criterion = label
        return fn

    return mark


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call" and item.module.__name__.endswith("test_acceptance"):
        label = getattr(item.function, "_criterion", item.name)
        _acceptance_results[label] = rep.passed


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _acceptance_results:
        terminalreporter.section("acceptance criteria")
        for label, ok in _acceptance_results.items():
            terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}: {label}")
