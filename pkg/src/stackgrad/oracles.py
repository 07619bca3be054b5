"""Inexact best-response oracles.

The leader-side algorithm never sees the follower's cost; its only channel is
an oracle mapping a query (leader action x plus a purpose tag) to a response
(follower action y, a certified upper bound on ||y - r(x)||, and the inner
iteration count). Four oracle kinds are provided:

  exact   - closed-form best response, certificate 0.
  ball    - best response plus a deviation drawn uniformly from the radius-eps
            ball (average case).
  sphere  - deviation uniform on the radius-eps sphere (worst-case magnitude).
  gd      - the follower runs gradient descent y_{t+1} = y_t - beta * D_2 f_2(x, y_t)
            until a contraction argument certifies the target accuracy.

Randomized oracles hold their own counter-indexed RNG: responses are
deterministic in (seed, query order) and deliberately not a function of x
alone. One oracle instance serves one solver run at a time; responses are
immutable values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, OracleFailure
from .games import QuadraticGame

ORACLE_KINDS = ("exact", "ball", "sphere", "gd")


@dataclass(frozen=True)
class IbrQuery:
    """A single oracle query: the leader action and why it is being asked."""

    x: np.ndarray
    purpose: str = "center"  # "center" or "probe:<i>"

    @classmethod
    def center(cls, x: np.ndarray) -> "IbrQuery":
        return cls(x=np.asarray(x, dtype=float), purpose="center")

    @classmethod
    def probe(cls, x: np.ndarray, i: int) -> "IbrQuery":
        return cls(x=np.asarray(x, dtype=float), purpose=f"probe:{i}")


@dataclass(frozen=True, eq=False)
class IbrResponse:
    """Follower action with a certified accuracy bound.

    eps_certified is a guaranteed upper bound on ||y - r(x)||; query_cost
    counts inner iterations (0 for closed-form oracles).
    """

    y: np.ndarray
    eps_certified: float
    query_cost: int = 0


@dataclass(frozen=True)
class OracleConfig:
    """Declarative oracle description, as it appears in experiment configs."""

    kind: str = "exact"
    epsilon: float = 0.0
    seed: int = 0
    beta: float | None = None  # gd stepsize; None picks 1/lambda_max(S_2)
    max_iters: int = 100_000
    warm_start: bool = False

    def __post_init__(self):
        if self.kind not in ORACLE_KINDS:
            raise ConfigError(f"unknown oracle kind {self.kind!r}; expected one of {ORACLE_KINDS}")
        if self.epsilon < 0.0:
            raise ConfigError(f"oracle epsilon must be >= 0, got {self.epsilon}")
        if self.max_iters < 1:
            raise ConfigError("oracle max_iters must be >= 1")

    def replace_epsilon(self, epsilon: float) -> "OracleConfig":
        return OracleConfig(
            kind=self.kind,
            epsilon=epsilon,
            seed=self.seed,
            beta=self.beta,
            max_iters=self.max_iters,
            warm_start=self.warm_start,
        )


class FollowerOracle:
    """Base class; concrete oracles implement _answer(x) -> (y, eps, cost)."""

    def __init__(self, log_queries: bool = False):
        self.query_count = 0
        self.query_log: list[tuple[int, str, float, int]] | None = [] if log_queries else None

    def respond(self, query: IbrQuery) -> IbrResponse:
        y, eps, cost = self._answer(np.asarray(query.x, dtype=float))
        self.query_count += 1
        if self.query_log is not None:
            self.query_log.append((self.query_count, query.purpose, eps, cost))
        return IbrResponse(y=y, eps_certified=eps, query_cost=cost)

    def _answer(self, x: np.ndarray) -> tuple[np.ndarray, float, int]:
        raise NotImplementedError


class ExactOracle(FollowerOracle):
    def __init__(self, game: QuadraticGame, log_queries: bool = False):
        super().__init__(log_queries)
        self._response_mat = np.linalg.solve(game.s2, -game.q2.T)

    def _answer(self, x):
        return self._response_mat @ x, 0.0, 0


class _PerturbedOracle(FollowerOracle):
    """Common machinery of the ball/sphere oracles: r(x) plus a seeded deviation."""

    def __init__(self, game: QuadraticGame, epsilon: float, seed: int, log_queries: bool = False):
        super().__init__(log_queries)
        if epsilon < 0.0:
            raise ConfigError(f"epsilon must be >= 0, got {epsilon}")
        self._response_mat = np.linalg.solve(game.s2, -game.q2.T)
        self._m = game.m
        self.epsilon = epsilon
        self._rng = np.random.default_rng(seed)

    def _direction(self) -> np.ndarray:
        u = self._rng.standard_normal(self._m)
        norm = np.linalg.norm(u)
        while norm == 0.0:  # measure-zero guard
            u = self._rng.standard_normal(self._m)
            norm = np.linalg.norm(u)
        return u / norm

    def _answer(self, x):
        return self._response_mat @ x + self._deviation(), self.epsilon, 0

    def _deviation(self) -> np.ndarray:
        raise NotImplementedError


class PerturbedBallOracle(_PerturbedOracle):
    def _deviation(self):
        radius = self.epsilon * self._rng.random() ** (1.0 / self._m)
        return radius * self._direction()


class PerturbedSphereOracle(_PerturbedOracle):
    def _deviation(self):
        return self.epsilon * self._direction()


class GradientDescentOracle(FollowerOracle):
    """Follower iterates y_{t+1} = y_t - beta * D_2 f_2(x, y_t) from y_0 = 0.

    With q = max|1 - beta*lambda(S_2)| < 1 the iteration is a q-contraction in
    ||y - r(x)||, so ||y_t - r(x)|| <= q/(1-q) * ||y_t - y_{t-1}||; the loop
    stops as soon as that certificate reaches eps_target. Warm starting from
    the previous answer is opt-in.
    """

    def __init__(
        self,
        game: QuadraticGame,
        eps_target: float,
        beta: float | None = None,
        max_iters: int = 100_000,
        warm_start: bool = False,
        log_queries: bool = False,
    ):
        super().__init__(log_queries)
        if eps_target < 0.0:
            raise ConfigError(f"eps_target must be >= 0, got {eps_target}")
        eigs = np.linalg.eigvalsh(game.s2)
        lam_min, lam_max = float(eigs[0]), float(eigs[-1])
        if beta is None:
            beta = 1.0 / lam_max
        if not 0.0 < beta < 2.0 / lam_max:
            raise ConfigError(f"gd stepsize beta={beta} outside (0, {2.0 / lam_max:.6g})")
        self._s2 = game.s2
        self._q2t = np.array(game.q2.T)
        self.beta = beta
        self.contraction = max(abs(1.0 - beta * lam_min), abs(1.0 - beta * lam_max))
        self.eps_target = eps_target
        self.max_iters = max_iters
        self.warm_start = warm_start
        self._last_y: np.ndarray | None = None
        self._m = game.m

    def _answer(self, x):
        q = self.contraction
        # q/(1-q) * ||step|| <= eps_target  <=>  ||step|| <= eps_target*(1-q)/q
        step_tol = np.inf if q == 0.0 else self.eps_target * (1.0 - q) / q
        y = self._last_y if (self.warm_start and self._last_y is not None) else np.zeros(self._m)
        rhs = self._q2t @ x
        for t in range(1, self.max_iters + 1):
            y_next = y - self.beta * (rhs + self._s2 @ y)
            step = float(np.linalg.norm(y_next - y))
            y = y_next
            if step <= step_tol:
                certified = 0.0 if q == 0.0 else q / (1.0 - q) * step
                if self.warm_start:
                    self._last_y = y
                return y, certified, t
        certified = q / (1.0 - q) * step if q > 0.0 else 0.0
        raise OracleFailure(
            f"gradient-descent oracle exhausted {self.max_iters} iterations "
            f"(certified {certified:.3e} > target {self.eps_target:.3e})",
            best_y=y,
            eps_certified=certified,
            iterations=self.max_iters,
        )


def make_oracle(config: OracleConfig, game: QuadraticGame, log_queries: bool = False) -> FollowerOracle:
    """Instantiate the oracle a config describes, bound to one game."""
    if config.kind == "exact":
        return ExactOracle(game, log_queries)
    if config.kind == "ball":
        return PerturbedBallOracle(game, config.epsilon, config.seed, log_queries)
    if config.kind == "sphere":
        return PerturbedSphereOracle(game, config.epsilon, config.seed, log_queries)
    if config.kind == "gd":
        return GradientDescentOracle(
            game,
            eps_target=config.epsilon,
            beta=config.beta,
            max_iters=config.max_iters,
            warm_start=config.warm_start,
            log_queries=log_queries,
        )
    raise ConfigError(f"unknown oracle kind {config.kind!r}")
