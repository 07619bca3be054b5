"""Quadratic two-player Stackelberg game instances and their closed forms.

Both players carry a block-quadratic cost

    f_i(x, y) = 1/2 [x; y]^T [[P_i, Q_i], [Q_i^T, S_i]] [x; y],

with the leader playing x in R^n and the follower y in R^m. The follower's
diagonal blocks are named S_i (not R_i) to keep them apart from the Lipschitz
constants rho1/rho2 of the response map. Everything the rest of the package
treats as ground truth lives here: the closed-form best response, the leader's
reduced cost f(x) = f_1(x, r(x)) and its exact gradient, the effective
matrices behind them, and the smoothness/convexity constants of f.

All operations are pure functions of immutable instances and are safe to call
concurrently.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import GenerationError, InstanceError

# Instances whose S_2 block is worse conditioned than this are rejected:
# the closed-form best response could not be trusted as ground truth.
MAX_S2_CONDITION = 1e8

_SYM_TOL = 1e-9


def _as_matrix(a, rows: int, cols: int, name: str) -> np.ndarray:
    arr = np.array(a, dtype=float)
    if arr.shape != (rows, cols):
        raise InstanceError(f"{name} must have shape ({rows}, {cols}), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InstanceError(f"{name} contains non-finite entries")
    return arr


def _symmetrize_checked(a: np.ndarray, name: str) -> np.ndarray:
    skew = np.max(np.abs(a - a.T)) if a.size else 0.0
    if skew > _SYM_TOL * (1.0 + np.max(np.abs(a))):
        raise InstanceError(f"{name} is not symmetric (max asymmetry {skew:.3e})")
    return (a + a.T) / 2.0


def _lock(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class QuadraticGame:
    """One quadratic Stackelberg instance.

    Blocks are validated and symmetrized on construction; the stacked cost
    matrices [[P_i, Q_i], [Q_i^T, S_i]] must both be positive definite and
    S_2 must be well conditioned. Arrays are stored read-only.
    """

    n: int
    m: int
    p1: np.ndarray
    q1: np.ndarray
    s1: np.ndarray
    p2: np.ndarray
    q2: np.ndarray
    s2: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise InstanceError(f"dimensions must be positive, got n={self.n}, m={self.m}")
        n, m = self.n, self.m
        object.__setattr__(self, "p1", _lock(_symmetrize_checked(_as_matrix(self.p1, n, n, "p1"), "p1")))
        object.__setattr__(self, "q1", _lock(_as_matrix(self.q1, n, m, "q1")))
        object.__setattr__(self, "s1", _lock(_symmetrize_checked(_as_matrix(self.s1, m, m, "s1"), "s1")))
        object.__setattr__(self, "p2", _lock(_symmetrize_checked(_as_matrix(self.p2, n, n, "p2"), "p2")))
        object.__setattr__(self, "q2", _lock(_as_matrix(self.q2, n, m, "q2")))
        object.__setattr__(self, "s2", _lock(_symmetrize_checked(_as_matrix(self.s2, m, m, "s2"), "s2")))
        for i, (p, q, s) in enumerate(((self.p1, self.q1, self.s1), (self.p2, self.q2, self.s2)), start=1):
            stacked = np.block([[p, q], [q.T, s]])
            lam_min = float(np.linalg.eigvalsh(stacked)[0])
            if lam_min <= 0.0:
                raise InstanceError(
                    f"stacked cost matrix of player {i} is not positive definite (lambda_min={lam_min:.3e})"
                )
        cond = float(np.linalg.cond(self.s2, 2))
        if cond > MAX_S2_CONDITION:
            raise InstanceError(
                f"s2 condition number {cond:.3e} exceeds {MAX_S2_CONDITION:.0e}; best response unreliable"
            )

    def stacked(self, player: int) -> np.ndarray:
        """Stacked (n+m) x (n+m) cost matrix of the given player (1 or 2)."""
        p, q, s = (self.p1, self.q1, self.s1) if player == 1 else (self.p2, self.q2, self.s2)
        return np.block([[p, q], [q.T, s]])

    def f1(self, x: np.ndarray, y: np.ndarray) -> float:
        return 0.5 * float(x @ self.p1 @ x) + float(x @ self.q1 @ y) + 0.5 * float(y @ self.s1 @ y)

    def f2(self, x: np.ndarray, y: np.ndarray) -> float:
        return 0.5 * float(x @ self.p2 @ x) + float(x @ self.q2 @ y) + 0.5 * float(y @ self.s2 @ y)

    def d1_f1(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Gradient of f_1 in the leader's argument."""
        return self.p1 @ x + self.q1 @ y

    def d2_f1(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Gradient of f_1 in the follower's argument."""
        return self.q1.T @ x + self.s1 @ y

    def d2_f2(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Gradient of f_2 in the follower's argument."""
        return self.q2.T @ x + self.s2 @ y

    def leader_view(self) -> "LeaderView":
        """First-order access to f_1 only; what the gradient estimator is allowed to see."""
        return LeaderView(p1=self.p1, q1=self.q1, s1=self.s1)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "p1": self.p1.tolist(),
            "q1": self.q1.tolist(),
            "s1": self.s1.tolist(),
            "p2": self.p2.tolist(),
            "q2": self.q2.tolist(),
            "s2": self.s2.tolist(),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "QuadraticGame":
        try:
            return cls(
                n=int(doc["n"]),
                m=int(doc["m"]),
                p1=doc["p1"],
                q1=doc["q1"],
                s1=doc["s1"],
                p2=doc["p2"],
                q2=doc["q2"],
                s2=doc["s2"],
                seed=None if doc.get("seed") is None else int(doc["seed"]),
            )
        except KeyError as exc:
            raise InstanceError(f"instance document missing field {exc}") from exc


@dataclass(frozen=True, eq=False)
class LeaderView:
    """The leader's own cost, exposed as zeroth/first-order maps.

    This is the only game information handed to the gradient estimator;
    follower blocks are deliberately absent.
    """

    p1: np.ndarray
    q1: np.ndarray
    s1: np.ndarray

    def value(self, x: np.ndarray, y: np.ndarray) -> float:
        return 0.5 * float(x @ self.p1 @ x) + float(x @ self.q1 @ y) + 0.5 * float(y @ self.s1 @ y)

    def d1(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return self.p1 @ x + self.q1 @ y

    def d2(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return self.q1.T @ x + self.s1 @ y


@dataclass(frozen=True, eq=False)
class EffectiveMatrices:
    """Constant matrices behind the leader's reduced problem.

    hessian:     H with grad f(x) = H x (symmetric positive definite).
    sensitivity: B with D_2 f_1(x, r(x)) = B x.
    response_jac: Jacobian of the (linear) best response, r(x) = response_jac x.
    """

    hessian: np.ndarray
    sensitivity: np.ndarray
    response_jac: np.ndarray


@dataclass(frozen=True)
class SmoothnessConstants:
    """Operator-norm constants of one instance.

    lx, ly: Lipschitz constants of D_1 f_1(x, .) and D_2 f_1(x, .) in y.
    rho1:   bound on the response Jacobian norm.
    rho2:   smoothness of the response map (0: r is linear).
    mu_f, l_f: extreme eigenvalues of the reduced Hessian.
    """

    lx: float
    ly: float
    rho1: float
    rho2: float
    mu_f: float
    l_f: float


def best_response(game: QuadraticGame, x: np.ndarray) -> np.ndarray:
    """Exact minimizer of f_2(x, .): y = -S_2^{-1} Q_2^T x."""
    return np.linalg.solve(game.s2, -(game.q2.T @ x))


def effective_matrices(game: QuadraticGame) -> EffectiveMatrices:
    """Derive H, B and Dr by direct differentiation of x -> f_1(x, r(x)).

    Raises InstanceError when the reduced Hessian is not positive definite.
    """
    s2_inv_q2t = np.linalg.solve(game.s2, game.q2.T)  # S_2^{-1} Q_2^T, shape (m, n)
    response_jac = -s2_inv_q2t
    cross = game.q1 @ s2_inv_q2t  # Q_1 S_2^{-1} Q_2^T, shape (n, n)
    hessian = game.p1 - cross - cross.T + s2_inv_q2t.T @ game.s1 @ s2_inv_q2t
    hessian = (hessian + hessian.T) / 2.0
    sensitivity = game.q1.T - game.s1 @ s2_inv_q2t
    lam_min = float(np.linalg.eigvalsh(hessian)[0])
    if lam_min <= 0.0:
        raise InstanceError(
            f"reduced Hessian of the leader's problem is not positive definite (lambda_min={lam_min:.6e})"
        )
    return EffectiveMatrices(
        hessian=_lock(hessian),
        sensitivity=_lock(sensitivity),
        response_jac=_lock(np.array(response_jac)),
    )


def leader_value_and_grad(game: QuadraticGame, x: np.ndarray) -> tuple[float, np.ndarray]:
    """Reduced cost f(x) = f_1(x, r(x)) and its exact gradient H x."""
    x = np.asarray(x, dtype=float)
    y = best_response(game, x)
    value = game.f1(x, y)
    grad = effective_matrices(game).hessian @ x
    return value, grad


def smoothness_constants(game: QuadraticGame) -> SmoothnessConstants:
    """Spectral-norm constants; exact for quadratics (rho2 = 0, r linear)."""
    em = effective_matrices(game)
    eigs = np.linalg.eigvalsh(em.hessian)
    spec = lambda a: float(np.linalg.norm(a, 2))
    return SmoothnessConstants(
        lx=spec(game.q1),
        ly=spec(game.s1),
        rho1=spec(em.response_jac),
        rho2=0.0,
        mu_f=float(eigs[0]),
        l_f=float(eigs[-1]),
    )


@dataclass(frozen=True)
class InstanceOptions:
    """Conditioning knobs for random instance generation.

    shift: the c in G^T G + c I; floors the stacked-block spectra (and so mu_f).
    scale: entry scale of G; None picks 1/sqrt(n+m) so block spectra are O(1).
    max_condition: S_2 conditioning threshold used for rejection.
    max_attempts: rejection budget before generation fails.
    """

    shift: float = 0.1
    scale: float | None = None
    max_condition: float = MAX_S2_CONDITION
    max_attempts: int = 100


def generate_instance(
    n: int, m: int, seed: int, options: InstanceOptions = InstanceOptions()
) -> tuple[QuadraticGame, int]:
    """Draw a valid instance deterministically from the seed.

    Each stacked block matrix is G^T G + shift*I with Gaussian G, which is
    positive definite by construction; candidates are still rejected (and
    resampled) if S_2 is worse conditioned than max_condition or the reduced
    Hessian fails its definiteness check. Returns the instance and the number
    of rejected candidates.
    """
    if n < 1 or m < 1:
        raise InstanceError(f"dimensions must be positive, got n={n}, m={m}")
    if options.shift <= 0.0:
        raise InstanceError("shift must be > 0 to guarantee positive definite blocks")
    scale = options.scale if options.scale is not None else 1.0 / np.sqrt(n + m)
    rng = np.random.default_rng(seed)
    rejections = 0
    for _ in range(options.max_attempts):
        blocks = []
        for _player in range(2):
            g = scale * rng.standard_normal((n + m, n + m))
            a = g.T @ g + options.shift * np.eye(n + m)
            blocks.append((a[:n, :n], a[:n, n:], a[n:, n:]))
        (p1, q1, s1), (p2, q2, s2) = blocks
        try:
            if float(np.linalg.cond(s2, 2)) > options.max_condition:
                raise InstanceError("s2 conditioning above generation threshold")
            game = QuadraticGame(n=n, m=m, p1=p1, q1=q1, s1=s1, p2=p2, q2=q2, s2=s2, seed=seed)
            effective_matrices(game)  # rejects if the reduced Hessian is not PD
        except InstanceError:
            rejections += 1
            continue
        return game, rejections
    raise GenerationError(
        f"no valid instance within {options.max_attempts} attempts (n={n}, m={m}, seed={seed}, "
        f"{rejections} rejections)"
    )


def save_instance(game: QuadraticGame, path: str | Path) -> None:
    """Write the instance document (fields n, m, p1, q1, s1, p2, q2, s2, seed) as canonical JSON."""
    Path(path).write_text(json.dumps(game.to_dict(), indent=2, sort_keys=True) + "\n")


def load_instance(path: str | Path) -> QuadraticGame:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InstanceError(f"cannot read instance file {path}: {exc}") from exc
    return QuadraticGame.from_dict(doc)
