"""Inexact leader gradient from positive-basis sampling of oracle responses.

The estimate at a point x0 is g = D_1 f_1(x0, y0) + Dpsi, where y0 is the
oracle's answer at x0 and Dpsi is a simplex gradient of the scalar surrogate

    psi_hat(x) = D_2 f_1(x0, y0) . y(x)

evaluated from p probe points x_i = x0 + delta * v_i over a positive basis
{v_i}. Dpsi solves the offset-subtracted least-squares system
delta*V Dpsi ~ (psi_hat(x_i) - psi_hat(x0))_i, which for the standard double
basis [I; -I] reduces to componentwise central differences.

Only first-order information of the leader's own cost and zeroth-order oracle
access to the follower are used.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .games import LeaderView
from .oracles import FollowerOracle, IbrQuery, IbrResponse

# Relative singular-value cutoff for the least-squares solve.
LS_RCOND = 1e-12

_SPAN_CHECK_DIRECTIONS = 1000
_SPAN_CHECK_SEED = 20240


@dataclass(frozen=True, eq=False)
class PositiveBasis:
    """Direction set whose nonnegative combinations span R^n.

    rows of v are the directions. Validation is an exact rank check plus a
    probabilistic spanning check (a fixed set of seeded random unit vectors u
    must each have some direction with <v_i, u> > 0); the latter can miss
    degenerate custom bases only with probability ~2^-n per direction.
    """

    v: np.ndarray
    kind: str = "custom"

    def __post_init__(self):
        v = np.array(self.v, dtype=float)
        if v.ndim != 2 or v.shape[0] < 1:
            raise ValueError(f"direction matrix must be 2-D with at least one row, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("direction matrix contains non-finite entries")
        v.setflags(write=False)
        object.__setattr__(self, "v", v)
        if np.linalg.matrix_rank(v) < self.n:
            raise ValueError(f"directions do not span R^{self.n} (rank deficient)")
        rng = np.random.default_rng(_SPAN_CHECK_SEED)
        for _ in range(_SPAN_CHECK_DIRECTIONS):
            u = rng.standard_normal(self.n)
            u /= np.linalg.norm(u)
            if np.max(v @ u) <= 0.0:
                raise ValueError(
                    "directions fail the positive-spanning check: no positive inner product "
                    f"with unit vector {u}"
                )

    @property
    def n(self) -> int:
        return self.v.shape[1]

    @property
    def p(self) -> int:
        """Number of probe directions."""
        return self.v.shape[0]

    @property
    def is_balanced(self) -> bool:
        """True when the directions sum to zero (the intercept drops out of the estimate)."""
        scale = float(np.max(np.abs(self.v)))
        return bool(np.max(np.abs(self.v.sum(axis=0))) <= 1e-12 * max(1.0, scale))

    @classmethod
    def standard_double(cls, n: int) -> "PositiveBasis":
        """The 2n directions [I; -I]; the default basis throughout."""
        eye = np.eye(n)
        return cls(v=np.vstack([eye, -eye]), kind="standard_double")


@dataclass(eq=False)
class SamplingPlan:
    """Probe geometry for one estimate: radius delta over a positive basis.

    Treat as immutable; the sampling matrix is computed once and cached.
    """

    delta: float
    basis: PositiveBasis

    def __post_init__(self):
        if self.delta <= 0.0:
            raise ValueError(f"delta must be > 0, got {self.delta}")

    def centers(self, x0: np.ndarray) -> np.ndarray:
        """The p probe points x0 + delta * v_i, one per row."""
        return x0[None, :] + self.delta * self.basis.v

    @cached_property
    def sampling(self) -> tuple[np.ndarray, float]:
        """(M, ||M^+||) for this plan; M stacks a zero row above delta*V."""
        return build_sampling_matrix(self.basis, self.delta)


def build_sampling_matrix(basis: PositiveBasis, delta: float) -> tuple[np.ndarray, float]:
    """Sampling matrix M = [0; delta*V] and its pseudoinverse norm.

    ||M^+|| is 1 over the smallest nonzero singular value of M; for the
    standard double basis it equals sqrt(2)/(2*delta).
    """
    if delta <= 0.0:
        raise ValueError(f"delta must be > 0, got {delta}")
    m = np.vstack([np.zeros((1, basis.n)), delta * basis.v])
    sigma = np.linalg.svd(m, compute_uv=False)
    smallest = float(sigma[sigma > LS_RCOND * sigma[0]][-1])
    return m, 1.0 / smallest


def ls_solve(psi_center: float, psi_values: np.ndarray, m: np.ndarray) -> np.ndarray:
    """Minimum-norm solution of delta*V dpsi ~ (psi_values - psi_center).

    m is the full sampling matrix from build_sampling_matrix (zero row
    included); its remaining rows are delta*V. Rank deficiency falls back to
    the minimum-norm solution and emits a RuntimeWarning.
    """
    a = m[1:]
    rhs = np.asarray(psi_values, dtype=float) - psi_center
    if not np.all(np.isfinite(rhs)) or not np.all(np.isfinite(a)):
        raise ValueError("non-finite inputs to the least-squares solve")
    dpsi, _, rank, _ = np.linalg.lstsq(a, rhs, rcond=LS_RCOND)
    if rank < a.shape[1]:
        warnings.warn(
            f"sampling system is rank deficient (rank {rank} < {a.shape[1]}); "
            "returning the minimum-norm solution",
            RuntimeWarning,
            stacklevel=2,
        )
    return dpsi


@dataclass(frozen=True, eq=False)
class ProbeSample:
    """One oracle query record inside an estimate."""

    purpose: str
    x: np.ndarray
    y: np.ndarray
    psi: float
    eps_certified: float
    query_cost: int

    def csv_row(self) -> list:
        return [self.purpose, *self.x.tolist(), self.psi, self.eps_certified, self.query_cost]


@dataclass(frozen=True, eq=False)
class GradientEstimate:
    """The estimate g = d1_part + dpsi_part plus everything that produced it."""

    g: np.ndarray
    d1_part: np.ndarray
    dpsi_part: np.ndarray
    samples: tuple[ProbeSample, ...]
    eps_used: float

    @property
    def query_count(self) -> int:
        return len(self.samples)


def estimate_gradient(
    leader: LeaderView,
    oracle: FollowerOracle,
    x0: np.ndarray,
    plan: SamplingPlan,
    center_response: IbrResponse | None = None,
) -> GradientEstimate:
    """Assemble the inexact gradient at x0 from p+1 oracle queries.

    The center is queried fresh unless center_response is supplied (a caller
    that already holds an answer at x0 may pass it to save one query). The
    center answer y0 feeds both the D_1 f_1 term and the surrogate scale
    D_2 f_1(x0, y0); probe answers are fresh draws in deterministic order.
    """
    x0 = np.asarray(x0, dtype=float)
    if center_response is None:
        center_response = oracle.respond(IbrQuery.center(x0))
    y0 = center_response.y
    d1_part = leader.d1(x0, y0)
    d2_scale = leader.d2(x0, y0)
    psi_center = float(d2_scale @ y0)

    samples = [
        ProbeSample(
            purpose="center",
            x=x0,
            y=y0,
            psi=psi_center,
            eps_certified=center_response.eps_certified,
            query_cost=center_response.query_cost,
        )
    ]
    probes = plan.centers(x0)
    psi_values = np.empty(plan.basis.p)
    for i in range(plan.basis.p):
        resp = oracle.respond(IbrQuery.probe(probes[i], i + 1))
        psi_values[i] = float(d2_scale @ resp.y)
        samples.append(
            ProbeSample(
                purpose=f"probe:{i + 1}",
                x=probes[i],
                y=resp.y,
                psi=psi_values[i],
                eps_certified=resp.eps_certified,
                query_cost=resp.query_cost,
            )
        )

    m, _ = plan.sampling
    dpsi_part = ls_solve(psi_center, psi_values, m)
    return GradientEstimate(
        g=d1_part + dpsi_part,
        d1_part=d1_part,
        dpsi_part=dpsi_part,
        samples=tuple(samples),
        eps_used=max(s.eps_certified for s in samples),
    )
