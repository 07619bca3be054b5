"""Leader's inexact-gradient descent with a full per-iteration trace.

The update is x_{k+1} = x_k - alpha * g_k with g_k from the estimator. For
homogeneous quadratic instances the optimum is known exactly (x* = 0, f* = 0),
so every record carries ground-truth diagnostics alongside the observable
quantities: the cost gap, distance to the optimum, true and estimated gradient
norms, the realized estimation error, and its proved bound phi(x_k).

A run is sequential; independent runs are safe to execute concurrently.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analysis
from .errors import OracleFailure
from .estimator import SamplingPlan, estimate_gradient
from .games import QuadraticGame, effective_matrices, smoothness_constants
from .oracles import OracleConfig, make_oracle

TRACE_CSV_HEADER = ["k", "err_x", "gap_f", "grad_norm", "g_norm", "grad_err", "phi", "queries"]

DIVERGENCE_LIMIT = 1e12


@dataclass(frozen=True)
class SolverConfig:
    """One run: stepsize, horizon, start point, sampling plan, oracle."""

    alpha: float
    max_iters: int
    x_init: np.ndarray
    plan: SamplingPlan
    oracle: OracleConfig
    stop_grad_norm: float | None = None  # stop on ||g_k||, the observable gradient

    def __post_init__(self):
        if self.alpha <= 0.0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        object.__setattr__(self, "x_init", np.array(self.x_init, dtype=float))


@dataclass
class SolverTrace:
    """Per-iteration records plus a terminal summary.

    records[k] = (k, err_x, gap_f, grad_norm, g_norm, grad_err, phi, queries)
    with queries cumulative; iterates[k] is x_k. status is one of
    "completed", "stopped", "oracle_failure", "diverged".
    """

    records: list[tuple] = field(default_factory=list)
    iterates: list[np.ndarray] = field(default_factory=list)
    status: str = "completed"
    failure: dict | None = None
    warnings: list[str] = field(default_factory=list)

    @property
    def iterations_run(self) -> int:
        return len(self.records) - 1

    def column(self, name: str) -> np.ndarray:
        return np.array([rec[TRACE_CSV_HEADER.index(name)] for rec in self.records])

    def summary(self) -> dict:
        if not self.records:
            return {
                "status": self.status,
                "iterations_run": 0,
                "steady_state_error": None,
                "final_err_x": None,
                "total_queries": 0,
                "warnings": list(self.warnings),
                "failure": self.failure,
            }
        last = self.records[-1]
        return {
            "status": self.status,
            "iterations_run": self.iterations_run,
            "steady_state_error": last[2],
            "final_err_x": last[1],
            "total_queries": last[7],
            "warnings": list(self.warnings),
            "failure": self.failure,
        }

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(TRACE_CSV_HEADER)
            for rec in self.records:
                writer.writerow([repr(float(v)) if isinstance(v, float) else v for v in rec])


def run(game: QuadraticGame, cfg: SolverConfig) -> SolverTrace:
    """Execute the descent; never raises for oracle failure or divergence.

    Those outcomes truncate the trace and set status/failure instead, so the
    caller always gets the records accumulated so far.
    """
    em = effective_matrices(game)
    sc = smoothness_constants(game)
    report = analysis.constants(game, cfg.plan, _nominal_eps(cfg.oracle))
    oracle = make_oracle(cfg.oracle, game)
    leader = game.leader_view()

    trace = SolverTrace()
    if cfg.alpha >= 1.0 / sc.l_f:
        trace.warnings.append(
            f"alpha={cfg.alpha} is not below 1/L_f={1.0 / sc.l_f:.6g}; "
            "the convergence certificate does not apply"
        )

    x = cfg.x_init.copy()
    queries = 0
    for k in range(cfg.max_iters + 1):
        norm_x = float(np.linalg.norm(x))
        if not np.isfinite(norm_x) or norm_x > DIVERGENCE_LIMIT:
            trace.status = "diverged"
            trace.failure = {"k": k, "reason": f"iterate norm {norm_x:.3e} exceeds {DIVERGENCE_LIMIT:.0e}"}
            break
        try:
            est = estimate_gradient(leader, oracle, x, cfg.plan)
        except OracleFailure as exc:
            trace.status = "oracle_failure"
            trace.failure = {"k": k, "reason": str(exc), "eps_certified": exc.eps_certified}
            break
        grad = em.hessian @ x
        gap_f = 0.5 * float(x @ grad)  # f(x) - f* for the homogeneous quadratic
        g_norm = float(np.linalg.norm(est.g))
        queries += est.query_count
        trace.records.append(
            (
                k,
                norm_x,
                gap_f,
                float(np.linalg.norm(grad)),
                g_norm,
                float(np.linalg.norm(grad - est.g)),
                report.phi(float(np.linalg.norm(em.sensitivity @ x))),
                queries,
            )
        )
        trace.iterates.append(x.copy())
        if k == cfg.max_iters:
            break
        if cfg.stop_grad_norm is not None and g_norm <= cfg.stop_grad_norm:
            trace.status = "stopped"
            break
        x = x - cfg.alpha * est.g
    return trace


def steady_state_error(trace: SolverTrace, window: int = 1) -> float:
    """Final cost gap f(x_T) - f*; window > 1 averages the last records instead."""
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    if window > len(trace.records):
        raise ValueError(f"window {window} exceeds trace length {len(trace.records)}")
    gaps = [rec[2] for rec in trace.records[-window:]]
    return float(np.mean(gaps))


def _nominal_eps(oracle_cfg: OracleConfig) -> float:
    """The accuracy the theory sees: 0 for the exact oracle, the configured target otherwise."""
    return 0.0 if oracle_cfg.kind == "exact" else oracle_cfg.epsilon
