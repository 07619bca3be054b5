"""Theory constants, the gradient-error bound, and the convergence certificate.

For a plan with p+1 samples and an oracle accuracy eps, the gradient estimate
satisfies the proved bound

    ||grad f(x) - g_x|| <= phi(x) = a*eps + b*||B x||,

with b = sqrt(p+1) * (delta^2*rho2 + 2*eps) * ||M^+|| / 2 for centrally
symmetric bases (each of the p+1 surrogate values carries a deviation of up
to ||d2||*eps, so the stacked residual norm is sqrt(p+1)*||d2||*eps with no
extra 1/2; some write-ups halve this term, which a one-dimensional
counterexample with opposite-sign probe deviations refutes) and
a = ly*rho1 + lx + b*ly. Bases whose directions do not sum to zero lose the
intercept cancellation and get the conservative coefficient 4*eps instead.
For the standard double basis, b collapses to the closed form
sqrt(4n+2) * (2*eps/delta + delta*rho2) / 4, and the two are cross-checked
to 1e-12 on every report.

Descent with stepsize alpha < 1/L_f converges linearly to a neighborhood
whenever the condition value b^2 k^2 + 2 a b k eps - 1 is negative, in which
case the steady-state cost gap is bounded by

    (2 a b k eps + a^2 eps^2) / (2 mu_f (1 - b^2 k^2 - 2 a b k eps)).

The sensitivity ratio k is taken as the least constant valid for the
instance, kappa_tight = sigma_max(B H^{-1}); the looser certified ratio
sigma_max(B)/sigma_min(H) and the ratio printed in some write-ups
(sigma_max(H)/sigma_min(B), diagnostic only) are reported alongside.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AnalysisError, StackgradError
from .estimator import SamplingPlan
from .games import QuadraticGame, effective_matrices, smoothness_constants

_COROLLARY_CHECK_TOL = 1e-12


@dataclass(frozen=True)
class AnalysisReport:
    """All theory constants for one (instance, plan, eps) triple."""

    a: float
    b: float
    kappa: float  # the value used in bounds (= kappa_tight)
    kappa_certified: float
    kappa_printed: float
    mu_f: float
    l_f: float
    pinv_norm: float
    epsilon: float
    delta: float
    p: int
    condition_value: float
    theorem_bound: float | None  # None when the condition fails
    provenance: tuple[str, ...]

    def phi(self, sensitivity_norm: float) -> float:
        """Gradient-error bound a*eps + b*||B x|| given ||B x||."""
        return float(self.a * self.epsilon + self.b * sensitivity_norm)


def kappa(game: QuadraticGame) -> tuple[float, float]:
    """Sensitivity constants (kappa_certified, kappa_tight).

    kappa_certified = sigma_max(B)/sigma_min(H) is valid by submultiplicativity;
    kappa_tight = sigma_max(B H^{-1}) is the least constant with
    ||B x|| <= kappa * ||H x|| for all x. Always kappa_tight <= kappa_certified.
    """
    em = effective_matrices(game)
    sigma_h = np.linalg.svd(em.hessian, compute_uv=False)
    sigma_b_max = float(np.linalg.norm(em.sensitivity, 2))
    certified = sigma_b_max / float(sigma_h[-1])
    tight = float(np.linalg.norm(em.sensitivity @ np.linalg.inv(em.hessian), 2))
    return certified, tight


def _kappa_printed(game: QuadraticGame) -> float:
    """sigma_max(H)/sigma_min(B): reported for reference, never used in bounds."""
    em = effective_matrices(game)
    sigma_b = np.linalg.svd(em.sensitivity, compute_uv=False)
    sigma_b_min = float(sigma_b[-1])
    if sigma_b_min <= 0.0:
        return float("inf")
    return float(np.linalg.norm(em.hessian, 2)) / sigma_b_min


def general_b(
    p: int, delta: float, rho2: float, eps: float, pinv_norm: float, balanced: bool = True
) -> float:
    """b = sqrt(p+1) * (delta^2*rho2 + c*eps) * ||M^+|| / 2, c = 2 (balanced) or 4."""
    eps_coeff = 2.0 if balanced else 4.0
    return float(np.sqrt(p + 1.0) * (delta**2 * rho2 + eps_coeff * eps) * pinv_norm / 2.0)


def standard_double_b(n: int, delta: float, rho2: float, eps: float) -> float:
    """Closed form for the [I; -I] basis: sqrt(4n+2) * (2*eps/delta + delta*rho2) / 4."""
    return float(np.sqrt(4.0 * n + 2.0) * (2.0 * eps / delta + delta * rho2) / 4.0)


def condition_and_bound(
    a: float, b: float, kappa_value: float, mu_f: float, eps: float
) -> tuple[float, float | None]:
    """Condition value b^2 k^2 + 2 a b k eps - 1 and, when negative, the steady-state bound."""
    condition_value = float(b**2 * kappa_value**2 + 2.0 * a * b * kappa_value * eps - 1.0)
    if condition_value >= 0.0:
        return condition_value, None
    bound = (2.0 * a * b * kappa_value * eps + a**2 * eps**2) / (2.0 * mu_f * (-condition_value))
    return condition_value, float(bound)


def constants(game: QuadraticGame, plan: SamplingPlan, eps: float) -> AnalysisReport:
    """Full report for (game, plan, eps); cross-checks b against the closed form."""
    if eps < 0.0:
        raise AnalysisError(f"eps must be >= 0, got {eps}")
    sc = smoothness_constants(game)
    _, pinv_norm = plan.sampling
    p = plan.basis.p
    balanced = plan.basis.is_balanced
    b = general_b(p, plan.delta, sc.rho2, eps, pinv_norm, balanced=balanced)
    coeff = "2eps" if balanced else "4eps"
    provenance = [f"b=general:sqrt(p+1)*(delta^2*rho2+{coeff})*pinv/2"]
    if plan.basis.kind == "standard_double":
        b_closed = standard_double_b(plan.basis.n, plan.delta, sc.rho2, eps)
        if abs(b - b_closed) > _COROLLARY_CHECK_TOL * max(1.0, abs(b)):
            raise StackgradError(
                f"general b ({b!r}) disagrees with the standard-double closed form ({b_closed!r})"
            )
        provenance.append("b=cross-checked:sqrt(4n+2)*(2*eps/delta+delta*rho2)/4")
    a = float(sc.ly * sc.rho1 + sc.lx + b * sc.ly)
    kappa_certified, kappa_tight = kappa(game)
    condition_value, theorem_bound = condition_and_bound(a, b, kappa_tight, sc.mu_f, eps)
    provenance.append("kappa=tight:sigma_max(B@inv(H))")
    return AnalysisReport(
        a=a,
        b=b,
        kappa=kappa_tight,
        kappa_certified=kappa_certified,
        kappa_printed=_kappa_printed(game),
        mu_f=sc.mu_f,
        l_f=sc.l_f,
        pinv_norm=pinv_norm,
        epsilon=eps,
        delta=plan.delta,
        p=p,
        condition_value=condition_value,
        theorem_bound=theorem_bound,
        provenance=tuple(provenance),
    )


def phi(report: AnalysisReport, game: QuadraticGame, x: np.ndarray) -> float:
    """Pointwise gradient-error bound a*eps + b*||B x||."""
    em = effective_matrices(game)
    return report.phi(float(np.linalg.norm(em.sensitivity @ np.asarray(x, dtype=float))))


def tightness_gap(report: AnalysisReport, steady_state_error: float) -> float:
    """Theorem bound minus the observed final cost gap; requires a conforming report."""
    if report.theorem_bound is None:
        raise AnalysisError(
            f"tightness gap undefined: condition value {report.condition_value:.6g} >= 0 "
            f"at eps={report.epsilon}"
        )
    return float(report.theorem_bound - steady_state_error)
