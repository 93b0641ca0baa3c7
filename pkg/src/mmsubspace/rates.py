"""Per-iteration contraction certificates and batch worst-case rates.

Certifies, for each recorded iteration, the contraction factor
``theta = 1 - theta_tilde / (1 + eps)`` of the optimality gap together with
its eigenvalue-based lower/upper bounds, and aggregates a whole-run
worst-case geometric rate with its multiplicative constant.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InputError, NumericError
from .linalg import PINV_RCOND, as_vector, check_symmetric, extreme_eigs, min_eig, pd_solve, psd_pinv, sym_sqrt
from .majorant import build_majorant
from .model import ProblemInstance, curvature_bound, eval_gradient, eval_hessian
from .subspace import DirectionMatrix, SubspaceStrategy, build_subspace, column_scaled, FULL


@dataclass(frozen=True)
class RateCertificate:
    n: int
    epsilon: float
    theta_tilde: Optional[float]
    theta: Optional[float]
    theta_lo: Optional[float]
    theta_hi: Optional[float]
    kappa_lo: Optional[float]
    kappa_hi: Optional[float]
    sigma_lo: Optional[float]
    sigma_hi: Optional[float]
    hessian_floor_ok: bool
    lemma_bound: Optional[float] = None  # 0.5*(1+eps)*g' H^{-1} g
    converged: bool = False              # zero gradient at this iterate


@dataclass(frozen=True)
class BatchRateSummary:
    vartheta: float
    mu: float
    eta_lo: float
    eta_hi: float
    kappa_max: float
    n_eps: int
    spread_bound_ok: bool
    certified: bool
    message: str = ""


def gradient_reference(grad) -> DirectionMatrix:
    """One-column direction [-grad]: the analytic worst case, not a runnable strategy."""
    grad = as_vector(grad)
    return DirectionMatrix(np.reshape(-grad, (-1, 1)))


def compute_theta_tilde(grad, A, hess, D: DirectionMatrix) -> float:
    grad = as_vector(grad)
    if not np.any(grad):
        raise InputError("theta_tilde undefined at a zero gradient")
    cols, _ = column_scaled(D.cols)
    M = cols.T @ A @ cols
    Dg = cols.T @ grad
    num = float(Dg @ (psd_pinv(M, PINV_RCOND) @ Dg))
    den = float(grad @ pd_solve(hess, grad))
    if den <= 0:
        raise NumericError("Hessian quadratic form not positive")
    return num / den


def compute_kappa_bounds(A, hess) -> tuple[float, float]:
    """Extreme eigenvalues of A^{1/2} hess^{-1} A^{1/2} (both inputs PD)."""
    if min_eig(A) <= 0 or min_eig(hess) <= 0:
        raise NumericError("kappa bounds need positive definite matrices")
    S = sym_sqrt(A)
    return extreme_eigs(S @ pd_solve(hess, S))


def compute_sigma_bounds(hess) -> tuple[float, float]:
    hess = check_symmetric(hess, rtol=1e-10, name="hessian")
    return extreme_eigs(hess)


def certify_iteration(
    p_n: ProblemInstance,
    state,
    h_next,
    D: DirectionMatrix,
    A: np.ndarray,
    epsilon: float,
    inf_Fn: float,
    R_limit: np.ndarray | None = None,
) -> RateCertificate:
    """Assemble the full rate certificate for one iteration.

    ``R_limit`` is the data matrix of the limiting instance (equal to
    ``p_n.quad.R`` in the batch case); the Hessian floor is measured
    against it.
    """
    if R_limit is None:
        R_limit = p_n.quad.R
    hess = eval_hessian(p_n, state.h)
    floor_ok = min_eig(hess - R_limit + epsilon * np.eye(p_n.dim)) >= -1e-10
    grad = state.grad
    if not np.any(grad):
        return RateCertificate(
            n=state.n, epsilon=epsilon, theta_tilde=None, theta=None,
            theta_lo=None, theta_hi=None, kappa_lo=None, kappa_hi=None,
            sigma_lo=None, sigma_hi=None, hessian_floor_ok=floor_ok,
            lemma_bound=None, converged=True,
        )
    theta_tilde = compute_theta_tilde(grad, A, hess, D)
    theta = 1.0 - theta_tilde / (1.0 + epsilon)
    kappa_lo, kappa_hi = compute_kappa_bounds(A, hess)
    sigma_lo, sigma_hi = compute_sigma_bounds(hess)
    theta_lo = 1.0 - 1.0 / ((1.0 + epsilon) * kappa_lo)
    spread = (sigma_hi - sigma_lo) / (sigma_hi + sigma_lo)
    theta_hi = 1.0 - (1.0 - spread**2) / ((1.0 + epsilon) * kappa_hi)
    lemma_bound = 0.5 * (1.0 + epsilon) * float(grad @ pd_solve(hess, grad))
    return RateCertificate(
        n=state.n, epsilon=epsilon, theta_tilde=theta_tilde, theta=theta,
        theta_lo=theta_lo, theta_hi=theta_hi, kappa_lo=kappa_lo, kappa_hi=kappa_hi,
        sigma_lo=sigma_lo, sigma_hi=sigma_hi, hessian_floor_ok=floor_ok,
        lemma_bound=lemma_bound,
    )


@dataclass(frozen=True)
class DecayReport:
    decay_ok: bool
    gap_bound_ok: bool
    gap_now: float
    gap_next: float
    decay_rhs: float
    gap_bound_rhs: Optional[float]

    @property
    def passed(self) -> bool:
        return self.decay_ok and self.gap_bound_ok


def check_decay_inequality(cert: RateCertificate, F_now: float, F_next: float, inf_Fn: float) -> DecayReport:
    """Check the certified gap contraction and the gradient gap bound.

    The gap bound (optimality gap at most
    ``0.5*(1+eps) * g' hess^{-1} g``) is the condition whose first holding
    index defines the start of the certified regime.
    """
    tol = 1e-10 * (1.0 + abs(inf_Fn))
    gap_now = F_now - inf_Fn
    gap_next = F_next - inf_Fn
    if cert.converged or cert.theta is None:
        return DecayReport(True, True, gap_now, gap_next, gap_now, None)
    rhs = cert.theta * gap_now
    decay_ok = gap_next <= rhs + tol
    gap_bound_ok = gap_now <= cert.lemma_bound + tol
    return DecayReport(decay_ok, gap_bound_ok, gap_now, gap_next, rhs, cert.lemma_bound)


@dataclass(frozen=True)
class OrderingReport:
    theta_gradient_ref: float
    theta_full: float
    theta_by_strategy: dict
    passed: bool


def check_subspace_ordering(
    p_n: ProblemInstance,
    state,
    A: np.ndarray,
    strategies: Sequence[SubspaceStrategy],
    history: Sequence[np.ndarray] = (),
) -> OrderingReport:
    """Gradient-only direction is slowest, the full space is fastest.

    Computes theta_tilde for the one-column gradient reference, for each
    listed strategy, and for the full space, and checks the ordering.
    """
    grad = state.grad
    if not np.any(grad):
        raise InputError("ordering check undefined at a zero gradient")
    hess = eval_hessian(p_n, state.h)
    t_ref = compute_theta_tilde(grad, A, hess, gradient_reference(grad))
    t_full = compute_theta_tilde(grad, A, hess, DirectionMatrix(np.eye(p_n.dim)))
    by_strategy = {}
    ok = True
    for s in strategies:
        D = build_subspace(s, grad, state.h, history)
        t = compute_theta_tilde(grad, A, hess, D)
        by_strategy[s.label()] = t
        tol = 1e-10 * max(1.0, abs(t))
        ok = ok and (t_ref <= t + tol) and (t <= t_full + tol)
    return OrderingReport(t_ref, t_full, by_strategy, ok)


def detect_n_eps(trace, inf_F: float) -> int | None:
    """First iteration from which the floor and gap bound hold to the end."""
    recs = [rec for rec in trace.records if rec.cert is not None and not rec.cert.converged]
    tol_scale = 1e-10 * (1.0 + abs(inf_F))
    start = None
    for rec in recs:
        ok = rec.cert.hessian_floor_ok and (rec.obj - inf_F <= rec.cert.lemma_bound + tol_scale)
        if ok and start is None:
            start = rec.n
        elif not ok:
            start = None
    return start


def batch_rate_summary(p: ProblemInstance, trace, epsilon: float) -> BatchRateSummary:
    """Worst-case geometric rate and constant for a certified batch run."""
    from .solver import reference_minimizer  # local import avoids a cycle

    certs = [rec.cert for rec in trace.records if rec.cert is not None and not rec.cert.converged]
    if not certs:
        raise InputError("trace carries no certified iterations")
    ref = reference_minimizer(p, tol=1e-12)
    inf_F = ref.value
    n_eps = detect_n_eps(trace, inf_F)

    eta_lo = min_eig(p.quad.R)
    eta_hi = extreme_eigs(p.quad.R + curvature_bound(p))[1]
    kappa_max = max(c.kappa_hi for c in certs)
    spread_cap = (eta_hi - eta_lo + 2.0 * epsilon) / (eta_hi + eta_lo)
    vartheta = 1.0 - (1.0 - spread_cap**2) / ((1.0 + epsilon) * kappa_max)

    spread_ok = all(
        (c.sigma_hi - c.sigma_lo) / (c.sigma_hi + c.sigma_lo) <= spread_cap + 1e-10
        for c in certs
    )

    if n_eps is None:
        return BatchRateSummary(
            vartheta=vartheta, mu=float("nan"), eta_lo=eta_lo, eta_hi=eta_hi,
            kappa_max=kappa_max, n_eps=-1, spread_bound_ok=spread_ok,
            certified=False, message="not certified within horizon",
        )
    F_at = {rec.n: rec.obj for rec in trace.records}
    mu = (F_at[n_eps] - inf_F) / vartheta**n_eps
    return BatchRateSummary(
        vartheta=vartheta, mu=mu, eta_lo=eta_lo, eta_hi=eta_hi,
        kappa_max=kappa_max, n_eps=n_eps, spread_bound_ok=spread_ok, certified=True,
    )


@dataclass(frozen=True)
class LinearConvergenceReport:
    passed: bool
    strong_convexity_ok: bool
    geometric_ok: bool
    iterate_bound_constant: float  # sqrt(2 mu / eta_lo); rate is sqrt(vartheta)
    worst_margin: float


def check_linear_iterate_convergence(p: ProblemInstance, trace, summary: BatchRateSummary) -> LinearConvergenceReport:
    """Strong-convexity lower bound and geometric upper bound on the gap."""
    from .solver import reference_minimizer

    if not summary.certified:
        return LinearConvergenceReport(False, False, False, float("nan"), float("nan"))
    ref = reference_minimizer(p, tol=1e-12)
    h_hat, inf_F = ref.h, ref.value
    sc_ok = True
    geo_ok = True
    worst = np.inf
    for rec in trace.records:
        if rec.n < summary.n_eps:
            continue
        gap = rec.obj - inf_F
        scale = 1.0 + abs(inf_F)
        lower = 0.5 * summary.eta_lo * float(np.sum((rec.h - h_hat) ** 2))
        upper = summary.mu * summary.vartheta**rec.n
        sc_ok = sc_ok and (lower <= gap + 1e-10 * scale)
        geo_ok = geo_ok and (gap <= upper + 1e-9 * scale)
        worst = min(worst, upper - gap)
    const = float(np.sqrt(2.0 * summary.mu / summary.eta_lo))
    return LinearConvergenceReport(sc_ok and geo_ok, sc_ok, geo_ok, const, float(worst))
