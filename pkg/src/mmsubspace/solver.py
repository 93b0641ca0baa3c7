"""Batch and online MM subspace iterations with trace recording.

Each step minimizes the quadratic tangent majorant over the span of the
direction matrix, in closed form via a pseudo-inverse, so the surrogate
value never increases.  An independent damped-Newton oracle provides the
reference minimizer used by the rate certificates.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InputError, NumericError, OracleError, StreamExhausted
from .linalg import as_vector, min_eig, pd_solve, psd_pinv
from .majorant import MajorantAtPoint, build_majorant
from .model import ProblemInstance, QuadraticData, eval_gradient, eval_hessian, eval_objective
from .rates import RateCertificate, certify_iteration
from .subspace import DirectionMatrix, SubspaceStrategy, build_subspace, column_scaled, parse_strategy


@dataclass(frozen=True)
class SolveOptions:
    max_iters: int = 500
    grad_tol: float = 1e-10
    record_trace: bool = True
    epsilon: Optional[float] = None  # None -> 0.1 * min-eig(R) of the limit instance
    certify: bool = False

    def __post_init__(self):
        if self.max_iters < 1:
            raise InputError("max_iters must be positive")
        if self.grad_tol <= 0:
            raise InputError("grad_tol must be positive")


@dataclass(frozen=True)
class IterateState:
    n: int
    h: np.ndarray
    h_prev: Optional[np.ndarray]
    grad: np.ndarray
    obj: float


@dataclass(frozen=True)
class TraceRecord:
    n: int
    h: np.ndarray
    obj: float
    grad_norm: float
    step_norm: Optional[float]
    chi: Optional[float]
    c_norm: Optional[float]
    cert: Optional[RateCertificate]


CSV_COLUMNS = [
    "n", "obj", "grad_norm", "step_norm", "theta_tilde", "theta",
    "theta_lo", "theta_hi", "kappa_lo", "kappa_hi", "sigma_lo", "sigma_hi", "chi_n",
]


@dataclass
class Trace:
    records: list = field(default_factory=list)
    converged: bool = False
    stream_exhausted: bool = False
    fallback_used: bool = False
    meta: dict = field(default_factory=dict)

    @property
    def n_steps(self) -> int:
        return max(len(self.records) - 1, 0)

    @property
    def final(self) -> TraceRecord:
        return self.records[-1]

    def _row(self, rec: TraceRecord) -> list:
        def fmt(x):
            return "" if x is None else f"{x:.17g}"

        c = rec.cert
        cert_vals = (
            [None] * 8
            if c is None or c.converged
            else [c.theta_tilde, c.theta, c.theta_lo, c.theta_hi,
                  c.kappa_lo, c.kappa_hi, c.sigma_lo, c.sigma_hi]
        )
        return [str(rec.n), f"{rec.obj:.17g}", f"{rec.grad_norm:.17g}", fmt(rec.step_norm)] + \
            [fmt(v) for v in cert_vals] + [fmt(rec.chi)]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(CSV_COLUMNS)
            for rec in self.records:
                w.writerow(self._row(rec))

    def to_json(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.as_dict(), f, indent=1)
            f.write("\n")

    def as_dict(self) -> dict:
        out = {
            "meta": self.meta,
            "converged": self.converged,
            "stream_exhausted": self.stream_exhausted,
            "records": [],
        }
        for rec in self.records:
            c = rec.cert
            d = {
                "n": rec.n,
                "h": rec.h.tolist(),
                "obj": rec.obj,
                "grad_norm": rec.grad_norm,
                "step_norm": rec.step_norm,
                "chi_n": rec.chi,
                "c_norm": rec.c_norm,
            }
            if c is not None and not c.converged:
                d.update(
                    theta_tilde=c.theta_tilde, theta=c.theta,
                    theta_lo=c.theta_lo, theta_hi=c.theta_hi,
                    kappa_lo=c.kappa_lo, kappa_hi=c.kappa_hi,
                    sigma_lo=c.sigma_lo, sigma_hi=c.sigma_hi,
                    hessian_floor_ok=c.hessian_floor_ok,
                    lemma_bound=c.lemma_bound, epsilon=c.epsilon,
                )
            out["records"].append(d)
        return out

    @classmethod
    def from_json(cls, path) -> "Trace":
        with open(path) as f:
            d = json.load(f)
        trace = cls(
            converged=d.get("converged", False),
            stream_exhausted=d.get("stream_exhausted", False),
            meta=d.get("meta", {}),
        )
        for rd in d["records"]:
            cert = None
            if "theta" in rd:
                cert = RateCertificate(
                    n=rd["n"], epsilon=rd["epsilon"],
                    theta_tilde=rd["theta_tilde"], theta=rd["theta"],
                    theta_lo=rd["theta_lo"], theta_hi=rd["theta_hi"],
                    kappa_lo=rd["kappa_lo"], kappa_hi=rd["kappa_hi"],
                    sigma_lo=rd["sigma_lo"], sigma_hi=rd["sigma_hi"],
                    hessian_floor_ok=rd["hessian_floor_ok"],
                    lemma_bound=rd["lemma_bound"],
                )
            trace.records.append(TraceRecord(
                n=rd["n"], h=np.asarray(rd["h"], dtype=float), obj=rd["obj"],
                grad_norm=rd["grad_norm"], step_norm=rd.get("step_norm"),
                chi=rd.get("chi_n"), c_norm=rd.get("c_norm"), cert=cert,
            ))
        return trace


def subspace_step(m: MajorantAtPoint, D: DirectionMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form surrogate minimization over the span of ``D``.

    Returns the minimum-norm coefficient vector and the next iterate.
    """
    if not (np.all(np.isfinite(m.gradient_at_anchor)) and np.all(np.isfinite(D.cols))):
        raise NumericError("non-finite inputs to subspace_step")
    cols, scales = column_scaled(D.cols)
    M = cols.T @ m.curvature @ cols
    u = -(psd_pinv(M) @ (cols.T @ m.gradient_at_anchor))
    h_next = m.anchor + cols @ u
    return u / scales, h_next


def optimal_gradient_step(m: MajorantAtPoint) -> float:
    """Exact minimizing stepsize along the negative gradient."""
    g = m.gradient_at_anchor
    gg = float(g @ g)
    if gg == 0.0:
        raise InputError("optimal gradient step undefined at a zero gradient")
    return gg / float(g @ (m.curvature @ g))


@dataclass(frozen=True)
class ReferenceSolution:
    h: np.ndarray
    value: float
    grad_norm: float
    iterations: int


def reference_minimizer(p: ProblemInstance, tol: float = 1e-12) -> ReferenceSolution:
    """High-precision minimizer via damped Newton, independent of the MM path."""
    if min_eig(p.quad.R) <= 0:
        raise OracleError("reference minimizer needs a positive definite R")
    h = np.zeros(p.dim)
    f = eval_objective(p, h)
    for k in range(500):
        g = eval_gradient(p, h)
        gn = float(np.linalg.norm(g))
        if gn <= tol:
            return ReferenceSolution(h, f, gn, k)
        d = pd_solve(eval_hessian(p, h), -g)
        slope = float(g @ d)
        # rounding allowance keeps the line search from stalling once the
        # true decrease drops below floating-point resolution of F
        f_noise = 1e-15 * (1.0 + abs(f))
        t = 1.0
        while t > 1e-14:
            h_try = h + t * d
            f_try = eval_objective(p, h_try)
            if f_try <= f + 1e-4 * t * slope + f_noise:
                break
            t *= 0.5
        h, f = h + t * d, eval_objective(p, h + t * d)
    raise OracleError("Newton oracle did not reach tolerance in 500 steps")


def _resolve_epsilon(opts: SolveOptions, R_limit: np.ndarray) -> float:
    lo = min_eig(R_limit)
    eps = 0.1 * lo if opts.epsilon is None else opts.epsilon
    if not (0.0 < eps < lo):
        raise InputError(f"epsilon must lie in (0, {lo:.6g}), got {eps}")
    return eps


def run_batch(
    p: ProblemInstance,
    h1=None,
    strategy: SubspaceStrategy | str = "3mg",
    opts: SolveOptions = SolveOptions(),
) -> Trace:
    """Iterate on a fixed instance until the gradient tolerance or max_iters."""
    return _run(_ConstantSource(p), p.quad, h1, strategy, opts, mode="batch")


def run_online(
    stream,
    h1=None,
    strategy: SubspaceStrategy | str = "3mg",
    opts: SolveOptions = SolveOptions(),
) -> Trace:
    """Iterate against drifting snapshots drawn from an estimate stream."""
    return _run(_StreamSource(stream), stream.limit, h1, strategy, opts, mode="online")


class _ConstantSource:
    """Snapshot source for the batch case: the same instance every iteration."""

    def __init__(self, p: ProblemInstance):
        self.p = p

    def instance(self, n: int) -> ProblemInstance:
        return self.p


class _StreamSource:
    def __init__(self, stream):
        self.stream = stream
        self.penalty = None

    def instance(self, n: int) -> ProblemInstance:
        R_n, r_n = self.stream.next_estimate(n)
        return ProblemInstance(QuadraticData(R_n, r_n), self.penalty)


def _run(source, limit_quad: QuadraticData, h1, strategy, opts: SolveOptions, mode: str) -> Trace:
    if isinstance(strategy, str):
        strategy = parse_strategy(strategy)
    limit_p = None
    if isinstance(source, _ConstantSource):
        limit_p = source.p
    else:
        source.penalty = source.stream.penalty
        limit_p = ProblemInstance(limit_quad, source.stream.penalty)

    epsilon = _resolve_epsilon(opts, limit_quad.R) if opts.certify else opts.epsilon
    inf_F_limit = None
    if opts.certify and mode == "batch":
        inf_F_limit = reference_minimizer(limit_p, tol=1e-12).value

    h = np.zeros(limit_quad.dim) if h1 is None else as_vector(h1, limit_quad.dim)
    trace = Trace(meta={
        "mode": mode,
        "strategy": strategy.label(),
        "dim": limit_quad.dim,
        "max_iters": opts.max_iters,
        "grad_tol": opts.grad_tol,
        "certify": opts.certify,
        "epsilon": epsilon,
    })

    history: list[np.ndarray] = []
    keep = max(8, strategy.memory)
    stream_exhausted = False
    p_n = source.instance(1)
    n = 1
    while True:
        g = eval_gradient(p_n, h)
        f = eval_objective(p_n, h)
        if not (np.isfinite(f) and np.all(np.isfinite(g))):
            raise NumericError(f"non-finite objective or gradient at iteration {n}")
        gn = float(np.linalg.norm(g))
        if gn <= opts.grad_tol or n > opts.max_iters:
            trace.records.append(TraceRecord(n, h.copy(), f, gn, None, None, None, None))
            trace.converged = gn <= opts.grad_tol
            break

        m = build_majorant(p_n, h)
        D = build_subspace(strategy, g, h, history)
        trace.fallback_used = trace.fallback_used or D.fallback
        u, h_next = subspace_step(m, D)

        cert = None
        if opts.certify:
            state = IterateState(n, h, history[0] if history else None, g, f)
            if mode == "batch":
                inf_Fn = inf_F_limit
            else:
                try:
                    inf_Fn = reference_minimizer(p_n, tol=1e-12).value
                except OracleError:
                    inf_Fn = None
            if inf_Fn is not None:
                try:
                    cert = certify_iteration(
                        p_n, state, h_next, D, m.curvature, epsilon, inf_Fn,
                        R_limit=limit_quad.R,
                    )
                except NumericError:
                    cert = None

        chi = None
        p_next = None
        if mode == "batch":
            chi = 0.0
            p_next = p_n
        else:
            try:
                p_next = source.instance(n + 1)
                dr = p_n.quad.r - p_next.quad.r
                dR = p_n.quad.R - p_next.quad.R
                chi = -float(dr @ h_next) + 0.5 * float(h_next @ (dR @ h_next))
            except StreamExhausted:
                stream_exhausted = True

        c_norm = float(np.linalg.norm(m.curvature @ h - g))
        trace.records.append(TraceRecord(
            n, h.copy(), f, gn, float(np.linalg.norm(h_next - h)), chi, c_norm, cert,
        ))

        if stream_exhausted:
            trace.stream_exhausted = True
            break
        history.insert(0, h.copy())
        del history[keep:]
        h = h_next
        p_n = p_next
        n += 1
    return trace
