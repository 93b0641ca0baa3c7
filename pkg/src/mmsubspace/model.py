"""Penalized quadratic objectives ``F(h) = 0.5 h'Rh - r'h + Psi(h)``.

The quadratic data ``(R, r)`` and a smooth convex penalty ``Psi`` together
define a strongly convex objective when ``R`` is positive definite.  Online
snapshots use the same type with ``R`` only required to be symmetric
nonnegative definite.

Each penalty exposes five evaluations: value, gradient, Hessian, the
half-quadratic curvature matrix ``B(h)`` (which satisfies
``hess Psi(h) <= B(h) <= V`` in the Loewner order and the exactness identity
``B(h) h = grad Psi(h)``), and the global curvature cap ``V``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .linalg import as_vector, check_symmetric, min_eig


class Penalty:
    """Interface for twice continuously differentiable convex penalties.

    Subclasses implement ``value``, ``gradient``, ``hessian``, ``curvature``
    (the matrix ``B(h)``), and ``curvature_bound`` (the matrix ``V``).
    """

    kind = "abstract"

    def value(self, h: np.ndarray) -> float:
        raise NotImplementedError

    def gradient(self, h: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def hessian(self, h: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def curvature(self, h: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def curvature_bound(self, dim: int) -> np.ndarray:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


class ZeroPenalty(Penalty):
    kind = "zero"

    def value(self, h):
        return 0.0

    def gradient(self, h):
        return np.zeros_like(np.asarray(h, dtype=float))

    def hessian(self, h):
        n = len(h)
        return np.zeros((n, n))

    def curvature(self, h):
        return self.hessian(h)

    def curvature_bound(self, dim):
        # Tiny pad keeps V strictly positive definite.
        return 1e-12 * np.eye(dim)

    def to_dict(self):
        return {"kind": "zero"}


class TikhonovPenalty(Penalty):
    """Quadratic ridge penalty ``0.5 * lam * ||h||^2``."""

    kind = "tikhonov"

    def __init__(self, lam: float):
        if lam < 0:
            raise InputError("tikhonov weight must be nonnegative")
        self.lam = float(lam)

    def value(self, h):
        h = np.asarray(h, dtype=float)
        return 0.5 * self.lam * float(h @ h)

    def gradient(self, h):
        return self.lam * np.asarray(h, dtype=float)

    def hessian(self, h):
        return self.lam * np.eye(len(h))

    def curvature(self, h):
        return self.hessian(h)

    def curvature_bound(self, dim):
        tau = max(1e-12, 1e-12 * self.lam)
        return (self.lam + tau) * np.eye(dim)

    def to_dict(self):
        return {"kind": "tikhonov", "lambda": self.lam}


class _SeparablePenalty(Penalty):
    """``Psi(h) = lam * sum_i phi((L h)_i)`` for an even scalar potential phi.

    The half-quadratic curvature is ``B(h) = lam * L' Diag(omega(Lh)) L`` with
    ``omega(t) = phi'(t)/t`` extended by continuity at zero, and
    ``V = lam * omega(0) * L'L + tau * I``.  For the shipped potentials
    omega is maximal at zero and ``phi'' <= omega`` pointwise, so the
    Loewner sandwich and the exactness identity both hold.
    """

    def __init__(self, lam: float, delta: float, L=None, dim: int | None = None):
        if lam < 0:
            raise InputError("penalty weight must be nonnegative")
        if delta <= 0:
            raise InputError("smoothing scale delta must be positive")
        self.lam = float(lam)
        self.delta = float(delta)
        if L is None:
            if dim is None:
                raise InputError("separable penalty needs L or an explicit dim")
            L = np.eye(dim)
        self.L = np.atleast_2d(np.asarray(L, dtype=float))
        self._identity_L = self.L.shape[0] == self.L.shape[1] and np.array_equal(
            self.L, np.eye(self.L.shape[0])
        )

    # scalar potential, defined by subclasses
    def _phi(self, t):
        raise NotImplementedError

    def _dphi(self, t):
        raise NotImplementedError

    def _ddphi(self, t):
        raise NotImplementedError

    def _omega(self, t):
        raise NotImplementedError

    def _omega_max(self) -> float:
        # omega peaks at zero where it equals phi''(0)
        return float(self._ddphi(np.array([0.0]))[0])

    def value(self, h):
        t = self.L @ np.asarray(h, dtype=float)
        return self.lam * float(np.sum(self._phi(t)))

    def gradient(self, h):
        t = self.L @ np.asarray(h, dtype=float)
        return self.lam * (self.L.T @ self._dphi(t))

    def hessian(self, h):
        t = self.L @ np.asarray(h, dtype=float)
        return self.lam * (self.L.T * self._ddphi(t)) @ self.L

    def curvature(self, h):
        t = self.L @ np.asarray(h, dtype=float)
        return self.lam * (self.L.T * self._omega(t)) @ self.L

    def curvature_bound(self, dim):
        wmax = self._omega_max()
        tau = max(1e-12, 1e-12 * self.lam * wmax)
        return self.lam * wmax * (self.L.T @ self.L) + tau * np.eye(dim)

    def to_dict(self):
        return {
            "kind": self.kind,
            "lambda": self.lam,
            "delta": self.delta,
            "L": "identity" if self._identity_L else self.L.tolist(),
        }


class HyperbolicPenalty(_SeparablePenalty):
    """Smooth-L1 potential ``phi(t) = sqrt(delta^2 + t^2) - delta``."""

    kind = "hyperbolic"

    def _phi(self, t):
        return np.sqrt(self.delta**2 + t**2) - self.delta

    def _dphi(self, t):
        return t / np.sqrt(self.delta**2 + t**2)

    def _ddphi(self, t):
        return self.delta**2 / (self.delta**2 + t**2) ** 1.5

    def _omega(self, t):
        return 1.0 / np.sqrt(self.delta**2 + t**2)


class FairPenalty(_SeparablePenalty):
    """Fair potential ``phi(t) = delta^2 (|t|/delta - log(1 + |t|/delta))``."""

    kind = "fair"

    def _phi(self, t):
        u = np.abs(t) / self.delta
        return self.delta**2 * (u - np.log1p(u))

    def _dphi(self, t):
        return t / (1.0 + np.abs(t) / self.delta)

    def _ddphi(self, t):
        return 1.0 / (1.0 + np.abs(t) / self.delta) ** 2

    def _omega(self, t):
        return 1.0 / (1.0 + np.abs(t) / self.delta)


@dataclass(frozen=True)
class QuadraticData:
    """The pair ``(R, r)`` of a (penalized) quadratic objective."""

    R: np.ndarray
    r: np.ndarray
    dim: int = field(init=False)

    def __post_init__(self):
        R = check_symmetric(np.asarray(self.R, dtype=float), rtol=1e-12, name="R")
        r = as_vector(self.r, R.shape[0])
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "dim", R.shape[0])

    def min_eig(self) -> float:
        return min_eig(self.R)


@dataclass(frozen=True)
class ProblemInstance:
    """A quadratic data term plus a penalty; immutable and thread-safe."""

    quad: QuadraticData
    penalty: Penalty

    @property
    def dim(self) -> int:
        return self.quad.dim


def eval_objective(p: ProblemInstance, h) -> float:
    h = as_vector(h, p.dim)
    q = p.quad
    return 0.5 * float(h @ (q.R @ h)) - float(q.r @ h) + p.penalty.value(h)


def eval_gradient(p: ProblemInstance, h) -> np.ndarray:
    h = as_vector(h, p.dim)
    q = p.quad
    return q.R @ h - q.r + p.penalty.gradient(h)


def eval_hessian(p: ProblemInstance, h) -> np.ndarray:
    h = as_vector(h, p.dim)
    return p.quad.R + p.penalty.hessian(h)


def majorant_curvature(p: ProblemInstance, h) -> np.ndarray:
    """The half-quadratic curvature matrix ``B(h)`` of the penalty alone."""
    h = as_vector(h, p.dim)
    return p.penalty.curvature(h)


def curvature_bound(p: ProblemInstance) -> np.ndarray:
    """Global cap ``V`` with ``B(h) <= V`` for all h, strictly PD."""
    return p.penalty.curvature_bound(p.dim)


def penalty_from_dict(spec: dict, dim: int) -> Penalty:
    kind = spec.get("kind", "zero").lower()
    if kind == "zero":
        return ZeroPenalty()
    lam = float(spec.get("lambda", 1.0))
    if kind == "tikhonov":
        return TikhonovPenalty(lam)
    delta = float(spec.get("delta", 1.0))
    L = spec.get("L", "identity")
    L = None if (isinstance(L, str) and L == "identity") else np.asarray(L, dtype=float)
    if kind == "hyperbolic":
        return HyperbolicPenalty(lam, delta, L=L, dim=dim)
    if kind == "fair":
        return FairPenalty(lam, delta, L=L, dim=dim)
    raise InputError(f"unknown penalty kind {kind!r}")


def problem_from_dict(d: dict) -> ProblemInstance:
    try:
        dim = int(d["dim"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError("problem file needs an integer 'dim'") from exc
    R = d.get("R")
    if isinstance(R, dict) and "diag" in R:
        diag = as_vector(R["diag"], dim)
        R = np.diag(diag)
    else:
        R = np.asarray(R, dtype=float)
        if R.shape != (dim, dim):
            raise InputError(f"R has shape {R.shape}, expected ({dim}, {dim})")
    r = as_vector(d.get("r", np.zeros(dim)), dim)
    penalty = penalty_from_dict(d.get("penalty", {"kind": "zero"}), dim)
    return ProblemInstance(QuadraticData(R, r), penalty)


def problem_to_dict(p: ProblemInstance) -> dict:
    return {
        "dim": p.dim,
        "R": p.quad.R.tolist(),
        "r": p.quad.r.tolist(),
        "penalty": p.penalty.to_dict(),
    }


def load_problem(path) -> ProblemInstance:
    with open(path) as f:
        return problem_from_dict(json.load(f))


def save_problem(p: ProblemInstance, path) -> None:
    with open(path, "w") as f:
        json.dump(problem_to_dict(p), f, indent=1)
        f.write("\n")
