"""Proximal operators, Moreau envelopes, and the smoothed objective.

The nonsmooth term h is either a Lipschitz regularizer with an exact
proximal map (scaled l1, scaled l2) or the indicator of a simple convex
set (ball, box, singleton), whose prox is the Euclidean projection.

For mu > 0 the Moreau envelope

    h_mu(y) = inf_z  h(z) + ||z - y||^2 / (2 mu)

is differentiable with gradient (y - prox_{mu h}(y)) / mu, and the
gradient is (1/mu)-Lipschitz.  For indicators the envelope equals the
scaled squared distance dist^2(y, C) / (2 mu); it is computed in that
form directly to avoid cancellation at small mu.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, ShapeMismatchError
from .manifolds import ManifoldPoint, tangent_project


class NonsmoothTerm:
    """Base class: a convex h with exact prox.

    Subclasses implement ``value`` and ``prox``; indicator subclasses
    also expose set projection/sampling used by certificate checks.
    """

    is_indicator = False

    @property
    def lipschitz_const(self) -> float:
        """l2 Lipschitz modulus of h (0 sentinel for indicators)."""
        return 0.0

    def value(self, y: np.ndarray) -> float:
        raise NotImplementedError

    def prox(self, mu: float, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def in_subdifferential(self, y, z, tol: float = 1e-8, rng=None, samples: int = 100) -> bool:
        """Numerical membership test z in dh(y)."""
        raise NotImplementedError


@dataclass(frozen=True)
class ScaledL1(NonsmoothTerm):
    """h(y) = lam * ||y||_1 on R^dim."""

    lam: float
    dim: int

    def __post_init__(self):
        if self.lam < 0:
            raise ParameterError("lam must be nonnegative")
        if self.dim < 1:
            raise ParameterError("dim must be >= 1")

    @property
    def lipschitz_const(self) -> float:
        # l2->l2 modulus of lam * ||.||_1 on R^dim.
        return self.lam * np.sqrt(self.dim)

    def value(self, y):
        return self.lam * float(np.sum(np.abs(y)))

    def prox(self, mu, y):
        t = mu * self.lam
        return np.sign(y) * np.maximum(np.abs(y) - t, 0.0)

    def in_subdifferential(self, y, z, tol=1e-8, rng=None, samples=100):
        y = np.asarray(y, dtype=float)
        z = np.asarray(z, dtype=float)
        if np.any(np.abs(z) > self.lam + tol):
            return False
        active = np.abs(y) > tol
        return bool(np.all(np.abs(z[active] - self.lam * np.sign(y[active])) <= tol))


@dataclass(frozen=True)
class ScaledL2(NonsmoothTerm):
    """h(y) = lam * ||y||_2."""

    lam: float

    def __post_init__(self):
        if self.lam < 0:
            raise ParameterError("lam must be nonnegative")

    @property
    def lipschitz_const(self) -> float:
        return self.lam

    def value(self, y):
        return self.lam * float(np.linalg.norm(y))

    def prox(self, mu, y):
        nrm = float(np.linalg.norm(y))
        t = mu * self.lam
        if nrm <= t:
            return np.zeros_like(np.asarray(y, dtype=float))
        return (1.0 - t / nrm) * np.asarray(y, dtype=float)

    def in_subdifferential(self, y, z, tol=1e-8, rng=None, samples=100):
        y = np.asarray(y, dtype=float)
        z = np.asarray(z, dtype=float)
        if np.linalg.norm(y) > tol:
            return bool(np.linalg.norm(z - self.lam * y / np.linalg.norm(y)) <= tol)
        return bool(np.linalg.norm(z) <= self.lam + tol)


class IndicatorTerm(NonsmoothTerm):
    """Indicator of a convex set C; prox is the projection onto C."""

    is_indicator = True

    def project(self, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def contains(self, y, tol: float = 1e-9) -> bool:
        y = np.asarray(y, dtype=float)
        return bool(np.linalg.norm(y - self.project(y)) <= tol * (1.0 + np.linalg.norm(y)))

    def sample_member(self, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def value(self, y):
        return 0.0 if self.contains(y) else np.inf

    def prox(self, mu, y):
        return self.project(np.asarray(y, dtype=float))

    def distance(self, y) -> float:
        y = np.asarray(y, dtype=float)
        return float(np.linalg.norm(y - self.project(y)))

    def in_subdifferential(self, y, z, tol=1e-8, rng=None, samples=100):
        # dh(y) is the normal cone N_C(y): require <z, w - y> <= tol for
        # sampled members w of C.
        y = np.asarray(y, dtype=float)
        z = np.asarray(z, dtype=float)
        if not self.contains(y, tol=tol):
            return False
        rng = np.random.default_rng(0) if rng is None else rng
        for _ in range(samples):
            w = self.sample_member(rng)
            if float(np.dot(z, w - y)) > tol:
                return False
        return True


@dataclass(frozen=True)
class IndicatorBall(IndicatorTerm):
    """Indicator of the closed Euclidean ball {y : ||y - center|| <= radius}."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float).ravel())
        if self.radius <= 0:
            raise ParameterError("radius must be positive")

    def project(self, y):
        d = np.asarray(y, dtype=float) - self.center
        nrm = float(np.linalg.norm(d))
        if nrm <= self.radius:
            return np.array(y, dtype=float)
        return self.center + (self.radius / nrm) * d

    def sample_member(self, rng):
        m = self.center.size
        direction = rng.standard_normal(m)
        direction /= np.linalg.norm(direction)
        r = self.radius * rng.uniform() ** (1.0 / m)
        return self.center + r * direction


@dataclass(frozen=True)
class IndicatorBox(IndicatorTerm):
    """Indicator of the box {y : lower <= y <= upper} (finite bounds)."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float).ravel()
        hi = np.asarray(self.upper, dtype=float).ravel()
        if lo.shape != hi.shape:
            raise ShapeMismatchError("box bounds have different shapes")
        if np.any(lo > hi):
            raise ParameterError("box requires lower <= upper componentwise")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    def project(self, y):
        return np.clip(np.asarray(y, dtype=float), self.lower, self.upper)

    def sample_member(self, rng):
        return rng.uniform(self.lower, self.upper)


@dataclass(frozen=True)
class IndicatorSingleton(IndicatorTerm):
    """Indicator of the single point {target}."""

    target: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "target", np.asarray(self.target, dtype=float).ravel())

    def project(self, y):
        return self.target.copy()

    def sample_member(self, rng):
        return self.target.copy()


@dataclass(frozen=True)
class MoreauEval:
    """Envelope value, gradient, and prox point at one input."""

    value: float
    grad: np.ndarray
    prox_point: np.ndarray
    mu: float


def prox(h: NonsmoothTerm, mu: float, y) -> np.ndarray:
    """Exact minimizer of h(z) + ||z - y||^2 / (2 mu)."""
    if mu <= 0:
        raise ParameterError("mu must be positive")
    y = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(y)):
        raise ParameterError("prox input must be finite")
    return h.prox(mu, y)


def moreau_eval(h: NonsmoothTerm, mu: float, y) -> MoreauEval:
    """Evaluate the Moreau envelope of h at y: value, gradient, prox point."""
    if mu <= 0:
        raise ParameterError("mu must be positive")
    y = np.asarray(y, dtype=float)
    p = h.prox(mu, y)
    diff = y - p
    if h.is_indicator:
        value = float(diff @ diff) / (2.0 * mu)
    else:
        value = h.value(p) + float(diff @ diff) / (2.0 * mu)
    return MoreauEval(value=value, grad=diff / mu, prox_point=p, mu=mu)


def moreau_envelope_inequality_check(h: NonsmoothTerm, mu1: float, mu2: float, y) -> bool:
    """Check the two-parameter envelope comparison inequality at y.

    For 0 < mu2 <= mu1 the envelope satisfies

        h_{mu2}(y) <= h_{mu1}(y) + (1/2) ((mu1 - mu2)/mu2) mu1 ||grad h_{mu1}(y)||^2

    with the right-hand side specialized to l_h^2 for Lipschitz h and to
    (1/2)(1/mu2 - 1/mu1) dist^2(y, C) for indicators.  Returns whether
    every applicable form holds with slack 1e-10.
    """
    if not 0 < mu2 <= mu1:
        raise ParameterError("need 0 < mu2 <= mu1")
    slack = 1e-10
    e1 = moreau_eval(h, mu1, y)
    e2 = moreau_eval(h, mu2, y)
    g1_sq = float(e1.grad @ e1.grad)
    rhs = e1.value + 0.5 * ((mu1 - mu2) / mu2) * mu1 * g1_sq
    ok = e2.value <= rhs + slack
    if h.is_indicator:
        dist_sq = float(np.sum((np.asarray(y, dtype=float) - e1.prox_point) ** 2))
        rhs_ind = e1.value + 0.5 * (1.0 / mu2 - 1.0 / mu1) * dist_sq
        ok = ok and e2.value <= rhs_ind + slack
    elif h.lipschitz_const > 0:
        rhs_lip = e1.value + 0.5 * ((mu1 - mu2) / mu2) * mu1 * h.lipschitz_const**2
        ok = ok and e2.value <= rhs_lip + slack
    return bool(ok)


def smoothed_objective_grad(problem, x: ManifoldPoint, mu: float):
    """Value, Riemannian gradient, and infeasibility of the smoothed objective.

    Uses the full (deterministic) gradient of the smooth part; intended
    for diagnostics, never for the solver hot path.

    Returns:
        (value, rgrad, infeas) where value = f(x) + h_mu(c(x)), rgrad is
        the tangent projection of grad f(x) + Dc(x)^T grad h_mu(c(x)),
        and infeas = ||c(x) - prox_{mu h}(c(x))||.
    """
    if mu <= 0:
        raise ParameterError("mu must be positive")
    y = problem.c_eval(x.data)
    e = moreau_eval(problem.h, mu, y)
    value = problem.full_value(x.data) + e.value
    egrad = problem.full_egrad(x.data) + problem.c_jac_t(x.data, e.grad)
    rgrad = tangent_project(x, egrad)
    infeas = float(np.linalg.norm(y - e.prox_point))
    return value, rgrad, infeas
