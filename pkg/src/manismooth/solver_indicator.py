"""Quadratic-penalty smoothing solver with truncated recursive momentum.

Handles an indicator-of-convex-set nonsmooth term under an error bound
condition with exponent theta >= 1.  The smoothed term is the scaled
squared distance dist^2(c(x), C) / (2 mu_k), i.e. a quadratic penalty
with parameter 1/mu_k, and the momentum estimator is radially truncated
to a ball so it stays uniformly bounded:

    mu_k  = max(k, 1)^{-omega}          omega = min(theta/(theta+2), 1/2)
    tau_k = c_tau (k+1)^{-omega}
    a_k   = min(1, c_a k^{-2 omega})

Iterations count from k = 0; the k = 0 smoothing level is clamped to 1
so the penalty stays finite.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientDataError, NumericalFailureError, ParameterError, ProbeInconclusiveError
from .harness import Certificate, StepReport, TraceRecord
from .manifolds import (
    ManifoldPoint,
    TangentVector,
    estimate_retraction_constants,
    project_point,
    random_point,
    retract,
    tangent_project,
    vector_transport,
)
from .problems import StochasticProblem, estimate_constants, sample_riemannian_grad
from .smoothing import IndicatorTerm, smoothed_objective_grad

RENORM_EVERY = 1000
SNAPSHOT_TARGET = 2000
TRUNC_SLACK = 1e-12


@dataclass(frozen=True)
class IndicatorConfig:
    """Solver parameters under the error bound condition.

    theta/zeta are the error-bound exponent and modulus; c_tau and c_a
    scale the stepsize and momentum schedules; trunc_radius bounds the
    momentum estimator (any value above the true gradient-norm bound is
    admissible).
    """

    theta: float
    zeta: float
    c_tau: float
    c_a: float
    trunc_radius: float

    def __post_init__(self):
        if self.theta < 1:
            raise ParameterError("theta must be >= 1")
        for name in ("zeta", "c_tau", "c_a", "trunc_radius"):
            if getattr(self, name) <= 0:
                raise ParameterError(f"{name} must be positive")

    @property
    def omega(self) -> float:
        return min(self.theta / (self.theta + 2.0), 0.5)

    @property
    def k_tilde(self) -> int:
        """Burn-in index after which the feasibility decay bound applies."""
        return math.ceil(8.0 * self.omega / (self.c_tau * self.zeta**2))


@dataclass
class IndicatorState:
    """Mutable solver state; iteration counter starts at 0."""

    k: int
    x: ManifoldPoint
    delta: TangentVector
    rng: np.random.Generator
    snapshots: list[tuple[int, ManifoldPoint]] = field(default_factory=list)
    feas_history: list[float] = field(default_factory=list)


def _truncate(v: TangentVector, radius: float) -> TangentVector:
    nrm = v.norm()
    if nrm <= radius:
        return v
    return (radius / nrm) * v


def _penalty_residual(problem: StochasticProblem, xd: np.ndarray) -> tuple[np.ndarray, float]:
    """c(x) - P_C(c(x)) and its norm (the constraint violation)."""
    y = problem.c_eval(xd)
    resid = y - problem.h.project(y)
    return resid, float(np.linalg.norm(resid))


def distance_grad_norm(problem: StochasticProblem, x: ManifoldPoint) -> tuple[float, float]:
    """(dist(c(x), C), ||grad of dist^2(c(x), C)/2||) at a point."""
    resid, dist = _penalty_residual(problem, x.data)
    g = tangent_project(x, problem.c_jac_t(x.data, resid))
    return dist, g.norm()


def default_config(
    problem: StochasticProblem,
    theta: float,
    safety: float = 2.0,
    zeta: float | None = None,
    samples: int = 200,
    seed: int = 2024,
) -> IndicatorConfig:
    """Assemble solver parameters from empirically estimated constants.

    The stepsize constant obeys c_tau <= 1 / max(L_g, G) where L_g is the
    retraction-smoothness constant of the squared-distance penalty and G
    the one of the smoothed objective (indicator form); the momentum
    constant follows c_a = (3/4) c_tau^2 + 1/(32 Lt^2).  All estimated
    constants are inflated by ``safety``.  zeta comes from the error
    bound probe unless supplied.
    """
    if theta < 1:
        raise ParameterError("theta must be >= 1")
    if safety < 1:
        raise ParameterError("safety must be >= 1")
    if not isinstance(problem.h, IndicatorTerm):
        raise ParameterError("problem.h must be an indicator variant")
    consts = problem.constants or estimate_constants(problem, max(100, samples), seed)
    rc = estimate_retraction_constants(problem.manifold, max(100, samples), seed + 1)
    rng = np.random.default_rng(seed + 2)
    max_dist = 0.0
    for _ in range(max(100, samples)):
        x = random_point(problem.manifold, rng)
        max_dist = max(max_dist, problem.h.distance(problem.c_eval(x.data)))

    L = safety * consts.L_retr
    L_c = safety * consts.L_c
    L_gc = safety * consts.L_grad_c
    L_t = max(safety * consts.L_tilde, 1e-12)
    alpha = safety * rc.alpha
    beta = safety * rc.beta
    C_r = safety * max_dist  # bound on ||c(x) - P_C(c(x))|| over the manifold

    L_g = alpha**2 * (L_c + C_r * L_gc) + 2.0 * L_c * C_r * beta
    G_2 = L + alpha**2 * (L_c**2 + C_r * L_gc) + 2.0 * L_c * C_r * beta
    c_tau = 1.0 / (safety * max(L_g, G_2))
    c_a = 0.75 * c_tau**2 + 1.0 / (32.0 * L_t**2)
    if zeta is None:
        zeta, _ = error_bound_probe(problem, max(100, samples), seed + 3)
        if zeta <= 0:
            raise ParameterError("error bound probe returned zeta = 0; supply zeta explicitly")
    return IndicatorConfig(
        theta=theta,
        zeta=zeta,
        c_tau=c_tau,
        c_a=c_a,
        trunc_radius=safety * consts.L_f,
    )


def init(problem: StochasticProblem, x0: ManifoldPoint, config: IndicatorConfig, seed: int) -> IndicatorState:
    return _init(problem, x0, config, np.random.default_rng(seed))


def _init(problem, x0, config, rng) -> IndicatorState:
    if not isinstance(problem.h, IndicatorTerm):
        raise ParameterError("this solver requires an indicator nonsmooth term")
    if x0.descriptor != problem.manifold:
        raise ParameterError("x0 does not live on the problem manifold")
    xi = int(rng.integers(problem.num_samples))
    delta = _truncate(sample_riemannian_grad(problem, x0, xi), config.trunc_radius)
    return IndicatorState(k=0, x=x0, delta=delta, rng=rng)


def step(state: IndicatorState, problem: StochasticProblem, config: IndicatorConfig) -> StepReport:
    """Advance the state by exactly one iteration."""
    k = state.k
    x = state.x
    omega = config.omega
    mu = float(max(k, 1)) ** (-omega)
    resid, dist = _penalty_residual(problem, x.data)
    G = state.delta + tangent_project(x, problem.c_jac_t(x.data, resid / mu))
    norm_G = G.norm()
    if not math.isfinite(norm_G):
        raise NumericalFailureError("non-finite search direction", k)
    tau = config.c_tau * float(k + 1) ** (-omega)
    x_next = retract(x, (-tau) * G)

    xi = int(state.rng.integers(problem.num_samples))
    g_new = sample_riemannian_grad(problem, x_next, xi)
    g_old = sample_riemannian_grad(problem, x, xi)
    a_next = min(1.0, config.c_a * float(k + 1) ** (-2.0 * omega))
    delta_next = _truncate(
        g_new + (1.0 - a_next) * vector_transport(x, x_next, state.delta - g_old),
        config.trunc_radius,
    )
    if delta_next.norm() > config.trunc_radius + TRUNC_SLACK:
        raise NumericalFailureError("momentum estimator escaped the truncation ball", k)

    if k > 0 and k % RENORM_EVERY == 0:
        x_next = project_point(x_next.descriptor, x_next.data)
        delta_next = tangent_project(x_next, delta_next.data)

    state.k = k + 1
    state.x = x_next
    state.delta = delta_next
    state.feas_history.append(dist)
    return StepReport(
        k=k, mu=mu, tau=tau, a=a_next, norm_G=norm_G, env_value=dist * dist / (2.0 * mu), infeas=dist
    )


def run(
    problem: StochasticProblem,
    x0: ManifoldPoint | None,
    config: IndicatorConfig,
    seed: int,
    K: int,
    trace_every: int = 1,
    diagnostics: bool = False,
    measure_time: bool = True,
) -> tuple[IndicatorState, list[TraceRecord]]:
    """Execute K iterations (k = 0 .. K-1), tracing like the Lipschitz solver."""
    if K < 1:
        raise ParameterError("K must be >= 1")
    if trace_every < 1:
        raise ParameterError("trace_every must be >= 1")
    rng = np.random.default_rng(seed)
    if x0 is None:
        x0 = random_point(problem.manifold, rng)
    state = _init(problem, x0, config, rng)
    snap_lo = K // 2
    stride = max(1, K // SNAPSHOT_TARGET)
    trace: list[TraceRecord] = []
    t0 = time.monotonic_ns()
    for _ in range(K):
        k = state.k
        traced = k % trace_every == 0 or k == K - 1
        obj_smooth = norm_grad_Fmu = norm_eps = None
        if traced and diagnostics:
            mu = float(max(k, 1)) ** (-config.omega)
            obj_smooth, rgrad, _ = smoothed_objective_grad(problem, state.x, mu)
            norm_grad_Fmu = rgrad.norm()
            norm_eps = (state.delta - tangent_project(state.x, problem.full_egrad(state.x.data))).norm()
        if k >= snap_lo and (k - snap_lo) % stride == 0:
            state.snapshots.append((k, state.x))
        report = step(state, problem, config)
        if traced:
            trace.append(
                TraceRecord(
                    k=report.k,
                    mu=report.mu,
                    tau=report.tau,
                    a=report.a,
                    norm_G=report.norm_G,
                    obj_smooth=obj_smooth,
                    norm_grad_Fmu=norm_grad_Fmu,
                    infeas=report.infeas,
                    norm_eps=norm_eps,
                    wall_ns=time.monotonic_ns() - t0 if measure_time else 0,
                )
            )
    state.snapshots.append((state.k, state.x))
    return state, trace


def feasibility_decay_series(state: IndicatorState, config: IndicatorConfig) -> list[tuple[int, float]]:
    """dist^2(c(x_k), C) * k^{2 omega / theta} for every executed k >= 1."""
    expo = 2.0 * config.omega / config.theta
    return [(k, d * d * float(k) ** expo) for k, d in enumerate(state.feas_history) if k >= 1]


def certificate(state: IndicatorState, problem: StochasticProblem, config: IndicatorConfig) -> Certificate:
    """Witness at an index sampled with probability proportional to tau_k.

    The witness pair is y = P_C(c(x)), z = (c(x) - y) / mu_k at the
    selected snapshot, with a sampled normal-cone membership check.
    """
    if not state.snapshots:
        raise InsufficientDataError("no snapshots stored; call run() first")
    ks = np.array([k for k, _ in state.snapshots], dtype=float)
    weights = config.c_tau * (ks + 1.0) ** (-config.omega)
    weights /= weights.sum()
    j = int(state.rng.choice(len(state.snapshots), p=weights))
    i_K, x = state.snapshots[j]
    mu = float(max(i_K, 1)) ** (-config.omega)
    c = problem.c_eval(x.data)
    y = problem.h.project(c)
    z = (c - y) / mu
    resid = tangent_project(x, problem.full_egrad(x.data) + problem.c_jac_t(x.data, z))
    ok = problem.h.in_subdifferential(y, z, tol=1e-8, rng=state.rng)
    return Certificate(
        i_K=i_K,
        x=x,
        y=y,
        z=z,
        grad_residual=resid.norm(),
        feas_residual=float(np.linalg.norm(c - y)),
        membership_ok=ok,
    )


def error_bound_probe(problem: StochasticProblem, samples: int, seed: int) -> tuple[float, float]:
    """Estimate the error bound modulus and exponent by sampling.

    Samples manifold points, keeps the infeasible ones, and fits
    log ||grad g|| against log dist(c(x), C) for the exponent; the
    modulus is the worst-case ratio at the fitted exponent.  Diagnostic
    only; a vanishing penalty gradient at an infeasible point honestly
    yields a zero modulus.

    Raises:
        ProbeInconclusiveError: all sampled points are feasible, or too
            few have a nonvanishing penalty gradient to fit a line.
    """
    if not isinstance(problem.h, IndicatorTerm):
        raise ParameterError("error bound probe requires an indicator problem")
    rng = np.random.default_rng(seed)
    dists, gnorms = [], []
    for _ in range(samples):
        x = random_point(problem.manifold, rng)
        dist, gn = distance_grad_norm(problem, x)
        if dist > 1e-9:
            dists.append(dist)
            gnorms.append(gn)
    if not dists:
        raise ProbeInconclusiveError("all sampled points are feasible")
    dists = np.asarray(dists)
    gnorms = np.asarray(gnorms)
    mask = gnorms > 1e-15
    if mask.sum() < 2:
        raise ProbeInconclusiveError("penalty gradient vanishes at nearly all infeasible samples")
    theta_fit = float(np.polyfit(np.log(dists[mask]), np.log(gnorms[mask]), 1)[0])
    zeta_hat = float(np.min(gnorms / dists**theta_fit))
    return zeta_hat, theta_fit
