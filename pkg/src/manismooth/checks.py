"""Self-contained property suites behind the ``check`` CLI command.

Each suite runs a battery of invariant checks with fixed internal seeds
and reports one (name, passed, detail) triple per property.  The pytest
suite exercises the same invariants independently and at larger sample
counts; these batteries are sized to finish in seconds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import manifolds as mf
from . import solver_indicator, solver_lipschitz
from .harness import lemma_implicit_bound_check, lemma_seq_bound_check
from .problems import make_constrained_sphere, make_sparse_pca
from .smoothing import (
    IndicatorBall,
    IndicatorBox,
    IndicatorSingleton,
    ScaledL1,
    ScaledL2,
    moreau_envelope_inequality_check,
    moreau_eval,
    prox,
)

SUITES = ("all", "manifold", "smoothing", "lemmas", "solver")

_DESCRIPTORS = (mf.sphere(5), mf.stiefel(6, 2), mf.oblique(4, 3))


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


def _result(name, passed, detail=""):
    return CheckResult(name=name, passed=bool(passed), detail=detail)


# ---------------------------------------------------------------- manifold


def check_manifold() -> list[CheckResult]:
    rng = np.random.default_rng(12345)
    results = []

    worst = 0.0
    for desc in _DESCRIPTORS:
        for _ in range(300):
            x = mf.random_point(desc, rng)
            v = rng.standard_normal(desc.shape)
            p1 = mf.tangent_project(x, v)
            p2 = mf.tangent_project(x, p1.data)
            worst = max(worst, float(np.linalg.norm(p1.data - p2.data)))
    results.append(_result("projection idempotence", worst <= 1e-12, f"max drift {worst:.2e}"))

    worst = 0.0
    for desc in _DESCRIPTORS:
        for _ in range(200):
            x = mf.random_point(desc, rng)
            v = rng.standard_normal(desc.shape)
            p = mf.tangent_project(x, v)
            eta = mf.random_tangent(x, rng)
            worst = max(worst, abs(float(np.sum((v - p.data) * eta.data))) / max(1.0, eta.norm()))
    results.append(_result("projection orthogonality", worst <= 1e-10, f"max inner {worst:.2e}"))

    worst = 0.0
    for desc in _DESCRIPTORS:
        for _ in range(100):
            x = mf.random_point(desc, rng)
            u = mf.random_tangent(x, rng, norm=1.0)
            t = 1e-4
            y = mf.retract(x, t * u)
            worst = max(worst, float(np.linalg.norm(y.data - x.data - t * u.data)) / t)
    results.append(_result("retraction first-order", worst <= 1e-3, f"max ratio {worst:.2e}"))

    ok = True
    detail = ""
    for desc in _DESCRIPTORS:
        rc = mf.estimate_retraction_constants(desc, 500, 99)
        if rc.alpha > 2.0 or rc.beta > 2.0:
            ok = False
            detail = f"{desc.kind}: alpha={rc.alpha:.3f}, beta={rc.beta:.3f}"
    results.append(_result("retraction constant caps", ok, detail))

    worst = 0.0
    lin_err = 0.0
    for desc in _DESCRIPTORS:
        for _ in range(200):
            x = mf.random_point(desc, rng)
            y = mf.random_point(desc, rng)
            xi = mf.random_tangent(x, rng)
            tau = mf.random_tangent(x, rng)
            moved = mf.vector_transport(x, y, xi)
            worst = max(worst, moved.norm() - xi.norm())
            a, b = rng.standard_normal(2)
            combo = mf.vector_transport(x, y, a * xi + b * tau)
            split = a * mf.vector_transport(x, y, xi) + b * mf.vector_transport(x, y, tau)
            lin_err = max(lin_err, float(np.linalg.norm(combo.data - split.data)))
    results.append(_result("transport nonexpansive", worst <= 1e-12, f"max excess {worst:.2e}"))
    results.append(_result("transport linear", lin_err <= 1e-12, f"max gap {lin_err:.2e}"))

    ok = True
    for desc in _DESCRIPTORS:
        x = mf.random_point(desc, rng)
        if not np.array_equal(mf.retract(x, mf.zero_tangent(x)).data, x.data):
            ok = False
    results.append(_result("retract at zero is identity", ok))
    return results


# ---------------------------------------------------------------- smoothing


def _grid_prox_1d(h, mu, y, lo, hi, res=1e-4):
    zs = np.arange(lo, hi + res, res)
    vals = np.array([h.value(np.array([z])) for z in zs]) + (zs - y) ** 2 / (2 * mu)
    return zs[int(np.argmin(vals))]


def _random_terms(rng, dim):
    return [
        ScaledL1(float(rng.uniform(0.1, 2.0)), dim),
        ScaledL2(float(rng.uniform(0.1, 2.0))),
        IndicatorBall(rng.standard_normal(dim), float(rng.uniform(0.5, 2.0))),
        IndicatorBox(-rng.uniform(0.5, 2.0, dim), rng.uniform(0.5, 2.0, dim)),
        IndicatorSingleton(rng.standard_normal(dim)),
    ]


def check_smoothing() -> list[CheckResult]:
    rng = np.random.default_rng(54321)
    results = []

    worst = 0.0
    for _ in range(100):
        lam = float(rng.uniform(0.1, 2.0))
        mu = float(rng.uniform(0.1, 2.0))
        y = float(rng.uniform(-3, 3))
        h = ScaledL1(lam, 1)
        span = 3 * mu * h.lipschitz_const + 1
        zstar = _grid_prox_1d(h, mu, np.array([y]), y - span, y + span)
        worst = max(worst, abs(float(prox(h, mu, np.array([y]))[0]) - zstar))
    results.append(_result("prox vs 1-D grid oracle", worst <= 1e-3, f"max gap {worst:.2e}"))

    ok = True
    for _ in range(200):
        dim = int(rng.integers(1, 6))
        for h in _random_terms(rng, dim):
            mu = float(rng.uniform(0.05, 2.0))
            y = 3 * rng.standard_normal(dim)
            z = prox(h, mu, y)
            base = h.value(z) + float(np.sum((z - y) ** 2)) / (2 * mu)
            for _ in range(20):
                cand = z + 0.3 * rng.standard_normal(dim)
                if h.value(cand) + float(np.sum((cand - y) ** 2)) / (2 * mu) < base - 1e-12:
                    ok = False
    results.append(_result("prox optimality", ok))

    ok = True
    for _ in range(300):
        dim = int(rng.integers(1, 6))
        lam = float(rng.uniform(0.1, 2.0))
        h = ScaledL1(lam, dim) if rng.uniform() < 0.5 else ScaledL2(lam)
        mu = float(rng.uniform(0.05, 2.0))
        y = 3 * rng.standard_normal(dim)
        e = moreau_eval(h, mu, y)
        if np.linalg.norm(e.grad) > h.lipschitz_const + 1e-10:
            ok = False
        if np.linalg.norm(y - e.prox_point) > mu * h.lipschitz_const + 1e-10:
            ok = False
    results.append(_result("envelope gradient bound", ok))

    ok = True
    for _ in range(300):
        dim = int(rng.integers(1, 6))
        for h in _random_terms(rng, dim):
            mu1 = float(rng.uniform(0.1, 2.0))
            mu2 = float(rng.uniform(0.01, 1.0)) * mu1
            y = 3 * rng.standard_normal(dim)
            if moreau_eval(h, mu2, y).value < moreau_eval(h, mu1, y).value - 1e-10:
                ok = False
    results.append(_result("envelope monotone in mu", ok))

    worst = 0.0
    for _ in range(300):
        dim = int(rng.integers(1, 6))
        for h in _random_terms(rng, dim):
            mu = float(rng.uniform(0.05, 2.0))
            y1 = 3 * rng.standard_normal(dim)
            y2 = 3 * rng.standard_normal(dim)
            g1 = moreau_eval(h, mu, y1).grad
            g2 = moreau_eval(h, mu, y2).grad
            lip = float(np.linalg.norm(g1 - g2)) / max(1e-300, float(np.linalg.norm(y1 - y2)))
            worst = max(worst, lip * mu)
    results.append(_result("envelope gradient 1/mu-Lipschitz", worst <= 1.0 + 1e-10, f"max mu*lip {worst:.6f}"))

    ok = True
    for _ in range(400):
        dim = int(rng.integers(1, 6))
        for h in _random_terms(rng, dim):
            mu1 = float(rng.uniform(0.05, 2.0))
            mu2 = float(rng.uniform(0.01, 1.0)) * mu1
            y = 3 * rng.standard_normal(dim)
            if not moreau_envelope_inequality_check(h, mu1, mu2, y):
                ok = False
    results.append(_result("two-parameter envelope inequality", ok))
    return results


# ------------------------------------------------------------------ lemmas


def check_lemmas() -> list[CheckResult]:
    rng = np.random.default_rng(7)
    bad = 0
    for _ in range(10_000):
        n = int(rng.integers(1, 40))
        b = rng.uniform(0.0, 5.0, n)
        b[0] = rng.uniform(0.01, 5.0)
        p = float(rng.uniform(0.02, 0.98))
        if not lemma_seq_bound_check(b, p):
            bad += 1
    results = [_result("sequence partial-sum bound", bad == 0, f"{bad} failures")]

    bad = 0
    for _ in range(10_000):
        c = float(rng.uniform(0.05, 5.0))
        d = float(rng.uniform(0.05, 5.0))
        e = float(rng.uniform(0.0, 5.0))
        al = float(rng.uniform(0.05, 0.95))
        be = float(rng.uniform(0.05, 0.95))
        lo, hi = 0.0, 1.0
        while c * hi**al + d * hi**be + e >= hi:
            hi *= 2.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if c * mid**al + d * mid**be + e >= mid:
                lo = mid
            else:
                hi = mid
        if not lemma_implicit_bound_check(c, d, e, al, be, lo):
            bad += 1
    results.append(_result("implicit power bound", bad == 0, f"{bad} failures"))
    return results


# ------------------------------------------------------------------ solver


def check_solver() -> list[CheckResult]:
    results = []
    problem = make_sparse_pca(n=10, p=2, N=5, lam=0.05, seed=11)
    state, trace = solver_lipschitz.run(problem, None, seed=3, K=400, trace_every=20, diagnostics=True)

    taus = [r.tau for r in trace]
    results.append(_result("adaptive stepsize positive nonincreasing",
                           all(t > 0 for t in taus) and all(a >= b for a, b in zip(taus, taus[1:]))))

    x, d = state.x, state.delta
    tang = float(np.linalg.norm((x.data.T @ d.data) + (d.data.T @ x.data)))
    results.append(_result("momentum tangent at iterate", tang <= 1e-8, f"violation {tang:.2e}"))

    smooth = make_sparse_pca(n=10, p=1, N=1, lam=0.0, seed=13)
    _, tr = solver_lipschitz.run(smooth, None, seed=5, K=1500, trace_every=10, diagnostics=True)
    best = min(r.norm_grad_Fmu for r in tr)
    results.append(_result("deterministic smooth sanity", best <= 5e-2, f"min grad {best:.2e}"))

    _, t1 = solver_lipschitz.run(problem, None, seed=8, K=200, trace_every=10, measure_time=False)
    _, t2 = solver_lipschitz.run(problem, None, seed=8, K=200, trace_every=10, measure_time=False)
    results.append(_result("seeded rerun identical", t1 == t2))

    ball = IndicatorBall(np.full(4, 0.3), 0.8)
    cproblem = make_constrained_sphere(n=8, m=4, N=6, set_term=ball, seed=21)
    config = solver_indicator.default_config(cproblem, theta=1.0, safety=2.0, samples=120, seed=31)
    cstate, ctrace = solver_indicator.run(cproblem, None, config, seed=9, K=600, trace_every=20)

    radius = config.trunc_radius
    results.append(_result("truncation radius respected",
                           all(d <= radius + 1e-12 for d in [cstate.delta.norm()])
                           and max(r.norm_G for r in ctrace) < np.inf))

    om = config.omega
    sched_ok = all(
        r.mu == float(max(r.k, 1)) ** (-om)
        and r.tau == config.c_tau * float(r.k + 1) ** (-om)
        and r.a == min(1.0, config.c_a * float(r.k + 1) ** (-2 * om))
        for r in ctrace
    )
    results.append(_result("indicator schedules exact", sched_ok))

    xs = cstate.x
    mu = 0.37
    resid, _ = solver_indicator._penalty_residual(cproblem, xs.data)
    direct = mf.tangent_project(xs, cproblem.c_jac_t(xs.data, resid / mu))
    via_env = mf.tangent_project(xs, cproblem.c_jac_t(xs.data, moreau_eval(cproblem.h, mu, cproblem.c_eval(xs.data)).grad))
    gap = float(np.linalg.norm(direct.data - via_env.data))
    results.append(_result("penalty gradient identity", gap <= 1e-10, f"gap {gap:.2e}"))
    return results


def run_suite(suite: str) -> list[CheckResult]:
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {SUITES}")
    table = {
        "manifold": check_manifold,
        "smoothing": check_smoothing,
        "lemmas": check_lemmas,
        "solver": check_solver,
    }
    if suite == "all":
        out = []
        for name in ("manifold", "smoothing", "lemmas", "solver"):
            out.extend(table[name]())
        return out
    return table[suite]()
