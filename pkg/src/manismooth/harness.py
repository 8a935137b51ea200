"""Metrics, traces, certificates, rate fitting, and inequality checks.

The two sequence inequalities used by the solvers' analysis are exposed
as executable checks; both hold for every admissible input, so any
failure is an implementation bug.  ``retr_smooth_constant_check`` compares the
empirical retraction-smoothness quotient of the smoothed objective
against the constant assembled from estimated problem constants.

File formats:

- trace CSV columns, in order:
  k, mu, tau, a, norm_G, obj_smooth, norm_grad_Fmu, infeas, norm_eps, wall_ns.
  Missing diagnostics are serialized as empty fields; floats use the
  shortest round-trip decimal representation.
- summary JSON keys: schema_version, algorithm, problem, seed, K,
  config, certificate, rate_fits, wall_seconds.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InsufficientDataError, ParameterError, TraceFormatError
from .manifolds import ManifoldPoint, estimate_retraction_constants, random_point, random_tangent, retract
from .problems import estimate_constants
from .smoothing import smoothed_objective_grad

SCHEMA_VERSION = "1"

TRACE_COLUMNS = (
    "k",
    "mu",
    "tau",
    "a",
    "norm_G",
    "obj_smooth",
    "norm_grad_Fmu",
    "infeas",
    "norm_eps",
    "wall_ns",
)


@dataclass(frozen=True)
class StepReport:
    """Per-iteration quantities produced by one solver step."""

    k: int
    mu: float
    tau: float
    a: float
    norm_G: float
    env_value: float
    infeas: float


@dataclass(frozen=True)
class TraceRecord:
    """One monitored iteration; diagnostic fields are None when disabled."""

    k: int
    mu: float
    tau: float
    a: float
    norm_G: float
    obj_smooth: float | None
    norm_grad_Fmu: float | None
    infeas: float
    norm_eps: float | None
    wall_ns: int


@dataclass(frozen=True)
class Certificate:
    """Stationarity witness (y, z) at a randomly selected iterate."""

    i_K: int
    x: ManifoldPoint
    y: np.ndarray
    z: np.ndarray
    grad_residual: float
    feas_residual: float
    membership_ok: bool


@dataclass(frozen=True)
class RateFit:
    """Least-squares power-law fit over a window of iteration indices."""

    slope: float
    intercept: float
    r_squared: float
    window: tuple[int, int]

    def __post_init__(self):
        if not self.window[0] < self.window[1]:
            raise ParameterError("window requires k_lo < k_hi")


def fit_rate(
    trace: Sequence[TraceRecord],
    field: str,
    window: tuple[int, int],
    mode: str = "mean_sq",
) -> RateFit:
    """OLS fit of log(series) against log(k) over a window.

    mode "mean_sq" (default) fits the running mean of the squared field
    values, accumulated from the start of the trace; mode "raw" fits the
    field values themselves.  Needs at least 10 in-window records with
    the field present.
    """
    if mode not in ("mean_sq", "raw"):
        raise ParameterError(f"unknown fit mode {mode!r}")
    k_lo, k_hi = window
    ks, ys = [], []
    acc = 0.0
    count = 0
    for rec in sorted(trace, key=lambda r: r.k):
        v = getattr(rec, field)
        if v is None:
            continue
        if mode == "mean_sq":
            acc += v * v
            count += 1
            val = acc / count
        else:
            val = v
        if k_lo <= rec.k <= k_hi and val > 0:
            ks.append(rec.k)
            ys.append(val)
    if len(ks) < 10:
        raise InsufficientDataError(
            f"need >= 10 records with field {field!r} in window [{k_lo}, {k_hi}], got {len(ks)}"
        )
    lx = np.log(np.asarray(ks, dtype=float))
    ly = np.log(np.asarray(ys, dtype=float))
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return RateFit(slope=float(slope), intercept=float(intercept), r_squared=max(0.0, min(1.0, r2)), window=(k_lo, k_hi))


def lemma_seq_bound_check(b: Sequence[float], p: float) -> bool:
    """Check sum_k b_k / (sum_{i<=k} b_i)^p <= (sum b)^{1-p} / (1-p).

    Holds for any b_1 > 0, b_i >= 0, p in (0, 1); slack 1e-12.
    """
    b = np.asarray(b, dtype=float)
    if b.size == 0 or b[0] <= 0 or np.any(b < 0):
        raise ParameterError("need b_1 > 0 and b_i >= 0")
    if not 0 < p < 1:
        raise ParameterError("need p in (0, 1)")
    partial = np.cumsum(b)
    lhs = float(np.sum(b / partial**p))
    rhs = float(partial[-1] ** (1.0 - p) / (1.0 - p))
    return lhs <= rhs + 1e-12


def lemma_implicit_bound_check(c: float, d: float, e: float, alpha: float, beta: float, x: float) -> bool:
    """Check the explicit bound implied by x <= c x^alpha + d x^beta + e.

    Verifies x <= 2 (4 alpha)^{alpha/(1-alpha)} c^{1/(1-alpha)}
               + 2 (4 beta)^{beta/(1-beta)} d^{1/(1-beta)} + 2 e
    with slack 1e-12.  The premise is a precondition and is validated
    (with a small tolerance for boundary solutions found numerically).
    """
    if not (c > 0 and d > 0):
        raise ParameterError("need c, d > 0")
    if not (0 < alpha < 1 and 0 < beta < 1):
        raise ParameterError("need alpha, beta in (0, 1)")
    if e < 0 or x < 0:
        raise ParameterError("need e >= 0 and x >= 0")
    premise_rhs = c * x**alpha + d * x**beta + e
    if x > premise_rhs * (1.0 + 1e-9) + 1e-12:
        raise ParameterError("x does not satisfy the premise inequality")
    bound = (
        2.0 * (4.0 * alpha) ** (alpha / (1.0 - alpha)) * c ** (1.0 / (1.0 - alpha))
        + 2.0 * (4.0 * beta) ** (beta / (1.0 - beta)) * d ** (1.0 / (1.0 - beta))
        + 2.0 * e
    )
    return x <= bound + 1e-12


def retr_smooth_constant_check(
    problem, mu: float, samples: int, seed: int, safety: float = 2.0
) -> tuple[float, float]:
    """Empirical retraction-smoothness constant of F_mu vs its bound.

    Maximizes 2 mu (F_mu(R_x(eta)) - F_mu(x) - <eta, grad F_mu(x)>) / ||eta||^2
    over seeded (x, eta) with ||eta|| <= 1, and assembles the comparison
    constant from estimated problem and retraction constants (inflated
    by ``safety``), using the Lipschitz-h or indicator-h form of the
    composite smoothness constant as appropriate.

    Returns:
        (empirical_constant, bound)
    """
    if samples < 100:
        raise ParameterError("samples must be >= 100")
    rng = np.random.default_rng(seed)
    consts = problem.constants or estimate_constants(problem, max(100, samples), seed)
    rc = estimate_retraction_constants(problem.manifold, max(100, samples), seed + 1)
    L = safety * consts.L_retr
    L_c = safety * consts.L_c
    L_gc = safety * consts.L_grad_c
    alpha = safety * rc.alpha
    beta = safety * rc.beta

    empirical = -math.inf
    max_dist = 0.0
    for _ in range(samples):
        x = random_point(problem.manifold, rng)
        eta = random_tangent(x, rng, norm=float(rng.uniform(0.05, 1.0)))
        y = retract(x, eta)
        fx, gx, _ = smoothed_objective_grad(problem, x, mu)
        fy, _, _ = smoothed_objective_grad(problem, y, mu)
        lin = float(np.sum(gx.data * eta.data))
        empirical = max(empirical, 2.0 * mu * (fy - fx - lin) / eta.norm() ** 2)
        if problem.h.is_indicator:
            max_dist = max(max_dist, problem.h.distance(problem.c_eval(x.data)))
    if problem.h.is_indicator:
        level = safety * max_dist
    else:
        level = problem.h.lipschitz_const
    bound = L + alpha**2 * (L_c**2 + level * L_gc) + 2.0 * L_c * level * beta
    return float(empirical), float(bound)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_trace_csv(trace: Sequence[TraceRecord], path) -> None:
    """Write trace records in the fixed column order (header mandatory)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_COLUMNS)
        for rec in trace:
            writer.writerow(
                [
                    rec.k,
                    _fmt(rec.mu),
                    _fmt(rec.tau),
                    _fmt(rec.a),
                    _fmt(rec.norm_G),
                    _fmt(rec.obj_smooth),
                    _fmt(rec.norm_grad_Fmu),
                    _fmt(rec.infeas),
                    _fmt(rec.norm_eps),
                    rec.wall_ns,
                ]
            )


def read_trace_csv(path) -> list[TraceRecord]:
    """Parse a trace CSV; raises TraceFormatError with the offending line."""
    records: list[TraceRecord] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise TraceFormatError("missing header row", 1) from None
        if tuple(header) != TRACE_COLUMNS:
            raise TraceFormatError(f"bad header {header!r}", 1)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(TRACE_COLUMNS):
                raise TraceFormatError(f"expected {len(TRACE_COLUMNS)} fields, got {len(row)}", lineno)
            try:
                records.append(
                    TraceRecord(
                        k=int(row[0]),
                        mu=float(row[1]),
                        tau=float(row[2]),
                        a=float(row[3]),
                        norm_G=float(row[4]),
                        obj_smooth=float(row[5]) if row[5] else None,
                        norm_grad_Fmu=float(row[6]) if row[6] else None,
                        infeas=float(row[7]),
                        norm_eps=float(row[8]) if row[8] else None,
                        wall_ns=int(row[9]),
                    )
                )
            except ValueError as exc:
                raise TraceFormatError(str(exc), lineno) from None
    return records


def summary_dict(
    *,
    algorithm: str,
    problem_name: str,
    seed: int,
    K: int,
    config: dict,
    certificate: Certificate | None,
    rate_fits: Sequence[RateFit],
    wall_seconds: float,
) -> dict:
    cert = None
    if certificate is not None:
        cert = {
            "i_K": certificate.i_K,
            "grad_residual": float(certificate.grad_residual),
            "feas_residual": float(certificate.feas_residual),
            "membership_ok": bool(certificate.membership_ok),
        }
    return {
        "schema_version": SCHEMA_VERSION,
        "algorithm": algorithm,
        "problem": problem_name,
        "seed": int(seed),
        "K": int(K),
        "config": config,
        "certificate": cert,
        "rate_fits": [
            {
                "slope": f.slope,
                "intercept": f.intercept,
                "r_squared": f.r_squared,
                "k_lo": f.window[0],
                "k_hi": f.window[1],
            }
            for f in rate_fits
        ],
        "wall_seconds": float(wall_seconds),
    }


def write_summary_json(summary: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_summary_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)
