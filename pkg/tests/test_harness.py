import numpy as np
import pytest

import manismooth as ms
from manismooth.errors import InsufficientDataError, ParameterError, TraceFormatError
from manismooth.harness import (
    TraceRecord,
    fit_rate,
    lemma_implicit_bound_check,
    lemma_seq_bound_check,
    read_summary_json,
    read_trace_csv,
    retr_smooth_constant_check,
    summary_dict,
    write_summary_json,
    write_trace_csv,
)


def synthetic_trace(values, wall=0):
    return [
        TraceRecord(k=k, mu=1.0, tau=0.1, a=0.5, norm_G=v, obj_smooth=None,
                    norm_grad_Fmu=v, infeas=0.0, norm_eps=None, wall_ns=wall)
        for k, v in values
    ]


def test_fit_rate_exact_power_law_raw():
    trace = synthetic_trace([(k, float(k) ** (-2.0 / 3.0)) for k in range(1, 201)])
    fit = fit_rate(trace, "norm_G", (1, 200), mode="raw")
    assert fit.slope == pytest.approx(-2.0 / 3.0, abs=1e-6)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-9)


def test_fit_rate_constant_field():
    trace = synthetic_trace([(k, 2.5) for k in range(1, 101)])
    fit = fit_rate(trace, "norm_G", (1, 100), mode="raw")
    assert fit.slope == pytest.approx(0.0, abs=1e-9)


def test_fit_rate_noisy_power_law():
    trace = synthetic_trace(
        [(k, float(k) ** (-1.0 / 3.0) * (1.0 + 0.01 * np.sin(k))) for k in range(1, 2001)]
    )
    fit = fit_rate(trace, "norm_G", (1, 2000), mode="raw")
    assert abs(fit.slope + 1.0 / 3.0) <= 0.02


def test_fit_rate_running_mean_sq():
    # field k^{-1/3}: the running mean of its square decays like k^{-2/3},
    # up to a k^{-1/3} finite-window correction that biases the fit slightly
    trace = synthetic_trace([(k, float(k) ** (-1.0 / 3.0)) for k in range(1, 3001)])
    fit = fit_rate(trace, "norm_grad_Fmu", (100, 3000))
    assert abs(fit.slope + 2.0 / 3.0) <= 0.05


def test_fit_rate_insufficient_data():
    trace = synthetic_trace([(k, 1.0) for k in range(1, 6)])
    with pytest.raises(InsufficientDataError):
        fit_rate(trace, "norm_G", (1, 5))


def test_lemma_seq_bound_worked_example():
    lhs = 1.0 + 1.0 / np.sqrt(2.0) + 1.0 / np.sqrt(3.0) + 0.5
    assert lhs == pytest.approx(2.7844, abs=1e-3)
    assert lemma_seq_bound_check([1.0, 1.0, 1.0, 1.0], 0.5)


def test_lemma_seq_bound_single_element():
    assert lemma_seq_bound_check([3.7], 0.3)


def test_lemma_seq_bound_validates():
    with pytest.raises(ParameterError):
        lemma_seq_bound_check([0.0, 1.0], 0.5)
    with pytest.raises(ParameterError):
        lemma_seq_bound_check([1.0], 1.5)


def test_lemma_seq_bound_randomized():
    rng = np.random.default_rng(101)
    for _ in range(10_000):
        n = int(rng.integers(1, 40))
        b = rng.uniform(0.0, 5.0, n)
        b[0] = rng.uniform(0.01, 5.0)
        assert lemma_seq_bound_check(b, float(rng.uniform(0.02, 0.98)))


def largest_premise_solution(c, d, e, alpha, beta):
    lo, hi = 0.0, 1.0
    while c * hi**alpha + d * hi**beta + e >= hi:
        hi *= 2.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if c * mid**alpha + d * mid**beta + e >= mid:
            lo = mid
        else:
            hi = mid
    return lo


def test_lemma_implicit_bound_worked_example():
    # alpha = beta = 1/2, c = d = 1, e = 0: premise forces x <= 4, bound is 8
    x = largest_premise_solution(1.0, 1.0, 0.0, 0.5, 0.5)
    assert x == pytest.approx(4.0, abs=1e-9)
    assert lemma_implicit_bound_check(1.0, 1.0, 0.0, 0.5, 0.5, x)
    assert lemma_implicit_bound_check(1.0, 1.0, 0.0, 0.5, 0.5, 0.0)


def test_lemma_implicit_bound_validates_premise():
    with pytest.raises(ParameterError):
        lemma_implicit_bound_check(0.1, 0.1, 0.0, 0.5, 0.5, 100.0)


def test_lemma_implicit_bound_randomized():
    rng = np.random.default_rng(102)
    for _ in range(10_000):
        c = float(rng.uniform(0.05, 5.0))
        d = float(rng.uniform(0.05, 5.0))
        e = float(rng.uniform(0.0, 5.0))
        alpha = float(rng.uniform(0.05, 0.95))
        beta = float(rng.uniform(0.05, 0.95))
        x = largest_premise_solution(c, d, e, alpha, beta)
        assert lemma_implicit_bound_check(c, d, e, alpha, beta, x)


def test_retr_smooth_quadratic_on_sphere():
    p = ms.make_sparse_pca(8, 1, 6, 0.0, seed=41)
    emp, bound = retr_smooth_constant_check(p, 1.0, 150, seed=42)
    assert emp <= bound


def test_trace_csv_roundtrip(tmp_path):
    trace = [
        TraceRecord(k=1, mu=1.0, tau=0.5, a=1.0, norm_G=0.123456789012345678,
                    obj_smooth=None, norm_grad_Fmu=None, infeas=1e-300, norm_eps=None, wall_ns=17),
        TraceRecord(k=10, mu=10.0 ** (-1 / 3), tau=0.3, a=0.25, norm_G=2.0,
                    obj_smooth=-1.5, norm_grad_Fmu=0.7, infeas=0.0, norm_eps=0.1, wall_ns=42),
    ]
    path = tmp_path / "trace.csv"
    write_trace_csv(trace, path)
    back = read_trace_csv(path)
    assert back == trace


def test_trace_csv_header_only(tmp_path):
    path = tmp_path / "empty.csv"
    write_trace_csv([], path)
    assert path.read_text().strip() == "k,mu,tau,a,norm_G,obj_smooth,norm_grad_Fmu,infeas,norm_eps,wall_ns"
    assert read_trace_csv(path) == []


def test_trace_csv_malformed_reports_line(tmp_path):
    path = tmp_path / "bad.csv"
    write_trace_csv([TraceRecord(1, 1.0, 0.1, 1.0, 1.0, None, None, 0.0, None, 0)], path)
    with open(path, "a") as fh:
        fh.write("2,nope,0.1,1.0,1.0,,,0.0,,0\n")
    with pytest.raises(TraceFormatError) as err:
        read_trace_csv(path)
    assert err.value.line == 3


def test_summary_json_roundtrip(tmp_path):
    cert = ms.Certificate(i_K=7, x=None, y=np.zeros(2), z=np.zeros(2),
                          grad_residual=0.125, feas_residual=1e-17, membership_ok=True)
    fit = ms.RateFit(slope=-0.66, intercept=1.0, r_squared=0.99, window=(100, 1000))
    summary = summary_dict(
        algorithm="lipschitz", problem_name="sparse_pca", seed=3, K=100,
        config={"trace_every": 10}, certificate=cert, rate_fits=[fit], wall_seconds=0.5,
    )
    path = tmp_path / "summary.json"
    write_summary_json(summary, path)
    back = read_summary_json(path)
    assert back == summary
    assert back["schema_version"] == "1"
    assert back["certificate"]["feas_residual"] == 1e-17
