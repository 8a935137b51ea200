import numpy as np
import pytest

import manismooth as ms
from manismooth.errors import ParameterError, ShapeMismatchError
from manismooth.problems import full_riemannian_grad, map_c_eval, map_c_jac_t


@pytest.fixture(scope="module")
def pca():
    return ms.make_sparse_pca(10, 2, 40, 0.2, seed=3)


@pytest.fixture(scope="module")
def csphere():
    ball = ms.IndicatorBall(np.full(4, 0.3), 0.9)
    return ms.make_constrained_sphere(8, 4, 30, ball, seed=4)


@pytest.mark.parametrize("which", ["pca", "csphere"])
def test_unbiasedness_finite_sum(which, request):
    p = request.getfixturevalue(which)
    rng = np.random.default_rng(1)
    for _ in range(100):
        x = ms.random_point(p.manifold, rng)
        mean = np.mean([p.sample_egrad(x.data, i) for i in range(p.num_samples)], axis=0)
        assert np.linalg.norm(mean - p.full_egrad(x.data)) <= 1e-10 * p.num_samples
        mean_val = np.mean([p.sample_value(x.data, i) for i in range(p.num_samples)])
        assert abs(mean_val - p.full_value(x.data)) <= 1e-10 * p.num_samples


def test_sample_riemannian_grad_single_sample():
    p = ms.make_sparse_pca(6, 1, 1, 0.0, seed=9)
    rng = np.random.default_rng(2)
    x = ms.random_point(p.manifold, rng)
    g = ms.sample_riemannian_grad(p, x, 0)
    np.testing.assert_allclose(g.data, full_riemannian_grad(p, x).data, atol=1e-14)


def test_sample_index_out_of_range(pca):
    x = ms.random_point(pca.manifold, np.random.default_rng(0))
    with pytest.raises(IndexError):
        ms.sample_riemannian_grad(pca, x, pca.num_samples)


def test_normal_gradient_projects_to_zero():
    d = ms.sphere(4)
    x = ms.random_point(d, np.random.default_rng(5))
    # a gradient parallel to x is normal to the sphere
    g = ms.tangent_project(x, 3.0 * x.data)
    assert g.norm() <= 1e-14


def test_map_c_identity(pca):
    rng = np.random.default_rng(3)
    x = ms.random_point(pca.manifold, rng)
    np.testing.assert_array_equal(map_c_eval(pca, x), x.data.ravel())
    v = rng.standard_normal(pca.m)
    np.testing.assert_array_equal(map_c_jac_t(pca, x, v), v.reshape(x.data.shape))
    with pytest.raises(ShapeMismatchError):
        map_c_jac_t(pca, x, np.ones(pca.m + 1))


def test_map_c_linear_adjoint():
    B = np.arange(12.0).reshape(3, 4) / 10.0
    p = ms.make_constrained_sphere(4, 3, 2, ms.IndicatorBall(np.zeros(3), 1.0), seed=1,
                                   quad_weight=0.0, linear_map=B)
    x = ms.random_point(p.manifold, np.random.default_rng(4))
    v = np.array([1.0, -2.0, 0.5])
    np.testing.assert_allclose(map_c_jac_t(p, x, v).ravel(), B.T @ v, atol=1e-14)


@pytest.mark.parametrize("which", ["pca", "csphere"])
def test_adjoint_matches_central_differences(which, request):
    p = request.getfixturevalue(which)
    rng = np.random.default_rng(6)
    t = 1e-5
    for _ in range(100):
        x = ms.random_point(p.manifold, rng)
        u = rng.standard_normal(x.data.shape)
        v = rng.standard_normal(p.m)
        lhs = float(np.sum(p.c_jac_t(x.data, v) * u))
        jvp = (p.c_eval(x.data + t * u) - p.c_eval(x.data - t * u)) / (2 * t)
        rhs = float(v @ jvp)
        assert abs(lhs - rhs) <= 1e-6 * max(1.0, abs(rhs))


def test_sparse_pca_determinism():
    a = ms.make_sparse_pca(7, 2, 9, 0.1, seed=77)
    b = ms.make_sparse_pca(7, 2, 9, 0.1, seed=77)
    x = ms.random_point(a.manifold, np.random.default_rng(7))
    assert a.full_value(x.data) == b.full_value(x.data)
    np.testing.assert_array_equal(a.sample_egrad(x.data, 3), b.sample_egrad(x.data, 3))


def test_constrained_sphere_requires_indicator():
    with pytest.raises(ParameterError):
        ms.make_constrained_sphere(5, 2, 3, ms.ScaledL1(0.1, 2), seed=0)


def test_constrained_sphere_feasible_everywhere():
    # q = 0, B = I, ball radius >= 1: every sphere point maps inside the set
    p = ms.make_constrained_sphere(5, 5, 3, ms.IndicatorBall(np.zeros(5), 1.5), seed=2,
                                   quad_weight=0.0, linear_map=np.eye(5))
    rng = np.random.default_rng(8)
    for _ in range(50):
        x = ms.random_point(p.manifold, rng)
        assert p.h.distance(map_c_eval(p, x)) == 0.0


def test_feasibility_residual_matches_projection(csphere):
    rng = np.random.default_rng(9)
    x = ms.random_point(csphere.manifold, rng)
    y = map_c_eval(csphere, x)
    direct = np.linalg.norm(y - csphere.h.project(y))
    assert csphere.h.distance(y) == pytest.approx(direct, abs=1e-15)


def test_estimate_constants_identity_map(pca):
    consts = ms.estimate_constants(pca, 100, seed=11)
    assert consts.L_grad_c == 0.0  # identity map has constant Jacobian
    assert consts.L_c == pytest.approx(1.0, abs=1e-12)
    assert consts.L_f > 0 and consts.sigma > 0 and consts.L_tilde > 0


def test_estimate_constants_deterministic(csphere):
    a = ms.estimate_constants(csphere, 100, seed=12)
    b = ms.estimate_constants(csphere, 100, seed=12)
    assert a == b


def linear_objective_sphere(n, N, seed):
    """Per-sample linear objective f_i(x) = a_i^T x on the sphere."""
    A = np.random.default_rng(seed).standard_normal((N, n))

    def c_eval(xd):
        return xd.ravel().copy()

    def c_jac_t(xd, v):
        return v.reshape(n, 1)

    return A, ms.StochasticProblem(
        manifold=ms.sphere(n),
        num_samples=N,
        sample_value=lambda xd, i: float(A[i] @ xd.ravel()),
        sample_egrad=lambda xd, i: A[i].reshape(n, 1).copy(),
        full_value=lambda xd: float(A.mean(axis=0) @ xd.ravel()),
        full_egrad=lambda xd: A.mean(axis=0).reshape(n, 1),
        c_eval=c_eval,
        c_jac_t=c_jac_t,
        m=n,
        h=ms.ScaledL1(0.0, n),
        name="linear_sphere",
    )


def test_linear_objective_smoothness_bounded_by_operator_norm():
    # with constant Euclidean sample gradients a_i, the average-smoothness
    # quotient along retracted pairs is at most ||A||_op (1 + beta)
    A, p = linear_objective_sphere(6, 20, seed=13)
    consts = ms.estimate_constants(p, 10_000, seed=14)
    rc = ms.estimate_retraction_constants(p.manifold, 500, 15)
    assert consts.L_tilde <= np.linalg.norm(A, 2) * (1.0 + rc.beta)


@pytest.mark.parametrize("which", ["pca", "csphere"])
def test_average_smoothness_stable_across_seeds(which, request):
    p = request.getfixturevalue(which)
    a = ms.estimate_constants(p, 10_000, seed=21).L_tilde
    b = ms.estimate_constants(p, 10_000, seed=22).L_tilde
    assert np.isfinite(a) and np.isfinite(b)
    assert abs(a - b) / max(a, b) < 0.2
