import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lipproj.errors import DimensionError, ParameterError
from lipproj.geometry import embed_so2_rotation, haar_sample_orthogonal
from lipproj.polynomials import (
    HomogenizedPolynomial,
    Quadratic,
    homogenize,
    norm_quadratics,
    polarization_check,
)


def random_symmetric(rng, dim, scale=1.0):
    a = scale * rng.standard_normal((dim, dim))
    return Quadratic(a)  # symmetrised on construction


def sphere_points(rng, count, dim, radius=1.0):
    z = rng.standard_normal((count, dim))
    return radius * z / np.linalg.norm(z, axis=1, keepdims=True)


def brute_force_sup_norm(q, samples=200_000, seed=0, ascent_iters=200):
    """Independent oracle: sphere sampling plus projected-gradient ascent."""
    rng = np.random.default_rng(seed)
    pts = sphere_points(rng, samples, q.dim)
    vals = q.evaluate_batch(pts)
    best = 0.0
    for sign in (1.0, -1.0):
        idx = int(np.argmax(sign * vals))
        x = pts[idx]
        step = 0.5
        for _ in range(ascent_iters):
            x = x + step * sign * 2.0 * (q.a @ x)
            x /= np.linalg.norm(x)
        best = max(best, abs(float(x @ q.a @ x)))
    return max(best, float(np.max(np.abs(vals))))


def test_eval_examples():
    n3 = norm_quadratics(3, 2).full
    assert n3(np.array([1.0, 2.0, 2.0])) == 9.0
    assert n3(np.zeros(3)) == 0.0
    q = Quadratic(np.diag([1.0, -1.0]))
    assert q(np.array([3.0, 4.0])) == -7.0


def test_eval_errors():
    q = Quadratic(np.eye(2))
    with pytest.raises(DimensionError):
        q(np.zeros(3))
    with pytest.raises(DimensionError):
        q.evaluate_batch(np.zeros((4, 3)))


def test_sup_norm_examples():
    assert norm_quadratics(4, 2).full.sup_norm() == 1.0
    assert Quadratic(np.diag([2.0, -5.0])).sup_norm() == 5.0


def test_sup_norm_against_sampling_oracle():
    rng = np.random.default_rng(42)
    for _ in range(5):
        q = random_symmetric(rng, 4)
        oracle = brute_force_sup_norm(q, samples=100_000, seed=int(rng.integers(1 << 30)))
        assert abs(q.sup_norm() - oracle) <= 1e-6 * max(1.0, q.sup_norm())


def test_lip_norm_examples():
    assert norm_quadratics(5, 2).full.lip_norm_on_ball() == 2.0
    e1_sq = np.zeros((5, 5))
    e1_sq[0, 0] = 1.0
    assert Quadratic(e1_sq).lip_norm_on_ball() == 2.0


def test_lip_norm_against_gradient_sampling():
    # oracle: max of |grad q| = 2|Ax| over ball samples plus sphere ascent
    rng = np.random.default_rng(7)
    q = random_symmetric(rng, 3)
    pts = sphere_points(rng, 300_000, 3) * rng.uniform(0, 1, (300_000, 1)) ** (1 / 3)
    grads = 2.0 * pts @ q.a
    best = np.max(np.linalg.norm(grads, axis=1))
    x = pts[int(np.argmax(np.linalg.norm(grads, axis=1)))]
    x /= np.linalg.norm(x)
    for _ in range(300):
        x = q.a @ (q.a @ x)
        x /= np.linalg.norm(x)
    best = max(best, 2.0 * np.linalg.norm(q.a @ x))
    assert abs(q.lip_norm_on_ball() - best) <= 1e-4 * max(1.0, best)


def test_sampled_lipschitz_quotient_bounded_and_tight():
    rng = np.random.default_rng(3)
    for dim in (2, 4, 6):
        q = random_symmetric(rng, dim)
        lip = q.lip_norm_on_ball()
        x = sphere_points(rng, 100_000, dim) * rng.uniform(0, 1, (100_000, 1)) ** (1 / dim)
        y = sphere_points(rng, 100_000, dim) * rng.uniform(0, 1, (100_000, 1)) ** (1 / dim)
        quot = np.abs(q.evaluate_batch(x) - q.evaluate_batch(y)) / np.linalg.norm(x - y, axis=1)
        assert np.max(quot) <= lip * (1 + 1e-6)
        # boundary-directed pairs: radial pairs at the sampled |q|-maximiser,
        # sharpened by sign-aware ascent, approach the bound within 2 percent
        u = sphere_points(rng, 100_000, dim)
        vals = q.evaluate_batch(u)
        h = 1e-4
        quot_best = 0.0
        for sign in (1.0, -1.0):
            w = u[int(np.argmax(sign * vals))]
            for _ in range(200):
                w = w + 0.5 * sign * 2.0 * (q.a @ w)
                w /= np.linalg.norm(w)
            quot_best = max(quot_best, abs(q(w) - q((1 - h) * w)) / h)
        assert quot_best >= 0.98 * lip


def test_polarization_check():
    rep = polarization_check(norm_quadratics(3, 2).full)
    assert rep.ratio == 1.0 and rep.sup_norm == 1.0
    rep = polarization_check(Quadratic(np.diag([1.0, -1.0])))
    assert rep.sup_norm == 1.0 and rep.bilinear_norm == pytest.approx(1.0, abs=1e-12)
    rng = np.random.default_rng(0)
    for _ in range(10):
        rep = polarization_check(random_symmetric(rng, 5))
        assert abs(rep.ratio - 1.0) <= 1e-10
        assert 1.0 - 1e-10 <= rep.ratio <= 2.0


def test_compose_rotation():
    rng = np.random.default_rng(1)
    q = random_symmetric(rng, 4)
    ident = haar_sample_orthogonal(4, 0)
    assert np.allclose(q.rotate(ident).a, ident.m.T @ q.a @ ident.m)
    n4 = norm_quadratics(4, 2).full
    m = haar_sample_orthogonal(4, 5)
    assert np.allclose(n4.rotate(m).a, np.eye(4), atol=1e-14)
    quarter = embed_so2_rotation(2, np.pi / 2)
    rotated = Quadratic(np.diag([1.0, 0.0])).rotate(quarter)
    assert np.allclose(rotated.a, np.diag([0.0, 1.0]), atol=1e-15)


@given(seed=st.integers(0, 10_000))
def test_rotation_preserves_sup_norm(seed):
    rng = np.random.default_rng(seed)
    q = random_symmetric(rng, 3)
    m = haar_sample_orthogonal(3, seed + 1)
    assert abs(q.rotate(m).sup_norm() - q.sup_norm()) <= 1e-10 * max(1.0, q.sup_norm())


def test_rotation_action_pointwise():
    rng = np.random.default_rng(2)
    q = random_symmetric(rng, 5)
    m = haar_sample_orthogonal(5, 9)
    for _ in range(20):
        x = rng.standard_normal(5)
        assert q.rotate(m)(x) == pytest.approx(q(m.apply(x)), rel=1e-12, abs=1e-12)


@given(t=st.floats(-10, 10), seed=st.integers(0, 1000))
def test_eval_homogeneity(t, seed):
    rng = np.random.default_rng(seed)
    q = random_symmetric(rng, 3)
    x = rng.standard_normal(3)
    assert q(t * x) == pytest.approx(t * t * q(x), rel=1e-12, abs=1e-12)


def test_norm_quadratics_examples():
    basis = norm_quadratics(5, 3)
    ones = np.ones(5)
    assert basis.head(ones) == 3.0
    tail = basis.full - basis.head
    assert tail(np.array([0.0, 0.0, 0.0, 1.0, 1.0])) == 2.0
    assert basis.plane(np.array([0.6, 0.8, 0.0, 0.0, 0.0])) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(ParameterError):
        norm_quadratics(5, 6)
    with pytest.raises(ParameterError):
        norm_quadratics(5, 1)


def test_homogenize():
    basis = norm_quadratics(2, 2)
    h2 = homogenize(basis.plane, 2)
    assert h2.evaluate(np.array([0.3, 0.4]), 7.0) == basis.plane(np.array([0.3, 0.4]))
    h3 = homogenize(basis.plane, 3)
    assert h3.evaluate(np.array([1.0, 1.0]), 2.0) == 4.0
    rng = np.random.default_rng(0)
    for k in (2, 3, 5):
        hk = homogenize(basis.plane, k)
        for _ in range(10):
            x = rng.standard_normal(2)
            t = rng.standard_normal()
            val = hk.evaluate(x, t)
            assert hk.evaluate(2 * x, 2 * t) == pytest.approx(2 ** k * val, rel=1e-12, abs=1e-12)
        assert hk.dehomogenized() is basis.plane
        assert hk.evaluate(x, 1.0) == pytest.approx(basis.plane(x), rel=1e-15)
    with pytest.raises(ParameterError):
        homogenize(basis.plane, 1)
    assert isinstance(h3, HomogenizedPolynomial)


def test_json_roundtrip():
    rng = np.random.default_rng(6)
    q = random_symmetric(rng, 4)
    d = q.to_json_dict()
    assert len(d["upper"]) == 10
    q2 = Quadratic.from_json_dict(d)
    assert np.array_equal(q.a, q2.a)
