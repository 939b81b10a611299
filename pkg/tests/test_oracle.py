import itertools
import math

import numpy as np
import pytest

import oracle_helpers
from lipproj.errors import ContractError, DomainError, ParameterError, ResourceError
from lipproj.geometry import OrthogonalMatrix, coordinate_swap, sample_so2
from lipproj.oracle import (
    DiscreteFunction,
    DiscreteProjection,
    FiniteBallNet,
    build_net,
    discrete_lip_norm,
    free_norm_of_functional,
    l2_projection,
    minimize_projection_norm,
    projection_operator_norm,
    restrict_quadratic,
    sign_flip_group,
    symmetrize_discrete_projection,
    transport_norm_collinear,
)
from lipproj.polynomials import Quadratic, norm_quadratics


def quadratic_basis_2d():
    x2 = Quadratic(np.array([[1.0, 0.0], [0.0, 0.0]]))
    y2 = Quadratic(np.array([[0.0, 0.0], [0.0, 1.0]]))
    xy = Quadratic(np.array([[0.0, 0.5], [0.5, 0.0]]))
    return x2, y2, xy


def hexagon_net():
    ang = 2 * np.pi * np.arange(5) / 5 + 0.3
    pts = np.vstack([np.zeros((1, 2)), 0.9 * np.stack([np.cos(ang), np.sin(ang)], axis=1)])
    return FiniteBallNet(pts)


# ---------------------------------------------------------------------------
# nets
# ---------------------------------------------------------------------------

def test_build_net_grid_1d():
    net = build_net(1, 4, "grid")
    assert sorted(net.points.ravel().tolist()) == [-1.0, -0.5, 0.0, 0.5, 1.0]
    assert np.all(net.points[0] == 0.0)


def test_build_net_schemes():
    for scheme in ("grid", "sphere-shells", "random"):
        net = build_net(2, 3, scheme)
        assert np.all(net.points[0] == 0.0)
        assert np.all(np.linalg.norm(net.points, axis=1) <= 1 + 1e-12)


def test_build_net_errors():
    with pytest.raises(ParameterError):
        build_net(2, 1, "grid")
    with pytest.raises(ParameterError):
        build_net(2, 4, "fancy")
    with pytest.raises(ParameterError):
        build_net(4, 3, "sphere-shells")
    with pytest.raises(ResourceError):
        build_net(3, 60, "grid")


def test_net_validation():
    with pytest.raises(ContractError):
        FiniteBallNet(np.array([[0.1], [0.5]]))  # first point not the origin
    with pytest.raises(DomainError):
        FiniteBallNet(np.array([[0.0], [1.5]]))
    with pytest.raises(ContractError):
        FiniteBallNet(np.array([[0.0], [0.5], [0.5]]))  # duplicate
    net = build_net(1, 4, "grid")
    roundtrip = FiniteBallNet.from_json_dict(net.to_json_dict())
    assert np.array_equal(roundtrip.points, net.points)


def test_line_positions():
    net = build_net(1, 4, "grid")
    assert net.line_positions is not None
    assert hexagon_net().line_positions is None
    diag = FiniteBallNet(np.array([[0.0, 0.0], [0.5, 0.5], [-0.3, -0.3]]))
    assert diag.line_positions is not None


# ---------------------------------------------------------------------------
# discrete Lipschitz norms
# ---------------------------------------------------------------------------

def test_discrete_lip_norm_examples():
    net = FiniteBallNet(np.array([[0.0], [1.0], [-1.0], [0.4]]))
    coord = DiscreteFunction(net.points[:, 0].copy(), net)
    assert discrete_lip_norm(coord) == pytest.approx(1.0, rel=1e-15)
    assert discrete_lip_norm(DiscreteFunction(np.zeros(4), net)) == 0.0

    grid = build_net(1, 4, "grid")
    f = restrict_quadratic(Quadratic(np.eye(1)), grid)
    # brute force over all pairs as the oracle
    best = 0.0
    for i, j in itertools.combinations(range(grid.size), 2):
        best = max(best, abs(f.values[i] - f.values[j]) / grid.dist[i, j])
    assert best == pytest.approx(1.5, rel=1e-15)
    assert discrete_lip_norm(f) == pytest.approx(best, rel=1e-15)


def test_restrict_quadratic():
    net = build_net(2, 3, "grid")
    n2 = norm_quadratics(2, 2).full
    f = restrict_quadratic(n2, net)
    assert np.allclose(f.values, np.sum(net.points ** 2, axis=1))
    assert f.values[0] == 0.0
    zero = restrict_quadratic(Quadratic(np.zeros((2, 2))), net)
    assert np.all(zero.values == 0.0)


def test_restricted_norm_approaches_two_under_refinement():
    values = []
    for res in (4, 16, 64):
        net = build_net(1, res, "grid")
        values.append(discrete_lip_norm(restrict_quadratic(Quadratic(np.eye(1)), net)))
    assert values == [1.5, 1.875, 1.96875]  # frozen brute-force values
    assert values == sorted(values)
    assert all(v <= 2.0 for v in values)


def test_refinement_consistency():
    coarse = build_net(1, 4, "grid")
    fine = build_net(1, 8, "grid")
    coarse_set = {round(float(p), 12) for p in coarse.points.ravel()}
    fine_set = {round(float(p), 12) for p in fine.points.ravel()}
    assert coarse_set <= fine_set
    q = Quadratic(np.eye(1))
    assert discrete_lip_norm(restrict_quadratic(q, fine)) >= discrete_lip_norm(restrict_quadratic(q, coarse))


# ---------------------------------------------------------------------------
# transportation norms
# ---------------------------------------------------------------------------

def test_free_norm_two_point():
    net = build_net(1, 4, "grid")
    w = np.zeros(net.size)
    w[1], w[3] = 1.0, -1.0
    expected = net.dist[1, 3]
    assert free_norm_of_functional(w, net) == pytest.approx(expected, rel=1e-12)
    assert free_norm_of_functional(w, net, method="lp") == pytest.approx(expected, rel=1e-9)


def test_free_norm_three_point_split():
    # line 0 -- q -- p -- r: optimal plan splits p's unit mass
    net = FiniteBallNet(np.array([[0.0], [0.2], [0.5], [0.9]]))
    w = np.array([0.0, -0.5, 1.0, -0.5])
    expected = (net.dist[2, 1] + net.dist[2, 3]) / 2
    assert free_norm_of_functional(w, net) == pytest.approx(expected, rel=1e-12)
    assert oracle_helpers.dual_lp_norm(w, net) == pytest.approx(expected, rel=1e-9)


def test_free_norm_scaling_and_errors():
    net = build_net(1, 4, "grid")
    w = np.array([0.0, 0.3, -0.5, 0.2, 0.0])
    assert free_norm_of_functional(2 * w, net) == pytest.approx(2 * free_norm_of_functional(w, net), rel=1e-12)
    with pytest.raises(ParameterError):
        free_norm_of_functional(np.array([0.0, 1.0, 0.0, 0.0, 0.0]), net)
    with pytest.raises(ParameterError):
        free_norm_of_functional(w, hexagon_net() if False else net, method="nope")
    with pytest.raises(ParameterError):
        free_norm_of_functional(np.zeros(6), hexagon_net(), method="line")


def test_lp_duality_closure():
    rng = np.random.default_rng(0)
    nets = [build_net(1, 8, "grid"), hexagon_net(), build_net(2, 4, "random", seed=3)]
    for net in nets:
        for _ in range(40):
            w = rng.standard_normal(net.size)
            w[0] -= w.sum()
            primal = free_norm_of_functional(w, net, method="lp")
            dual = oracle_helpers.dual_lp_norm(w, net)
            assert abs(primal - dual) <= 1e-8 * max(1.0, abs(dual))
            if net.line_positions is not None:
                fast = free_norm_of_functional(w, net)
                assert abs(fast - dual) <= 1e-8 * max(1.0, abs(dual))


def test_transport_norm_collinear_direct():
    pos = np.array([0.0, 0.25, 0.5, 1.0])
    w = np.array([1.0, -1.0, 1.0, -1.0])
    # masses move 0->0.25 and 0.5->1.0
    assert transport_norm_collinear(w, pos) == pytest.approx(0.75, rel=1e-15)


# ---------------------------------------------------------------------------
# projections and operator norms
# ---------------------------------------------------------------------------

def test_projection_constructor_contracts():
    net = build_net(1, 4, "grid")
    basis = restrict_quadratic(Quadratic(np.eye(1)), net).values[None, :]
    good = np.zeros((1, net.size))
    good[0, 4] = 1.0  # reads the value at the point 1.0 where basis == 1
    proj = DiscreteProjection(basis, good, net)
    assert proj.subspace_dim == 1
    with pytest.raises(ContractError):
        DiscreteProjection(basis, 2 * good, net)  # not idempotent
    f = restrict_quadratic(Quadratic(np.eye(1)), net)
    assert np.allclose(proj.apply(f).values, f.values)
    assert projection_operator_norm(proj) >= 1.0 - 1e-12
    d = proj.to_json_dict()
    assert len(d["basis"][0]) == net.size


def test_operator_norm_matches_vertex_enumeration_1d():
    net = build_net(1, 4, "grid")  # 5 points
    for seed in range(25):
        proj = oracle_helpers.random_projection(net, [Quadratic(np.eye(1))], seed)
        fast = projection_operator_norm(proj)
        brute = oracle_helpers.vertex_operator_norm(proj)
        assert abs(fast - brute) <= 1e-8 * max(1.0, brute)


def test_operator_norm_matches_vertex_enumeration_2d():
    ang = 2 * np.pi * np.arange(4) / 4 + 0.2
    net = FiniteBallNet(np.vstack([np.zeros((1, 2)), 0.8 * np.stack([np.cos(ang), np.sin(ang)], axis=1)]))
    x2, y2, xy = quadratic_basis_2d()
    for seed in range(25):
        proj = oracle_helpers.random_projection(net, [x2, xy], seed)
        fast = projection_operator_norm(proj)
        brute = oracle_helpers.vertex_operator_norm(proj)
        assert abs(fast - brute) <= 1e-8 * max(1.0, brute)


def test_operator_norm_invariant_under_basis_scaling():
    net = build_net(1, 6, "grid")
    proj = l2_projection(net, [Quadratic(np.eye(1))])
    scaled = DiscreteProjection(3.0 * proj.basis, proj.weights / 3.0, net)
    assert projection_operator_norm(scaled) == pytest.approx(projection_operator_norm(proj), rel=1e-12)
    assert np.allclose(scaled.as_matrix(), proj.as_matrix())


# ---------------------------------------------------------------------------
# minimal projections
# ---------------------------------------------------------------------------

def test_minimize_full_space_is_identity():
    net = FiniteBallNet(np.array([[0.0, 0.0], [0.7, 0.0], [0.0, 0.6]]))
    x2, y2, _ = quadratic_basis_2d()
    proj, norm = minimize_projection_norm(net, [x2, y2], restarts=1, seed=0)
    assert norm == pytest.approx(1.0, rel=1e-9)
    assert np.allclose(proj.as_matrix()[1:, 1:], np.eye(2), atol=1e-9)


def test_minimize_matches_exact_lp_on_line_nets():
    for res in (4, 8):
        net = build_net(1, res, "grid")
        exact = oracle_helpers.exact_min_projection_norm_collinear(net, [Quadratic(np.eye(1))])
        _, found = minimize_projection_norm(net, [Quadratic(np.eye(1))], restarts=2, seed=0)
        assert found >= exact - 1e-9
        assert found <= exact * 1.02 + 1e-9


def test_minimize_stability_across_resolutions():
    norms = []
    for res in (4, 8, 16):
        net = build_net(1, res, "grid")
        _, norm = minimize_projection_norm(net, [Quadratic(np.eye(1))], restarts=2, seed=1)
        norms.append(norm)
        assert norm >= 1.0 - 1e-9
    assert (max(norms) - min(norms)) / min(norms) <= 0.05


def test_minimize_deterministic():
    net = build_net(1, 8, "grid")
    a = minimize_projection_norm(net, [Quadratic(np.eye(1))], restarts=2, seed=7)
    b = minimize_projection_norm(net, [Quadratic(np.eye(1))], restarts=2, seed=7)
    assert a[1] == b[1]
    assert np.array_equal(a[0].weights, b[0].weights)


def test_minimize_rank_deficient_basis():
    net = FiniteBallNet(np.array([[0.0, 0.0], [0.5, 0.0], [-0.5, 0.0]]))
    x2, y2, _ = quadratic_basis_2d()
    with pytest.raises(ContractError):
        minimize_projection_norm(net, [x2, y2], restarts=0, seed=0)  # y2 restricts to 0


# ---------------------------------------------------------------------------
# symmetrisation
# ---------------------------------------------------------------------------

def test_symmetrize_equivariant_projection_fixed():
    net = build_net(1, 4, "grid")
    group = sign_flip_group(1)
    proj = l2_projection(net, [Quadratic(np.eye(1))])  # already sign-symmetric
    sym = symmetrize_discrete_projection(proj, group)
    assert np.allclose(sym.as_matrix(), proj.as_matrix(), atol=1e-12)


def test_symmetrize_never_increases_norm():
    net = build_net(1, 4, "grid")
    group = sign_flip_group(1)
    for seed in range(30):
        proj = oracle_helpers.random_projection(net, [Quadratic(np.eye(1))], seed, scale=2.0)
        before = projection_operator_norm(proj)
        after = projection_operator_norm(symmetrize_discrete_projection(proj, group))
        assert after <= before + 1e-9


def test_symmetrize_commutes_with_group_action():
    net = build_net(2, 2, "grid")
    x2, y2, _ = quadratic_basis_2d()
    swap = coordinate_swap(2, 1, 2)
    group = [OrthogonalMatrix(np.eye(2)), swap]
    proj = oracle_helpers.random_projection(net, [x2 + y2], seed=5)
    sym = symmetrize_discrete_projection(proj, group)
    qmat = sym.as_matrix()
    rng = np.random.default_rng(0)
    lookup = {np.round(p, 9).tobytes(): i for i, p in enumerate(net.points)}
    perm = np.array([lookup[np.round(swap.m @ p, 9).tobytes()] for p in net.points])
    for _ in range(10):
        f = rng.standard_normal(net.size)
        f[0] = 0.0
        lhs = (qmat @ f[perm])  # Q(f o g)
        rhs = (qmat @ f)[perm]  # (Qf) o g
        assert np.max(np.abs(lhs - rhs)) <= 1e-10


def test_symmetrize_requires_invariant_net():
    net = FiniteBallNet(np.array([[0.0], [0.3], [0.7]]))
    proj = l2_projection(net, [Quadratic(np.eye(1))])
    with pytest.raises(ContractError):
        symmetrize_discrete_projection(proj, sign_flip_group(1))


def test_symmetrize_requires_invariant_subspace():
    # net symmetric under the quarter turn, subspace span{x^2} is not invariant
    from lipproj.geometry import embed_so2_rotation

    ang = 2 * np.pi * np.arange(4) / 4
    net = FiniteBallNet(np.vstack([np.zeros((1, 2)), 0.8 * np.stack([np.cos(ang), np.sin(ang)], axis=1)]))
    x2, _, _ = quadratic_basis_2d()
    proj = l2_projection(net, [x2])
    quarter = embed_so2_rotation(2, np.pi / 2)
    with pytest.raises(ContractError):
        symmetrize_discrete_projection(proj, [OrthogonalMatrix(np.eye(2)), quarter])
