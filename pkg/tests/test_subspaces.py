import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import near, seeds, skew, unitary
from unifinsler.errors import ConfigError, LengthParameterExceeded, RadiusViolation
from unifinsler.experiments import (antipodal_su_instance, random_special_unitary,
                                   random_traceless_skew)
from unifinsler.linalg import exp_skew, op_norm
from unifinsler.metric import BallSpec, d_inf, geodesic_between
from unifinsler.sampling import random_symmetry
from unifinsler.subspaces import (BallIntersection, ConvexHull, FixedPointSet, FullGroup,
                                  Grassmannian, Orthogonal, SpecialUnitary, Subgroup,
                                  convex_hull_sample, geodesic_closure_check, member,
                                  projection_from_symmetry, projection_residual,
                                  subspace_from_config, symmetry_from_projection)


def test_member_examples():
    ok = member(SpecialUnitary(3), np.eye(3))
    assert ok.inside and ok.residual == pytest.approx(0, abs=1e-15)
    e = symmetry_from_projection(np.diag([1.0, 0, 0]))
    assert member(Grassmannian(rank=1), e).inside
    bad = member(SpecialUnitary(2), np.diag([1j, 1]))
    assert not bad.inside and bad.residual == pytest.approx(np.sqrt(2))


def test_length_parameters():
    assert SpecialUnitary(1).length_parameter == pytest.approx(np.pi)
    assert SpecialUnitary(2).length_parameter == pytest.approx(np.pi)
    assert SpecialUnitary(5).length_parameter == pytest.approx(2 * np.pi / 5)
    assert FullGroup().length_parameter == np.pi


def test_su3_closure_example():
    theta = 2.0
    v = exp_skew(np.diag([1j * theta, -1j * theta, 0]))
    rep = geodesic_closure_check(SpecialUnitary(3), np.eye(3), v)
    assert rep.max_residual <= 1e-9


def test_su2_antipodal_forced():
    u, v = antipodal_su_instance(2)
    with pytest.raises(LengthParameterExceeded):
        geodesic_closure_check(SpecialUnitary(2), u, v)
    rep = geodesic_closure_check(SpecialUnitary(2), u, v, np.linspace(0, 1, 11), force=True)
    assert rep.branch_ambiguity
    # log(-id) = diag(i pi, i pi) so det(eval(t)) = exp(2 pi i t)
    assert np.allclose(rep.residuals, np.abs(np.exp(2j * np.pi * rep.t) - 1), atol=1e-9)
    assert rep.residuals[5] == pytest.approx(2)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_su_random_pairs(n):
    rng = np.random.default_rng(n)
    space = SpecialUnitary(n)
    for _ in range(10):
        u = random_special_unitary(n, rng)
        x = random_traceless_skew(n, rng, rng.uniform(0, 0.999 * space.length_parameter))
        v = u @ exp_skew(x)
        assert d_inf(u, v) < space.length_parameter
        assert geodesic_closure_check(space, u, v).max_residual <= 1e-8


def test_grassmannian_trace_constant():
    rng = np.random.default_rng(5)
    space = Grassmannian(rank=2)
    u, v = random_symmetry(5, rng, rank=2), random_symmetry(5, rng, rank=2)
    g = geodesic_between(u, v)
    traces = [np.trace(g.at(t)).real for t in np.linspace(0, 1, 11)]
    assert np.ptp(traces) <= 1e-9
    assert geodesic_closure_check(space, u, v).max_residual <= 1e-8


def test_grassmannian_normalized_trace():
    e = symmetry_from_projection(np.diag([1.0, 1.0, 0, 0]))
    assert member(Grassmannian(trace_value=0.5), e).inside
    assert not member(Grassmannian(trace_value=0.25), e).inside
    with pytest.raises(ConfigError):
        Grassmannian()


def test_projection_roundtrip():
    p = projection_from_symmetry(random_symmetry(4, 1, rank=2))
    assert projection_residual(p) <= 1e-12
    assert np.trace(p).real == pytest.approx(2)


@given(seed=seeds, n=st.integers(1, 6))
def test_orthogonal_closure(seed, n):
    rng = np.random.default_rng(seed)
    basis = unitary(n, seed + 1)
    space = Orthogonal(basis)

    def orth():
        a = rng.standard_normal((n, n))
        q = np.linalg.qr(a)[0]
        return basis @ q @ basis.conj().T

    u, v = orth(), orth()
    assert member(space, u).inside and member(space, v).inside
    if d_inf(u, v) < np.pi - 1e-6:
        assert geodesic_closure_check(space, u, v).max_residual <= 1e-8


@given(seed=seeds)
def test_fixed_point_set_closure(seed):
    # commutant of a diagonal symmetry: block-diagonal unitaries
    h = np.diag([1.0, 1.0, -1.0]).astype(complex)
    space = FixedPointSet([np.eye(3), h], [np.eye(3), h])

    def block(s):
        out = np.zeros((3, 3), dtype=complex)
        out[:2, :2] = unitary(2, s)
        out[2, 2] = np.exp(1j * np.random.default_rng(s).uniform(-3, 3))
        return out

    u, v = block(seed), block(seed + 1)
    if d_inf(u, v) < np.pi - 1e-6:
        assert geodesic_closure_check(space, u, v).max_residual <= 1e-8


@given(seed=seeds, r=st.floats(0.1, np.pi / 2 - 0.01))
def test_ball_convexity(seed, r):
    w = unitary(4, seed)
    u, v = near(w, r, seed + 1), near(w, r, seed + 2)
    space = BallIntersection([BallSpec(w, r)])
    assert geodesic_closure_check(space, u, v).max_residual <= 1e-8


def test_subgroup_oracle():
    # diagonal unitaries as a user subgroup
    space = Subgroup(lambda u: op_norm(u - np.diag(np.diag(u))))
    u, v = np.diag(np.exp(1j * np.array([0.3, 2.0]))), np.diag(np.exp(1j * np.array([-1.0, 0.5])))
    assert geodesic_closure_check(space, u, v).max_residual <= 1e-12


def test_hull_singleton():
    u = unitary(3, 0)
    pts = convex_hull_sample([u], u, 0.5, depth=2, count=5)
    assert all(op_norm(p - u) <= 1e-10 for p in pts)


def test_hull_commuting_is_diagonal():
    v = np.diag([np.exp(0.8j), np.exp(-0.8j)])
    pts = convex_hull_sample([np.eye(2), v], np.eye(2), 1.0, depth=1, count=20)
    assert all(op_norm(p - np.diag(np.diag(p))) <= 1e-12 for p in pts)


def test_hull_stays_in_ball():
    rng = np.random.default_rng(8)
    w = np.eye(3, dtype=complex)
    seeds_ = [w @ exp_skew(skew(3, int(rng.integers(1 << 30)), norm=rng.uniform(0, 1.0)))
              for _ in range(3)]
    pts = convex_hull_sample(seeds_, w, 1.0, depth=2, count=250, seed=3)
    assert len(pts) == 250
    assert max(d_inf(p, w) for p in pts) <= 1.0 + 1e-8
    again = convex_hull_sample(seeds_, w, 1.0, depth=2, count=250, seed=3)
    assert all(np.array_equal(a, b) for a, b in zip(pts, again))


def test_hull_rejects_outside_seed():
    with pytest.raises(RadiusViolation):
        convex_hull_sample([np.diag([np.exp(1.2j), 1])], np.eye(2), 1.0)
    with pytest.raises(RadiusViolation):
        convex_hull_sample([np.eye(2)], np.eye(2), 2.0)


@pytest.mark.parametrize("space", [
    FullGroup(), SpecialUnitary(3), Orthogonal(), Grassmannian(rank=1),
    Grassmannian(trace_value=1 / 3),
    FixedPointSet([np.eye(3)], [np.eye(3)]),
    BallIntersection([BallSpec(np.eye(3), 1.0)]),
    ConvexHull([np.eye(3)], np.eye(3), 0.5),
])
def test_config_roundtrip(space):
    again = subspace_from_config(space.to_config())
    assert type(again) is type(space)
    e = symmetry_from_projection(np.diag([1.0, 0, 0]))
    assert again.residual(e) == pytest.approx(space.residual(e))


def test_config_errors():
    with pytest.raises(ConfigError):
        subspace_from_config({"kind": "nonsense"})
    with pytest.raises(ConfigError):
        subspace_from_config({})
