import numpy as np
import pytest
from hypothesis import given, settings

from conftest import seeds, skew, unitary
from unifinsler.center import f_A
from unifinsler.errors import NotHomomorphism, NotProjection, RadiusTooLarge
from unifinsler.experiments import conjugated_action, cyclic_shift, permutation_matrix
from unifinsler.linalg import exp_skew, op_norm
from unifinsler.metric import d_2, d_inf
from unifinsler.rigidity import (FiniteGroupAction, conjugation_orbit, find_fixed_point,
                                 find_intertwiner, find_invariant_projection, orbit)
from unifinsler.subspaces import SpecialUnitary

S3 = [cyclic_shift(3), permutation_matrix([1, 0, 2])]


def negation():
    return FiniteGroupAction(["e", "s"], [[0, 1], [1, 0]], [[[1]], [[-1]]], [[[1]], [[1]]])


def test_table_validation():
    with pytest.raises(NotHomomorphism):
        FiniteGroupAction(["e", "s"], [[0, 1], [1, 0]], [[[1]], [[1j]]], [[[1]], [[1]]])
    with pytest.raises(NotHomomorphism):
        FiniteGroupAction(["e"], [[0]], [[[1]]], [])


def test_from_generators_orders():
    assert len(FiniteGroupAction.conjugation([cyclic_shift(3)])) == 3
    assert len(FiniteGroupAction.conjugation(S3)) == 6
    with pytest.raises(NotHomomorphism):
        FiniteGroupAction.conjugation([np.diag([np.exp(1j), 1])])


@settings(max_examples=15)
@given(seed=seeds)
def test_action_is_isometric(seed):
    action = conjugated_action(S3, exp_skew(skew(3, seed, norm=0.3)))
    u, v = unitary(3, seed + 1), unitary(3, seed + 2)
    for i in range(len(action)):
        pu, pv = action.apply(i, u), action.apply(i, v)
        assert d_2(pu, pv) == pytest.approx(d_2(u, v), abs=1e-9)
        assert d_inf(pu, pv) == pytest.approx(d_inf(u, v), abs=1e-9)


@settings(max_examples=15)
@given(seed=seeds)
def test_orbit_function_invariant(seed):
    action = FiniteGroupAction.conjugation(S3)
    rep = orbit(action, unitary(3, seed))
    u = unitary(3, seed + 1)
    base = f_A(rep.points, u)
    for i in range(len(action)):
        assert f_A(rep.points, action.apply(i, u)) == pytest.approx(base, abs=1e-9)


def test_orbit_closed_under_action():
    action = FiniteGroupAction.conjugation(S3)
    rep = orbit(action, unitary(3, 4))
    for p in rep.points:
        for i in range(len(action)):
            q = action.apply(i, p)
            assert min(op_norm(q - r) for r in rep.points) <= 1e-8


def test_trivial_orbit():
    action = FiniteGroupAction(["e"], [[0]], [np.eye(2)], [np.eye(2)])
    v = unitary(2, 1)
    assert len(orbit(action, v).points) == 1


def test_negation_orbit_on_circle():
    rep = orbit(negation(), np.eye(1))
    assert len(rep.points) == 2
    assert rep.radius_bound == pytest.approx(np.pi / 2)
    # the witness sits on the imaginary axis, like i
    assert abs(rep.witness[0, 0].real) <= 1e-8


def test_z3_orbit_size():
    action = FiniteGroupAction.conjugation([cyclic_shift(3)])
    assert len(orbit(action, unitary(3, 9)).points) <= 3


def test_fixed_point_of_fixed_vector():
    action = FiniteGroupAction.conjugation(S3)
    v = exp_skew(np.full((3, 3), 0.2j))  # commutes with permutations
    res = find_fixed_point(action, v)
    assert op_norm(res.point - v) <= 1e-8
    assert res.displacement <= 1e-12


def test_fixed_point_radius_too_large():
    with pytest.raises(RadiusTooLarge) as info:
        find_fixed_point(negation(), np.eye(1))
    assert info.value.bound == pytest.approx(np.pi / 2, abs=1e-9)


def test_fixed_point_explicit_radius_range():
    action = FiniteGroupAction.conjugation(S3)
    v = exp_skew(skew(3, 2, norm=0.2))
    with pytest.raises(ValueError):
        find_fixed_point(action, v, r=1.7)


def test_fixed_point_in_su():
    action = conjugated_action([cyclic_shift(3)], exp_skew(skew(3, 6, norm=0.3)))
    u0 = np.eye(3, dtype=complex)
    res = find_fixed_point(action, u0, SpecialUnitary(3))
    assert res.displacement <= 1e-6
    assert abs(np.linalg.det(res.point) - 1) <= 1e-8


def test_intertwiner_trivial():
    action = FiniteGroupAction.conjugation(S3)
    res = find_intertwiner(action)
    assert op_norm(res.g - np.eye(3)) <= 1e-10
    assert res.residual <= 1e-12


@pytest.mark.parametrize("gens", [[cyclic_shift(3)], S3], ids=["Z3", "S3"])
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_intertwiner_recovery(gens, seed):
    g0 = exp_skew(skew(3, seed, norm=0.3))
    res = find_intertwiner(conjugated_action(gens, g0))
    assert res.residual <= 1e-6


def test_inequivalent_characters():
    sign = FiniteGroupAction(["e", "s"], [[0, 1], [1, 0]], [[[1]], [[-1]]], [[[1]], [[1]]])
    with pytest.raises(RadiusTooLarge):
        find_intertwiner(sign)


def test_projection_trivial_group():
    p0 = np.diag([0.0, 1.0, 0.0])
    res = find_invariant_projection([np.eye(3)], 1, p0)
    assert op_norm(res.q - p0) <= 1e-10


def test_projection_block_symmetry():
    h = np.diag([-1.0, -1.0, 1.0]).astype(complex)
    vec = np.array([0.2, 0.1j, 1.0])
    vec /= np.linalg.norm(vec)
    res = find_invariant_projection([h], 1, np.outer(vec, vec.conj()))
    assert op_norm(res.q - np.diag([0.0, 0.0, 1.0])) <= 1e-6
    assert res.commutator <= 1e-6
    assert np.trace(res.q).real == pytest.approx(1)


def test_projection_coordinate_swap():
    with pytest.raises(RadiusTooLarge):
        find_invariant_projection([permutation_matrix([1, 0])], 1, np.diag([1.0, 0.0]))


def test_projection_input_checks():
    with pytest.raises(NotProjection):
        find_invariant_projection([np.eye(2)], 1, np.array([[1.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(NotProjection):
        find_invariant_projection([np.eye(2)], 1, np.eye(2))


def test_grassmannian_orbit_diameter():
    # d_2 diameter of conjugation orbits on Gr_1(C^3) is at most that of the symmetries, pi sqrt(2)
    orbit_pts = conjugation_orbit(S3, np.diag([-1.0, 1.0, 1.0]).astype(complex))
    diam = max(d_2(a, b) for a in orbit_pts for b in orbit_pts)
    assert len(orbit_pts) == 3
    assert diam <= np.pi * np.sqrt(2) + 1e-9
