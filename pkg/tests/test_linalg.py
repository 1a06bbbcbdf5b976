import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import dims, seeds, skew, unitary
from unifinsler.errors import InvalidP, MatrixFormatError, NotNormal, NotSkewHermitian, NotUnitary
from unifinsler.io import matrix_from_json, matrix_to_json
from unifinsler.linalg import (TraceConvention, as_skew, as_unitary, dagger, eigen_angles,
                               exp_skew, log_unitary, op_norm, schatten_norm, spectral_normal,
                               trace, trace_inner)

STD, NORM = TraceConvention.STANDARD, TraceConvention.NORMALIZED


def test_spectral_identity():
    dec = spectral_normal(np.eye(3))
    assert np.allclose(dec.eigenvalues, 1)
    assert np.allclose(np.abs(dec.eigenvectors), np.eye(3))


def test_spectral_diagonal_angle_order():
    u = np.diag([np.exp(1j * np.pi / 3), np.exp(-1j * np.pi / 6)])
    lam = spectral_normal(u).eigenvalues
    assert np.allclose(lam, [np.exp(-1j * np.pi / 6), np.exp(1j * np.pi / 3)], atol=1e-14)


def test_spectral_reconstruction_n8():
    u = exp_skew(skew(8, 3))
    dec = spectral_normal(u)
    assert op_norm(u - dec.reconstruct()) <= 1e-9
    assert np.allclose(np.abs(dec.eigenvalues), 1, atol=1e-10)
    assert op_norm(dagger(dec.eigenvectors) @ dec.eigenvectors - np.eye(8)) <= 1e-10


def test_spectral_rejects_non_normal():
    with pytest.raises(NotNormal):
        spectral_normal(np.array([[0, 1], [0, 0]], dtype=complex))


def test_exp_zero_and_diagonal():
    assert np.allclose(exp_skew(np.zeros((3, 3))), np.eye(3))
    th = np.array([0.3, -1.2, 2.5])
    assert np.allclose(exp_skew(np.diag(1j * th)), np.diag(np.exp(1j * th)), atol=1e-14)


@given(n=st.integers(1, 12), seed=seeds, frac=st.floats(0.0, 1.0))
def test_chord_identity(n, seed, frac):
    x = skew(n, seed, norm=frac * np.pi)
    s = op_norm(x)
    assert abs(op_norm(np.eye(n) - exp_skew(x)) - 2 * np.sin(s / 2)) <= 1e-9


def test_exp_is_unitary():
    u = exp_skew(skew(7, 11, norm=3.0))
    assert op_norm(dagger(u) @ u - np.eye(7)) <= 1e-10


def test_log_identity_is_zero():
    assert np.allclose(log_unitary(np.eye(4)), 0)


@given(n=st.integers(1, 12), seed=seeds, frac=st.floats(0.0, 1.0))
def test_log_exp_roundtrip(n, seed, frac):
    x = skew(n, seed, norm=frac * (np.pi - 0.1))
    assert op_norm(log_unitary(exp_skew(x)) - x) <= 1e-8


@given(n=dims, seed=seeds)
def test_exp_log_roundtrip_and_branch(n, seed):
    u = unitary(n, seed)
    x = log_unitary(u)
    assert op_norm(exp_skew(x) - u) <= 1e-8 * n
    assert op_norm(x) <= np.pi + 1e-12


def test_log_minus_one_flags_branch():
    x, flag = log_unitary(np.array([[-1.0 + 0j]]), return_flag=True)
    assert flag
    assert x[0, 0] == pytest.approx(1j * np.pi)


def test_log_no_flag_off_branch():
    _, flag = log_unitary(np.diag(np.exp(1j * np.array([3.0, -3.0]))), return_flag=True)
    assert not flag


def test_eigen_angles_sorted_in_range():
    u = unitary(5, 1)
    th = eigen_angles(u)
    assert np.all(np.diff(th) >= 0)
    assert np.all((th > -np.pi) & (th <= np.pi))


def test_op_norm_examples():
    assert op_norm(np.zeros((3, 3))) == 0
    assert op_norm(np.diag([3j, -2j])) == pytest.approx(3)


@given(n=dims, seed=seeds)
def test_op_norm_gram(n, seed):
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    assert op_norm(m) == pytest.approx(np.sqrt(op_norm(dagger(m) @ m)), abs=1e-10, rel=1e-12)


def test_schatten_examples():
    assert schatten_norm(np.eye(4), 2, STD) == pytest.approx(2)
    assert schatten_norm(np.eye(4), 2, NORM) == pytest.approx(1)
    assert schatten_norm(np.diag([1.0, -1.0]), 4, STD) == pytest.approx(2 ** 0.25)


@pytest.mark.parametrize("p", [0, 1, 3, -2, 2.5])
def test_schatten_invalid_p(p):
    with pytest.raises(InvalidP):
        schatten_norm(np.eye(2), p)


def test_normalized_trace_of_identity():
    assert trace(np.eye(5), NORM) == pytest.approx(1)
    assert trace(np.eye(5), STD) == pytest.approx(5)


def test_trace_inner_examples():
    x = np.diag([1j, -1j])
    assert trace_inner(x, x, STD) == pytest.approx(2)
    assert trace_inner(np.diag([1j, 0]), np.diag([0, 1j]), STD) == 0


@given(n=dims, seed=seeds, conv=st.sampled_from([STD, NORM]))
def test_trace_inner_matches_norm(n, seed, conv):
    x = skew(n, seed)
    assert trace_inner(x, x, conv) == pytest.approx(schatten_norm(x, 2, conv) ** 2, rel=1e-12)


@given(n=dims, seed=seeds)
def test_quadratic_form(n, seed):
    y = skew(n, seed)
    q = (-2 * trace(y @ y, STD)).real
    assert q == pytest.approx(2 * schatten_norm(y, 2, STD) ** 2, rel=1e-12, abs=1e-12)


@given(n=dims, seed=seeds, p=st.sampled_from([2, 4, 6]), conv=st.sampled_from([STD, NORM]))
def test_unitary_invariance(n, seed, p, conv):
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    u, v = unitary(n, seed + 1), unitary(n, seed + 2)
    assert op_norm(u @ m @ v) == pytest.approx(op_norm(m), abs=1e-9)
    assert schatten_norm(u @ m @ v, p, conv) == pytest.approx(schatten_norm(m, p, conv), abs=1e-9)


@given(n=dims, seed=seeds)
def test_spectral_mapping(n, seed):
    x = skew(n, seed, norm=np.pi)
    got = np.linalg.eigvals(np.eye(n) - exp_skew(x))
    want = 1 - np.exp(np.linalg.eigvals(x))
    # match as multisets: greedy nearest pairing
    want = list(want)
    for z in got:
        j = int(np.argmin([abs(z - w) for w in want]))
        assert abs(z - want.pop(j)) <= 1e-9


@given(n=st.integers(1, 12), seed=seeds)
def test_commutator_bound(n, seed):
    x, y = skew(n, seed), skew(n, seed + 1)
    assert schatten_norm(x @ y - y @ x, 2) <= 2 * op_norm(x) * schatten_norm(y, 2) + 1e-9


def test_dimension_one():
    u = np.array([[np.exp(0.7j)]])
    assert log_unitary(u)[0, 0] == pytest.approx(0.7j)
    assert spectral_normal(u).eigenvalues[0] == pytest.approx(np.exp(0.7j))


def test_constructors_validate():
    with pytest.raises(NotUnitary):
        as_unitary(2 * np.eye(2))
    with pytest.raises(NotSkewHermitian):
        as_skew(np.eye(2))
    x = as_skew(np.array([[1j, 1], [-1, 0]]))
    assert np.allclose(x + dagger(x), 0)


def test_matrix_json_roundtrip():
    m = unitary(3, 4)
    obj = json.loads(json.dumps(matrix_to_json(m)))
    assert np.array_equal(matrix_from_json(obj), m)


@pytest.mark.parametrize("bad", [
    {"n": 2, "entries": [[[1, 0], [0, 0]]]},
    {"n": 1, "entries": [[[float("nan"), 0]]]},
    {"n": 1, "entries": [[[1, 0, 0]]]},
    {"n": 0, "entries": []},
    {"entries": [[[1, 0]]]},
    {"n": 1, "entries": [[["a", 0]]]},
])
def test_matrix_json_rejects(bad):
    with pytest.raises(MatrixFormatError):
        matrix_from_json(bad)
