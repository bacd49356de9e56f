import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from uplink_isac import linalg as la
from uplink_isac.errors import InvalidArgumentError, SolverError

from conftest import crandn


def test_vec_unvec_roundtrip(rng):
    M = crandn(rng, 3, 5)
    v = la.vec(M)
    assert np.array_equal(v[:3], M[:, 0])  # column-major
    assert np.array_equal(la.unvec(v, 3, 5), M)


def test_unvec_rejects_wrong_length():
    with pytest.raises(InvalidArgumentError):
        la.unvec(np.zeros(7), 2, 3)


def test_vec_kron_identity(rng):
    # vec(A X B) = (B^T kron A) vec(X)
    A, X, B = crandn(rng, 3, 4), crandn(rng, 4, 2), crandn(rng, 2, 5)
    assert np.allclose(la.vec(A @ X @ B), la.kron(B.T, A) @ la.vec(X))


def test_numerical_rank(rng):
    U = crandn(rng, 6, 2)
    assert la.numerical_rank(U @ U.conj().T) == 2
    assert la.numerical_rank(np.zeros((3, 3))) == 0


def test_gram_inverse_names_deficient_matrix(rng):
    a = crandn(rng, 5, 1)
    A = np.hstack([a, 2 * a])
    with pytest.raises(SolverError, match="A_r"):
        la.gram_inverse(A, "A_r")


def test_projector_properties(rng):
    A = crandn(rng, 8, 3)
    P = la.orth_complement_projector(A)
    assert np.allclose(P, P.conj().T)
    assert np.allclose(P @ P, P)
    assert np.linalg.norm(P @ A) < 1e-12
    assert np.isclose(np.trace(P).real, 5)


def test_hermitian_eig_sorted_and_rejects_non_hermitian(rng):
    B = crandn(rng, 4, 4)
    w, V = la.hermitian_eig(B @ B.conj().T)
    assert np.all(np.diff(w) <= 0)
    with pytest.raises(InvalidArgumentError):
        la.hermitian_eig(B)


def test_ls_solve_matches_lstsq(rng):
    A, b = crandn(rng, 7, 3), crandn(rng, 7)
    assert np.allclose(la.ls_solve(A, b), np.linalg.lstsq(A, b, rcond=None)[0])


@settings(max_examples=40, deadline=None)
@given(m=st.integers(2, 8), data=st.data())
def test_ls_decomposition_identity_property(m, data):
    n = data.draw(st.integers(1, m - 1))
    seed = data.draw(st.integers(0, 2 ** 32 - 1))
    rng = np.random.default_rng(seed)
    A, b, x = crandn(rng, m, n), crandn(rng, m), crandn(rng, n)
    x_ls = la.ls_solve(A, b)
    P = la.orth_complement_projector(A)
    lhs = np.linalg.norm(b - A @ x) ** 2
    rhs = np.linalg.norm(A @ (x - x_ls)) ** 2 + np.real(b.conj() @ P @ b)
    assert abs(lhs - rhs) <= 1e-9 * lhs
