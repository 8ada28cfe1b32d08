import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings

from contractionkit.matrix_core import (
    NotPositiveDefiniteError,
    NotSymmetricError,
    is_positive_definite,
    kron,
    sqrt_pd,
    sym_eig,
    symmetric_part,
)

from conftest import pd_matrices, symmetric_matrices


def test_sym_eig_diagonal():
    w, V = sym_eig(np.diag([2.0, 3.0]))
    np.testing.assert_allclose(w, [2, 3])
    np.testing.assert_allclose(np.abs(V), np.eye(2))


def test_sym_eig_permutation():
    w, _ = sym_eig([[0.0, 1.0], [1.0, 0.0]])
    np.testing.assert_allclose(w, [-1, 1])


def test_sym_eig_matches_characteristic_polynomial():
    # lambda^2 - 4 lambda + 3
    roots = np.sort(np.roots([1.0, -4.0, 3.0]))
    w, _ = sym_eig([[2.0, 1.0], [1.0, 2.0]])
    np.testing.assert_allclose(w, roots, atol=1e-14)
    np.testing.assert_allclose(w, [1, 3], atol=1e-14)


def test_sym_eig_rejects_asymmetry_and_names_entry():
    with pytest.raises(NotSymmetricError) as exc:
        sym_eig([[1.0, 0.0, 0.0], [0.0, 1.0, 0.5], [0.0, 0.0, 1.0]])
    assert set(exc.value.index) == {1, 2}
    assert "[1,2]" in str(exc.value) or "[2,1]" in str(exc.value)


def test_sym_eig_tolerates_roundoff_asymmetry():
    S = np.array([[1.0, 2.0], [2.0 + 1e-14, 5.0]])
    w, _ = sym_eig(S)
    assert w[0] < w[1]


@settings(max_examples=200, deadline=None)
@given(symmetric_matrices())
def test_sym_eig_residual_and_reconstruction(S):
    w, V = sym_eig(S)
    scale = max(1.0, np.abs(S).max())
    assert np.all(np.diff(w) >= 0)
    np.testing.assert_allclose(V.T @ V, np.eye(len(w)), atol=1e-10)
    np.testing.assert_allclose(S @ V, V * w, atol=1e-9 * scale)
    np.testing.assert_allclose((V * w) @ V.T, S, atol=1e-9 * scale)


@pytest.mark.parametrize(
    "S, expected",
    [
        (np.eye(2), (True, 1.0)),
        (np.ones((2, 2)), (False, 0.0)),
        (np.array([[2.0, 1.0], [1.0, 2.0]]), (True, 1.0)),
    ],
)
def test_is_positive_definite(S, expected):
    flag, lam = is_positive_definite(S, 0.0 if expected[0] or expected[1] else None)
    assert flag == expected[0]
    assert lam == pytest.approx(expected[1], abs=1e-14)


def test_default_pd_threshold_rejects_singular():
    flag, lam = is_positive_definite(np.ones((2, 2)))
    assert not flag and abs(lam) < 1e-15


def test_sqrt_pd_examples():
    np.testing.assert_allclose(sqrt_pd(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]), atol=1e-14)
    np.testing.assert_allclose(sqrt_pd(np.eye(3)), np.eye(3), atol=1e-15)
    r3 = np.sqrt(3.0)
    expected = np.array([[(r3 + 1) / 2, (r3 - 1) / 2], [(r3 - 1) / 2, (r3 + 1) / 2]])
    P = sqrt_pd([[2.0, 1.0], [1.0, 2.0]])
    np.testing.assert_allclose(P, expected, atol=1e-14)
    np.testing.assert_allclose(P, np.real(scipy.linalg.sqrtm([[2.0, 1.0], [1.0, 2.0]])), atol=1e-12)


def test_sqrt_pd_rejects_indefinite():
    with pytest.raises(NotPositiveDefiniteError) as exc:
        sqrt_pd([[1.0, 2.0], [2.0, 1.0]])
    assert exc.value.lambda_min == pytest.approx(-1.0)


def test_sqrt_pd_squares_back(rng):
    for _ in range(100):
        n = rng.integers(1, 7)
        G = rng.standard_normal((n, n))
        Q = G.T @ G + 1e-3 * np.eye(n)
        P = sqrt_pd(Q)
        np.testing.assert_allclose(P, P.T, atol=0)
        assert is_positive_definite(P)[0]
        assert np.abs(P @ P - Q).max() <= 1e-9 * np.abs(Q).max()


@settings(max_examples=100, deadline=None)
@given(pd_matrices())
def test_sqrt_pd_against_scipy(Q):
    np.testing.assert_allclose(sqrt_pd(Q), np.real(scipy.linalg.sqrtm(Q)), atol=1e-7 * max(1, np.abs(Q).max()))


def test_kron_identity_left_factor():
    B = np.arange(6.0).reshape(2, 3)
    K = kron(np.eye(2), B)
    expected = np.zeros((4, 6))
    expected[:2, :3] = B
    expected[2:, 3:] = B
    np.testing.assert_array_equal(K, expected)


def test_kron_shape_and_blocks(rng):
    A, B = rng.standard_normal((2, 3)), rng.standard_normal((4, 5))
    K = kron(A, B)
    assert K.shape == (8, 15)
    for i in range(2):
        for j in range(3):
            np.testing.assert_array_equal(K[4 * i:4 * i + 4, 5 * j:5 * j + 5], A[i, j] * B)
    np.testing.assert_array_equal(K, np.kron(A, B))


def test_kron_spectrum_example():
    K = kron(np.diag([1.0, 2.0]), np.diag([3.0, 4.0]))
    w, _ = sym_eig(K)
    np.testing.assert_allclose(w, [3, 4, 6, 8])


def test_kron_mixed_product_and_transpose(rng):
    for _ in range(100):
        m, n, p, q, r, s = rng.integers(1, 4, size=6)
        A, B = rng.standard_normal((m, n)), rng.standard_normal((p, q))
        C, D = rng.standard_normal((n, r)), rng.standard_normal((q, s))
        np.testing.assert_allclose(kron(A, B) @ kron(C, D), kron(A @ C, B @ D), atol=1e-10)
        np.testing.assert_array_equal(kron(A, B).T, kron(A.T, B.T))


def test_kron_spectrum_rule(rng):
    for _ in range(100):
        n, m = rng.integers(1, 5, size=2)
        A = rng.standard_normal((n, n))
        B = rng.standard_normal((m, m))
        A, B = A + A.T, B + B.T
        expected = np.sort(np.outer(np.linalg.eigvalsh(A), np.linalg.eigvalsh(B)).ravel())
        np.testing.assert_allclose(sym_eig(kron(A, B))[0], expected, atol=1e-8)


def test_symmetric_part():
    S = np.array([[1.0, 2.0], [2.0, 3.0]])
    np.testing.assert_array_equal(symmetric_part(S), S)
    np.testing.assert_array_equal(symmetric_part([[0.0, -1.0], [1.0, 0.0]]), np.zeros((2, 2)))
    np.testing.assert_array_equal(symmetric_part([[-1.0, 4.0], [0.0, -1.0]]), [[-1, 2], [2, -1]])
    with pytest.raises(ValueError):
        symmetric_part(np.ones((2, 3)))
