import math

import numpy as np
import pytest

from maxminlyap.errors import InvalidInputError
from maxminlyap.numkernel import (
    Spectrum,
    eig_sym,
    expm,
    is_positive_definite,
    negdef_margin,
    project_psd,
    solve_lyapunov,
)

R2 = math.sqrt(2.0)


def test_eig_identity():
    s = eig_sym(np.eye(2))
    np.testing.assert_allclose(s.eigenvalues, [1.0, 1.0])


def test_eig_hand_roots():
    # characteristic polynomial of [[1, r], [r, 1]]: (1-l)^2 = r^2
    s = eig_sym(np.array([[1.0, R2], [R2, 1.0]]))
    np.testing.assert_allclose(s.eigenvalues, [1.0 - R2, 1.0 + R2], atol=1e-12)


def test_eig_diagonal_axes():
    s = eig_sym(np.diag([3.0, -5.0]))
    np.testing.assert_allclose(s.eigenvalues, [-5.0, 3.0])
    np.testing.assert_allclose(np.abs(s.eigenvectors), np.eye(2)[:, ::-1], atol=1e-14)


def test_eig_reconstruction_random():
    rng = np.random.default_rng(7)
    for _ in range(200):
        n = rng.integers(1, 7)
        B = rng.standard_normal((n, n))
        M = 0.5 * (B + B.T)
        s = eig_sym(M)
        scale = max(1.0, float(np.abs(M).max()))
        assert np.abs(s.reconstruct() - M).max() <= 1e-10 * scale
        assert np.abs(s.eigenvectors.T @ s.eigenvectors - np.eye(n)).max() <= 1e-10
        assert np.all(np.diff(s.eigenvalues) >= -1e-14)


def test_eig_rejects_nonfinite():
    with pytest.raises(InvalidInputError):
        eig_sym(np.array([[np.nan, 0.0], [0.0, 1.0]]))
    with pytest.raises(InvalidInputError):
        eig_sym(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_expm_zero_is_identity():
    np.testing.assert_allclose(expm(np.zeros((3, 3)), 2.7), np.eye(3))


def test_expm_diagonal():
    got = expm(np.diag([0.3, -1.2]), 2.0)
    np.testing.assert_allclose(got, np.diag([np.exp(0.6), np.exp(-2.4)]), rtol=1e-12)


def test_expm_benchmark_closed_form():
    # e^{A t} = e^{-t/10} [[cos(s5 t), sin(s5 t)/s5], [-s5 sin(s5 t), cos(s5 t)]]
    A = np.array([[-0.1, 1.0], [-5.0, -0.1]])
    s5 = math.sqrt(5.0)
    for t in (0.1, 0.7, 1.9):
        c, s = math.cos(s5 * t), math.sin(s5 * t)
        want = math.exp(-t / 10.0) * np.array([[c, s / s5], [-s5 * s, c]])
        np.testing.assert_allclose(expm(A, t), want, atol=1e-8)
    # quarter period: cos = -1, sin = 0
    t = math.pi / s5
    want = -math.exp(-t / 10.0) * np.eye(2)
    np.testing.assert_allclose(expm(A, t), want, atol=1e-8)


def test_expm_semigroup_random():
    rng = np.random.default_rng(11)
    for _ in range(50):
        n = rng.integers(2, 4)
        A = rng.standard_normal((n, n))
        s, t = rng.uniform(0.1, 1.0, size=2)
        left = expm(A, s) @ expm(A, t)
        np.testing.assert_allclose(left, expm(A, s + t), atol=1e-8, rtol=1e-8)


def test_negdef_margin_values():
    assert negdef_margin(-np.eye(3)) == pytest.approx(-1.0)
    # symmetrized unstable mode with P = I: diagonal read-off
    assert negdef_margin(np.diag([3.8, -4.2])) == pytest.approx(3.8)
    assert negdef_margin(np.zeros((2, 2))) == pytest.approx(0.0)


def test_negdef_margin_rayleigh_upper_bound():
    rng = np.random.default_rng(13)
    B = rng.standard_normal((4, 4))
    M = 0.5 * (B + B.T)
    margin = negdef_margin(M)
    dirs = rng.standard_normal((10_000, 4))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    sampled = np.einsum("si,ij,sj->s", dirs, M, dirs).max()
    assert sampled <= margin + 1e-6
    assert margin - sampled <= 0.05 * max(1.0, abs(margin)) + 1e-6


def test_solve_lyapunov():
    A = np.array([[-1.0, 0.3], [0.0, -2.0]])
    P = solve_lyapunov(A)
    np.testing.assert_allclose(A.T @ P + P @ A, -np.eye(2), atol=1e-10)
    assert is_positive_definite(P)


def test_project_psd_floor():
    M = np.diag([2.0, -3.0])
    got = project_psd(M, floor=0.5)
    np.testing.assert_allclose(got, np.diag([2.0, 0.5]))


def test_spectrum_type():
    s = eig_sym(np.diag([1.0, 2.0]))
    assert isinstance(s, Spectrum)
