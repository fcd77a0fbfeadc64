import numpy as np
import pytest

import qkrylov as q
from qkrylov.noise import (
    NoiseSpec,
    NoisyPencil,
    error_norms,
    hermitian_from_normals,
    perturb_gaussian,
    spectral_norm,
    trial_rng,
)
from qkrylov.pencil import default_dt


def toy_pencil(D=5, scale=1.0):
    d = (D - 1) // 2
    return q.KrylovPencil(d, 0.1, scale * np.diag(np.arange(D, dtype=complex)), np.eye(D, dtype=complex))


def power_norm(a, iters=2000, seed=0):
    """Oracle: power iteration on a^dag a."""
    x = np.random.default_rng(seed).standard_normal(a.shape[0]) + 0j
    for _ in range(iters):
        x = a.conj().T @ (a @ x)
        x /= np.linalg.norm(x)
    return np.sqrt(np.linalg.norm(a.conj().T @ (a @ x)))


def test_zero_sigma_is_identity():
    p = toy_pencil()
    n = perturb_gaussian(p, NoiseSpec(0.0, 3.0))
    np.testing.assert_array_equal(n.Hp, p.Hmat)
    np.testing.assert_array_equal(n.Sp, p.Smat)
    assert n.dH == 0 and n.dS == 0


def test_invalid_spec():
    with pytest.raises(q.PreconditionError):
        NoiseSpec(-1e-3, 1.0)
    with pytest.raises(q.PreconditionError):
        NoiseSpec(float("nan"), 1.0)


def test_determinism():
    p = toy_pencil(7)
    a = perturb_gaussian(p, NoiseSpec(1e-3, 2.0), trial_rng(5, 1, 3, 7))
    b = perturb_gaussian(p, NoiseSpec(1e-3, 2.0), trial_rng(5, 1, 3, 7))
    c = perturb_gaussian(p, NoiseSpec(1e-3, 2.0), trial_rng(5, 1, 3, 8))
    np.testing.assert_array_equal(a.Hp, b.Hp)
    np.testing.assert_array_equal(a.Sp, b.Sp)
    assert not np.array_equal(a.Sp, c.Sp)


def test_noise_is_hermitian_with_stated_widths():
    rng = np.random.default_rng(3)
    z = rng.standard_normal((4000, 2, 4, 4))
    n = hermitian_from_normals(z)
    np.testing.assert_array_equal(n, np.conj(np.swapaxes(n, -1, -2)))
    assert np.all(np.diagonal(n, axis1=-2, axis2=-1).imag == 0)
    off = n[:, 0, 1]
    assert abs(np.std(off.real) - 1 / np.sqrt(2)) < 0.03
    assert abs(np.std(off.imag) - 1 / np.sqrt(2)) < 0.03
    assert abs(np.std(n[:, 2, 2].real) - 1) < 0.04


def test_h_noise_scaled_by_operator_norm():
    p = toy_pencil(5)
    n = perturb_gaussian(p, NoiseSpec(1e-2, 7.0), trial_rng(0))
    rng = trial_rng(0)
    zs = hermitian_from_normals(rng.standard_normal((2, 5, 5)))
    zh = hermitian_from_normals(rng.standard_normal((2, 5, 5)))
    np.testing.assert_allclose(n.Sp - p.Smat, 1e-2 * zs, atol=1e-15)
    np.testing.assert_allclose(n.Hp - p.Hmat, 7e-2 * zh, atol=1e-14)


@pytest.mark.parametrize("D", [3, 11, 31, 71])
def test_norm_scale_within_factor_two(D):
    sigma = 1e-4
    p = toy_pencil(D)
    ds = [perturb_gaussian(p, NoiseSpec(sigma, 1.0), trial_rng(1, 0, D, t)).dS for t in range(200)]
    ratio = np.median(ds) / (sigma * np.sqrt(D))
    assert 0.5 <= ratio <= 2.0


def test_spectral_norm_against_power_iteration():
    rng = np.random.default_rng(11)
    for _ in range(5):
        a = hermitian_from_normals(rng.standard_normal((2, 9, 9)))
        assert np.isclose(spectral_norm(a), power_norm(a), rtol=1e-8)
        assert np.isclose(spectral_norm(a), np.linalg.norm(a, 2), rtol=1e-12)


def test_spectral_norm_batched():
    rng = np.random.default_rng(2)
    a = hermitian_from_normals(rng.standard_normal((6, 2, 5, 5)))
    np.testing.assert_allclose(spectral_norm(a), [np.linalg.norm(m, 2) for m in a], rtol=1e-12)


def test_error_norms_examples():
    p = toy_pencil(3)
    dS = np.diag([0.0, 0.0, 1e-3]).astype(complex)
    dH = np.diag([0.0, -4e-3, 0.0]).astype(complex)
    noisy = NoisyPencil(p.Hmat + dH, p.Smat + dS, 0, 0)
    eta, chi = error_norms(p, noisy, 2.0)
    assert np.isclose(eta, max(1e-3, 4e-3 / 2))
    assert np.isclose(chi, 4e-3 + 1e-3 * 2.0)
    eta0, chi0 = error_norms(p, NoisyPencil(p.Hmat, p.Smat, 0, 0), 2.0)
    assert eta0 == 0 and chi0 == 0


def test_error_norms_zero_operator_norm():
    p = toy_pencil(3)
    with pytest.raises(ZeroDivisionError):
        error_norms(p, NoisyPencil(p.Hmat, p.Smat, 0, 0), 0.0)


def test_error_norms_dimension_mismatch():
    with pytest.raises(q.PreconditionError):
        error_norms(toy_pencil(3), NoisyPencil(np.eye(5), np.eye(5), 0, 0), 1.0)
