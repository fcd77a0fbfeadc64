"""Gaussian matrix-element noise and the error norms that feed the bounds.

Noise convention: every strictly-upper entry receives ``x + iy`` with
``x, y ~ N(0, w/sqrt(2))`` (total variance ``w**2``), every diagonal entry a
real ``N(0, w)``, and the lower triangle mirrors the conjugate. The width is
``w = sigma`` for S and ``w = hScale * sigma`` for H.

Seeding: a trial's stream is ``numpy.random.SeedSequence(master_seed,
spawn_key=(sigma_index, d, trial_index))`` fed to PCG64. The S noise is drawn
first, then the H noise, each as a ``(2, D, D)`` block of standard normals.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import PreconditionError
from .pencil import KrylovPencil

CONVENTION = "complex-hermitian: offdiag x+iy, x,y~N(0,w/sqrt2); diag real N(0,w); lower = conj(upper)"


@dataclass(frozen=True)
class NoiseSpec:
    sigma: float
    hScale: float
    seed: int = 0
    model: Literal["gaussian"] = "gaussian"

    def __post_init__(self):
        if not (np.isfinite(self.sigma) and self.sigma >= 0):
            raise PreconditionError(f"sigma must be finite and >= 0, got {self.sigma}")
        if not self.hScale >= 0:
            raise PreconditionError(f"hScale must be >= 0, got {self.hScale}")


@dataclass(frozen=True)
class NoisyPencil:
    Hp: np.ndarray
    Sp: np.ndarray
    dH: float
    dS: float

    @property
    def D(self) -> int:
        return self.Sp.shape[0]


def trial_rng(master_seed: int, sigma_index: int = 0, d: int = 0, trial_index: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(sigma_index), int(d), int(trial_index)))
    return np.random.Generator(np.random.PCG64(ss))


def hermitian_from_normals(z: np.ndarray) -> np.ndarray:
    """Unit-width Hermitian noise from standard normals of shape ``(..., 2, D, D)``."""
    re, im = z[..., 0, :, :], z[..., 1, :, :]
    upper = np.triu((re + 1j * im) / np.sqrt(2.0), 1)
    diag = np.diagonal(re, axis1=-2, axis2=-1)
    out = upper + np.conj(np.swapaxes(upper, -1, -2))
    idx = np.arange(z.shape[-1])
    out[..., idx, idx] = diag
    return out


def draw_unit_noise(rng: np.random.Generator, D: int) -> tuple[np.ndarray, np.ndarray]:
    """(S noise, H noise) of unit width for one trial."""
    zs = rng.standard_normal((2, D, D))
    zh = rng.standard_normal((2, D, D))
    return hermitian_from_normals(zs), hermitian_from_normals(zh)


def spectral_norm(a: np.ndarray) -> float | np.ndarray:
    """Spectral norm of Hermitian matrices (batched over leading axes)."""
    w = np.linalg.eigvalsh(a)
    return np.abs(w).max(axis=-1)


def perturb_gaussian(pencil: KrylovPencil, spec: NoiseSpec, rng: np.random.Generator | None = None) -> NoisyPencil:
    if rng is None:
        rng = trial_rng(spec.seed)
    if spec.sigma == 0:
        return NoisyPencil(pencil.Hmat.copy(), pencil.Smat.copy(), 0.0, 0.0)
    ns, nh = draw_unit_noise(rng, pencil.D)
    ns *= spec.sigma
    nh *= spec.hScale * spec.sigma
    return NoisyPencil(pencil.Hmat + nh, pencil.Smat + ns, float(spectral_norm(nh)), float(spectral_norm(ns)))


def error_norms(ideal: KrylovPencil, noisy: NoisyPencil, hNorm: float) -> tuple[float, float]:
    """(eta, chi) from the realized differences.

    ``chi = ||H'-H|| + ||S'-S|| ||H||`` and ``eta = max(||S'-S||, ||H'-H|| / ||H||)``.
    """
    if ideal.Smat.shape != noisy.Sp.shape:
        raise PreconditionError("pencil dimensions differ")
    if hNorm == 0:
        raise ZeroDivisionError("eta is undefined for ||H|| = 0")
    dH = float(spectral_norm(noisy.Hp - ideal.Hmat))
    dS = float(spectral_norm(noisy.Sp - ideal.Smat))
    return max(dS, dH / hNorm), dH + dS * hNorm
