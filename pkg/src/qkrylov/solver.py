"""Eigenvalue thresholding of the noisy overlap matrix and the reduced solve."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AllRemovedError, InternalConsistencyError, PreconditionError
from .noise import NoisyPencil

NOISELESS_FLOOR = 1e-12


@dataclass(frozen=True)
class ThresholdedProblem:
    epsilon: float
    keptBasis: np.ndarray
    Htil: np.ndarray
    Stil: np.ndarray

    @property
    def keptDim(self) -> int:
        return self.keptBasis.shape[1]


@dataclass(frozen=True)
class SolveResult:
    E0tilde: float
    spectrum: np.ndarray
    keptDim: int
    condition: float = float("nan")
    vectors: np.ndarray | None = None  # columns are generalized eigenvectors in the D-dim coordinates


def epsilon_rule(D: int, sigma: float) -> float:
    """Threshold 0.1 * D * sigma. Returns 0 for sigma = 0; callers substitute a floor."""
    return 0.1 * D * sigma


def threshold(Sp: np.ndarray, epsilon: float) -> tuple[np.ndarray, int]:
    """Orthonormal eigenvectors of ``Sp`` whose eigenvalues are >= epsilon."""
    if not epsilon > 0:
        raise PreconditionError(f"epsilon must be positive, got {epsilon}")
    w, q = np.linalg.eigh(Sp)
    keep = w >= epsilon
    k = int(keep.sum())
    if k == 0:
        raise AllRemovedError(f"no eigenvalue of S' reaches epsilon={epsilon:g} (max {w[-1]:g})")
    return q[:, keep], k


def thresholded_problem(noisy: NoisyPencil, epsilon: float) -> ThresholdedProblem:
    basis, _ = threshold(noisy.Sp, epsilon)
    htil = basis.conj().T @ noisy.Hp @ basis
    stil = basis.conj().T @ noisy.Sp @ basis
    return ThresholdedProblem(epsilon, basis, 0.5 * (htil + htil.conj().T), 0.5 * (stil + stil.conj().T))


def solve_thresholded(noisy: NoisyPencil, epsilon: float) -> SolveResult:
    """Lowest generalized eigenvalue after thresholding, by canonical orthogonalization."""
    prob = thresholded_problem(noisy, epsilon)
    s_w, s_v = np.linalg.eigh(prob.Stil)
    if s_w[0] < epsilon * (1 - 1e-8) - 1e-12:
        raise InternalConsistencyError(f"projected overlap has eigenvalue {s_w[0]:g} below epsilon {epsilon:g}")
    x = s_v / np.sqrt(s_w)
    w, c = np.linalg.eigh(x.conj().T @ prob.Htil @ x)
    vecs = prob.keptBasis @ (x @ c)
    return SolveResult(float(w[0]), w, prob.keptDim, float(s_w[-1] / s_w[0]), vecs)


def solve_batch(Hp: np.ndarray, Sp: np.ndarray, epsilon: float) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized ``solve_thresholded`` over a stack of pencils.

    Returns ``(E0tilde, keptDim)``; entries with nothing kept are NaN / 0.
    Removed directions are parked on an isolated diagonal block far above the
    kept spectrum so one batched ``eigvalsh`` serves every trial.
    """
    if not epsilon > 0:
        raise PreconditionError(f"epsilon must be positive, got {epsilon}")
    w, q = np.linalg.eigh(Sp)
    keep = w >= epsilon
    kept = keep.sum(axis=-1)
    scale = np.where(keep, 1.0 / np.sqrt(np.where(keep, w, 1.0)), 0.0)
    x = q * scale[..., None, :]
    m = np.conj(np.swapaxes(x, -1, -2)) @ Hp @ x
    m = 0.5 * (m + np.conj(np.swapaxes(m, -1, -2)))
    park = 2.0 * np.abs(m).sum(axis=(-1, -2)) + 1.0
    idx = np.arange(Sp.shape[-1])
    m[..., idx, idx] += np.where(keep, 0.0, park[..., None])
    e0 = np.linalg.eigvalsh(m)[..., 0]
    return np.where(kept > 0, e0, np.nan), kept
