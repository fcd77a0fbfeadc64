"""Effective Krylov bases and effective Hamiltonians for a noisy pencil.

A noisy, thresholded pair (H'', S'') can be written as the exact-style pencil
of an effective Hamiltonian in an effective Krylov basis. The constructions
here make those objects concrete so their defining identities and norm bounds
can be checked numerically. They need the full Krylov basis and ``H``, so they
are verification tools for simulation, not part of the solve path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AllRemovedError, PreconditionError
from .noise import NoisyPencil, spectral_norm
from .operators import HermitianOperator
from .pencil import KrylovBasis, KrylovPencil


def _dag(a: np.ndarray) -> np.ndarray:
    return a.conj().T


@dataclass(frozen=True)
class ProjectedPencil:
    PiPrime: np.ndarray
    Hpp: np.ndarray
    Spp: np.ndarray
    epsilon: float
    keptBasis: np.ndarray
    keptEigenvalues: np.ndarray

    @property
    def keptDim(self) -> int:
        return self.keptBasis.shape[1]

    def sqrt_spp(self) -> np.ndarray:
        q = self.keptBasis
        return (q * np.sqrt(self.keptEigenvalues)) @ _dag(q)

    def spp_pinv(self) -> np.ndarray:
        q = self.keptBasis
        return (q / self.keptEigenvalues) @ _dag(q)

    def range_spectrum(self) -> np.ndarray:
        """Generalized spectrum of (H'', S'') on the range of the projector."""
        q = self.keptBasis
        s = _dag(q) @ self.Spp @ q
        h = _dag(q) @ self.Hpp @ q
        sw, sv = np.linalg.eigh(0.5 * (s + _dag(s)))
        x = sv / np.sqrt(sw)
        m = _dag(x) @ h @ x
        return np.linalg.eigvalsh(0.5 * (m + _dag(m)))


def project_pencil(noisy: NoisyPencil, epsilon: float) -> ProjectedPencil:
    """Pi' onto eigenspaces of S' with eigenvalue >= epsilon; H'' = Pi'H'Pi', S'' = Pi'S'Pi'."""
    if not epsilon > 0:
        raise PreconditionError(f"epsilon must be positive, got {epsilon}")
    w, q = np.linalg.eigh(noisy.Sp)
    keep = w >= epsilon
    if not keep.any():
        raise AllRemovedError(f"no eigenvalue of S' reaches epsilon={epsilon:g}")
    qk = q[:, keep]
    pi = qk @ _dag(qk)
    # S'' from the kept eigenpairs directly, so its nonzero spectrum is exactly >= epsilon
    spp = (qk * w[keep]) @ _dag(qk)
    hpp = pi @ noisy.Hp @ pi
    return ProjectedPencil(pi, 0.5 * (hpp + _dag(hpp)), 0.5 * (spp + _dag(spp)), float(epsilon), qk, w[keep])


@dataclass(frozen=True)
class LowerEffective:
    F: np.ndarray
    G: np.ndarray
    Vprime: np.ndarray
    Hprime: np.ndarray
    sqrtS: np.ndarray
    assumption_ok: bool
    diff_norm: float
    bound: float


def polar_isometry(V: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``V = F sqrt(V^dag V)`` with F having orthonormal columns.

    Built from the thin SVD ``V = W s Z^dag`` as ``F = W Z^dag``. Zero singular
    values still get orthonormal left vectors, so F is an isometry even when
    V is rank deficient; this needs ``V.shape[0] >= V.shape[1]``.
    """
    n, D = V.shape
    if n < D:
        raise PreconditionError(f"Hilbert space dimension {n} is smaller than Krylov dimension {D}")
    W, s, Zh = np.linalg.svd(V, full_matrices=False)
    F = W @ Zh
    sqrtS = (_dag(Zh) * s) @ Zh
    return F, 0.5 * (sqrtS + _dag(sqrtS))


def polar_unitary(a: np.ndarray) -> np.ndarray:
    """Unitary factor U V^dag of the full SVD a = U D V^dag."""
    u, _, vh = np.linalg.svd(a)
    return u @ vh


def build_lower_effective(
    basis: KrylovBasis,
    pencil: KrylovPencil,
    noisy: NoisyPencil,
    projected: ProjectedPencil,
    H: HermitianOperator,
) -> LowerEffective:
    """Effective basis V' = F G sqrt(S'') and Hamiltonian
    H' = H + V' S''^+ (H' - V'^dag H V') S''^+ V'^dag.

    G is the unitary polar factor of sqrt(S) Pi'. The returned ``bound`` is
    (||H'-H|| + (1+sqrt2) ||S'-S|| ||H||) / epsilon, valid when
    ``assumption_ok`` (||S'-S|| <= epsilon).
    """
    V = basis.columns
    F, sqrtS = polar_isometry(V)
    pi = projected.PiPrime
    G = polar_unitary(sqrtS @ pi)
    Vp = F @ G @ projected.sqrt_spp()
    spp_pinv = projected.spp_pinv()
    Hop = H.entries
    inner = noisy.Hp - _dag(Vp) @ Hop @ Vp
    Hprime = Hop + Vp @ spp_pinv @ inner @ spp_pinv @ _dag(Vp)
    Hprime = 0.5 * (Hprime + _dag(Hprime))
    dH = float(spectral_norm(noisy.Hp - pencil.Hmat))
    dS = float(spectral_norm(noisy.Sp - pencil.Smat))
    h_norm = H.norm()
    bound = (dH + (1 + np.sqrt(2.0)) * dS * h_norm) / projected.epsilon
    return LowerEffective(
        F=F,
        G=G,
        Vprime=Vp,
        Hprime=Hprime,
        sqrtS=sqrtS,
        assumption_ok=bool(dS <= projected.epsilon),
        diff_norm=float(spectral_norm(Hprime - Hop)),
        bound=float(bound),
    )


@dataclass(frozen=True)
class UpperEffective:
    cprime: np.ndarray
    scale: float
    Vprime: np.ndarray
    Hprime: np.ndarray
    psi: np.ndarray
    diff_norm: float
    bound: float


def build_upper_effective(
    basis: KrylovBasis,
    pencil: KrylovPencil,
    noisy: NoisyPencil,
    projected: ProjectedPencil,
    H: HermitianOperator,
    cprime: np.ndarray,
) -> UpperEffective:
    """Rescaled basis V' = sqrt(c'^dag S' c' / c'^dag S c') V and the rank-one
    corrected Hamiltonian matching c'^dag H' c' at psi = V' c'.

    ``bound`` is ||c'||^2 (||H'-H|| + ||H|| ||S'-S||) / <psi|psi>.
    """
    c = np.asarray(cprime, dtype=complex).ravel()
    cn = np.linalg.norm(c)
    if cn == 0:
        raise PreconditionError("c' must be nonzero")
    if np.linalg.norm(projected.PiPrime @ c - c) > 1e-10 * cn:
        raise PreconditionError("c' is not in the range of Pi'")
    sp_c = float(np.real(np.vdot(c, noisy.Sp @ c)))
    s_c = float(np.real(np.vdot(c, pencil.Smat @ c)))
    if sp_c <= 0 or s_c <= 0:
        raise PreconditionError("c' spans a degenerate direction; the rescaling is undefined")
    scale = np.sqrt(sp_c / s_c)
    Vp = scale * basis.columns
    psi = Vp @ c
    norm2 = float(np.real(np.vdot(psi, psi)))
    Hop = H.entries
    target = np.real(np.vdot(c, noisy.Hp @ c))
    current = np.real(np.vdot(psi, Hop @ psi))
    Hprime = Hop + (target - current) * np.outer(psi, psi.conj()) / norm2**2
    Hprime = 0.5 * (Hprime + _dag(Hprime))
    dH = float(spectral_norm(noisy.Hp - pencil.Hmat))
    dS = float(spectral_norm(noisy.Sp - pencil.Smat))
    bound = cn**2 * (dH + H.norm() * dS) / norm2
    return UpperEffective(c, float(scale), Vp, Hprime, psi, float(spectral_norm(Hprime - Hop)), float(bound))


@dataclass
class OracleReport:
    weyl_max_excess: float = -np.inf
    davis_kahan_max_excess: float = -np.inf
    weyl_violations: int = 0
    davis_kahan_violations: int = 0
    checks: int = 0

    @property
    def ok(self) -> bool:
        return self.weyl_violations == 0 and self.davis_kahan_violations == 0


def spectral_projector(a: np.ndarray, select) -> np.ndarray:
    w, v = np.linalg.eigh(a)
    m = select(w)
    return v[:, m] @ _dag(v[:, m])


def matrix_analysis_oracles(
    A: np.ndarray,
    B: np.ndarray,
    gap_sets: list[tuple[float, float]] | None = None,
    rtol: float = 1e-10,
) -> OracleReport:
    """Numerically check Weyl's eigenvalue inequality and the Davis-Kahan sin-theta bound.

    Each entry ``(a, delta)`` of ``gap_sets`` selects K = eigenvalues of A
    at most ``a`` and K' = eigenvalues of B at least ``a + delta``; both
    ||Pi_K(A) Pi_K'(B)|| and the mirrored pair are checked against
    ||A - B|| / delta.
    """
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape != B.shape:
        raise PreconditionError("matrices must have matching dimensions")
    rep = OracleReport()
    diff = float(spectral_norm(A - B))
    slack = rtol * max(1.0, float(spectral_norm(A)), float(spectral_norm(B)))
    ea, eb = np.linalg.eigvalsh(A), np.linalg.eigvalsh(B)
    excess = float(np.max(np.abs(ea - eb)) - diff)
    rep.weyl_max_excess = excess
    rep.checks += 1
    if excess > slack:
        rep.weyl_violations += 1
    for a, delta in gap_sets or []:
        if not delta > 0:
            raise PreconditionError(f"gap must be positive, got {delta}")
        for X, Y in ((A, B), (B, A)):
            pk = spectral_projector(X, lambda w: w <= a)
            pk2 = spectral_projector(Y, lambda w: w >= a + delta)
            lhs = float(np.linalg.norm(pk @ pk2, 2)) if pk.any() and pk2.any() else 0.0
            ex = lhs - diff / delta
            rep.davis_kahan_max_excess = max(rep.davis_kahan_max_excess, ex)
            rep.checks += 1
            if ex > slack / delta + 1e-12:
                rep.davis_kahan_violations += 1
    return rep
