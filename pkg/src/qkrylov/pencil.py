"""Real-time Krylov matrix pairs (H, S).

Rows and columns are ordered j = -d, ..., d. Column j of the Krylov basis is
``exp(i j H dt)|psi0>`` so that ``S_jk = <psi0| exp(i (k - j) H dt) |psi0>``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .errors import DegenerateSpectrumError, PreconditionError
from .operators import HermitianOperator, SpectralDecomposition, SpectralQuantities, StateVector


@dataclass(frozen=True)
class KrylovPencil:
    d: int
    dt: float
    Hmat: np.ndarray
    Smat: np.ndarray
    construction: Literal["exact", "trotter"] = "exact"

    @property
    def D(self) -> int:
        return 2 * self.d + 1

    def to_dict(self) -> dict:
        """Row-major real/imaginary dump for cross-checking."""
        return {
            "d": self.d,
            "D": self.D,
            "dt": self.dt,
            "construction": self.construction,
            "H_real": self.Hmat.real.tolist(),
            "H_imag": self.Hmat.imag.tolist(),
            "S_real": self.Smat.real.tolist(),
            "S_imag": self.Smat.imag.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "KrylovPencil":
        h = np.asarray(data["H_real"]) + 1j * np.asarray(data["H_imag"])
        s = np.asarray(data["S_real"]) + 1j * np.asarray(data["S_imag"])
        return cls(int(data["d"]), float(data["dt"]), h, s, data.get("construction", "exact"))

    def to_csv_rows(self) -> list[str]:
        """``matrix,row,col,real,imag`` lines, H first, each row-major."""
        lines = ["matrix,row,col,real,imag"]
        for name, m in (("H", self.Hmat), ("S", self.Smat)):
            for r in range(self.D):
                for c in range(self.D):
                    lines.append(f"{name},{r},{c},{float(m[r, c].real)!r},{float(m[r, c].imag)!r}")
        return lines


@dataclass(frozen=True)
class KrylovBasis:
    columns: np.ndarray
    d: int
    dt: float


def default_dt(quantities: SpectralQuantities) -> float:
    """pi / R, the timestep under which the convergence analysis is stated."""
    if not quantities.R > 0:
        raise DegenerateSpectrumError("spectral range is zero; dt = pi/R undefined")
    return float(np.pi / quantities.R)


def _check(d: int, dt: float) -> np.ndarray:
    if d < 0:
        raise PreconditionError(f"d must be nonnegative, got {d}")
    if not dt > 0:
        raise PreconditionError(f"dt must be positive, got {dt}")
    return np.arange(-d, d + 1)


def build_exact_pencil(spec: SpectralDecomposition, state: StateVector, d: int, dt: float) -> KrylovPencil:
    js = _check(d, dt)
    gamma = spec.overlaps(state)
    E = spec.eigenvalues
    # A[m, j] = gamma_m exp(i j E_m dt); S = A^dag A and H = A^dag diag(E) A
    A = gamma[:, None] * np.exp(1j * dt * np.outer(E, js))
    S = A.conj().T @ A
    H = A.conj().T @ (E[:, None] * A)
    S = 0.5 * (S + S.conj().T)
    H = 0.5 * (H + H.conj().T)
    return KrylovPencil(d, float(dt), H, S, "exact")


def build_krylov_basis(spec: SpectralDecomposition, state: StateVector, d: int, dt: float) -> KrylovBasis:
    js = _check(d, dt)
    U = spec.eigenvectors
    gamma = U.conj().T @ state.amplitudes
    phases = np.exp(1j * dt * np.outer(spec.eigenvalues, js))
    return KrylovBasis(U @ (gamma[:, None] * phases), d, float(dt))


def basis_pencil(basis: KrylovBasis, op: HermitianOperator) -> KrylovPencil:
    """Pencil (V^dag H V, V^dag V) computed directly from explicit columns."""
    V = basis.columns
    return KrylovPencil(basis.d, basis.dt, V.conj().T @ op.entries @ V, V.conj().T @ V, "exact")


def _unitary(op: HermitianOperator, t: float) -> np.ndarray:
    w, v = np.linalg.eigh(op.entries)
    return (v * np.exp(1j * t * w)) @ v.conj().T


def build_trotter_pencil(
    terms: Sequence[HermitianOperator],
    state: StateVector,
    d: int,
    dt: float,
    steps: int = 1,
    H: HermitianOperator | None = None,
) -> KrylovPencil:
    """First-order product-formula pencil.

    ``PF(n)`` is ``steps`` repetitions of ``exp(i n dt H_m / steps) ... exp(i n dt H_1 / steps)``,
    i.e. the first term acts on the state first. Entries on and above the
    diagonal come from ``<psi0|PF(k-j) H|psi0>`` and ``<psi0|PF(k-j)|psi0>``;
    the lower triangle is their conjugate transpose.
    """
    _check(d, dt)
    if steps < 1:
        raise PreconditionError(f"steps must be >= 1, got {steps}")
    if not terms:
        raise PreconditionError("at least one term is required")
    total = sum((t.entries for t in terms), np.zeros_like(terms[0].entries))
    if H is not None and np.abs(total - H.entries).max() > 1e-10 * max(np.abs(H.entries).max(), 1.0):
        raise PreconditionError("terms do not sum to H")
    H_full = total if H is None else H.entries
    psi = state.amplitudes
    h_psi = H_full @ psi
    D = 2 * d + 1
    s_row = np.empty(D, dtype=complex)
    h_row = np.empty(D, dtype=complex)
    for n in range(D):
        step = np.eye(len(psi), dtype=complex)
        for t in terms:
            step = _unitary(t, n * dt / steps) @ step
        pf = np.linalg.matrix_power(step, steps)
        s_row[n] = np.vdot(psi, pf @ psi)
        h_row[n] = np.vdot(psi, pf @ h_psi)
    offset = np.arange(D)[None, :] - np.arange(D)[:, None]
    S = np.where(offset >= 0, s_row[np.abs(offset)], s_row[np.abs(offset)].conj())
    Hm = np.where(offset >= 0, h_row[np.abs(offset)], h_row[np.abs(offset)].conj())
    return KrylovPencil(d, float(dt), Hm, S, "trotter")
