"""Spin-lattice Hamiltonians, reference states and spectral quantities.

Basis convention: computational basis index ``b`` with site ``m`` stored in
bit ``n - 1 - m`` (site 0 is the leftmost tensor factor). Bit value 0 is spin
up (Z = +1), bit value 1 is spin down (Z = -1).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Literal

import numpy as np

from .errors import CapacityError, PreconditionError

MAX_SITES = 12

Boundary = Literal["open", "periodic"]


def _nearest_neighbors(rows: int, cols: int, boundary: str) -> tuple[tuple[int, int], ...]:
    edges = set()
    periodic = boundary == "periodic"
    for r in range(rows):
        for c in range(cols):
            s = r * cols + c
            # wrap-around only when it creates a new bond (length > 2)
            if c + 1 < cols or (periodic and cols > 2):
                edges.add(tuple(sorted((s, r * cols + (c + 1) % cols))))
            if r + 1 < rows or (periodic and rows > 2):
                edges.add(tuple(sorted((s, ((r + 1) % rows) * cols + c))))
    return tuple(sorted(edges))


@dataclass(frozen=True)
class SpinLattice:
    """Rectangular lattice of spin-1/2 sites with nearest-neighbor edges."""

    rows: int
    cols: int
    boundary: Boundary = "open"
    edges: tuple[tuple[int, int], ...] = field(default=())

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise PreconditionError(f"lattice dimensions must be positive, got {self.rows}x{self.cols}")
        if self.boundary not in ("open", "periodic"):
            raise PreconditionError(f"unknown boundary {self.boundary!r}")
        if not self.edges:
            object.__setattr__(self, "edges", _nearest_neighbors(self.rows, self.cols, self.boundary))
        n = self.n_sites
        for a, b in self.edges:
            if a == b or not (0 <= a < n and 0 <= b < n):
                raise PreconditionError(f"invalid edge ({a}, {b}) for {n} sites")

    @property
    def n_sites(self) -> int:
        return self.rows * self.cols

    def color(self, site: int) -> int:
        """Checkerboard color (0 for the even sublattice)."""
        r, c = divmod(site, self.cols)
        return (r + c) % 2


@dataclass(frozen=True)
class HermitianOperator:
    entries: np.ndarray
    label: str = ""

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise PreconditionError(f"operator must be square, got shape {a.shape}")
        scale = max(np.abs(a).max(initial=0.0), 1.0)
        if np.abs(a - a.conj().T).max(initial=0.0) > 1e-12 * scale:
            raise PreconditionError(f"operator {self.label!r} is not Hermitian")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def norm(self) -> float:
        return float(np.abs(np.linalg.eigvalsh(self.entries)).max())

    def __add__(self, other: "HermitianOperator") -> "HermitianOperator":
        return HermitianOperator(self.entries + other.entries, f"{self.label}+{other.label}")


@dataclass(frozen=True)
class StateVector:
    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex).ravel()
        if abs(np.linalg.norm(a) - 1.0) > 1e-12:
            raise PreconditionError(f"state must be normalized, got norm {np.linalg.norm(a)}")
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    @classmethod
    def basis(cls, dim: int, index: int) -> "StateVector":
        v = np.zeros(dim, dtype=complex)
        v[index] = 1.0
        return cls(v)

    @classmethod
    def normalized(cls, amplitudes) -> "StateVector":
        a = np.asarray(amplitudes, dtype=complex).ravel()
        return cls(a / np.linalg.norm(a))


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def reconstruct(self) -> np.ndarray:
        u = self.eigenvectors
        return (u * self.eigenvalues) @ u.conj().T

    def overlaps(self, state: StateVector) -> np.ndarray:
        """Amplitudes gamma_m = <E_m|psi> of ``state`` in the eigenbasis."""
        if state.dim != self.dim:
            raise PreconditionError(f"state dimension {state.dim} != operator dimension {self.dim}")
        return self.eigenvectors.conj().T @ state.amplitudes


@dataclass(frozen=True)
class SpectralQuantities:
    E0: float
    Delta: float
    R: float
    opNorm: float
    gamma0sq: float
    operator: str = ""

    def as_dict(self) -> dict:
        return {
            "E0": self.E0,
            "Delta": self.Delta,
            "R": self.R,
            "opNorm": self.opNorm,
            "gamma0sq": self.gamma0sq,
            "operator": self.operator,
        }


def _z_table(n: int) -> np.ndarray:
    idx = np.arange(2**n)
    bits = (idx[:, None] >> (n - 1 - np.arange(n))) & 1
    return 1 - 2 * bits


def build_heisenberg(lattice: SpinLattice, j: float = 1.0, h: float = 0.2) -> HermitianOperator:
    """Dense ``h*sum Z_m + sum_<m,n> (X_m X_n + Y_m Y_n + j Z_m Z_n)``.

    The XX + YY part of each bond is the hop ``2(|01><10| + |10><01|)``, so the
    matrix is real and built by bit manipulation instead of Kronecker products.
    """
    n = lattice.n_sites
    if n > MAX_SITES:
        raise CapacityError(f"{n} sites exceeds the dense limit of {MAX_SITES}")
    dim = 2**n
    idx = np.arange(dim)
    z = _z_table(n)
    mat = np.zeros((dim, dim))
    diag = h * z.sum(axis=1).astype(float)
    for a, b in lattice.edges:
        diag = diag + j * z[:, a] * z[:, b]
        anti = z[:, a] != z[:, b]
        flipped = idx ^ (1 << (n - 1 - a)) ^ (1 << (n - 1 - b))
        mat[flipped[anti], idx[anti]] += 2.0
    mat[idx, idx] += diag
    return HermitianOperator(mat, f"heisenberg {lattice.rows}x{lattice.cols} j={j} h={h}")


def heisenberg_terms(lattice: SpinLattice, j: float = 1.0, h: float = 0.2) -> list[HermitianOperator]:
    """Split the Heisenberg Hamiltonian into field, XX, YY and ZZ groups.

    Used for product-formula pencils; the groups sum to ``build_heisenberg``.
    """
    n = lattice.n_sites
    if n > MAX_SITES:
        raise CapacityError(f"{n} sites exceeds the dense limit of {MAX_SITES}")
    dim = 2**n
    idx = np.arange(dim)
    z = _z_table(n)
    field_ = np.diag(h * z.sum(axis=1)).astype(complex)
    zz = np.diag(sum((j * z[:, a] * z[:, b] for a, b in lattice.edges), np.zeros(dim))).astype(complex)
    xx = np.zeros((dim, dim), dtype=complex)
    yy = np.zeros((dim, dim), dtype=complex)
    for a, b in lattice.edges:
        flipped = idx ^ (1 << (n - 1 - a)) ^ (1 << (n - 1 - b))
        xx[flipped, idx] += 1.0
        # Y_a Y_b flips both bits with sign -z_a z_b of the source state
        yy[flipped, idx] += -(z[:, a] * z[:, b])
    return [
        HermitianOperator(field_, "field"),
        HermitianOperator(xx, "XX"),
        HermitianOperator(yy, "YY"),
        HermitianOperator(zz, "ZZ"),
    ]


def total_magnetization(n_sites: int) -> HermitianOperator:
    return HermitianOperator(np.diag(_z_table(n_sites).sum(axis=1)).astype(complex), "Mz")


def sector_restrict(op: HermitianOperator, state: StateVector) -> tuple[HermitianOperator, StateVector]:
    """Restrict ``op`` and ``state`` to the magnetization sector of ``state``."""
    dim = op.dim
    n = dim.bit_length() - 1
    if 2**n != dim or state.dim != dim:
        raise PreconditionError("sector restriction needs a qubit operator and a matching state")
    mz = _z_table(n).sum(axis=1)
    a = op.entries
    comm = a * (mz[None, :] - mz[:, None])
    if np.abs(comm).max(initial=0.0) > 1e-10 * max(np.abs(a).max(), 1.0):
        raise PreconditionError("operator does not conserve total Z magnetization")
    support = np.abs(state.amplitudes) > 1e-14
    sectors = np.unique(mz[support])
    if len(sectors) != 1:
        raise PreconditionError(f"state has support in {len(sectors)} magnetization sectors")
    basis = np.flatnonzero(mz == sectors[0])
    up = (n + int(sectors[0])) // 2
    assert len(basis) == comb(n, up)
    sub = HermitianOperator(a[np.ix_(basis, basis)], f"{op.label} [sector up={up}]")
    return sub, StateVector.normalized(state.amplitudes[basis])


def spectral_decompose(op: HermitianOperator) -> SpectralDecomposition:
    w, v = np.linalg.eigh(op.entries)
    w.setflags(write=False)
    v.setflags(write=False)
    return SpectralDecomposition(w, v)


def antiferromagnetic_state(lattice: SpinLattice, up_is_even_sublattice: bool = False) -> StateVector:
    """Checkerboard product state; by default the odd (minority) sublattice is up."""
    n = lattice.n_sites
    up_color = 0 if up_is_even_sublattice else 1
    index = 0
    for s in range(n):
        if lattice.color(s) != up_color:
            index |= 1 << (n - 1 - s)
    return StateVector.basis(2**n, index)


def spectral_quantities(
    spec: SpectralDecomposition,
    state: StateVector,
    degeneracy_tol: float | None = None,
    operator: str = "",
) -> SpectralQuantities:
    """E0, gap, spectral range, norm and ground-space overlap of ``state``.

    ``degeneracy_tol`` defaults to ``1e-8 * ||H||``. Delta is ``inf`` when the
    whole spectrum is degenerate.
    """
    w = spec.eigenvalues
    e0, emax = float(w[0]), float(w[-1])
    op_norm = max(abs(e0), abs(emax))
    tol = 1e-8 * op_norm if degeneracy_tol is None else degeneracy_tol
    gaps = w - e0
    ground = gaps <= tol
    excited = gaps[~ground]
    delta = float(excited[0]) if excited.size else float("inf")
    g = spec.overlaps(state)
    gamma0sq = float(np.sum(np.abs(g[ground]) ** 2))
    return SpectralQuantities(e0, delta, emax - e0, op_norm, min(gamma0sq, 1.0), operator)
