"""Dense order-m matrix types, factorizations, and coordinate charts.

All types are immutable after construction and all operations are pure,
so everything here is safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ComplexSpectrum,
    DegenerateSpectrum,
    DomainError,
    NonPositiveRoot,
    NotPositiveDefinite,
)

# Relative gap below which two eigenvalues are treated as coincident.
GAP_RTOL = 1e-10


def _as_square(arr) -> np.ndarray:
    a = np.asarray(arr, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] < 1:
        raise DomainError("matrix order must be >= 1")
    return a


@dataclass(frozen=True)
class SymmetricMatrix:
    """Order-m real symmetric matrix.

    Raw input is symmetrized as (s + s')/2 on construction, which shields
    downstream math from accumulation noise.
    """

    entries: np.ndarray

    def __post_init__(self):
        a = _as_square(self.entries)
        a = 0.5 * (a + a.T)
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def m(self) -> int:
        return self.entries.shape[0]

    def max_asymmetry(self) -> float:
        a = self.entries
        return float(np.max(np.abs(a - a.T)))


@dataclass(frozen=True)
class PDMatrix:
    """Positive definite matrix with a cached lower Cholesky factor."""

    base: SymmetricMatrix
    chol: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.chol is None:
            object.__setattr__(self, "chol", cholesky(self.base))
        c = np.asarray(self.chol, dtype=float)
        c.setflags(write=False)
        object.__setattr__(self, "chol", c)
        if np.any(np.diag(c) <= 0.0):
            raise NotPositiveDefinite("Cholesky factor has a non-positive pivot")

    @classmethod
    def from_array(cls, arr) -> "PDMatrix":
        return cls(SymmetricMatrix(arr))

    @property
    def m(self) -> int:
        return self.base.m

    @property
    def entries(self) -> np.ndarray:
        return self.base.entries

    def logdet(self) -> float:
        return 2.0 * float(np.sum(np.log(np.diag(self.chol))))

    def inv(self) -> np.ndarray:
        ident = np.eye(self.m)
        y = np.linalg.solve(self.chol, ident)
        return y.T @ y


@dataclass(frozen=True)
class Spectrum:
    """Strictly decreasing positive latent roots with gap metadata."""

    roots: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.roots, dtype=float).ravel()
        if r.size < 1:
            raise DomainError("spectrum must contain at least one root")
        if r[-1] <= 0.0:
            raise NonPositiveRoot(f"smallest root {r[-1]} is not positive")
        if r.size > 1 and np.any(np.diff(r) >= 0.0):
            raise DomainError("roots must be strictly decreasing")
        r.setflags(write=False)
        object.__setattr__(self, "roots", r)

    @property
    def m(self) -> int:
        return self.roots.size

    @property
    def min_gap(self) -> float:
        if self.m == 1:
            return float("inf")
        return float(np.min(-np.diff(self.roots)))

    def require_distinct(self, rtol: float = GAP_RTOL) -> "Spectrum":
        if self.m > 1 and self.min_gap < rtol * self.roots[0]:
            raise DegenerateSpectrum(
                f"min gap {self.min_gap:.3e} below {rtol:.1e} * l1"
            )
        return self


@dataclass(frozen=True)
class GeneralMatrix:
    """Order-m real matrix with no symmetry constraint."""

    entries: np.ndarray

    def __post_init__(self):
        a = _as_square(self.entries).copy()
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def m(self) -> int:
        return self.entries.shape[0]


def sym_eig(s: SymmetricMatrix):
    """Eigen-decompose a symmetric matrix.

    Returns (values, vectors) with eigenvalues sorted descending and
    vectors[:, i] the unit eigenvector of values[i].
    """
    try:
        w, g = np.linalg.eigh(s.entries)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - pathological
        raise DomainError(f"symmetric eigensolver failed: {exc}") from exc
    order = np.argsort(w, kind="stable")[::-1]
    return w[order], g[:, order]


def general_eig_real(
    g: GeneralMatrix,
    imag_rtol: float = 1e-8,
    gap_rtol: float = GAP_RTOL,
) -> Spectrum:
    """Strictly ordered positive spectrum of a general matrix.

    The almost-sure case for E^{-1} H: real, distinct, positive roots.
    Anything else raises rather than silently reordering.
    """
    w = np.linalg.eigvals(g.entries)
    scale = float(np.max(np.abs(w))) or 1.0
    if np.max(np.abs(w.imag)) > imag_rtol * scale:
        raise ComplexSpectrum(
            f"max |imag| {np.max(np.abs(w.imag)):.3e} above {imag_rtol:.1e} * scale"
        )
    r = np.sort(w.real)[::-1]
    if r[-1] <= 0.0:
        raise NonPositiveRoot(f"smallest root {r[-1]} is not positive")
    if r.size > 1 and np.min(-np.diff(r)) < gap_rtol * r[0]:
        raise DegenerateSpectrum("eigenvalue gap below tolerance")
    return Spectrum(r)


def cholesky(s: SymmetricMatrix) -> np.ndarray:
    """Lower Cholesky factor; raises NotPositiveDefinite outside the PD cone."""
    try:
        return np.linalg.cholesky(s.entries)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from exc


def pd_sqrt(p: PDMatrix) -> PDMatrix:
    """Symmetric positive definite square root via spectral mapping."""
    w, g = sym_eig(p.base)
    root = (g * np.sqrt(w)) @ g.T
    return PDMatrix.from_array(root)


def vech(s: SymmetricMatrix) -> np.ndarray:
    """Half-vectorization: lower triangle in column-major order."""
    return vech_array(s.entries)


def vech_array(a: np.ndarray) -> np.ndarray:
    rows, cols = np.triu_indices(a.shape[0])
    return np.asarray(a, dtype=float)[cols, rows]


def unvech(v, m: int | None = None) -> SymmetricMatrix:
    """Inverse of vech; raises DomainError on a non-triangular length."""
    return SymmetricMatrix(unvech_array(v, m))


def unvech_array(v, m: int | None = None) -> np.ndarray:
    v = np.asarray(v, dtype=float).ravel()
    if m is None:
        m = int(round((np.sqrt(8 * v.size + 1) - 1) / 2))
    if m * (m + 1) // 2 != v.size:
        raise DomainError(f"length {v.size} is not m(m+1)/2 for any integer m")
    a = np.zeros((m, m))
    rows, cols = np.triu_indices(m)
    a[cols, rows] = v
    a[rows, cols] = v
    return a


def vec(a: np.ndarray) -> np.ndarray:
    """Full vectorization, row-major."""
    return np.asarray(a, dtype=float).ravel()


def unvec(v, m: int) -> np.ndarray:
    v = np.asarray(v, dtype=float).ravel()
    if v.size != m * m:
        raise DomainError(f"length {v.size} != m^2 = {m * m}")
    return v.reshape(m, m)
