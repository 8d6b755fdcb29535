"""Finite-difference verification of exterior-form Jacobian determinants.

Each verify_* routine declares a smooth map between coordinate charts,
differentiates it numerically, and compares the determinant against the
claimed closed form. Central differences with one Richardson halving;
determinants amplify per-entry noise, so both step results are kept and
a disagreement flag is raised when they differ by more than 10x the
expected tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import (
    PDMatrix,
    Spectrum,
    SymmetricMatrix,
    sym_eig,
    unvech_array,
    vec,
    vech_array,
)
from .errors import (
    DegenerateSpectrum,
    DomainError,
    IllConditioned,
    NonFinite,
    SingularJacobian,
)

DEFAULT_STEP = 1e-5
COND_CAP = 1e8
# Spectral gap below which randomized sweeps skip a point (FD conditioning).
SWEEP_GAP = 0.1


@dataclass(frozen=True)
class ChartMap:
    """A smooth map between coordinate charts of equal dimension."""

    in_dim: int
    out_dim: int
    eval: Callable[[np.ndarray], np.ndarray]
    description: str = ""


@dataclass(frozen=True)
class JacobianReport:
    numeric_det: float
    analytic_det: float
    rel_err: float
    point: np.ndarray
    step: float
    det_coarse: float = float("nan")
    det_fine: float = float("nan")
    step_disagreement: bool = False
    description: str = ""

    def to_dict(self) -> dict:
        return {
            "numeric_det": self.numeric_det,
            "analytic_det": self.analytic_det,
            "rel_err": self.rel_err,
            "point": list(np.asarray(self.point, dtype=float)),
            "step": self.step,
            "det_coarse": self.det_coarse,
            "det_fine": self.det_fine,
            "step_disagreement": self.step_disagreement,
            "description": self.description,
        }


@dataclass(frozen=True)
class JordanFactors:
    """Eigen-chart point (Lambda, P) with unit-diagonal P.

    p_offdiag holds the m(m-1) off-diagonal entries of P in row-major
    order; the diagonal is pinned to 1 to fix eigenvector scale.
    """

    lam: Spectrum
    p_offdiag: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p_offdiag, dtype=float).ravel()
        m = self.lam.m
        if p.size != m * (m - 1):
            raise DomainError(f"p_offdiag must have m(m-1) = {m * (m - 1)} entries")
        p.setflags(write=False)
        object.__setattr__(self, "p_offdiag", p)
        self.lam.require_distinct()
        if np.linalg.cond(self.p_matrix()) > COND_CAP:
            raise IllConditioned("eigenvector matrix condition number above cap")

    @property
    def m(self) -> int:
        return self.lam.m

    def p_matrix(self) -> np.ndarray:
        m = self.m
        p = np.eye(m)
        p[_offdiag_indices(m)] = self.p_offdiag
        return p


def _offdiag_indices(m: int):
    rows, cols = np.indices((m, m))
    mask = rows != cols
    return rows[mask], cols[mask]


def _fd_jacobian(chart: ChartMap, point: np.ndarray, step: float) -> np.ndarray:
    n = chart.in_dim
    jac = np.empty((chart.out_dim, n))
    for k in range(n):
        h = step * (1.0 + abs(point[k]))
        hi = point.copy()
        lo = point.copy()
        hi[k] += h
        lo[k] -= h
        fhi = np.asarray(chart.eval(hi), dtype=float)
        flo = np.asarray(chart.eval(lo), dtype=float)
        if not (np.all(np.isfinite(fhi)) and np.all(np.isfinite(flo))):
            raise NonFinite(f"map returned non-finite values near coordinate {k}")
        jac[:, k] = (fhi - flo) / (2.0 * h)
    return jac


def numeric_jacobian_det(
    chart: ChartMap, point: Sequence[float], step: float = DEFAULT_STEP
) -> float:
    """Central-difference Jacobian determinant with one Richardson halving."""
    return _numeric_det_full(chart, point, step)[0]


def _numeric_det_full(chart: ChartMap, point, step: float):
    if chart.in_dim != chart.out_dim:
        raise DomainError("determinant checks need a square-dimensional map")
    if step <= 0.0:
        raise DomainError("step must be positive")
    x = np.asarray(point, dtype=float).ravel()
    if x.size != chart.in_dim:
        raise DomainError(f"point has {x.size} coordinates, map expects {chart.in_dim}")
    j_coarse = _fd_jacobian(chart, x, step)
    j_fine = _fd_jacobian(chart, x, step / 2.0)
    j_rich = (4.0 * j_fine - j_coarse) / 3.0
    det = float(np.linalg.det(j_rich))
    if abs(det) < 1e-300:
        raise SingularJacobian("|det| below 1e-300")
    return det, float(np.linalg.det(j_coarse)), float(np.linalg.det(j_fine))


def _report(
    chart: ChartMap,
    point,
    analytic: float,
    step: float = DEFAULT_STEP,
    tol: float = 1e-6,
    use_abs: bool = False,
) -> JacobianReport:
    det, det_c, det_f = _numeric_det_full(chart, point, step)
    numeric = abs(det) if use_abs else det
    rel_err = abs(numeric - analytic) / max(abs(analytic), 1e-300)
    disagree = abs(det_c - det_f) > 10.0 * tol * max(abs(analytic), 1e-300)
    return JacobianReport(
        numeric_det=numeric,
        analytic_det=analytic,
        rel_err=rel_err,
        point=np.asarray(point, dtype=float),
        step=step,
        det_coarse=det_c,
        det_fine=det_f,
        step_disagreement=disagree,
        description=chart.description,
    )


def verify_congruence(
    c: PDMatrix, trials: int = 1, rng: np.random.Generator | None = None
) -> list[JacobianReport]:
    """vech(V) -> vech(C V C) against det(C)^{m+1}.

    The map is linear, so the FD determinant is exact to rounding at any
    evaluation point; trials just vary the point.
    """
    m = c.m
    k = m * (m + 1) // 2
    ce = c.entries
    chart = ChartMap(
        in_dim=k,
        out_dim=k,
        eval=lambda v: vech_array(ce @ unvech_array(v, m) @ ce),
        description=f"congruence V -> CVC, m={m}",
    )
    analytic = float(np.linalg.det(ce)) ** (m + 1)
    rng = rng or np.random.default_rng(0)
    reports = []
    for _ in range(max(1, trials)):
        point = rng.standard_normal(k)
        reports.append(_report(chart, point, analytic, tol=1e-8))
    return reports


def verify_square_map(x: PDMatrix) -> JacobianReport:
    """vech(X) -> vech(X^2) against 2^m |X| prod_{i<j} (lam_i + lam_j)."""
    m = x.m
    lam, _ = sym_eig(x.base)
    Spectrum(np.sort(lam)[::-1]).require_distinct(rtol=1e-8)
    k = m * (m + 1) // 2
    chart = ChartMap(
        in_dim=k,
        out_dim=k,
        eval=lambda v: vech_array(np.linalg.matrix_power(unvech_array(v, m), 2)),
        description=f"matrix square X -> X^2, m={m}",
    )
    pairs = 1.0
    for i in range(m):
        for j in range(i + 1, m):
            pairs *= lam[i] + lam[j]
    analytic = (2.0**m) * float(np.prod(lam)) * pairs
    return _report(chart, vech_array(x.entries), analytic, tol=1e-6)


def p_inv_dp_coordinate_matrix(p: np.ndarray) -> np.ndarray:
    """Coordinate matrix of the off-diagonal entries of P^{-1} dP.

    Column k is the off-diagonal part of P^{-1} E_k, where E_k is the
    elementary perturbation of the k-th off-diagonal entry of P.
    """
    m = p.shape[0]
    rows, cols = _offdiag_indices(m)
    pinv = np.linalg.inv(p)
    n = rows.size
    mat = np.empty((n, n))
    for k in range(n):
        # P^{-1} E_{rc} has column c equal to P^{-1}[:, r], zeros elsewhere.
        form = np.zeros((m, m))
        form[:, cols[k]] = pinv[:, rows[k]]
        mat[:, k] = form[rows, cols]
    return mat


def verify_jordan(j: JordanFactors, step: float = DEFAULT_STEP) -> JacobianReport:
    """Eigen-chart map (Lambda, P_offdiag) -> A = P Lambda P^{-1}.

    The claimed form factors through the squared Vandermonde of the roots
    times the coordinate determinant of the off-diagonal part of P^{-1}dP
    (unit-diagonal normalization). Signs are ignored, as in the source
    statement.
    """
    m = j.m
    if m not in (2, 3):
        raise DomainError("jordan check is implemented for m in {2, 3}")
    lam = j.lam.roots

    def chart_eval(theta: np.ndarray) -> np.ndarray:
        lam_t = theta[:m]
        p = np.eye(m)
        p[_offdiag_indices(m)] = theta[m:]
        a = p @ np.diag(lam_t) @ np.linalg.inv(p)
        return vec(a)

    chart = ChartMap(
        in_dim=m * m,
        out_dim=m * m,
        eval=chart_eval,
        description=f"jordan chart (Lambda, P) -> P Lambda P^-1, m={m}",
    )
    point = np.concatenate([lam, j.p_offdiag])
    vand_sq = 1.0
    for i in range(m):
        for k in range(i + 1, m):
            vand_sq *= (lam[i] - lam[k]) ** 2
    analytic = vand_sq * abs(np.linalg.det(p_inv_dp_coordinate_matrix(j.p_matrix())))
    return _report(chart, point, analytic, step=step, tol=1e-5, use_abs=True)


def verify_polar_m2(w: PDMatrix, phi: float) -> JacobianReport:
    """Polar chart (w11, w12, w22, phi) -> Y = G(phi) W against lam1 + lam2.

    Chains the symmetric-square-root factor through the matrix-square
    Jacobian, leaving the eigenvalue sum of W; the result is phi-free,
    which the randomized sweep asserts separately.
    """
    if w.m != 2:
        raise DomainError("polar check is m=2 only")
    lam, _ = sym_eig(w.base)
    if abs(lam[0] - lam[1]) < 1e-8 * max(abs(lam[0]), 1.0):
        raise DegenerateSpectrum("eigenvalue gap of W too small for the polar chart")

    def chart_eval(theta: np.ndarray) -> np.ndarray:
        w11, w12, w22, ang = theta
        wmat = np.array([[w11, w12], [w12, w22]])
        g = np.array(
            [[math.cos(ang), -math.sin(ang)], [math.sin(ang), math.cos(ang)]]
        )
        return vec(g @ wmat)

    chart = ChartMap(4, 4, chart_eval, description="polar chart Y = G(phi) W, m=2")
    point = np.array([w.entries[0, 0], w.entries[0, 1], w.entries[1, 1], phi])
    analytic = float(lam[0] + lam[1])
    return _report(chart, point, analytic, tol=1e-5, use_abs=True)


def verify_scalar_reductions(m: int, c: float) -> JacobianReport:
    """Scaling map vech(X) -> vech(cX) against c^{m(m+1)/2}.

    The scalar-C regime is the only one where Y = XC stays symmetric for
    all symmetric X, so this is the verifiable reduction of the general
    product theorems.
    """
    if m < 1:
        raise DomainError("m must be positive")
    if c <= 0.0:
        raise DomainError("c must be positive")
    k = m * (m + 1) // 2
    chart = ChartMap(
        in_dim=k,
        out_dim=k,
        eval=lambda v: c * np.asarray(v, dtype=float),
        description=f"scalar scaling X -> cX, m={m}, c={c}",
    )
    point = np.linspace(0.5, 1.5, k)
    analytic = c ** (m * (m + 1) / 2)
    return _report(chart, point, analytic, tol=1e-10)


def random_pd(m: int, rng: np.random.Generator, min_gap: float = 0.0) -> PDMatrix:
    """Random PD matrix; resamples until the spectral gap clears min_gap."""
    for _ in range(1000):
        a = rng.standard_normal((m, m))
        p = a @ a.T + 0.5 * np.eye(m)
        lam = np.linalg.eigvalsh(p)
        if m == 1 or np.min(np.diff(np.sort(lam))) > min_gap:
            return PDMatrix.from_array(p)
    raise DegenerateSpectrum("could not draw a PD matrix with the requested gap")


def random_jordan_factors(m: int, rng: np.random.Generator) -> JordanFactors:
    """Well-conditioned random eigen-chart point with well-separated roots."""
    for _ in range(1000):
        raw = np.sort(rng.uniform(0.5, 4.0, size=m))[::-1]
        if m > 1 and np.min(-np.diff(raw)) < 0.3:
            continue
        off = rng.uniform(-0.5, 0.5, size=m * (m - 1))
        try:
            return JordanFactors(Spectrum(raw), off)
        except IllConditioned:
            continue
    raise IllConditioned("could not draw a well-conditioned factor set")


def sweep(
    which: str, m: int, trials: int, seed: int, rng: np.random.Generator | None = None
) -> list[JacobianReport]:
    """Randomized verification sweep used by the CLI and the test suite."""
    rng = rng or np.random.default_rng(seed)
    reports: list[JacobianReport] = []
    if which == "congruence":
        for _ in range(trials):
            reports.extend(verify_congruence(random_pd(m, rng), trials=1, rng=rng))
    elif which == "square":
        for _ in range(trials):
            reports.append(verify_square_map(random_pd(m, rng, min_gap=SWEEP_GAP)))
    elif which == "jordan":
        for _ in range(trials):
            reports.append(verify_jordan(random_jordan_factors(m, rng)))
    elif which == "polar":
        if m != 2:
            raise DomainError("polar sweep is m=2 only")
        for _ in range(trials):
            w = random_pd(2, rng, min_gap=SWEEP_GAP)
            reports.append(verify_polar_m2(w, phi=float(rng.uniform(0, 2 * math.pi))))
    elif which == "scalar":
        for _ in range(trials):
            reports.append(verify_scalar_reductions(m, float(rng.uniform(0.5, 3.0))))
    else:
        raise DomainError(f"unknown sweep {which!r}")
    return reports
