"""Samplers and density evaluators for the matrix beta type II family.

Samplers take an explicit numpy Generator; a generator must not be shared
across threads, distinct generators may run in parallel. Density
evaluators are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    GAP_RTOL,
    GeneralMatrix,
    PDMatrix,
    Spectrum,
    SymmetricMatrix,
    general_eig_real,
    pd_sqrt,
)
from .errors import DegenerateSpectrum, DomainError, MissingRaw, RetryExhausted
from .special import mv_beta, mv_gamma

RETRY_CAP = 100


@dataclass(frozen=True)
class BetaParams:
    """Dimension and degrees of freedom (a, b) with the validity regime.

    regime is "standard" when a >= m and b >= m; the a < m case is only
    reachable through substitute_params, which tags its output
    "substituted".
    """

    m: int
    a: float
    b: float
    regime: str = field(default="standard")

    def __post_init__(self):
        if self.m < 1:
            raise DomainError("m must be a positive integer")
        if self.regime not in ("standard", "substituted"):
            raise DomainError(f"unknown regime {self.regime!r}")
        if self.regime == "standard" and (self.a < self.m or self.b < self.m):
            raise DomainError(
                f"standard regime requires a >= m and b >= m, got "
                f"m={self.m}, a={self.a}, b={self.b}"
            )

    def require_density_regime(self):
        if self.a <= self.m - 1 or self.b <= self.m - 1:
            raise DomainError("density requires a > m-1 and b > m-1")


def substitute_params(m: int, a: float, b: float) -> BetaParams:
    """Map Definition-3 parameters (a < m) to an equivalent standard triple.

    The replacement is m -> a, a -> m, b -> b + a - m.
    """
    if a >= m:
        raise DomainError(f"substitution applies only when a < m, got a={a}, m={m}")
    a_int = int(a)
    if a_int != a or a_int < 1:
        raise DomainError("substitution needs a positive integer a (new dimension)")
    return BetaParams(m=a_int, a=float(m), b=float(b + a - m), regime="substituted")


@dataclass(frozen=True)
class WishartSample:
    matrix: PDMatrix
    dof: float
    scale_is_identity: bool = True

    def __post_init__(self):
        if self.dof < self.matrix.m:
            raise DomainError("Wishart sample with dof < m")


@dataclass(frozen=True)
class F1Sample:
    """A draw of the nonsymmetric ratio E^{-1} H with its Wishart sources."""

    f1: GeneralMatrix
    source_e: PDMatrix
    source_h: PDMatrix


@dataclass(frozen=True)
class LogDensity:
    log_value: float
    finite: bool = True

    @property
    def value(self) -> float:
        return math.exp(self.log_value) if self.finite else 0.0


def sample_matrix_normal(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    """rows x cols array of i.i.d. standard normals, deterministic given rng state."""
    if rows < 1 or cols < 1:
        raise DomainError("rows and cols must be positive")
    return rng.standard_normal((rows, cols))


def _bartlett_lower(m: int, dof: float, rng: np.random.Generator) -> np.ndarray:
    lower = np.zeros((m, m))
    idx = np.tril_indices(m, -1)
    lower[idx] = rng.standard_normal(len(idx[0]))
    lower[np.diag_indices(m)] = np.sqrt(rng.chisquare(dof - np.arange(m)))
    return lower


def sample_wishart(m: int, dof: float, rng: np.random.Generator) -> WishartSample:
    """W_m(dof, I) draw via the Bartlett lower-triangular construction."""
    if dof < m:
        raise DomainError(f"dof must be >= m, got dof={dof}, m={m}")
    lower = _bartlett_lower(m, dof, rng)
    mat = PDMatrix(SymmetricMatrix(lower @ lower.T), chol=lower)
    return WishartSample(matrix=mat, dof=float(dof))


def _bartlett_lower_batch(n: int, m: int, dof: float, rng: np.random.Generator) -> np.ndarray:
    lower = np.zeros((n, m, m))
    idx = np.tril_indices(m, -1)
    if len(idx[0]):
        lower[:, idx[0], idx[1]] = rng.standard_normal((n, len(idx[0])))
    d = np.arange(m)
    lower[:, d, d] = np.sqrt(rng.chisquare(dof - d, size=(n, m)))
    return lower


def sample_wishart_batch(n: int, m: int, dof: float, rng: np.random.Generator) -> np.ndarray:
    """(n, m, m) stack of W_m(dof, I) draws. Vectorized Bartlett."""
    if dof < m:
        raise DomainError(f"dof must be >= m, got dof={dof}, m={m}")
    lower = _bartlett_lower_batch(n, m, dof, rng)
    return lower @ np.transpose(lower, (0, 2, 1))


def build_beta2(
    y1_gram: PDMatrix,
    y2_gram: PDMatrix,
    definition: int,
    y1_raw: np.ndarray | None = None,
) -> SymmetricMatrix:
    """Symmetric beta type II matrix under one of the three definitions.

    Definition 1: E^{-1/2} H E^{-1/2}; Definition 2: H^{1/2} E^{-1} H^{1/2};
    Definition 3: Y1 E^{-1} Y1' (needs the raw a x m factor Y1).
    """
    h, e = y1_gram, y2_gram
    if definition == 1:
        root = pd_sqrt(e)
        inv_root = np.linalg.inv(root.entries)
        return SymmetricMatrix(inv_root @ h.entries @ inv_root.T)
    if definition == 2:
        root = pd_sqrt(h)
        return SymmetricMatrix(root.entries @ e.inv() @ root.entries.T)
    if definition == 3:
        if y1_raw is None:
            raise MissingRaw("definition 3 requires the raw a x m matrix Y1")
        y1 = np.atleast_2d(np.asarray(y1_raw, dtype=float))
        if y1.shape[1] != e.m:
            raise DomainError(f"Y1 must have {e.m} columns, got {y1.shape[1]}")
        return SymmetricMatrix(y1 @ e.inv() @ y1.T)
    raise DomainError(f"definition must be 1, 2 or 3, got {definition}")


def sample_f1(params: BetaParams, rng: np.random.Generator) -> F1Sample:
    """One draw of F1 = E^{-1} H with E ~ W_m(b, I), H ~ W_m(a, I).

    Resamples on a degenerate spectrum (measure-zero event), capped at
    RETRY_CAP attempts.
    """
    if params.a < params.m or params.b < params.m:
        raise DomainError("sample_f1 requires a >= m and b >= m")
    for _ in range(RETRY_CAP):
        h = sample_wishart(params.m, params.a, rng)
        e = sample_wishart(params.m, params.b, rng)
        f1 = GeneralMatrix(np.linalg.solve(e.matrix.entries, h.matrix.entries))
        try:
            general_eig_real(f1)
        except DegenerateSpectrum:
            continue
        return F1Sample(f1=f1, source_e=e.matrix, source_h=h.matrix)
    raise RetryExhausted(f"{RETRY_CAP} consecutive degenerate draws; check tolerances")


def sample_f1_batch(params: BetaParams, n: int, rng: np.random.Generator):
    """(n, m, m) stack of F1 draws plus their sorted eigenvalue arrays.

    Degenerate or numerically complex spectra (measure-zero) are replaced
    by fresh draws. Returns (f1s, roots) with roots of shape (n, m),
    descending along the last axis.
    """
    m = params.m
    if params.a < m or params.b < m:
        raise DomainError("sample_f1_batch requires a >= m and b >= m")
    f1s = np.empty((n, m, m))
    roots = np.empty((n, m))
    need = np.arange(n)
    for _ in range(RETRY_CAP):
        k = need.size
        if k == 0:
            break
        h = sample_wishart_batch(k, m, params.a, rng)
        e = sample_wishart_batch(k, m, params.b, rng)
        f1 = np.linalg.solve(e, h)
        w = np.linalg.eigvals(f1)
        scale = np.max(np.abs(w), axis=1)
        ok = np.max(np.abs(w.imag), axis=1) <= 1e-8 * scale
        r = np.sort(w.real, axis=1)[:, ::-1]
        ok &= r[:, -1] > 0.0
        if m > 1:
            ok &= np.min(-np.diff(r, axis=1), axis=1) >= GAP_RTOL * r[:, 0]
        f1s[need[ok]] = f1[ok]
        roots[need[ok]] = r[ok]
        need = need[~ok]
    else:
        raise RetryExhausted("degenerate-draw retries exhausted in batch sampler")
    return f1s, roots


def density_beta2(f: SymmetricMatrix, params: BetaParams) -> LogDensity:
    """Log density of the symmetric beta type II matrix at f.

    (1/B_m[a/2, b/2]) |F|^{(a-m-1)/2} |I + F|^{-(a+b)/2} on the PD cone.
    """
    params.require_density_regime()
    m, a, b = params.m, params.a, params.b
    if f.m != m:
        raise DomainError(f"matrix order {f.m} != params.m = {m}")
    pd = PDMatrix(f)  # raises NotPositiveDefinite off the cone
    _, logdet_ipf = np.linalg.slogdet(np.eye(m) + f.entries)
    log_value = (
        -mv_beta(m, a / 2, b / 2)
        + (a - m - 1) / 2 * pd.logdet()
        - (a + b) / 2 * logdet_ipf
    )
    return LogDensity(float(log_value))


def _roots_log_terms(roots: np.ndarray, a: float, b: float, m: int) -> float:
    return float(
        np.sum((a - m - 1) / 2 * np.log(roots) - (a + b) / 2 * np.log1p(roots))
    )


def _log_vandermonde(roots: np.ndarray) -> float:
    m = roots.size
    if m == 1:
        return 0.0
    diffs = roots[:, None] - roots[None, :]
    iu = np.triu_indices(m, 1)
    return float(np.sum(np.log(diffs[iu])))


def _log_root_constant(params: BetaParams) -> float:
    m, a, b = params.m, params.a, params.b
    return (
        m * m / 2 * math.log(math.pi)
        - mv_gamma(m, m / 2)
        - mv_beta(m, a / 2, b / 2)
    )


def density_latent_roots(s: Spectrum, params: BetaParams) -> LogDensity:
    """Joint log density of the ordered latent roots l_1 > ... > l_m > 0."""
    params.require_density_regime()
    if s.m != params.m:
        raise DomainError(f"spectrum size {s.m} != params.m = {params.m}")
    s.require_distinct()
    log_value = (
        _log_root_constant(params)
        + _roots_log_terms(s.roots, params.a, params.b, params.m)
        + _log_vandermonde(s.roots)
    )
    return LogDensity(float(log_value))


def density_f1_unnormalized(f1: GeneralMatrix, params: BetaParams) -> LogDensity:
    """Log density of the nonsymmetric F1 with the eigenvector-manifold
    volume constant set to 1; callers divide by their own volume estimate.
    """
    params.require_density_regime()
    if f1.m != params.m:
        raise DomainError(f"matrix order {f1.m} != params.m = {params.m}")
    s = general_eig_real(f1)
    log_value = (
        _log_root_constant(params)
        + _roots_log_terms(s.roots, params.a, params.b, params.m)
        - _log_vandermonde(s.roots)
    )
    return LogDensity(float(log_value))


def _j_prefactor(params: BetaParams, vol_jordan: float) -> float:
    m, a, b = params.m, params.a, params.b
    if vol_jordan <= 0.0:
        raise DomainError("vol_jordan must be positive")
    return (
        (a + b) * m / 2 * math.log(2.0)
        + m * m / 2 * math.log(math.pi)
        + mv_gamma(m, (a + b) / 2)
        - mv_gamma(m, m / 2)
        - math.log(vol_jordan)
    )


def j1_closed(f1: GeneralMatrix, params: BetaParams, vol_jordan: float = 1.0) -> LogDensity:
    """Closed form of the first double integral in the F1 density.

    The source display writes the gamma factor as a two-argument bracket;
    it is resolved here as the m-variate gamma at (a+b)/2, the unique
    reading under which the recombination identity holds (tested).
    """
    s = general_eig_real(f1)
    m, a, b = params.m, params.a, params.b
    log_value = (
        _j_prefactor(params, vol_jordan)
        - m * float(np.sum(np.log(s.roots)))
        - (a + b) / 2 * float(np.sum(np.log1p(s.roots)))
        - _log_vandermonde(s.roots)
    )
    return LogDensity(float(log_value))


def j2_closed(f1: GeneralMatrix, params: BetaParams, vol_jordan: float = 1.0) -> LogDensity:
    """Closed form of the second double integral, in terms of mu_i = 1/l_i."""
    s = general_eig_real(f1)
    a, b = params.a, params.b
    mu = 1.0 / s.roots  # ascending where roots are descending
    # prod_{i>j} mu_i mu_j / (mu_j - mu_i), pairs with mu_j < mu_i
    mm = mu.size
    log_pairs = 0.0
    for j in range(mm):
        for i in range(j + 1, mm):
            log_pairs += math.log(mu[i] * mu[j]) - math.log(mu[i] - mu[j])
    log_value = (
        _j_prefactor(params, vol_jordan)
        - (a + b) / 2 * float(np.sum(np.log1p(mu)))
        + log_pairs
    )
    return LogDensity(float(log_value))


def density_f1_via_j1(f1: GeneralMatrix, params: BetaParams, vol_jordan: float = 1.0) -> LogDensity:
    """F1 density rebuilt from the first marginal display and j1_closed."""
    s = general_eig_real(f1)
    m, a, b = params.m, params.a, params.b
    log_value = (
        (a + m - 1) / 2 * float(np.sum(np.log(s.roots)))
        - (a + b) * m / 2 * math.log(2.0)
        - mv_gamma(m, a / 2)
        - mv_gamma(m, b / 2)
        + j1_closed(f1, params, vol_jordan).log_value
    )
    return LogDensity(float(log_value))


def density_f1_via_j2(f1: GeneralMatrix, params: BetaParams, vol_jordan: float = 1.0) -> LogDensity:
    """F1 density rebuilt from the alternative marginal display and j2_closed."""
    s = general_eig_real(f1)
    m, a, b = params.m, params.a, params.b
    log_value = (
        -(b + m + 1) / 2 * float(np.sum(np.log(s.roots)))
        - (a + b) * m / 2 * math.log(2.0)
        - mv_gamma(m, a / 2)
        - mv_gamma(m, b / 2)
        + j2_closed(f1, params, vol_jordan).log_value
    )
    return LogDensity(float(log_value))
