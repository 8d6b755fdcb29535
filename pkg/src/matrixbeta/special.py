"""Multivariate gamma and beta functions and group-volume constants.

Everything is computed in log space; exponentiation happens at API
boundaries only.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln

from .errors import DomainError


def mv_gamma(m: int, r: float) -> float:
    """log of the m-variate gamma function at r.

    Uses the product representation
        pi^{m(m-1)/4} * prod_{i=1..m} Gamma(r - (i-1)/2),
    valid for r > (m-1)/2. The integral over the PD cone is checked
    against this form by quadrature in the test suite.
    """
    if m < 1:
        raise DomainError("m must be a positive integer")
    if r <= (m - 1) / 2:
        raise DomainError(f"r = {r} must exceed (m-1)/2 = {(m - 1) / 2}")
    i = np.arange(m)
    return m * (m - 1) / 4 * math.log(math.pi) + float(np.sum(gammaln(r - i / 2)))


def mv_beta(m: int, r: float, q: float) -> float:
    """log of the m-variate beta function B_m[r, q]."""
    return mv_gamma(m, r) + mv_gamma(m, q) - mv_gamma(m, r + q)


def vol_orthogonal(m: int) -> float:
    """Volume of the orthogonal group O(m): 2^m pi^{m^2/2} / Gamma_m[m/2]."""
    if m < 1:
        raise DomainError("m must be a positive integer")
    return math.exp(log_vol_orthogonal(m))


def log_vol_orthogonal(m: int) -> float:
    return m * math.log(2.0) + m * m / 2 * math.log(math.pi) - mv_gamma(m, m / 2)
