"""Independent numeric oracles used to freeze expected values.

Everything here deliberately avoids the library's own computation paths:
quadrature uses raw scipy on the defining integrals, and the Monte Carlo
integral uses an external proposal density from scipy.stats.
"""

import math

import numpy as np
from scipy import integrate, stats

from matrixbeta.special import mv_beta


def gamma1_quad(r: float) -> float:
    """Integral definition of the 1-variate gamma on (0, inf)."""
    val, _ = integrate.quad(lambda x: math.exp(-x) * x ** (r - 1), 0, np.inf)
    return val


def gamma2_quad(r: float) -> float:
    """Integral of etr(-R)|R|^{r-3/2} over the m=2 PD cone.

    Coordinates (r11, r22, r12) with |r12| < sqrt(r11 r22).
    """

    def inner(r12, r22, r11):
        det = r11 * r22 - r12 * r12
        return math.exp(-(r11 + r22)) * det ** (r - 1.5)

    val, _ = integrate.tplquad(
        inner,
        0,
        np.inf,
        0,
        np.inf,
        lambda r11, r22: -math.sqrt(r11 * r22),
        lambda r11, r22: math.sqrt(r11 * r22),
        epsabs=1e-9,
        epsrel=1e-9,
    )
    return val


def beta2_m2_integral_mc(a: float, b: float, n: int, seed: int, scale: float = 1.5):
    """Monte Carlo integral of the m=2 symmetric beta II density.

    Importance sampling in Cholesky coordinates (l11, l21, l22) with a
    Cauchy/half-Cauchy proposal, whose power tails dominate the
    polynomial tails of the integrand. Returns (estimate, std_error).
    """
    rng = np.random.default_rng(seed)
    l11 = np.abs(stats.cauchy.rvs(scale=scale, size=n, random_state=rng))
    l22 = np.abs(stats.cauchy.rvs(scale=scale, size=n, random_state=rng))
    l21 = stats.cauchy.rvs(scale=scale, size=n, random_state=rng)
    logq = (
        math.log(2)
        + stats.cauchy.logpdf(l11, scale=scale)
        + math.log(2)
        + stats.cauchy.logpdf(l22, scale=scale)
        + stats.cauchy.logpdf(l21, scale=scale)
    )
    # target density in the Cholesky chart: (dF) = 2^2 l11^2 l22 (dL)
    logdet_f = 2 * (np.log(l11) + np.log(l22))
    f11 = l11**2
    f12 = l11 * l21
    f22 = l21**2 + l22**2
    det_ipf = (1 + f11) * (1 + f22) - f12**2
    logp = (
        -mv_beta(2, a / 2, b / 2)
        + (a - 3) / 2 * logdet_f
        - (a + b) / 2 * np.log(det_ipf)
    )
    logjac = math.log(4.0) + 2 * np.log(l11) + np.log(l22)
    w = np.exp(logp + logjac - logq)
    return float(w.mean()), float(w.std(ddof=1) / math.sqrt(n))


def latent_roots_m2_integral(a: float, b: float) -> float:
    """2-D adaptive quadrature of the ordered-root density, m=2.

    Integrates in bounded coordinates t_i = l_i / (1 + l_i) over the
    ordered triangle t1 > t2.
    """
    from matrixbeta.mcverify import _latent_root_logpdf_batch
    from matrixbeta.distributions import BetaParams

    p = BetaParams(2, a, b)

    def f(t2, t1):
        l1 = t1 / (1 - t1)
        l2 = t2 / (1 - t2)
        lp = _latent_root_logpdf_batch(np.array([[l1, l2]]), p)[0]
        return math.exp(lp) / (1 - t1) ** 2 / (1 - t2) ** 2

    val, _ = integrate.dblquad(
        f, 0, 1, 0, lambda t1: t1, epsabs=1e-6, epsrel=1e-6
    )
    return val


def beta2_m1_integral(a: float, b: float) -> float:
    """Adaptive quadrature of the scalar density on (0, inf)."""
    from matrixbeta.distributions import BetaParams
    from matrixbeta.mcverify import scalar_beta2_logpdf

    p = BetaParams(1, a, b)
    val, _ = integrate.quad(
        lambda x: math.exp(scalar_beta2_logpdf(x, p)), 0, np.inf, epsabs=1e-12
    )
    return val
