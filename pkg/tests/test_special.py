import math

import numpy as np
import pytest
from scipy.special import gammaln

from matrixbeta.errors import DomainError
from matrixbeta.special import mv_beta, mv_gamma, vol_orthogonal

from oracles import gamma1_quad, gamma2_quad


def test_scalar_gamma_reduction():
    for r in (0.5, 1.0, 2.5, 7.0):
        assert mv_gamma(1, r) == pytest.approx(float(gammaln(r)), abs=1e-12)


def test_gamma2_hand_value():
    # Gamma_2[1] = pi^(1/2) Gamma(1) Gamma(1/2) = pi
    assert mv_gamma(2, 1.0) == pytest.approx(math.log(math.pi), abs=1e-12)


def test_gamma_domain_boundary():
    with pytest.raises(DomainError):
        mv_gamma(2, 0.4)
    with pytest.raises(DomainError):
        mv_gamma(2, 0.5)  # exactly on the boundary
    with pytest.raises(DomainError):
        mv_beta(3, 1.0, 3.0)  # r = (m-1)/2


def test_gamma_against_integral_definition():
    for m, r in ((1, 1.5), (2, 1.5), (2, 2.0)):
        oracle = gamma1_quad(r) if m == 1 else gamma2_quad(r)
        assert math.exp(mv_gamma(m, r)) == pytest.approx(oracle, rel=1e-4)


def test_beta_hand_values():
    assert mv_beta(1, 1.0, 1.0) == pytest.approx(0.0, abs=1e-12)
    # Gamma_2[2] = pi/2, Gamma_2[4] = 45 pi / 4 -> B_2[2,2] = pi/45
    assert mv_beta(2, 2.0, 2.0) == pytest.approx(math.log(math.pi / 45), abs=1e-12)


def test_beta_symmetry():
    rng = np.random.default_rng(5)
    for _ in range(20):
        m = int(rng.integers(1, 4))
        r = (m - 1) / 2 + rng.uniform(0.1, 5.0)
        q = (m - 1) / 2 + rng.uniform(0.1, 5.0)
        assert mv_beta(m, r, q) == pytest.approx(mv_beta(m, q, r), abs=1e-12)


def test_vol_orthogonal_values():
    assert vol_orthogonal(1) == pytest.approx(2.0, rel=1e-12)
    assert vol_orthogonal(2) == pytest.approx(4 * math.pi, rel=1e-12)
    # 2^3 pi^{9/2} / Gamma_3[3/2] with Gamma_3[3/2] = pi^{5/2}/2
    assert vol_orthogonal(3) == pytest.approx(16 * math.pi**2, rel=1e-12)
