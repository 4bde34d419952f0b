import cmath
import math

import hypothesis
import hypothesis.strategies as st
import numpy as np
import pytest
import scipy.special as sc

from deepwh.errors import DivergenceError, DomainError, PoleError
from deepwh.specfun import PsiArgs, gamma, hyp2f1_neg1, log_gamma, psi, quad_adaptive, rgamma

from . import oracles


def test_log_gamma_special_values():
    assert log_gamma(1.0) == pytest.approx(0.0, abs=1e-15)
    assert log_gamma(0.5).real == pytest.approx(0.5 * math.log(math.pi), rel=1e-14)
    # Gamma(-1/2) = -2 sqrt(pi): modulus in the real part, sign as an odd multiple of pi
    lg = log_gamma(-0.5)
    assert lg.real == pytest.approx(math.log(2.0 * math.sqrt(math.pi)), rel=1e-14)
    assert cmath.exp(lg).real == pytest.approx(-2.0 * math.sqrt(math.pi), rel=1e-13)


def test_log_gamma_poles():
    for z in (0.0, -1.0, -3.0):
        with pytest.raises(PoleError):
            log_gamma(z)
    with pytest.raises(PoleError):
        gamma(-2.0)
    assert rgamma(-2.0) == 0.0


@hypothesis.given(
    st.floats(min_value=-4.9, max_value=6.0),
    st.floats(min_value=-3.0, max_value=3.0),
)
def test_log_gamma_matches_scipy(x, y):
    hypothesis.assume(abs(y) > 1e-3 or abs(x - round(x)) > 1e-3)
    ref = sc.loggamma(complex(x, y))
    got = log_gamma(complex(x, y))
    # branches may differ by 2 pi i; compare Gamma itself through the modulus and phase
    assert got.real == pytest.approx(ref.real, abs=1e-12 * max(1.0, abs(ref.real)))
    assert cmath.exp(1j * (got.imag - ref.imag)) == pytest.approx(1.0, abs=1e-10)


@hypothesis.given(st.floats(min_value=-4.95, max_value=5.95))
def test_gamma_reflection(x):
    hypothesis.assume(abs(x - round(x)) > 1e-3)
    z = complex(x, 0.0)
    val = cmath.exp(log_gamma(z) + log_gamma(1.0 - z)) * math.sin(math.pi * x) / math.pi
    assert val.real == pytest.approx(1.0, rel=1e-11)


@hypothesis.given(st.floats(min_value=-4.9, max_value=6.0))
def test_rgamma_matches_scipy(x):
    assert rgamma(x).real == pytest.approx(sc.rgamma(x), rel=1e-12, abs=1e-14)


def test_hyp2f1_special_values():
    assert hyp2f1_neg1(0.0, 0.7, 1.3) == 1.0
    for p, q in ((0.3, 1.2), (0.5, 0.4), (-0.7, 2.5)):
        assert hyp2f1_neg1(p, q, q) == pytest.approx(2.0 ** -p, rel=1e-13)
    assert hyp2f1_neg1(1.0, 1.0, 2.0) == pytest.approx(math.log(2.0), rel=1e-13)


def test_hyp2f1_divergence_and_pole():
    with pytest.raises(DivergenceError):
        hyp2f1_neg1(1.0, 1.5, 1.0)
    with pytest.raises(PoleError):
        hyp2f1_neg1(0.3, 0.4, -2.0)


@hypothesis.given(
    st.floats(min_value=-2.0, max_value=3.0),
    st.floats(min_value=-2.0, max_value=3.0),
    st.floats(min_value=0.2, max_value=4.0),
)
def test_hyp2f1_matches_scipy(p, q, r):
    hypothesis.assume(r - p - q > -0.9)
    ref = sc.hyp2f1(p, q, r, -1.0)
    hypothesis.assume(np.isfinite(ref) and abs(ref) > 1e-6)
    assert hyp2f1_neg1(p, q, r) == pytest.approx(ref, rel=1e-9)


def test_psi_trivial():
    assert psi(0, 0, 0) == pytest.approx(1.0, rel=1e-14)
    assert psi(1, 0, 0) == pytest.approx(0.5, rel=1e-14)
    assert psi(0, 0, 1) == pytest.approx(1.5, rel=1e-14)
    assert psi(PsiArgs(0.0, 0.0, 1.0)) == pytest.approx(1.5, rel=1e-14)


def test_psi_regression():
    assert psi(0.3, -0.5, 0.5) == pytest.approx(oracles.PSI_03_M05_05, rel=1e-12)
    assert psi(0.3, -0.5, 0.5, method="hyp") == pytest.approx(oracles.PSI_03_M05_05, rel=1e-12)


def test_psi_continuation():
    # a < -1: only the hypergeometric route exists
    assert psi(-1.5, 0.5, 0.3) == pytest.approx(oracles.PSI_HYP_M15_05_03, rel=1e-11)
    with pytest.raises(DomainError):
        psi(-1.5, 0.5, 0.3, method="quad")
    with pytest.raises(DomainError):
        psi(-2.0, 0.5, 0.3, method="hyp")


@hypothesis.settings(max_examples=60, deadline=None)
@hypothesis.given(
    st.floats(min_value=-0.95, max_value=3.0),
    st.floats(min_value=-0.95, max_value=3.0),
    st.floats(min_value=-1.0, max_value=2.0),
)
def test_psi_routes_agree(a, b, c):
    q = psi(a, b, c, method="quad")
    h = psi(a, b, c, method="hyp")
    assert q == pytest.approx(h, rel=1e-9)


@hypothesis.given(st.floats(min_value=-0.9, max_value=2.0), st.floats(min_value=-0.9, max_value=2.0))
def test_psi_c_zero_is_beta(a, b):
    assert psi(a, b, 0.0) == pytest.approx(sc.beta(a + 1.0, b + 1.0), rel=1e-11)


def test_psi_monotone_in_a():
    vals = [psi(a, -0.3, 0.4) for a in np.linspace(-0.5, 4.0, 10)]
    assert np.all(np.diff(vals) < 0)


def test_quad_basic():
    assert quad_adaptive(lambda t: np.ones_like(t), 0.0, 1.0).value == pytest.approx(1.0, rel=1e-14)
    res = quad_adaptive(lambda t: t ** -0.5, 0.0, 1.0, lo_exp=-0.5)
    assert res.value == pytest.approx(2.0, rel=1e-12)


def test_quad_endpoint_singularity_matches_psi():
    f = lambda t: (1.0 - t) ** -0.3 * (1.0 + t) ** 0.2
    res = quad_adaptive(f, 0.0, 1.0, hi_exp=-0.3)
    assert res.value == pytest.approx(oracles.PSI_0_M03_02, rel=1e-12)
    assert res.value == pytest.approx(psi(0, -0.3, 0.2), rel=1e-12)


def test_quad_weighted_near_minus_one():
    # int_0^1 t^(-0.99) dt = 100
    res = quad_adaptive(lambda t: np.ones_like(t), 0.0, 1.0, lo_exp=-0.99, weighted=True)
    assert res.value == pytest.approx(100.0, rel=1e-12)


def test_quad_infinite_tail():
    res = quad_adaptive(lambda t: (1.0 + t) ** -2.5, 0.0, math.inf, hi_exp=-2.5)
    assert res.value == pytest.approx(1.0 / 1.5, rel=1e-12)


def test_quad_vector_valued():
    res = quad_adaptive(lambda t: np.stack([t, t ** 2], -1), 0.0, 1.0)
    np.testing.assert_allclose(res.value, [0.5, 1.0 / 3.0], rtol=1e-14)
