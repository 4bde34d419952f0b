import math

import hypothesis
import hypothesis.strategies as st
import numpy as np
import pytest
import scipy.special as sc

from deepwh import StableParams
from deepwh import densities as dens
from deepwh import factorisation as fac
from deepwh.errors import DomainError, RegimeError, SupportError

from . import oracles

LOW = [StableParams(a, r) for a, r in ((0.5, 0.5), (0.5, 0.3), (0.8, 0.6), (0.3, 0.7), (0.6, 0.5), (0.9, 0.45))]
HIGH = [StableParams(a, r) for a, r in ((1.5, 0.5), (1.3, 0.4), (1.8, 0.5), (1.2, 0.7), (1.5, 0.6), (1.1, 0.5))]


@st.composite
def low_params(draw):
    alpha = draw(st.floats(min_value=0.1, max_value=0.95))
    rho = draw(st.floats(min_value=0.05, max_value=0.95))
    return StableParams(alpha, rho)


@st.composite
def high_params(draw):
    alpha = draw(st.floats(min_value=1.05, max_value=1.9))
    lo, hi = 1.0 - 0.97 / alpha, 0.97 / alpha
    rho = draw(st.floats(min_value=lo, max_value=hi))
    return StableParams(alpha, rho)


# ---------------------------------------------------------------------------
# avoiding the strip and closest reach


def test_phi_avoid_limits_and_value():
    p = StableParams(0.7, 0.5)
    assert dens.phi_avoid(1.0, p) == 0.0
    assert dens.phi_avoid(math.inf, p) == 1.0
    # 1 - phi decays like x^(alpha - 1)
    assert 1.0 - dens.phi_avoid(1e12, p) == pytest.approx(sc.betainc(0.3, 0.35, 2.0 / (1e12 + 1)), rel=1e-6)
    assert dens.phi_avoid(2.0, p) == pytest.approx(oracles.PHI_AVOID_07_05_2, rel=1e-12)


@hypothesis.given(low_params(), st.floats(min_value=1.0001, max_value=1e6))
def test_phi_avoid_is_incomplete_beta(p, x):
    q = (x - 1.0) / (x + 1.0)
    assert dens.phi_avoid(x, p) == pytest.approx(sc.betainc(p.a_rho_hat, 1.0 - p.alpha, q), rel=1e-9, abs=1e-13)


def test_phi_avoid_derivative_matches_difference():
    p = StableParams(0.6, 0.4)
    x, h = 1.7, 1e-5
    fd = (dens.phi_avoid(x + h, p) - dens.phi_avoid(x - h, p)) / (2 * h)
    assert dens.phi_avoid_derivative(x, p) == pytest.approx(fd, rel=1e-7)


def test_closest_values():
    assert dens.closest_reach_density(0.5, 1.0, StableParams(0.5, 0.5)) == pytest.approx(
        oracles.CLOSEST_05_05_1_05, rel=1e-13
    )
    assert dens.closest_reach_density(-0.3, 1.0, StableParams(0.6, 0.4)) == pytest.approx(
        oracles.CLOSEST_06_04_1_M03, rel=1e-13
    )
    assert dens.closest_reach_density(0.0, 1.0, StableParams(0.6, 0.4)) == math.inf


def test_closest_support_and_regime():
    p = StableParams(0.6, 0.4)
    with pytest.raises(SupportError):
        dens.closest_reach_density(1.2, 1.0, p)
    with pytest.raises(RegimeError):
        dens.closest_reach_density(0.5, 1.0, StableParams(1.5, 0.5))
    with pytest.raises(SupportError):
        dens.ReachDensityQuery(1.0, 1.5, p)
    with pytest.raises(RegimeError):
        dens.ReachDensityQuery(1.0, 0.5, StableParams(1.0, 0.5))
    assert dens.ReachDensityQuery(1.0, -0.3, p).density() == pytest.approx(oracles.CLOSEST_06_04_1_M03, rel=1e-13)


@hypothesis.given(low_params(), st.floats(min_value=-0.99, max_value=0.99), st.sampled_from([0.5, 2.0, 10.0]))
def test_closest_self_similarity(p, u, c):
    hypothesis.assume(abs(u) > 1e-6)
    x = 1.3
    z = u * x
    lhs = dens.closest_reach_density(z, x, p)
    rhs = c * dens.closest_reach_density(c * z, c * x, p)
    assert lhs == pytest.approx(rhs, rel=1e-12)


@hypothesis.given(low_params(), st.floats(min_value=0.01, max_value=0.99))
def test_closest_phi_derivative_identity(p, z):
    x = 1.0
    via_phi = (x + z) / (2 * z * z) * dens.phi_avoid_derivative(x / z, p)
    assert dens.closest_reach_density(z, x, p) == pytest.approx(via_phi, rel=1e-9)


@pytest.mark.parametrize("p", LOW, ids=str)
def test_closest_mass(p):
    for x in (0.5, 1.0, 3.0):
        assert dens.pieces_mass(dens.closest_reach_pieces(x, p)) == pytest.approx(1.0, abs=1e-6)


def test_closest_riemann_sum():
    p = StableParams(0.6, 0.5)
    z = np.linspace(-1.0, 1.0, 200001)
    mid = 0.5 * (z[1:] + z[:-1])
    total = np.sum(dens.closest_reach_density(mid, 1.0, p)) * (z[1] - z[0])
    # midpoint rule misses part of the |z|^(-alpha) spike and the edge singularities
    assert total == pytest.approx(1.0, abs=0.02)


# ---------------------------------------------------------------------------
# two-sided exit and furthest reach


def test_phi_bar_values():
    p = StableParams(1.5, 0.4)
    assert float(dens.phi_bar(1.0, p)) == 0.0
    assert float(dens.phi_bar(3.0, p)) == pytest.approx(oracles.PHIBAR_15_04_3, rel=1e-12)
    with pytest.raises(DomainError):
        dens.phi_bar(0.5, p)


@hypothesis.given(high_params(), st.floats(min_value=1.0, max_value=1e4))
def test_phi_bar_is_increasing(p, w):
    assert float(dens.phi_bar(w * 1.01, p)) > float(dens.phi_bar(w, p))


def test_hit_point_value():
    p = StableParams(1.5, 0.5)
    assert dens.hit_point_before_exit(0.2, 0.5, p) == pytest.approx(oracles.HIT_15_05_02_05, rel=1e-12)


@hypothesis.given(high_params(), st.floats(min_value=0.01, max_value=0.98), st.floats(min_value=0.0, max_value=1.0))
def test_hit_point_is_probability(p, x, s):
    y = x + (0.999 - x) * s
    hypothesis.assume(x < y < 0.999)
    val = dens.hit_point_before_exit(x, y, p)
    assert 0.0 <= val <= 1.0 + 1e-12


def test_hit_point_near_diagonal():
    p = StableParams(1.5, 0.4)
    vals = [dens.hit_point_before_exit(0.3, 0.3 + d, p) for d in (1e-2, 1e-4, 1e-6, 1e-8)]
    assert all(0.0 < v <= 1.0 for v in vals)
    assert vals[-1] == pytest.approx(1.0, abs=1e-3)


def test_hit_point_domain():
    with pytest.raises(DomainError):
        dens.hit_point_before_exit(0.5, 0.2, StableParams(1.5, 0.5))


def test_furthest_values():
    p = StableParams(1.5, 0.5)
    assert float(dens.furthest_reach_density(2.0, 1.0, p)) == pytest.approx(oracles.FURTHEST_15_05_1_2, rel=1e-12)
    assert dens.ReachDensityQuery(1.0, 2.0, p).density() == pytest.approx(oracles.FURTHEST_15_05_1_2, rel=1e-12)
    q = StableParams(1.5, 0.4)
    assert float(dens.furthest_reach_density(-10.0, 0.8, q)) == pytest.approx(oracles.FURTHEST_15_04_08_M10, rel=1e-12)


def test_furthest_support():
    with pytest.raises(SupportError):
        dens.furthest_reach_density(0.5, 1.0, StableParams(1.5, 0.5))


@hypothesis.settings(deadline=None)
@hypothesis.given(high_params(), st.floats(min_value=1.001, max_value=30.0), st.booleans())
def test_furthest_routes_agree(p, w, neg):
    z = -w if neg else w
    a = float(dens.furthest_reach_density(z, 1.0, p))
    b = float(dens.furthest_reach_density_derivation(z, 1.0, p))
    assert a == pytest.approx(b, rel=1e-8)


@hypothesis.settings(deadline=None)
@hypothesis.given(high_params(), st.floats(min_value=1e-3, max_value=1e8), st.booleans())
def test_furthest_positive(p, y, neg):
    z = 1.0 + y
    z = -z if neg else z
    assert float(dens.furthest_reach_density(z, 1.0, p)) > 0.0


@hypothesis.settings(deadline=None)
@hypothesis.given(high_params(), st.floats(min_value=1.01, max_value=50.0), st.sampled_from([0.5, 2.0, 10.0]))
def test_furthest_self_similarity(p, w, c):
    x = 0.7
    lhs = float(dens.furthest_reach_density(w * x, x, p))
    rhs = c * float(dens.furthest_reach_density(c * w * x, c * x, p))
    assert lhs == pytest.approx(rhs, rel=1e-11)


@pytest.mark.parametrize("p", HIGH, ids=str)
def test_furthest_mass(p):
    for x in (0.5, 1.0, 4.0):
        assert dens.pieces_mass(dens.furthest_reach_pieces(x, p)) == pytest.approx(1.0, abs=1e-6)


# ---------------------------------------------------------------------------
# stationary law of the reflected process


def test_stationary_value():
    p = StableParams(0.5, 0.5)
    assert float(dens.stationary_density(0.0, p)) == pytest.approx(oracles.STATIONARY_05_05_0, rel=1e-14)
    assert dens.StationaryQuery(0.0, p).density() == pytest.approx(oracles.STATIONARY_05_05_0, rel=1e-14)
    with pytest.raises(DomainError):
        dens.StationaryQuery(1.5, p)
    with pytest.raises(RegimeError):
        dens.StationaryQuery(0.0, StableParams(1.5, 0.5))


@hypothesis.given(low_params(), st.floats(min_value=-0.999, max_value=0.999))
def test_stationary_is_shifted_beta(p, y):
    # (1 + Y) / 2 is Beta(a rho, a rho_hat)
    ref = 0.5 * np.exp(
        (p.a_rho - 1) * np.log((1 + y) / 2) + (p.a_rho_hat - 1) * np.log((1 - y) / 2) - sc.betaln(p.a_rho, p.a_rho_hat)
    )
    assert float(dens.stationary_density(y, p)) == pytest.approx(ref, rel=1e-11)


def test_stationary_symmetry_and_skew():
    y = np.linspace(-0.99, 0.99, 199)
    f = dens.stationary_density(y, StableParams(0.5, 0.5))
    np.testing.assert_allclose(f, f[::-1], rtol=1e-13)
    g = dens.stationary_density(y, StableParams(0.5, 0.9))
    # rho = 0.9 puts more mass on the positive side
    assert np.sum(g[y > 0]) > 2 * np.sum(g[y < 0])


@pytest.mark.parametrize("p", LOW, ids=str)
def test_stationary_mass(p):
    assert dens.pieces_mass(dens.stationary_pieces(p)) == pytest.approx(1.0, abs=1e-6)


# ---------------------------------------------------------------------------
# symmetric Cauchy


def test_cauchy_exit_values():
    assert dens.cauchy_exit_density(0.2, 0.3, 0.5) == pytest.approx(oracles.CAUCHY_EXIT_02_03_05, rel=1e-14)
    u, y = 0.4, 0.7
    plain = (2 - u + y) ** -0.5 * (u + y) ** -1.5 / (2 * math.pi)
    assert dens.cauchy_exit_density(0.0, u, y) == pytest.approx(plain, rel=1e-14)
    with pytest.raises(SupportError):
        dens.cauchy_exit_density(0.5, 0.6, 0.1)
    assert dens.cauchy_exit_density(0.1, 0.0, 0.0) == math.inf


@hypothesis.given(
    st.floats(min_value=-0.9, max_value=0.9), st.floats(min_value=0.0, max_value=1.0), st.floats(min_value=0, max_value=5)
)
def test_cauchy_exit_shift(x, s, y):
    u = s * (1 - abs(x)) * 0.999
    # the event is exit above 1 before below u - 1; map (u - 1, 1) onto (0, 1)
    hypothesis.assume(u + y > 1e-6)
    w = 2.0 - u
    shifted = dens.cauchy_exit_density_unshifted((x + 1 - u) / w, u / w, y / w)
    assert dens.cauchy_exit_density(x, u, y) == pytest.approx(shifted / w ** 2, rel=1e-12)


def test_cauchy_jump_measure():
    assert float(dens.cauchy_jump_measure(1.0)) == pytest.approx(oracles.CAUCHY_JUMP_1, rel=1e-14)
    small = np.array([1e-4, 1e-6])
    ratio = dens.cauchy_jump_measure(small) * small ** 1.5
    np.testing.assert_allclose(ratio, 2 ** -0.5, rtol=1e-3)
    assert np.isfinite(dens.cauchy_jump_measure(800.0))


def test_cauchy_ladder_exponent():
    assert dens.cauchy_ladder_exponent(1.0) == pytest.approx(1 / math.sqrt(math.pi), rel=1e-14)
    assert dens.cauchy_ladder_exponent(2.0) == pytest.approx(math.sqrt(math.pi) / 2, rel=1e-14)


@hypothesis.given(st.floats(min_value=0.01, max_value=30.0))
def test_cauchy_potential_identities(x):
    u = fac.potential_u(x, StableParams(1.0, 0.5))
    a, b = -math.expm1(-x), 1 + math.exp(-x)
    assert u[0, 0] + u[0, 1] == pytest.approx(a ** -0.5 * b ** 0.5 + a ** 0.5 * b ** -0.5, rel=1e-12)
    assert u[0, 0] / u[1, 0] == pytest.approx(b / a, rel=1e-12)
