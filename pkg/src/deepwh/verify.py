"""Identity-verification harness.

Every check returns a :class:`VerifyReport` carrying its residuals or test
statistic together with the thresholds it was judged against. Checks never
raise on numerical failure: quadrature errors become failed reports with the
error text in ``diagnostics``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import densities as dens
from . import factorisation as fac
from . import specfun
from . import stable_sim as sim
from .errors import DomainError, InsufficientSamplesError, QuadratureError, RegimeError
from .params import Regime, StableParams
from .specfun import quad_adaptive

__all__ = [
    "VerifyReport",
    "IDENTITIES",
    "SUITES",
    "laplace_transform_potential",
    "check_psi_routes",
    "check_f0_row_sums",
    "check_laplace_pair",
    "check_factorisation_constancy",
    "check_duality",
    "check_cauchy_identities",
    "check_cauchy_ladder",
    "check_normalisation",
    "check_closest_phi_identity",
    "check_furthest_routes",
    "check_phi_bar_laplace",
    "check_mc_against_density",
    "check_two_horizons",
    "check_avoid_strip",
    "exact_cdf",
    "ks_statistic",
    "reflected_bins",
    "load_config",
    "suite_plan",
    "run_suite",
    "reports_to_json",
    "reports_to_csv",
]

# Threshold defaults, stored in each report.
LAPLACE_RTOL = 1e-6
OFFDIAG_RTOL = 1e-8
DIAG_VARIATION = 1e-6
PSI_RTOL = 1e-9
F0_RTOL = 1e-12
CAUCHY_FORMULA_RTOL = 1e-12
CAUCHY_LADDER_RTOL = 1e-6
MASS_TOL = 1e-6
KS_MAX = 0.05
CHI2_PMIN = 0.01
HORIZON_KS_MAX = 0.03
AVOID_ALLOWANCE = 0.02


@dataclass
class VerifyReport:
    identity_name: str
    parameter_set: list
    grid: list
    max_abs_residual: float
    max_rel_residual: float
    passed: bool
    thresholds: dict
    statistic: dict | None = None
    runtime_seconds: float = 0.0
    diagnostics: str = ""

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d

    def summary_line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag} {self.identity_name} params={self.parameter_set} rel={self.max_rel_residual:.3g}"


def _params_list(ps) -> list:
    return [[p.alpha, p.rho] for p in ps]


def _timed(fn):
    """Run a report builder, stamp its runtime and fold exceptions into a failed report."""

    def wrapped(*args, **kwargs):
        t0 = time.perf_counter()
        try:
            rep = fn(*args, **kwargs)
        except (QuadratureError, ArithmeticError, InsufficientSamplesError) as exc:
            rep = VerifyReport(fn.__name__.removeprefix("check_"), [], [], math.nan, math.nan, False, {},
                               diagnostics=f"{type(exc).__name__}: {exc}")
        rep.runtime_seconds = time.perf_counter() - t0
        return rep

    wrapped.__name__ = fn.__name__
    wrapped.__doc__ = fn.__doc__
    wrapped.__wrapped__ = fn
    return wrapped


# ---------------------------------------------------------------------------
# Analytic identities


@_timed
def check_psi_routes(n_side: int = 10) -> VerifyReport:
    """Quadrature and hypergeometric Psi agree on an n_side^3 interior grid of (-0.9, 3)^2 x (-1, 2)."""
    a_grid = np.linspace(-0.9, 3.0, n_side + 2)[1:-1]
    b_grid = a_grid
    c_grid = np.linspace(-1.0, 2.0, n_side + 2)[1:-1]
    worst_abs = worst_rel = 0.0
    for a in a_grid:
        for b in b_grid:
            for c in c_grid:
                q = specfun.psi(a, b, c, method="quad")
                h = specfun.psi(a, b, c, method="hyp")
                worst_abs = max(worst_abs, abs(q - h))
                worst_rel = max(worst_rel, abs(q - h) / abs(q))
    grid = [[float(a_grid[0]), float(a_grid[-1])], [float(b_grid[0]), float(b_grid[-1])],
            [float(c_grid[0]), float(c_grid[-1])], n_side]
    return VerifyReport("psi_dual_route", [], grid, worst_abs, worst_rel, worst_rel <= PSI_RTOL,
                        {"max_rel": PSI_RTOL})


@_timed
def check_f0_row_sums(ps: Sequence[StableParams]) -> VerifyReport:
    """Rows of F(0) sum to zero (the modulator of the MAP is conservative)."""
    worst_abs = worst_rel = 0.0
    for p in ps:
        f0 = fac.map_exponent(0.0, p).real
        sums = np.abs(f0.sum(axis=1))
        scale = abs(f0[0, 1])
        worst_abs = max(worst_abs, float(sums.max()))
        worst_rel = max(worst_rel, float((sums / scale).max()))
    return VerifyReport("f0_row_sums", _params_list(ps), [0.0], worst_abs, worst_rel, worst_rel <= F0_RTOL,
                        {"max_rel": F0_RTOL})


# Potential entries near x = 0 behave like x^beta; beta per entry in (+,+), (+,-), (-,+), (-,-) order.
def _entry_exponents(factor: str, p: StableParams) -> np.ndarray:
    ar, arh = p.a_rho, p.a_rho_hat
    if factor == "ascending":
        return np.array([ar - 1.0, ar, arh, arh - 1.0])
    return np.array([arh - 1.0, arh, ar, ar - 1.0])


def _decay_rate(factor: str, p: StableParams) -> float:
    # u(x) ~ const * e^(-rate x) as x -> inf
    if factor == "ascending":
        return p.alpha - 1.0 if p.regime is Regime.HIGH else 0.0
    return 1.0 - p.alpha if p.regime is Regime.LOW else 0.0


def laplace_transform_potential(factor: str, p: StableParams, lambdas, x_cut: float | None = None):
    """int_0^inf e^(-lambda x) u(x) dx for each lambda, returned with shape (n, 2, 2).

    The range is cut at ``x_cut`` and the remainder is added in closed form
    from u(x) ~ u(x_cut) e^(-rate (x - x_cut)), whose error is of relative
    order e^(-x_cut) for every factor.
    """
    if factor not in ("ascending", "descending"):
        raise DomainError(f"factor must be 'ascending' or 'descending', got {factor!r}")
    lam = np.asarray(lambdas, dtype=float)
    dom = fac.factor_domain(factor, p)
    if not np.all(lam > dom.lambda_min):
        raise DomainError(f"lambdas must exceed {dom.lambda_min}")
    pot = fac.potential_u if factor == "ascending" else fac.potential_u_hat
    rate = _decay_rate(factor, p)
    eff = lam + rate
    if x_cut is None:
        x_cut = max(40.0, 36.0 / float(eff.min()))
    betas = _entry_exponents(factor, p)
    out = np.empty((lam.size, 4))
    for e in range(4):
        beta = betas[e]

        def head(x, beta=beta, e=e):
            # u_e(x) x^-beta is smooth at 0
            u = pot(x, p).reshape(-1, 4)[:, e]
            return (u * x ** (-beta))[:, None] * np.exp(-np.outer(x, lam))

        def body(x, e=e):
            u = pot(x, p).reshape(-1, 4)[:, e]
            return u[:, None] * np.exp(-np.outer(x, lam))

        v = quad_adaptive(head, 0.0, 1.0, 0.0, rtol=1e-12, lo_exp=beta, weighted=True).value
        v = v + quad_adaptive(body, 1.0, x_cut, 0.0, rtol=1e-12).value
        u_cut = pot(np.array([x_cut]), p).reshape(4)[e]
        out[:, e] = v + u_cut * np.exp(-lam * x_cut) / eff
    return out.reshape(-1, 2, 2)


@_timed
def check_laplace_pair(factor: str, p: StableParams, lambdas: Sequence[float]) -> VerifyReport:
    """Entrywise Laplace transforms of u / u_hat against kappa_inv / kappa_hat_inv."""
    name = {"ascending": "laplace_pair_ascending", "descending": "laplace_pair_descending"}[factor]
    lt = laplace_transform_potential(factor, p, lambdas)
    inv = fac.kappa_inv if factor == "ascending" else fac.kappa_hat_inv
    ref = np.array([inv(float(l), p) for l in lambdas])
    diff = np.abs(lt - ref)
    rel = float((diff / np.abs(ref)).max())
    return VerifyReport(name, _params_list([p]), [float(l) for l in lambdas], float(diff.max()), rel,
                        rel <= LAPLACE_RTOL, {"max_rel": LAPLACE_RTOL})


def _diag_constancy(ms: np.ndarray):
    norms = np.abs(ms).max(axis=(1, 2))
    off = np.maximum(np.abs(ms[:, 0, 1]), np.abs(ms[:, 1, 0])) / norms
    diag = np.stack([ms[:, 0, 0], ms[:, 1, 1]], axis=1)
    var = np.abs(diag - diag[0]).max(axis=0) / np.abs(diag[0])
    return float(off.max()), float(var.max()), diag


@_timed
def check_factorisation_constancy(p: StableParams, zs: Sequence[float], *, experimental: bool = False) -> VerifyReport:
    """M(z) = Delta kappa(-z) (-F(z))^-1 Delta^-1 kappa_hat(z)^T is diagonal and constant in z."""
    if p.regime is not Regime.LOW and not experimental:
        raise RegimeError(
            f"factorisation constancy on the real line needs alpha < 1 (got {p.alpha}); "
            "use experimental=True for the continued factors"
        )
    ms = np.array([fac.factorisation_matrix(float(z), p, experimental=experimental).real for z in zs])
    off, var, diag = _diag_constancy(ms)
    name = "factorisation_constancy" if not experimental else "factorisation_constancy_experimental"
    return VerifyReport(
        name, _params_list([p]), [float(z) for z in zs], off, max(off, var),
        off <= OFFDIAG_RTOL and var <= DIAG_VARIATION,
        {"offdiag_rel": OFFDIAG_RTOL, "diag_variation": DIAG_VARIATION},
        statistic={"diagonal": diag[0].tolist(), "offdiag_rel": off, "diag_variation": var},
    )


@_timed
def check_duality(p: StableParams, lambdas: Sequence[float]) -> VerifyReport:
    """R(lambda) linking kappa_hat_inv to the dual kappa_inv is diagonal, positive and constant."""
    ms = np.array([fac.duality_transform_check(float(l), p) for l in lambdas])
    off, var, diag = _diag_constancy(ms)
    positive = bool(np.all(diag > 0))
    return VerifyReport(
        "duality", _params_list([p]), [float(l) for l in lambdas], off, max(off, var),
        off <= OFFDIAG_RTOL and var <= DIAG_VARIATION and positive,
        {"offdiag_rel": OFFDIAG_RTOL, "diag_variation": DIAG_VARIATION},
        statistic={"diagonal": diag[0].tolist(), "offdiag_rel": off, "diag_variation": var},
    )


_CAUCHY = StableParams(1.0, 0.5)


@_timed
def check_cauchy_identities(xs: Sequence[float] | None = None) -> VerifyReport:
    """For alpha = 1: u_{1,1} + u_{1,-1} and u_{1,1} / u_{-1,1} in closed form."""
    x = np.asarray(xs if xs is not None else np.geomspace(1e-4, 30.0, 200), dtype=float)
    u = fac.potential_u(x, _CAUCHY)
    em, ep = -np.expm1(-x), 1.0 + np.exp(-x)
    row = em ** -0.5 * ep ** 0.5 + em ** 0.5 * ep ** -0.5
    ratio = ep / em
    r1 = np.abs(u[:, 0, 0] + u[:, 0, 1] - row) / row
    r2 = np.abs(u[:, 0, 0] / u[:, 1, 0] - ratio) / ratio
    rel = float(max(r1.max(), r2.max()))
    return VerifyReport("cauchy_sum_ratio", _params_list([_CAUCHY]), [float(x[0]), float(x[-1]), x.size],
                        rel, rel, rel <= CAUCHY_FORMULA_RTOL, {"max_rel": CAUCHY_FORMULA_RTOL})


@_timed
def check_cauchy_ladder(lambdas: Sequence[float] = (0.5, 1.0, 2.0, 4.0)) -> VerifyReport:
    """Laplace transform of u_{1,1} + u_{1,-1} times kappa_chi(lambda) is constant in lambda."""
    lt = laplace_transform_potential("ascending", _CAUCHY, lambdas)
    prod = np.array([(lt[k, 0, 0] + lt[k, 0, 1]) * dens.cauchy_ladder_exponent(l) for k, l in enumerate(lambdas)])
    var = float(np.abs(prod - prod[0]).max() / abs(prod[0]))
    return VerifyReport("cauchy_ladder", _params_list([_CAUCHY]), [float(l) for l in lambdas], var, var,
                        var <= CAUCHY_LADDER_RTOL, {"variation_rel": CAUCHY_LADDER_RTOL},
                        statistic={"ratio": float(prod[0])})


@_timed
def check_normalisation(which: str, ps: Sequence[StableParams], xs: Sequence[float] = (1.0,)) -> VerifyReport:
    """Closest-reach, furthest-reach or stationary density has total mass 1."""
    worst = 0.0
    for p in ps:
        for x in (xs if which != "stationary" else (None,)):
            if which == "closest":
                pieces = dens.closest_reach_pieces(x, p)
            elif which == "furthest":
                pieces = dens.furthest_reach_pieces(x, p)
            elif which == "stationary":
                pieces = dens.stationary_pieces(p)
            else:
                raise DomainError(f"unknown density {which!r}")
            worst = max(worst, abs(dens.pieces_mass(pieces) - 1.0))
    return VerifyReport(f"normalisation_{which}", _params_list(ps), list(xs) if which != "stationary" else [],
                        worst, worst, worst <= MASS_TOL, {"mass_abs": MASS_TOL})


@_timed
def check_closest_phi_identity(p: StableParams, x: float = 1.0, n: int = 50) -> VerifyReport:
    """closest_reach_density(z) = (x + z) / (2 z^2) Phi'(x / z) for 0 < z < x."""
    z = np.linspace(x / n, x * (1.0 - 1.0 / n), n)
    lhs = dens.closest_reach_density(z, x, p)
    rhs = (x + z) / (2.0 * z * z) * dens.phi_avoid_derivative(x / z, p)
    rel = float((np.abs(lhs - rhs) / rhs).max())
    return VerifyReport("closest_phi_identity", _params_list([p]), [float(z[0]), float(z[-1]), n],
                        float(np.abs(lhs - rhs).max()), rel, rel <= 1e-9, {"max_rel": 1e-9})


@_timed
def check_furthest_routes(p: StableParams, x: float = 1.0) -> VerifyReport:
    """Cancellation-free furthest-reach density against the literal derivation form, |z| <= 20 x."""
    z = np.concatenate([np.linspace(-20 * x, -1.01 * x, 40), np.linspace(1.01 * x, 20 * x, 40)])
    a = dens.furthest_reach_density(z, x, p)
    b = dens.furthest_reach_density_derivation(z, x, p)
    rel = float((np.abs(a - b) / np.abs(a)).max())
    positive = bool(np.all(a > 0))
    return VerifyReport("furthest_routes", _params_list([p]), [float(z[0]), float(z[-1]), z.size],
                        float(np.abs(a - b).max()), rel, rel <= 1e-9 and positive, {"max_rel": 1e-9})


def _phi_bar_laplace_lhs(gamma: float, p: StableParams) -> float:
    """int_0^inf e^(-gamma x) Phibar(e^x) dx as int_0^1 s^(gamma-1) Phibar(1/s) ds.

    Phibar(1/s) behaves like s^(1-alpha) at 0 and like (1-s)^(a rho) at 1;
    both powers are applied as quadrature weights.
    """
    ar, arh, a = p.a_rho, p.a_rho_hat, p.alpha

    def smooth(s, dl, dh):
        return s ** (a - 1.0) * dens._kernels.phibar_y(dh / s, ar, arh) * dh ** (-ar)

    return quad_adaptive(smooth, 0.0, 1.0, 0.0, rtol=1e-12, lo_exp=gamma - a, hi_exp=ar,
                         weighted=True, gaps=True).value


@_timed
def check_phi_bar_laplace(p: StableParams, gammas: Sequence[float]) -> VerifyReport:
    """int_0^inf e^(-gamma x) Phibar(e^x) dx = Psi(gamma - alpha, a rho - 1, a rho_hat - 1) / gamma."""
    p.require(Regime.HIGH)
    worst_abs = worst_rel = 0.0
    for g in gammas:
        if not g > p.alpha - 1.0:
            raise DomainError("gamma must exceed alpha - 1")
        lhs = _phi_bar_laplace_lhs(float(g), p)
        rhs = specfun.psi(g - p.alpha, p.a_rho - 1.0, p.a_rho_hat - 1.0) / g
        worst_abs = max(worst_abs, abs(lhs - rhs))
        worst_rel = max(worst_rel, abs(lhs - rhs) / abs(rhs))
    return VerifyReport("phi_bar_laplace", _params_list([p]), [float(g) for g in gammas], worst_abs, worst_rel,
                        worst_rel <= LAPLACE_RTOL, {"max_rel": LAPLACE_RTOL})


# ---------------------------------------------------------------------------
# Monte Carlo statistics


def exact_cdf(which: str, p: StableParams, x: float | None, points) -> np.ndarray:
    """CDF of the closed-form law at ``points`` (any order), by piecewise quadrature."""
    pts = np.asarray(points, dtype=float)
    out = np.empty(pts.shape)
    if which == "closest":
        neg, pos = dens.closest_reach_pieces(x, p)
        m_neg = dens.pieces_mass([neg])
        lo = pts < 0
        out[lo] = dens.pieces_cdf(neg, np.clip(pts[lo], -x, 0.0))
        hi = ~lo
        out[hi] = m_neg + dens.pieces_cdf(pos, np.clip(pts[hi], 0.0, x))
        out[pts >= x] = 1.0
        out[pts <= -x] = 0.0
    elif which == "furthest":
        pos, neg = dens.furthest_reach_pieces(x, p)
        m_neg = dens.pieces_mass([neg])
        left = pts <= -x
        right = pts >= x
        mid = ~(left | right)
        out[left] = m_neg - dens.pieces_cdf(neg, -pts[left])
        out[right] = m_neg + dens.pieces_cdf(pos, pts[right])
        out[mid] = m_neg
    elif which == "stationary":
        (piece,) = dens.stationary_pieces(p)
        out[:] = dens.pieces_cdf(piece, np.clip(pts, -1.0, 1.0))
    else:
        raise DomainError(f"unknown density {which!r}")
    return np.clip(out, 0.0, 1.0)


def ks_statistic(samples: np.ndarray, cdf_values: np.ndarray) -> float:
    """Two-sided Kolmogorov-Smirnov distance given the exact CDF at the samples."""
    order = np.argsort(samples, kind="stable")
    f = np.asarray(cdf_values)[order]
    n = f.size
    i = np.arange(1, n + 1)
    return float(max((i / n - f).max(), (f - (i - 1) / n).max()))


def reflected_bins(p: StableParams, bins: int = 20, tail: float = 0.02) -> np.ndarray:
    """Bin edges on [-1, 1]: one bin per outer ``tail`` of mass, equal-mass bins in between."""
    from scipy.stats import beta as beta_dist

    # edges only fix the partition; bin masses are integrated from the closed form
    probs = np.concatenate([[tail], np.linspace(tail, 1.0 - tail, bins - 1)[1:-1], [1.0 - tail]])
    inner = 2.0 * beta_dist(p.a_rho, p.a_rho_hat).ppf(probs) - 1.0
    return np.concatenate([[-1.0], inner, [1.0]])


@_timed
def check_mc_against_density(samples: "sim.SampleSet", density: str, params: StableParams,
                             bins: int = 20, x: float | None = None) -> VerifyReport:
    """KS distance (closest, furthest) or merged-tail chi-square (stationary) against the closed form."""
    from scipy.stats import chi2, kstwo

    vals = samples.samples
    n = vals.size
    if n < 1000:
        raise InsufficientSamplesError(f"need at least 1000 accepted samples, got {n}")
    x = samples.meta.get("x") if x is None else x
    base = {"n": n, "censored": samples.n_censored, "seed": samples.meta.get("seed"), "dt": samples.meta.get("dt")}
    if density in ("closest", "furthest"):
        d = ks_statistic(vals, exact_cdf(density, params, x, vals))
        pv = float(kstwo.sf(d, n))
        stat = dict(base, name="ks", value=d, p_value=pv)
        return VerifyReport(f"mc_{density}_reach", _params_list([params]), [x], d, d, d < KS_MAX,
                            {"ks_max": KS_MAX}, statistic=stat)
    if density == "stationary":
        edges = reflected_bins(params, bins)
        cdf = exact_cdf("stationary", params, None, edges)
        probs = np.diff(cdf)
        counts = np.histogram(np.clip(vals, -1.0, 1.0), bins=edges)[0]
        expected = n * probs
        c2 = float(((counts - expected) ** 2 / expected).sum())
        pv = float(chi2.sf(c2, bins - 1))
        mass_err = abs(cdf[-1] - 1.0)
        stat = dict(base, name="chi2", value=c2, p_value=pv, bins=bins, dof=bins - 1)
        return VerifyReport("mc_reflected_stationary", _params_list([params]), edges.tolist(), mass_err, mass_err,
                            pv > CHI2_PMIN, {"chi2_p_min": CHI2_PMIN}, statistic=stat)
    raise DomainError(f"unknown density {density!r}")


@_timed
def check_two_horizons(a: "sim.SampleSet", b: "sim.SampleSet") -> VerifyReport:
    """Reflected samples at two horizons agree in two-sample KS distance."""
    from scipy.stats import ks_2samp

    res = ks_2samp(a.samples, b.samples)
    d = float(res.statistic)
    stat = {"name": "ks_2samp", "value": d, "p_value": float(res.pvalue), "n": [a.n_accepted, b.n_accepted],
            "t_max": [a.meta.get("t_max"), b.meta.get("t_max")]}
    return VerifyReport("mc_reflected_two_horizons", [[a.meta["alpha"], a.meta["rho"]]], stat["t_max"], d, d,
                        d <= HORIZON_KS_MAX, {"ks_max": HORIZON_KS_MAX}, statistic=stat)


@_timed
def check_avoid_strip(x: float, p: StableParams, cfg: "sim.McConfig") -> VerifyReport:
    """Monte Carlo strip-avoidance frequency against phi_avoid, 99% CI plus a discretisation allowance."""
    est = sim.avoid_strip_mc(x, p, cfg)
    target = dens.phi_avoid(x, p)
    err = abs(est.estimate - target)
    stat = {"name": "binomial", "value": est.estimate, "ci": [est.ci_low, est.ci_high], "n": est.n,
            "censored": est.censored, "target": target}
    return VerifyReport("mc_avoid_strip", _params_list([p]), [x], err, err / target,
                        est.covers(target, AVOID_ALLOWANCE), {"ci_level": est.level, "allowance": AVOID_ALLOWANCE},
                        statistic=stat)


# ---------------------------------------------------------------------------
# Suites

#: identity name -> short description; every entry must appear in the full + mc plans
IDENTITIES = {
    "psi_dual_route": "Psi by weighted quadrature equals its 2F1 form",
    "f0_row_sums": "rows of F(0) sum to zero",
    "laplace_pair_ascending": "Laplace transform of u equals kappa_inv",
    "laplace_pair_descending": "Laplace transform of u_hat equals kappa_hat_inv",
    "factorisation_constancy": "M(z) diagonal and constant on (alpha - 1, 0)",
    "factorisation_constancy_experimental": "M(z) with continued factors for alpha >= 1",
    "duality": "kappa_hat_inv and the dual kappa_inv agree up to a diagonal matrix",
    "cauchy_sum_ratio": "alpha = 1 potential row sum and ratio identities",
    "cauchy_ladder": "alpha = 1 potential row sum transform proportional to 1 / kappa_chi",
    "normalisation_closest": "closest reach density has mass 1",
    "normalisation_furthest": "furthest reach density has mass 1",
    "normalisation_stationary": "stationary density has mass 1",
    "closest_phi_identity": "closest reach density from the derivative of Phi",
    "furthest_routes": "furthest reach density, closed form against derivation form",
    "phi_bar_laplace": "Laplace transform of Phibar(e^x) in terms of Psi",
    "mc_closest_reach": "Monte Carlo closest reach against its CDF",
    "mc_furthest_reach": "Monte Carlo furthest reach against its CDF",
    "mc_reflected_stationary": "Monte Carlo reflected process against the stationary law",
    "mc_reflected_two_horizons": "reflected samples at t_max and 2 t_max agree",
    "mc_avoid_strip": "Monte Carlo strip avoidance against Phi",
}

SUITES = ("fast", "full", "mc")

LOW_SETS = [(0.5, 0.5), (0.5, 0.3), (0.8, 0.6), (0.3, 0.7), (0.6, 0.5), (0.9, 0.45)]
HIGH_SETS = [(1.5, 0.5), (1.3, 0.4), (1.8, 0.5), (1.2, 0.7), (1.5, 0.6), (1.1, 0.5)]
# alpha < 1.5 keeps lambda = 0.5 inside the descending domain (alpha - 1, inf)
LAPLACE_SETS = [(0.5, 0.3), (0.8, 0.6), (1.0, 0.5), (1.3, 0.4), (1.45, 0.5), (1.2, 0.7)]

DEFAULTS = {
    "laplace_lambdas": "0.5,1,2,4",
    "dense_lambdas": "0.25,0.5,0.75,1,1.5,2,3,4,6,8",
    "seed": "20240601",
    "workers": "",
    "n": "10000",
    "closest_dt": "1e-4",
    "closest_r_stop": "50",
    "furthest_dt": "1e-3",
    "furthest_eps_abs": "1e-3",
    "reflected_dt": "1e-3",
    "reflected_t_max": "1000",
    "reflected_x0": "0.5",
    "avoid_dt": "1e-3",
    "avoid_r_stop": "1e9",
    "avoid_x": "2",
}


def load_config(path: str | Path | None) -> dict:
    """Flat ``key=value`` lines with ``#`` comments, merged over the suite defaults."""
    cfg = dict(DEFAULTS)
    if path is None:
        return cfg
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in DEFAULTS:
            raise DomainError(f"{path}:{lineno}: unknown key {key!r}")
        cfg[key] = value
    return cfg


def _floats(s: str) -> list[float]:
    return [float(v) for v in s.split(",") if v.strip()]


def _sp(pairs):
    return [StableParams(a, r) for a, r in pairs]


def admissible_grid(alphas=(0.3, 0.7, 1.0, 1.3, 1.7), n_rho: int = 5) -> list[StableParams]:
    """(alpha, rho) pairs with rho spread over the interior of the admissible interval."""
    out = []
    for a in alphas:
        if a == 1.0:
            out.append(StableParams(1.0, 0.5))
            continue
        lo, hi = max(0.0, 1.0 - 1.0 / a), min(1.0, 1.0 / a)
        out += [StableParams(a, r) for r in np.linspace(lo, hi, n_rho + 2)[1:-1]]
    return out


def _mc_config(cfg: dict, **kw) -> "sim.McConfig":
    workers = int(cfg["workers"]) if cfg.get("workers") else sim.default_workers()
    return sim.McConfig(seed=int(cfg["seed"]), workers=workers, n_paths=int(cfg["n"]), **kw)


def _plan_fast(cfg):
    lams = _floats(cfg["laplace_lambdas"])
    plan = [
        ("psi_dual_route", lambda: check_psi_routes()),
        ("f0_row_sums", lambda: check_f0_row_sums(admissible_grid())),
    ]
    for a, r in LAPLACE_SETS:
        p = StableParams(a, r)
        plan.append(("laplace_pair_ascending", lambda p=p: check_laplace_pair("ascending", p, lams)))
        plan.append(("laplace_pair_descending", lambda p=p: check_laplace_pair("descending", p, lams)))
    for a, r, zs in [(0.5, 0.5, (-0.4, -0.25, -0.1)), (0.8, 0.6, (-0.15, -0.1, -0.05)), (0.3, 0.2, (-0.6, -0.3, -0.05))]:
        p = StableParams(a, r)
        plan.append(("factorisation_constancy", lambda p=p, zs=zs: check_factorisation_constancy(p, zs)))
    for a, r in [(0.6, 0.3), (1.0, 0.5), (1.4, 0.5)]:
        p = StableParams(a, r)
        plan.append(("duality", lambda p=p: check_duality(p, (0.75, 1.0, 2.0, 4.0))))
    plan += [
        ("cauchy_sum_ratio", lambda: check_cauchy_identities()),
        ("cauchy_ladder", lambda: check_cauchy_ladder()),
        ("normalisation_closest", lambda: check_normalisation("closest", _sp(LOW_SETS), (0.5, 1.0, 3.0))),
        ("normalisation_furthest", lambda: check_normalisation("furthest", _sp(HIGH_SETS), (0.5, 1.0, 3.0))),
        ("normalisation_stationary", lambda: check_normalisation("stationary", _sp(LOW_SETS))),
        ("closest_phi_identity", lambda: check_closest_phi_identity(StableParams(0.6, 0.4), 1.3)),
        ("furthest_routes", lambda: check_furthest_routes(StableParams(1.5, 0.4), 0.8)),
    ]
    return plan


def _plan_full(cfg):
    plan = _plan_fast(cfg)
    dense = _floats(cfg["dense_lambdas"])
    for a, r in LOW_SETS[:3] + HIGH_SETS[:3]:
        p = StableParams(a, r)
        for factor in ("ascending", "descending"):
            lo = fac.factor_domain(factor, p).lambda_min
            lams = [l for l in dense if l > lo]
            plan.append((f"laplace_pair_{factor}",
                         lambda p=p, factor=factor, lams=lams: check_laplace_pair(factor, p, lams)))
    for a, r in [(1.5, 0.5), (1.3, 0.4)]:
        p = StableParams(a, r)
        plan.append(("phi_bar_laplace", lambda p=p: check_phi_bar_laplace(p, (p.alpha, 1.0, 2.0, 4.0))))
    for a, r, zs in [(1.0, 0.5, (0.2, 0.5, 0.8)), (1.5, 0.5, (0.6, 0.75, 0.9)), (1.3, 0.4, (0.35, 0.6, 0.85))]:
        p = StableParams(a, r)
        plan.append(("factorisation_constancy_experimental",
                     lambda p=p, zs=zs: check_factorisation_constancy(p, zs, experimental=True)))
    return plan


def _mc_closest(cfg):
    p = StableParams(0.6, 0.5)
    mc = _mc_config(cfg, dt=float(cfg["closest_dt"]), r_stop=float(cfg["closest_r_stop"]))
    return check_mc_against_density(sim.closest_reach_mc(1.0, p, mc), "closest", p)


def _mc_furthest(cfg):
    p = StableParams(1.5, 0.5)
    mc = _mc_config(cfg, dt=float(cfg["furthest_dt"]), eps_abs=float(cfg["furthest_eps_abs"]))
    return check_mc_against_density(sim.furthest_reach_mc(1.0, p, mc), "furthest", p)


def _reflected_pair(cfg):
    p = StableParams(0.5, 0.5)
    t = float(cfg["reflected_t_max"])
    x0 = float(cfg["reflected_x0"])
    a = sim.reflected_stationary_mc(p, _mc_config(cfg, dt=float(cfg["reflected_dt"]), t_max=t), x0)
    b_cfg = _mc_config(cfg, dt=float(cfg["reflected_dt"]), t_max=2.0 * t)
    b_cfg = sim.McConfig(**{**b_cfg.__dict__, "seed": b_cfg.seed + 1})
    b = sim.reflected_stationary_mc(p, b_cfg, x0)
    return p, a, b


def _plan_mc(cfg):
    plan = _plan_full(cfg)
    cache = {}

    def reflected():
        if "r" not in cache:
            cache["r"] = _reflected_pair(cfg)
        return cache["r"]

    plan += [
        ("mc_closest_reach", lambda: _mc_closest(cfg)),
        ("mc_furthest_reach", lambda: _mc_furthest(cfg)),
        ("mc_reflected_stationary", lambda: check_mc_against_density(reflected()[1], "stationary", reflected()[0])),
        ("mc_reflected_two_horizons", lambda: check_two_horizons(reflected()[1], reflected()[2])),
        ("mc_avoid_strip", lambda: check_avoid_strip(
            float(cfg["avoid_x"]), StableParams(0.7, 0.5),
            _mc_config(cfg, dt=float(cfg["avoid_dt"]), r_stop=float(cfg["avoid_r_stop"])))),
    ]
    return plan


_PLANS = {"fast": _plan_fast, "full": _plan_full, "mc": _plan_mc}


def suite_plan(suite_name: str, config: dict | None = None) -> list[tuple[str, Callable[[], VerifyReport]]]:
    """(identity name, thunk) pairs making up a suite, without running them."""
    if suite_name not in _PLANS:
        raise DomainError(f"unknown suite {suite_name!r}; choose from {', '.join(SUITES)}")
    return _PLANS[suite_name](config or dict(DEFAULTS))


def run_suite(suite_name: str, config_path: str | Path | None = None, *,
              overrides: dict | None = None,
              progress: Callable[[VerifyReport], None] | None = None) -> list[VerifyReport]:
    """Run every check of the named suite and return the reports in plan order.

    ``overrides`` (same keys as the config file) take precedence over the file.
    """
    cfg = load_config(config_path)
    for key, value in (overrides or {}).items():
        if key not in DEFAULTS:
            raise DomainError(f"unknown config key {key!r}")
        cfg[key] = str(value)
    plan = suite_plan(suite_name, cfg)
    reports = []
    for _, thunk in plan:
        rep = thunk()
        reports.append(rep)
        if progress is not None:
            progress(rep)
    return reports


def _clean(obj):
    # JSON has no NaN/inf; spell them as strings
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        return _clean(obj.item())
    return obj


def reports_to_json(reports: Sequence[VerifyReport]) -> str:
    return json.dumps([_clean(r.to_dict()) for r in reports], indent=2, sort_keys=True) + "\n"


CSV_COLUMNS = ("identity_name", "alpha", "rho", "max_rel_residual", "statistic", "p_value", "pass")


def reports_to_csv(reports: Sequence[VerifyReport]) -> str:
    """Flat summary, one row per (report, parameter set)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in reports:
        stat = r.statistic or {}
        value = stat.get("value", "")
        pv = stat.get("p_value", "")
        for a, rho in (r.parameter_set or [["", ""]]):
            w.writerow([r.identity_name, _fmt(a), _fmt(rho), _fmt(r.max_rel_residual), _fmt(value), _fmt(pv),
                        "true" if r.passed else "false"])
    return buf.getvalue()


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)
