import csv
import io
import json
import math

import numpy as np
import pytest

from deepwh import StableParams
from deepwh import stable_sim as sim
from deepwh import verify as ver
from deepwh.errors import DomainError, RegimeError


def test_manifest_is_covered_by_suites():
    names = {n for n, _ in ver.suite_plan("mc")}
    assert set(ver.IDENTITIES) <= names
    fast = {n for n, _ in ver.suite_plan("fast")}
    assert not any(n.startswith("mc_") for n in fast)
    assert fast <= {n for n, _ in ver.suite_plan("full")}


def test_unknown_suite():
    with pytest.raises(DomainError):
        ver.suite_plan("weekly")


def test_load_config(tmp_path):
    path = tmp_path / "suite.cfg"
    path.write_text("# comment\nseed = 4  # trailing\nn=2000\n")
    cfg = ver.load_config(path)
    assert cfg["seed"] == "4" and cfg["n"] == "2000" and cfg["avoid_x"] == ver.DEFAULTS["avoid_x"]
    path.write_text("colour=blue\n")
    with pytest.raises(DomainError):
        ver.load_config(path)


def test_laplace_pair_examples():
    rep = ver.check_laplace_pair("ascending", StableParams(1.0, 0.5), [1.0])
    assert rep.passed and rep.max_rel_residual <= 1e-8
    assert ver.check_laplace_pair("ascending", StableParams(0.5, 0.3), [0.5, 1, 2, 4]).passed
    assert ver.check_laplace_pair("descending", StableParams(0.5, 0.3), [0.5, 1, 2, 4]).passed
    assert ver.check_laplace_pair("ascending", StableParams(1.5, 0.5), [1, 2, 4]).passed
    assert ver.check_laplace_pair("descending", StableParams(1.5, 0.5), [1, 2, 4]).passed


def test_laplace_transform_detects_wrong_factor():
    # the transform of u at rho = 0.3 is not kappa_inv at rho = 0.35
    p, q = StableParams(0.5, 0.3), StableParams(0.5, 0.35)
    lt = ver.laplace_transform_potential("ascending", p, [1.0])[0]
    from deepwh.factorisation import kappa_inv

    assert np.max(np.abs(lt - kappa_inv(1.0, q)) / np.abs(kappa_inv(1.0, q))) > 1e-3


def test_factorisation_constancy_examples():
    assert ver.check_factorisation_constancy(StableParams(0.5, 0.5), (-0.4, -0.25, -0.1)).passed
    assert ver.check_factorisation_constancy(StableParams(0.8, 0.6), (-0.15, -0.1, -0.05)).passed
    with pytest.raises(RegimeError):
        ver.check_factorisation_constancy(StableParams(1.2, 0.5), (-0.1,))


def test_experimental_factorisation():
    rep = ver.check_factorisation_constancy(StableParams(1.3, 0.4), (0.35, 0.6, 0.85), experimental=True)
    assert rep.passed and rep.identity_name == "factorisation_constancy_experimental"


def test_duality_examples():
    for alpha, rho in ((1.0, 0.5), (0.6, 0.3), (1.4, 0.5)):
        assert ver.check_duality(StableParams(alpha, rho), (0.75, 1.0, 2.0, 4.0)).passed


def test_cauchy_checks():
    assert ver.check_cauchy_identities().passed
    rep = ver.check_cauchy_ladder()
    assert rep.passed
    assert np.isfinite(rep.statistic["ratio"])


def test_normalisation_and_routes():
    assert ver.check_normalisation("closest", [StableParams(0.6, 0.5)], (1.0,)).passed
    assert ver.check_normalisation("furthest", [StableParams(1.5, 0.5)], (1.0,)).passed
    assert ver.check_normalisation("stationary", [StableParams(0.5, 0.9)]).passed
    assert ver.check_closest_phi_identity(StableParams(0.6, 0.4)).passed
    assert ver.check_furthest_routes(StableParams(1.7, 0.5)).passed
    assert ver.check_phi_bar_laplace(StableParams(1.3, 0.4), (1.3, 2.0)).passed


def test_f0_and_psi_reports():
    rep = ver.check_f0_row_sums(ver.admissible_grid())
    assert rep.passed and len(rep.parameter_set) == 21
    rep = ver.check_psi_routes(n_side=3)
    assert rep.passed and rep.runtime_seconds > 0


@pytest.mark.parametrize("which,p,x", [("closest", StableParams(0.6, 0.4), 1.3), ("furthest", StableParams(1.5, 0.4), 0.8),
                                       ("stationary", StableParams(0.5, 0.9), None)])
def test_exact_cdf_is_a_cdf(which, p, x):
    if which == "furthest":
        # heavy tail of order |z|^(1 - alpha)
        far = x * (1.0 + np.geomspace(1e-6, 1e8, 150))
        pts = np.concatenate([-far[::-1], far])
    else:
        lo, hi = (-1.0, 1.0) if x is None else (-x, x)
        pts = np.linspace(lo, hi, 301)
    f = ver.exact_cdf(which, p, x, pts)
    assert f[0] == pytest.approx(0.0, abs=0.02) and f[-1] == pytest.approx(1.0, abs=0.02)
    assert np.all(np.diff(f) >= -1e-12)


def test_ks_statistic_matches_scipy():
    from scipy import stats

    rng = np.random.default_rng(0)
    v = rng.standard_normal(500)
    assert ver.ks_statistic(v, stats.norm.cdf(v)) == pytest.approx(stats.kstest(v, "norm").statistic, rel=1e-12)


def test_reflected_bins():
    edges = ver.reflected_bins(StableParams(0.5, 0.5), 20)
    assert edges.size == 21 and edges[0] == -1.0 and edges[-1] == 1.0
    assert np.all(np.diff(edges) > 0)


def _fake_samples(values, **meta):
    values = np.asarray(values, dtype=float)
    n = values.size
    return sim.SampleSet("fake", np.arange(n), values, np.ones(n, dtype=np.int8), np.ones(n, dtype=np.int64),
                         np.ones(n, dtype=bool), dict(seed=0, dt=0.0, **meta))


def test_mc_check_power_against_wrong_law():
    # uniform samples on (-1, 1) are far from the closest reach law
    rng = np.random.default_rng(1)
    rep = ver.check_mc_against_density(_fake_samples(rng.uniform(-1, 1, 5000), x=1.0), "closest", StableParams(0.6, 0.5))
    assert not rep.passed and rep.statistic["value"] > 0.05
    beta = 2 * rng.beta(0.25, 0.25, 5000) - 1
    rep = ver.check_mc_against_density(_fake_samples(beta), "stationary", StableParams(0.5, 0.5))
    assert rep.passed
    rep = ver.check_mc_against_density(_fake_samples(beta), "stationary", StableParams(0.5, 0.8))
    assert not rep.passed


def test_insufficient_samples_is_a_failed_report():
    rep = ver.check_mc_against_density(_fake_samples([0.1, 0.2], x=1.0), "closest", StableParams(0.6, 0.5))
    assert not rep.passed and "InsufficientSamplesError" in rep.diagnostics


def test_report_serialisation():
    reps = [ver.check_cauchy_ladder(), ver.check_f0_row_sums([StableParams(0.5, 0.5), StableParams(1.5, 0.5)])]
    reps.append(ver.VerifyReport("broken", [], [], math.nan, math.inf, False, {}))
    doc = json.loads(ver.reports_to_json(reps))
    assert doc[0]["pass"] is True and doc[2]["max_abs_residual"] == "nan"
    rows = list(csv.reader(io.StringIO(ver.reports_to_csv(reps))))
    assert tuple(rows[0]) == ver.CSV_COLUMNS
    assert len(rows) == 1 + 1 + 2 + 1
    assert rows[2][:3] == ["f0_row_sums", "0.5", "0.5"]
    assert ver.reports_to_csv(reps) == ver.reports_to_csv(reps)


def test_run_suite_overrides_and_progress():
    seen = []
    with pytest.raises(DomainError):
        ver.run_suite("fast", overrides={"colour": 1})
    reps = ver.run_suite("fast", progress=seen.append)
    assert len(seen) == len(reps) and all(r.passed for r in reps)


def test_avoid_check_small():
    c = sim.McConfig(n_paths=2000, dt=1e-3, r_stop=1e9, seed=3, workers=1)
    rep = ver.check_avoid_strip(2.0, StableParams(0.7, 0.5), c)
    assert rep.passed and rep.statistic["n"] == 2000
