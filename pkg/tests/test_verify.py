import json

import numpy as np
import pytest

from elab.fields import Domain, Grid, identity_field, linear_field
from elab.flows import FlowSolution, PathMatrix, gerstner, gerstner_pressure, kirchhoff
from elab.sl2 import AnalyticPath
from elab.verify import (
    CurlTooLarge,
    MissingPressure,
    ResidualReport,
    det_drift,
    euler_residual,
    eulerian_divergence,
    n12_numeric,
    pressure_recover,
    recovered_pressure,
    refinement_ratio,
    run_suite,
)

D = Domain(-1, 1, -1, 1)


def test_report_shape():
    r = ResidualReport("det_drift", 2e-9, 0.5, (0.1, 0.2), 1e-8, {"min_abs_det0": 1.0})
    d = r.to_dict()
    assert set(d) == {"check", "max_abs", "at", "tol", "pass", "meta"}
    assert d["pass"] and d["at"] == {"t": 0.5, "alpha": [0.1, 0.2]}
    assert json.loads(r.to_json())["check"] == "det_drift"
    assert r.line().startswith("PASS det_drift")
    assert ResidualReport("x", 1.0, None, None, 0.1).line().startswith("FAIL")
    assert refinement_ratio(4.0, 1.0) == 4.0 and refinement_ratio(1.0, 0.0) == np.inf


def test_missing_pressure():
    G = gerstner(1.0)
    with pytest.raises(MissingPressure):
        euler_residual(G, Grid(G.domain, 5, 5), [0.0])


def _rotating_bad_flow():
    """A time-dependent rotation of the identity label: not an Euler flow."""
    P = AnalyticPath(lambda t: 0 * t, lambda t: t**2, lambda t: 0 * t, t0=0, t1=2)
    K = kirchhoff(0.5, 1.0, identity_field(D), t1=2.0)
    return FlowSolution("custom", PathMatrix(P), K.space)


def test_curl_too_large():
    F = _rotating_bad_flow()
    g = Grid(D, 9, 9)
    assert n12_numeric(F, g, 1.0) > 1
    with pytest.raises(CurlTooLarge):
        pressure_recover(F, g, 1.0)


def test_recovered_pressure_matches_closed_form():
    k = 1.0
    G = gerstner(k)
    P = gerstner_pressure(k)
    R = recovered_pressure(G)
    g = Grid(G.domain, 9, 9)
    A1, A2 = g.mesh()
    for t in (0.0, 1.3):
        diff = R.value(t, A1, A2) - P.value(t, A1, A2)
        assert np.ptp(diff) < 1e-9
    p = pressure_recover(G, g, 0.7)
    assert np.ravel(p.values)[0] == pytest.approx(0.0, abs=1e-14)
    assert p.curl < 1e-8


def test_suite_on_kirchhoff():
    K = kirchhoff(0.5, 1.3, linear_field([[1, 0.2], [0, 1]], [0, 0], D), t1=3.0)
    reports = run_suite(K, Grid(D, 11, 11), [0.0, 1.0, 2.5])
    names = [r.check for r in reports]
    assert names == ["det_drift", "n12_numeric", "euler_residual", "eulerian_divergence"]
    assert all(r.passed for r in reports), [r.line() for r in reports]
    assert eulerian_divergence(K, 1.0) < 1e-12
    with pytest.raises(ValueError):
        eulerian_divergence(gerstner(1.0), 0.0)


def test_det_drift_reports_location():
    G = gerstner(1.0)
    r = det_drift(G, Grid(G.domain, 7, 7), [0.0, 1.0, 2.0])
    assert r.passed and r.t is not None and "min_abs_det0" in r.meta
