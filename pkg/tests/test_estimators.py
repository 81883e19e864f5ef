import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from tdls import CQScatterer, FrequencyDomainScatterer
from tdls.cq import CQScheme, run_cq_solve
from tdls.disk import DiskConfig, disk_series_field
from tdls.grid import disk_contrast, make_grid, weighted_l2_norm, GridFunction
from tdls.solvers import SolverConfig

DISK = {"radius": 0.275, "q": -0.5}


def test_params_and_clone():
    est = FrequencyDomainScatterer(N=32, s=1 + 2j, method="two_grid")
    params = est.get_params()
    assert params["N"] == 32 and params["s"] == 1 + 2j and params["method"] == "two_grid"
    twin = clone(est)
    assert twin.get_params() == params and twin is not est
    est.set_params(N=16)
    assert est.N == 16
    assert "workers" in CQScatterer().get_params()


def test_frequency_estimator_matches_oracle():
    est = FrequencyDomainScatterer(N=64, s=2 + 3j).fit(DISK)
    us = est.predict(est.plane_wave())
    assert est.report_.converged
    g = est.grid_
    ref = disk_series_field(DiskConfig(0.275, -0.5, 2 + 3j), *g.coordinates())
    err = weighted_l2_norm(GridFunction(g, us - ref), est.contrast_) / weighted_l2_norm(GridFunction(g, ref), est.contrast_)
    assert err < 1e-3


def test_fit_accepts_array_and_field():
    g = make_grid(2, 16, 0.275)
    q = disk_contrast(g, 0.275, -0.5)
    a = FrequencyDomainScatterer(N=16).fit(q.values)
    b = FrequencyDomainScatterer(N=16).fit(q)
    ui = a.plane_wave()
    np.testing.assert_array_equal(a.predict(ui), b.predict(ui))


def test_validation_errors():
    est = FrequencyDomainScatterer(N=16)
    with pytest.raises(NotFittedError):
        est.predict(np.zeros((16, 16)))
    with pytest.raises(ValueError):
        est.fit(np.zeros((8, 8)))
    with pytest.raises(ValueError):
        est.fit(np.full((16, 16), np.inf))
    est.fit(DISK)
    with pytest.raises(ValueError):
        est.predict(np.zeros((16, 15)))
    with pytest.raises(ValueError):
        FrequencyDomainScatterer(N=16, c0=-1).fit(DISK)
    with pytest.raises(ValueError):
        FrequencyDomainScatterer(N=16, s=-1).fit(DISK)


def test_cq_estimator_matches_pipeline():
    est = CQScatterer(N=16, M=20).fit(DISK)
    frames = est.predict()
    assert frames.shape == (21, 16, 16)
    assert 0 < est.lambda_ < 1
    g = make_grid(2, 16, 0.275)
    ref = run_cq_solve(g, disk_contrast(g, 0.275, -0.5), CQScheme(M=20), SolverConfig(tol=1e-12))
    np.testing.assert_array_equal(frames, ref.frames)


def test_cq_estimator_with_samples():
    est = CQScatterer(N=8, M=10).fit(DISK)
    zero = est.predict(np.zeros((11, 8, 8)))
    assert np.all(zero == 0)
    with pytest.raises(ValueError):
        est.predict(np.zeros((10, 8, 8)))
