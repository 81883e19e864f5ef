import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tdls.disk import (
    DiskConfig,
    continuity_residual,
    disk_series_coeffs,
    disk_series_field,
    disk_series_radial_derivative,
    disk_series_total_on_boundary,
    tail_estimate,
)
from tdls.special import bessel_i

REF_DISK = dict(radius=0.275, q=-0.5, c0=1.0)


def test_config_validation():
    for kw in [dict(radius=0.0, q=0.1), dict(radius=1.0, q=-1.0), dict(radius=1.0, q=0.0, n_max=0)]:
        with pytest.raises(ValueError):
            DiskConfig(s=1.0, **kw)
    with pytest.raises(ValueError):
        DiskConfig(1.0, 0.1, s=-1.0)


def test_incident_expansion_sign():
    # exp(-k r cos t) = sum_n (-1)^n I_n(k r) e^{int}
    k, r = 2 + 3j, 0.4
    n = np.arange(-40, 41)
    t = np.linspace(0, 2 * np.pi, 7)
    series = np.exp(1j * np.outer(t, n)) @ ((-1.0) ** np.abs(n) * bessel_i(n, k * r))
    np.testing.assert_allclose(series, np.exp(-k * r * np.cos(t)), rtol=1e-13)


def test_no_contrast_no_scattering():
    cfg = DiskConfig(0.3, 0.0, 2 + 3j)
    n, a, b = disk_series_coeffs(cfg)
    assert np.max(np.abs(a)) <= 1e-15
    np.testing.assert_allclose(b, (-1.0) ** np.abs(n), rtol=1e-13)
    x = np.linspace(-1, 1, 9)
    assert np.max(np.abs(disk_series_field(cfg, x, 0.1 * x))) <= 1e-14


def test_vanishing_radius():
    pts = np.array([[0.5, 0.2], [-0.3, 0.6]])
    vals = [np.max(np.abs(disk_series_field(DiskConfig(r, -0.5, 2 + 3j), pts))) for r in (1e-1, 1e-2, 1e-3)]
    assert vals[0] > vals[1] > vals[2] and vals[2] < 1e-5


def test_conjugate_symmetry():
    c1 = DiskConfig(s=2 + 3j, **REF_DISK)
    c2 = DiskConfig(s=2 - 3j, **REF_DISK)
    _, a1, b1 = disk_series_coeffs(c1)
    _, a2, b2 = disk_series_coeffs(c2)
    np.testing.assert_allclose(a2, np.conj(a1), rtol=1e-12, atol=1e-300)
    np.testing.assert_allclose(b2, np.conj(b1), rtol=1e-12, atol=1e-300)


@pytest.mark.parametrize("s", [1 + 1j, 2 + 3j, 0.5 + 15j])
def test_continuity_residual(s):
    assert continuity_residual(DiskConfig(s=s, **REF_DISK)) <= 1e-12


def test_coefficients_decay_fast():
    n, a, b = disk_series_coeffs(DiskConfig(s=2 + 3j, **REF_DISK))
    mag = np.abs(a[n >= 0])
    assert mag[20] < 1e-20 * mag[0]
    assert np.all(np.diff(np.log(mag[1:30])) < 0)
    assert tail_estimate(DiskConfig(s=2 + 3j, **REF_DISK)) < 1e-30


@settings(max_examples=25, deadline=None)
@given(st.floats(0.1, 0.5), st.floats(-0.8, 2.0), st.floats(0.3, 5), st.floats(-15, 15))
def test_property_interface_continuity(radius, q, sig, om):
    cfg = DiskConfig(radius, q, complex(sig, om))
    theta = np.random.default_rng(0).uniform(0, 2 * np.pi, 20)
    vin = disk_series_total_on_boundary(cfg, theta, "inside")
    vout = disk_series_total_on_boundary(cfg, theta, "outside")
    din = disk_series_radial_derivative(cfg, theta, "inside")
    dout = disk_series_radial_derivative(cfg, theta, "outside")
    assert np.max(np.abs(vin - vout)) <= 1e-10 * np.max(np.abs(vout))
    assert np.max(np.abs(din - dout)) <= 1e-10 * np.max(np.abs(dout))


@settings(max_examples=25, deadline=None)
@given(st.floats(0.1, 0.5), st.floats(-0.8, 2.0), st.floats(0.3, 5), st.floats(-15, 15))
def test_property_truncation_robust(radius, q, sig, om):
    s = complex(sig, om)
    pts = np.array([[0.05, 0.02], [0.3, -0.4], [-0.9, 0.7], [radius * 0.99, 0.0]])
    f40 = disk_series_field(DiskConfig(radius, q, s, n_max=40), pts)
    f80 = disk_series_field(DiskConfig(radius, q, s, n_max=80), pts)
    assert np.max(np.abs(f80 - f40)) <= 1e-10 * max(np.max(np.abs(f80)), 1e-300)


@pytest.mark.parametrize("region", ["inside", "outside"])
def test_solves_modified_helmholtz(region):
    # finite-difference Laplacian check: -Lap u + (s/c)^2 u = 0 on each side
    cfg = DiskConfig(s=2 + 3j, **REF_DISK)
    x0 = np.array([0.1, 0.05]) if region == "inside" else np.array([0.45, -0.3])
    kappa = cfg.kappa1 if region == "inside" else cfg.kappa0
    h = 1e-3
    f = lambda p: disk_series_field(cfg, p[None], total=True)[0]
    lap = (f(x0 + [h, 0]) + f(x0 - [h, 0]) + f(x0 + [0, h]) + f(x0 - [0, h]) - 4 * f(x0)) / h**2
    assert abs(-lap + kappa**2 * f(x0)) <= 1e-5 * abs(kappa**2 * f(x0))


def test_point_array_forms_agree():
    cfg = DiskConfig(s=1 + 2j, **REF_DISK)
    pts = np.random.default_rng(1).uniform(-0.6, 0.6, (10, 2))
    np.testing.assert_array_equal(disk_series_field(cfg, pts), disk_series_field(cfg, pts[:, 0], pts[:, 1]))
