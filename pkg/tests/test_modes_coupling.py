import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import eval_genlaguerre

from spdc_lens.errors import ValidationError
from spdc_lens.modes_coupling import (
    FiberMode,
    LGModeSpec,
    RadialField,
    assoc_laguerre,
    coupling_efficiency,
    fiber_field,
    gaussian_coupling_closed_form,
    gaussian_coupling_curved,
    lg_amplitude,
    overlap,
)

LAM = 702.2e-6


@pytest.mark.parametrize("p", range(6))
@pytest.mark.parametrize("alpha", range(5))
def test_laguerre_recurrence_matches_scipy(p, alpha):
    x = np.linspace(0, 30, 61)
    np.testing.assert_allclose(assoc_laguerre(p, alpha, x), eval_genlaguerre(p, alpha, x),
                               rtol=1e-12, atol=1e-9)


def test_fundamental_peak_intensity():
    w0 = 0.05
    u = lg_amplitude(LGModeSpec(0, 0, w0, LAM), 0.0, 0.3)
    assert abs(u) ** 2 == pytest.approx(2 / (math.pi * w0**2), rel=1e-14)


def test_vortex_ring_radius():
    w0 = 0.05
    rho = np.linspace(0, 3 * w0, 30001)
    inten = np.abs(lg_amplitude(LGModeSpec(1, 0, w0, LAM), rho, 0.0)) ** 2
    assert rho[np.argmax(inten)] == pytest.approx(w0 / math.sqrt(2), abs=2 * (rho[1] - rho[0]))


@pytest.mark.parametrize("l", [-3, -1, 1, 2])
def test_vortex_on_axis_null(l):
    assert lg_amplitude(LGModeSpec(l, 1, 0.1, LAM), 0.0, 1.234) == 0


def test_unit_power_by_cartesian_riemann_sum():
    # plain grid sum over the plane, independent of the radial quadrature
    w0 = 0.1
    x = np.linspace(-0.8, 0.8, 801)
    xx, yy = np.meshgrid(x, x)
    rho, phi = np.hypot(xx, yy), np.arctan2(yy, xx)
    for l, p in [(0, 0), (2, 1), (-1, 2)]:
        u = lg_amplitude(LGModeSpec(l, p, w0, LAM), rho, phi)
        assert np.sum(np.abs(u) ** 2) * (x[1] - x[0]) ** 2 == pytest.approx(1.0, abs=1e-6)


def test_orthonormality():
    w0 = 0.08
    fields = {(l, p): RadialField.from_lg(LGModeSpec(l, p, w0, LAM))
              for l in range(-3, 4) for p in range(3)}
    for ka, a in fields.items():
        for kb, b in fields.items():
            expected = 1.0 if ka == kb else 0.0
            assert abs(overlap(a, b) - expected) < 1e-8, (ka, kb)


def test_fiber_field_values():
    fib = FiberMode(0.0025, 3.0)
    assert fiber_field(fib, 0.0) == 3.0
    assert fiber_field(fib, 0.0025) == pytest.approx(3.0 / math.e, rel=1e-15)
    assert fiber_field(fib, 0.005) == pytest.approx(3.0 * math.exp(-4), rel=1e-15)
    assert fib.mode_field_diameter == 0.005


def test_invalid_modes():
    with pytest.raises(ValidationError):
        LGModeSpec(0, -1, 0.1, LAM)
    with pytest.raises(ValidationError):
        LGModeSpec(0, 0, 0.0, LAM)
    with pytest.raises(ValidationError):
        FiberMode(0.0)
    with pytest.raises(ValidationError):
        lg_amplitude(LGModeSpec(0, 0, 0.1, LAM), -1.0, 0.0)


def test_coupling_examples():
    g = RadialField.gaussian(0.07)
    assert coupling_efficiency(g, RadialField.gaussian(0.07)) == pytest.approx(1.0, abs=1e-12)
    eta = coupling_efficiency(RadialField.gaussian(0.05), RadialField.gaussian(0.1))
    assert eta == pytest.approx(0.64, abs=1e-6)
    vortex = RadialField.from_lg(LGModeSpec(1, 0, 0.05, LAM))
    assert coupling_efficiency(vortex, g) == 0.0


def test_fiber_mode_coupling_matches_closed_form():
    # the fiber amplitude scale must drop out
    fib = RadialField.from_fiber(FiberMode(0.04, 17.0))
    lg = RadialField.from_lg(LGModeSpec(0, 0, 0.06, LAM))
    assert coupling_efficiency(lg, fib) == pytest.approx(gaussian_coupling_closed_form(0.06, 0.04), abs=1e-9)


def test_closed_form_examples():
    assert gaussian_coupling_closed_form(0.3, 0.3) == 1.0
    assert gaussian_coupling_closed_form(0.05, 0.1) == pytest.approx(0.64, rel=1e-15)
    vals = [gaussian_coupling_closed_form(0.05, wb) for wb in (0.05, 0.1, 1.0, 10.0, 1e3)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 1e-8
    with pytest.raises(ValidationError):
        gaussian_coupling_closed_form(0.0, 1.0)


@pytest.mark.parametrize("wa", [0.005, 0.03, 0.2, 1.0])
@pytest.mark.parametrize("wb", [0.005, 0.011, 0.5, 1.0])
def test_quadrature_agrees_with_closed_form(wa, wb):
    eta = coupling_efficiency(RadialField.gaussian(wa), RadialField.gaussian(wb))
    assert abs(eta - gaussian_coupling_closed_form(wa, wb)) <= 1e-6


@settings(max_examples=40, deadline=None)
@given(st.floats(0.005, 1.0), st.floats(0.005, 1.0), st.integers(0, 2), st.integers(0, 2))
def test_symmetry_and_cauchy_schwarz(wa, wb, l, p):
    a = RadialField.from_lg(LGModeSpec(l, p, wa, LAM))
    b = RadialField.from_lg(LGModeSpec(l, 0, wb, LAM))
    ab, ba = coupling_efficiency(a, b), coupling_efficiency(b, a)
    assert abs(ab - ba) <= 1e-12
    assert 0.0 <= ab <= 1.0 + 1e-9


@pytest.mark.parametrize("radius", [50.0, -120.0, 1e4])
def test_curved_wavefront_matches_closed_form(radius):
    beam = RadialField.gaussian(0.2, curvature_radius=radius, wavelength=LAM)
    eta = coupling_efficiency(beam, RadialField.gaussian(0.15))
    assert eta == pytest.approx(gaussian_coupling_curved(0.2, radius, 0.15, LAM), abs=1e-8)


def test_curvature_off_by_default():
    assert gaussian_coupling_curved(0.2, math.inf, 0.15, LAM) == gaussian_coupling_closed_form(0.2, 0.15)
    flat = RadialField.gaussian(0.2, curvature_radius=None, wavelength=LAM)
    assert coupling_efficiency(flat, RadialField.gaussian(0.15)) == pytest.approx(
        gaussian_coupling_closed_form(0.2, 0.15), abs=1e-9)


def test_zero_norm_field_rejected():
    zero = RadialField(lambda r: 0.0, 0.1)
    with pytest.raises(ValidationError):
        coupling_efficiency(zero, RadialField.gaussian(0.1))
