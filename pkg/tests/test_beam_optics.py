import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spdc_lens.beam_optics import (
    GaussianBeamState,
    ThinLens,
    lens_invert,
    lens_transform,
    nm_to_mm,
    rayleigh_range,
    transform_waist,
    width_at,
)
from spdc_lens.errors import ValidationError

LAM = nm_to_mm(702.2)


def q_parameter_transform(w0, z, f, lam):
    """Independent oracle: complex beam parameter through a thin lens.

    Evaluated at 50 digits; 1/q - 1/f cancels badly in doubles near z = f.
    """
    with mpmath.workdps(50):
        zr = mpmath.pi * mpmath.mpf(w0) ** 2 / lam
        q_in = mpmath.mpc(z, zr)  # at the lens, z downstream of the waist
        q_out = 1 / (1 / q_in - 1 / mpmath.mpf(f))
        return float(mpmath.sqrt(q_out.imag * lam / mpmath.pi)), float(-q_out.real)


def test_rayleigh_range_examples():
    # quoted values carry ~5 significant digits
    assert rayleigh_range(GaussianBeamState(0.024, 0.0, LAM)) == pytest.approx(2.5770, rel=1e-4)
    assert rayleigh_range(GaussianBeamState(0.1, 0.0, LAM)) == pytest.approx(44.740, rel=1e-4)
    assert rayleigh_range(GaussianBeamState(0.1, 0.0, LAM)) == pytest.approx(math.pi * 0.01 / LAM, rel=1e-15)
    r1 = rayleigh_range(GaussianBeamState(0.03, 0.0, LAM))
    r2 = rayleigh_range(GaussianBeamState(0.06, 0.0, LAM))
    assert r2 == pytest.approx(4 * r1, rel=1e-14)


def test_width_at_examples():
    beam = GaussianBeamState(0.024, 10.0, LAM)
    assert width_at(beam, 10.0) == 0.024
    assert width_at(beam, 10.0 + rayleigh_range(beam)) == pytest.approx(0.033941, abs=5e-7)
    assert width_at(beam, 110.0) == pytest.approx(0.93161, rel=1e-4)
    zr = math.pi * 0.024**2 / LAM
    assert width_at(beam, 110.0) == pytest.approx(0.024 * math.hypot(1.0, 100.0 / zr), rel=1e-14)


@given(st.floats(1e-3, 1.0), st.floats(0.0, 1000.0), st.floats(0.0, 1000.0))
def test_width_at_even_and_increasing(w0, d1, d2):
    beam = GaussianBeamState(w0, 0.0, LAM)
    assert width_at(beam, d1) == width_at(beam, -d1)
    if d1 < d2:
        assert width_at(beam, d1) <= width_at(beam, d2)


@pytest.mark.parametrize(
    "w0, z, f, w_out, z_out",
    [
        (0.024, 115.1, 100.0, 0.15667, 743.5),
        (0.05, 50.0, 100.0, 0.097588, -90.469),
    ],
)
def test_lens_transform_examples(w0, z, f, w_out, z_out):
    out = lens_transform(GaussianBeamState(w0, 0.0, LAM), ThinLens(f, z))
    assert out.waist_width == pytest.approx(w_out, rel=1e-4)
    assert out.waist_position - z == pytest.approx(z_out, rel=1e-4)
    assert out.wavelength == LAM


def test_lens_transform_self_conjugate_case():
    out = lens_transform(GaussianBeamState(0.1, 0.0, LAM), ThinLens(100.0, 100.0))
    assert out.waist_width == pytest.approx(LAM * 100 / (math.pi * 0.1), rel=1e-14)
    assert out.waist_width == pytest.approx(0.22351, rel=1e-4)
    assert out.waist_position - 100.0 == pytest.approx(100.0, rel=1e-14)


def test_zero_focal_rejected():
    with pytest.raises(ValidationError):
        ThinLens(0.0, 1.0)
    with pytest.raises(ValidationError):
        transform_waist(0.1, 10.0, 0.0, LAM)


@pytest.mark.parametrize("bad", [0.0, -1.0, math.nan])
def test_beam_invariants(bad):
    with pytest.raises(ValidationError):
        GaussianBeamState(bad, 0.0, LAM)
    with pytest.raises(ValidationError):
        GaussianBeamState(0.1, 0.0, bad)


@pytest.mark.parametrize(
    "w_after, z_after, f, w_before, z_before, tol",
    [
        (0.097588, -90.469, 100.0, 0.05, 50.0, 1e-4),
        (0.15667, 743.5, 100.0, 0.024, 115.1, 2e-3),
    ],
)
def test_lens_invert_examples(w_after, z_after, f, w_before, z_before, tol):
    lens = ThinLens(f, 200.0)
    before = lens_invert(GaussianBeamState(w_after, 200.0 + z_after, LAM), lens)
    assert before.waist_width == pytest.approx(w_before, rel=tol)
    assert 200.0 - before.waist_position == pytest.approx(z_before, rel=tol)


def test_lens_invert_self_conjugate():
    w0 = 0.07
    lens = ThinLens(100.0, 0.0)
    before = lens_invert(GaussianBeamState(LAM * 100 / (math.pi * w0), 100.0, LAM), lens)
    assert before.waist_width == pytest.approx(w0, rel=1e-12)
    assert before.waist_position == pytest.approx(-100.0, rel=1e-12)


def test_lens_invert_reproduces_forward_exactly():
    lens = ThinLens(100.0, 115.1)
    after = lens_transform(GaussianBeamState(0.024, 0.0, LAM), lens)
    before = lens_invert(after, lens)
    again = lens_transform(before, lens)
    assert again.waist_width == pytest.approx(after.waist_width, rel=1e-9)
    assert again.waist_position == pytest.approx(after.waist_position, rel=1e-9)


focal = st.one_of(st.floats(10.0, 500.0), st.floats(-500.0, -10.0))


@settings(max_examples=300)
@given(st.floats(1e-3, 1.0), st.floats(-500.0, 500.0), focal, st.floats(3e-4, 1.6e-3))
def test_involution(w0, z, f, lam):
    w1, z1 = transform_waist(w0, z, f, lam)
    w2, z2 = transform_waist(w1, z1, f, lam)
    assert abs(w2 - w0) <= 1e-9 * w0
    assert abs(z2 - z) <= 1e-9 * max(abs(z), abs(f))


@settings(max_examples=300)
@given(st.floats(1e-3, 1.0), st.floats(-500.0, 500.0), focal, st.floats(3e-4, 1.6e-3))
def test_matches_q_parameter_oracle(w0, z, f, lam):
    w_ref, z_ref = q_parameter_transform(w0, z, f, lam)
    w1, z1 = transform_waist(w0, z, f, lam)
    assert w1 == pytest.approx(w_ref, rel=1e-12)
    assert abs(z1 - z_ref) <= 1e-9 * max(abs(z_ref), abs(f))


def test_involution_randomized_batch():
    rng = np.random.default_rng(20240)
    for _ in range(1000):
        w0 = 10 ** rng.uniform(-3, 0)
        z = rng.uniform(-500, 500)
        f = rng.choice([-1, 1]) * rng.uniform(10, 500)
        w1, z1 = transform_waist(w0, z, f, LAM)
        w2, z2 = transform_waist(w1, z1, f, LAM)
        assert abs(w2 - w0) <= 1e-9 * w0
        assert abs(z2 - z) <= 1e-9 * max(abs(z), abs(f))
