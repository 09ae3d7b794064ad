"""Fundamental-Gaussian propagation and the thin-lens waist transform.

All lengths are in mm on a single signed optical axis whose origin is the
crystal output face; light travels toward positive coordinates. A waist
distance ``z`` before a lens is measured from the waist to the lens
(positive when the waist is upstream), and ``z'`` after the lens is measured
from the lens to the new waist (positive downstream). Negative values mean
virtual waists.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConvergenceError, ValidationError

#: relative residual allowed when checking an inverted lens transform
INVERT_RTOL = 1e-9


def nm_to_mm(wavelength_nm: float) -> float:
    return wavelength_nm * 1e-6


@dataclass(frozen=True)
class GaussianBeamState:
    """Fundamental Gaussian beam.

    Attributes
    ----------
    waist_width : float
        1/e field radius at the waist, mm.
    waist_position : float
        Axial coordinate of the waist, mm.
    wavelength : float
        Wavelength in mm (use :func:`nm_to_mm` at the boundary).
    """

    waist_width: float
    waist_position: float
    wavelength: float

    def __post_init__(self):
        if not (self.waist_width > 0 and math.isfinite(self.waist_width)):
            raise ValidationError(f"waist_width must be positive, got {self.waist_width}")
        if not (self.wavelength > 0 and math.isfinite(self.wavelength)):
            raise ValidationError(f"wavelength must be positive, got {self.wavelength}")
        if not math.isfinite(self.waist_position):
            raise ValidationError("waist_position must be finite")


@dataclass(frozen=True)
class ThinLens:
    focal_length: float
    position: float = 0.0

    def __post_init__(self):
        if self.focal_length == 0 or not math.isfinite(self.focal_length):
            raise ValidationError("focal_length must be finite and nonzero")
        if not math.isfinite(self.position):
            raise ValidationError("lens position must be finite")


def rayleigh_range(beam: GaussianBeamState) -> float:
    return math.pi * beam.waist_width**2 / beam.wavelength


def width_at(beam: GaussianBeamState, plane: float) -> float:
    """Beam 1/e field radius at axial coordinate `plane`."""
    dz = (plane - beam.waist_position) / rayleigh_range(beam)
    return beam.waist_width * math.sqrt(1.0 + dz * dz)


def transform_waist(w0: float, z: float, f: float, wavelength: float) -> tuple[float, float]:
    """Map a waist (w0, z) in front of a thin lens to (w0', z') behind it.

    Works on bare numbers so the fit loop avoids dataclass churn.
    """
    if f == 0:
        raise ValidationError("focal_length must be nonzero")
    a = 1.0 - z / f
    b = math.pi * w0 * w0 / (wavelength * f)
    denom = a * a + b * b
    return w0 / math.sqrt(denom), (1.0 - a / denom) * f


def lens_transform(beam: GaussianBeamState, lens: ThinLens) -> GaussianBeamState:
    z = lens.position - beam.waist_position
    w_out, z_out = transform_waist(beam.waist_width, z, lens.focal_length, beam.wavelength)
    return GaussianBeamState(w_out, lens.position + z_out, beam.wavelength)


def lens_invert(beam_after: GaussianBeamState, lens: ThinLens) -> GaussianBeamState:
    """Recover the pre-lens waist that `lens` maps onto `beam_after`.

    The waist transform is its own inverse when fed the post-lens distance,
    so the inversion reuses it and then checks the forward residual.
    """
    z_after = beam_after.waist_position - lens.position
    w_in, z_in = transform_waist(
        beam_after.waist_width, z_after, lens.focal_length, beam_after.wavelength
    )
    w_chk, z_chk = transform_waist(w_in, z_in, lens.focal_length, beam_after.wavelength)
    scale = max(abs(z_after), abs(lens.focal_length))
    if (abs(w_chk - beam_after.waist_width) > INVERT_RTOL * beam_after.waist_width
            or abs(z_chk - z_after) > INVERT_RTOL * scale):
        raise ConvergenceError(
            f"lens inversion residual too large: width {w_chk} vs {beam_after.waist_width}, "
            f"distance {z_chk} vs {z_after}"
        )
    return GaussianBeamState(w_in, lens.position - z_in, beam_after.wavelength)
