"""Laguerre-Gaussian waist-plane modes, the fiber acceptance mode and the
normalized mode-overlap (coupling efficiency) integral.

Fields are represented as separable u(rho, phi) = R(rho) exp(i m phi). The
azimuthal part of every overlap is done exactly (orders must match), the
radial part by adaptive quadrature on [0, 8 * max width].
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import ConvergenceError, ValidationError

QUAD_EPSABS = 1e-10
QUAD_EPSREL = 1e-10
SUPPORT_WIDTHS = 8.0
#: how far above 1 an efficiency may land before it is treated as a bug
EFFICIENCY_SLACK = 1e-9


def assoc_laguerre(p: int, alpha: int, x):
    """Generalized Laguerre polynomial L_p^alpha(x) by upward recurrence."""
    x = np.asarray(x, dtype=float)
    if p < 0:
        raise ValidationError("radial index must be non-negative")
    prev = np.ones_like(x)
    if p == 0:
        return prev
    cur = 1.0 + alpha - x
    for k in range(1, p):
        prev, cur = cur, ((2 * k + 1 + alpha - x) * cur - (k + alpha) * prev) / (k + 1)
    return cur


@dataclass(frozen=True)
class LGModeSpec:
    """Waist-plane Laguerre-Gaussian mode LG_p^l.

    `wavelength` (mm) does not affect waist-plane values; it is carried so
    modes can be checked for degeneracy and converted to momentum space.
    """

    l: int
    p: int
    waist_width: float
    wavelength: float

    def __post_init__(self):
        if self.p < 0:
            raise ValidationError(f"radial index p must be >= 0, got {self.p}")
        if not self.waist_width > 0:
            raise ValidationError(f"waist_width must be positive, got {self.waist_width}")
        if not self.wavelength > 0:
            raise ValidationError(f"wavelength must be positive, got {self.wavelength}")


@dataclass(frozen=True)
class FiberMode:
    mode_field_radius: float
    amplitude_at_center: float = 1.0

    def __post_init__(self):
        if not self.mode_field_radius > 0:
            raise ValidationError("mode_field_radius must be positive")
        if not self.amplitude_at_center > 0:
            raise ValidationError("amplitude_at_center must be positive")

    @property
    def mode_field_diameter(self) -> float:
        return 2.0 * self.mode_field_radius


def lg_radial(l: int, p: int, w0: float, rho):
    """Real radial profile of the unit-power LG_p^l mode (no exp(i l phi))."""
    al = abs(l)
    norm = math.sqrt(2.0 * math.factorial(p) / (math.pi * math.factorial(p + al))) / w0
    rho = np.asarray(rho, dtype=float)
    x = 2.0 * rho**2 / w0**2
    return norm * (math.sqrt(2.0) * rho / w0) ** al * assoc_laguerre(p, al, x) * np.exp(-rho**2 / w0**2)


def lg_amplitude(mode: LGModeSpec, rho, phi):
    """Complex waist-plane field of `mode`, in mm^-1 (unit power)."""
    if np.any(np.asarray(rho) < 0):
        raise ValidationError("rho must be non-negative")
    return lg_radial(mode.l, mode.p, mode.waist_width, rho) * np.exp(1j * mode.l * np.asarray(phi))


def fiber_field(fiber: FiberMode, rho):
    if np.any(np.asarray(rho) < 0):
        raise ValidationError("rho must be non-negative")
    return fiber.amplitude_at_center * np.exp(-np.asarray(rho, dtype=float) ** 2 / fiber.mode_field_radius**2)


@dataclass(frozen=True)
class RadialField:
    """Transverse field R(rho) * exp(i * order * phi).

    `radial` must accept a float and return a (possibly complex) number.
    `scale` is the characteristic 1/e width used to place quadrature
    breakpoints and to set the truncation radius.
    """

    radial: Callable[[float], complex]
    scale: float
    order: int = 0
    label: str = field(default="", compare=False)

    @classmethod
    def from_lg(cls, mode: LGModeSpec) -> "RadialField":
        l, p, w = mode.l, mode.p, mode.waist_width
        return cls(lambda r: float(lg_radial(l, p, w, r)), w, l, f"LG{p}^{l}")

    @classmethod
    def from_fiber(cls, fiber: FiberMode) -> "RadialField":
        return cls(lambda r: float(fiber_field(fiber, r)), fiber.mode_field_radius, 0, "fiber")

    @classmethod
    def gaussian(cls, width: float, curvature_radius: float | None = None,
                 wavelength: float | None = None) -> "RadialField":
        """Gaussian exp(-rho^2/w^2), optionally with a spherical wavefront.

        Curvature only enters when both `curvature_radius` and `wavelength`
        are given (the mode-matching extension; flat phase is the default).
        """
        if not width > 0:
            raise ValidationError("width must be positive")
        if curvature_radius is None or math.isinf(curvature_radius):
            return cls(lambda r: math.exp(-r * r / width**2), width, 0, "gauss")
        if wavelength is None:
            raise ValidationError("a curved wavefront needs a wavelength")
        k = 2.0 * math.pi / wavelength
        return cls(
            lambda r: complex(math.exp(-r * r / width**2)) * np.exp(-0.5j * k * r * r / curvature_radius),
            width, 0, "gauss-curved",
        )


def _radial_integral(func, r_max: float, points) -> float:
    pts = sorted({p for p in points if 0 < p < r_max})
    val, err = integrate.quad(func, 0.0, r_max, points=pts or None,
                              epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=500)
    if not math.isfinite(val) or err > max(1e3 * QUAD_EPSABS, 1e-8 * abs(val)):
        raise ConvergenceError(f"radial quadrature did not converge (estimate {val}, error {err})")
    return val


def overlap(a: RadialField, b: RadialField) -> complex:
    """<a|b> = integral of conj(a) * b over the plane."""
    if a.order != b.order:
        return 0j
    r_max = SUPPORT_WIDTHS * max(a.scale, b.scale)
    points = [a.scale, b.scale, 2 * a.scale, 2 * b.scale]

    def prod(r):
        return np.conj(a.radial(r)) * b.radial(r) * r

    re = _radial_integral(lambda r: float(np.real(prod(r))), r_max, points)
    im = _radial_integral(lambda r: float(np.imag(prod(r))), r_max, points)
    return 2.0 * math.pi * complex(re, im)


def field_norm(a: RadialField) -> float:
    r_max = SUPPORT_WIDTHS * a.scale
    return 2.0 * math.pi * _radial_integral(lambda r: abs(a.radial(r)) ** 2 * r, r_max, [a.scale])


def coupling_efficiency(a: RadialField, b: RadialField) -> float:
    """Normalized squared overlap |<a|b>|^2 / (<a|a><b|b>), in [0, 1]."""
    na, nb = field_norm(a), field_norm(b)
    if na <= 0 or nb <= 0:
        raise ValidationError("fields must have positive norm")
    # keep the product in a fixed (sorted) order so swapping a and b is exact
    num = abs(overlap(a, b)) ** 2
    eta = num / (min(na, nb) * max(na, nb))
    if eta > 1.0 + EFFICIENCY_SLACK:
        raise ConvergenceError(f"coupling efficiency {eta} exceeds 1 beyond quadrature tolerance")
    return min(eta, 1.0)


def gaussian_coupling_closed_form(w_a: float, w_b: float) -> float:
    if not (w_a > 0 and w_b > 0):
        raise ValidationError("widths must be positive")
    a2, b2 = w_a * w_a, w_b * w_b
    return 4.0 * a2 * b2 / (a2 + b2) ** 2


def gaussian_coupling_curved(w_beam: float, curvature_radius: float, w_mode: float,
                             wavelength: float) -> float:
    """Flat-phase Gaussian mode of width `w_mode` against a curved Gaussian beam."""
    if math.isinf(curvature_radius):
        return gaussian_coupling_closed_form(w_beam, w_mode)
    ratio = w_beam / w_mode + w_mode / w_beam
    curv = math.pi * w_beam * w_mode / (wavelength * curvature_radius)
    return 4.0 / (ratio * ratio + curv * curv)
