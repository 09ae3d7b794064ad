"""Two-photon LG-mode amplitudes for degenerate SPDC with a Gaussian pump.

Two kernels are provided, and both are models:

``thin``
    Collinear thin-crystal limit. The amplitude is the position-space
    overlap of the unit-power pump with the conjugated signal and idler
    modes. For p = 0 it has the closed form |C_{l,-l}| / |C_00| = r**|l|
    with r = 2 / (2 + w0**2 / wp**2).

``finite``
    Momentum-space overlap of exp(-wp^2 |qs+qi|^2 / 4) times a Gaussian
    stand-in for the phase-matching function exp(-alpha L |qs-qi|^2 / (4 kp))
    with kp = 2 pi / lambda_p (vacuum). The azimuthal integrals are done
    analytically (modified Bessel function), the remaining radial pair by
    2D quadrature. As L -> 0 it reduces to the thin kernel.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product

import numpy as np
from scipy import integrate, special

from .errors import ConvergenceError, NoInteriorMaximum, ValidationError
from .modes_coupling import LGModeSpec, lg_radial
from .optimize import golden_section_max

KERNELS = ("thin", "finite")
ZERO_CUTOFF = 1e-14
_GL_NODES = 96
_GL_X, _GL_W = np.polynomial.legendre.leggauss(_GL_NODES)


@dataclass(frozen=True)
class PumpBeam:
    waist_width: float
    wavelength: float

    def __post_init__(self):
        if not self.waist_width > 0:
            raise ValidationError("pump waist must be positive")
        if not self.wavelength > 0:
            raise ValidationError("pump wavelength must be positive")

    @property
    def wavenumber(self) -> float:
        return 2.0 * math.pi / self.wavelength


@dataclass(frozen=True)
class CrystalConfig:
    """Crystal length (mm) and the Gaussian phase-matching constant."""

    length: float = 1.0
    gaussian_sinc_factor: float = 0.455

    def __post_init__(self):
        if not self.length > 0:
            raise ValidationError("crystal length must be positive")
        if not self.gaussian_sinc_factor > 0:
            raise ValidationError("gaussian_sinc_factor must be positive")


def _check_pair(signal: LGModeSpec, idler: LGModeSpec):
    if signal.waist_width != idler.waist_width:
        raise ValidationError("signal and idler modes must share one waist")
    if signal.wavelength != idler.wavelength:
        raise ValidationError("signal and idler must be degenerate in wavelength")


def _pump_field(pump: PumpBeam, rho):
    return math.sqrt(2.0 / math.pi) / pump.waist_width * np.exp(-rho**2 / pump.waist_width**2)


def spdc_amplitude_thin(pump: PumpBeam, signal: LGModeSpec, idler: LGModeSpec) -> complex:
    _check_pair(signal, idler)
    if signal.l + idler.l != 0:
        return 0j
    w0, wp = signal.waist_width, pump.waist_width

    def integrand(r):
        return float(_pump_field(pump, r)
                     * lg_radial(signal.l, signal.p, w0, r)
                     * lg_radial(idler.l, idler.p, w0, r) * r)

    r_max = 8.0 * max(w0, wp)
    val, err = integrate.quad(integrand, 0.0, r_max, points=sorted({min(w0, wp), max(w0, wp)}),
                              epsabs=1e-13, epsrel=1e-11, limit=400)
    if err > 1e-8 * max(abs(val), 1e-12):
        raise ConvergenceError(f"thin-kernel quadrature did not converge (error {err})")
    return complex(2.0 * math.pi * val)


def _finite_coefficients(pump: PumpBeam, crystal: CrystalConfig) -> tuple[float, float]:
    a = pump.waist_width**2 / 4.0
    b = crystal.gaussian_sinc_factor * crystal.length / (4.0 * pump.wavenumber)
    return a, b


def spdc_amplitude_finite_length(pump: PumpBeam, signal: LGModeSpec, idler: LGModeSpec,
                                 crystal: CrystalConfig) -> complex:
    _check_pair(signal, idler)
    if signal.l + idler.l != 0:
        return 0j
    n = abs(signal.l)
    a, b = _finite_coefficients(pump, crystal)
    w_q = 2.0 / signal.waist_width  # momentum-space waist of the detection modes
    beta = 1.0 / w_q**2
    s_width = 1.0 / math.sqrt(2.0 * min(a, b) + beta)
    d_width = 1.0 / math.sqrt(2.0 * max(a, b) + beta)
    pad = 10.0 + math.sqrt(n + 2 * max(signal.p, idler.p))
    s_max, d_max = pad * s_width, pad * d_width
    inv_sqrt2 = 1.0 / math.sqrt(2.0)

    def inner(s):
        half = min(s, d_max)
        d = half * _GL_X
        qs = (s + d) * inv_sqrt2
        qi = (s - d) * inv_sqrt2
        c = 2.0 * (a - b) * qs * qi
        # exp(-(a+b)(qs^2+qi^2)) * I_n(c) with the growth of I_n folded in
        expo = -(a + b) * (qs * qs + qi * qi) + np.abs(c)
        vals = (lg_radial(signal.l, signal.p, w_q, qs) * lg_radial(idler.l, idler.p, w_q, qi)
                * special.ive(n, c) * np.exp(expo) * qs * qi)
        return half * float(np.dot(_GL_W, vals))

    pts = [x for x in (d_width, s_width, 3 * s_width) if x < s_max]
    val, err = integrate.quad(inner, 0.0, s_max, points=sorted(set(pts)) or None,
                              epsabs=0.0, epsrel=1e-11, limit=400)
    if not math.isfinite(val) or err > 1e-8 * abs(val) + 1e-14:
        raise ConvergenceError(f"finite-length kernel quadrature did not converge (error {err})")
    sign = -1.0 if (signal.p + idler.p) % 2 else 1.0
    pref = 4.0 * math.pi**2 * pump.waist_width / (2.0 * math.pi) ** 1.5
    return complex(sign * pref * val)


def spiral_ratio(pump: PumpBeam, w0: float, kernel: str = "thin",
                 crystal: CrystalConfig | None = None) -> float:
    """Closed-form ratio r with |C_{l,-l}| = r**|l| |C_00| for p = 0."""
    if kernel == "thin":
        return 2.0 / (2.0 + (w0 / pump.waist_width) ** 2)
    a, b = _finite_coefficients(pump, crystal or CrystalConfig())
    beta = w0**2 / 4.0
    return 2.0 * beta * (a - b) / ((2 * a + beta) * (2 * b + beta))


def fundamental_amplitude_closed_form(pump: PumpBeam, w0: float, kernel: str = "thin",
                                      crystal: CrystalConfig | None = None) -> float:
    """Closed-form C_00 for either kernel (unit-power pump and modes)."""
    wp = pump.waist_width
    if kernel == "thin":
        return 2.0 * math.sqrt(2.0 / math.pi) * wp / (2.0 * wp**2 + w0**2)
    a, b = _finite_coefficients(pump, crystal or CrystalConfig())
    beta = w0**2 / 4.0
    return math.pi * wp * w0**2 / (2.0 * (2.0 * math.pi) ** 1.5 * (2 * a + beta) * (2 * b + beta))


@dataclass
class ModeSpectrum:
    """Two-photon amplitudes keyed by (l1, p1, l2, p2).

    `raw_norm` is sum |C|^2 before normalization, so unnormalized amplitudes
    are ``entries[k] * sqrt(raw_norm)``. `truncation_weight` is the fraction
    of the untruncated p = 0 spiral spectrum that falls outside |l| <= l_max,
    or None when no closed form is available.
    """

    entries: dict
    basis_waist: float
    pump: PumpBeam
    kernel: str
    normalized: bool = True
    raw_norm: float = 1.0
    truncation_weight: float | None = None
    crystal: CrystalConfig | None = field(default=None)

    def probabilities(self) -> dict:
        return {k: abs(c) ** 2 for k, c in self.entries.items()}

    def total_weight(self) -> float:
        return float(sum(abs(c) ** 2 for c in self.entries.values()))

    def fundamental_weight(self, tail_corrected: bool = False) -> float:
        """Normalized P00; with `tail_corrected` it is relative to the untruncated sum."""
        w = abs(self.entries.get((0, 0, 0, 0), 0)) ** 2
        if tail_corrected:
            if self.truncation_weight is None:
                raise ValidationError("no closed-form tail for this spectrum")
            w *= 1.0 - self.truncation_weight
        return w

    def raw_fundamental_amplitude(self) -> float:
        return abs(self.entries.get((0, 0, 0, 0), 0)) * math.sqrt(self.raw_norm)

    def sorted_entries(self) -> list:
        """Nonzero entries by descending weight (ties broken by key)."""
        items = [(k, c) for k, c in self.entries.items() if c != 0]
        return sorted(items, key=lambda kc: (-abs(kc[1]) ** 2, kc[0]))


def spdc_amplitude(kernel, pump, signal, idler, crystal):
    if kernel == "thin":
        return spdc_amplitude_thin(pump, signal, idler)
    if kernel == "finite":
        return spdc_amplitude_finite_length(pump, signal, idler, crystal)
    raise ValidationError(f"unknown kernel {kernel!r}; expected one of {KERNELS}")


def build_spectrum(pump: PumpBeam, w0: float, l_max: int, p_max: int = 0, kernel: str = "thin",
                   crystal: CrystalConfig | None = None, workers: int | None = None) -> ModeSpectrum:
    """Normalized spectrum over |l| <= l_max, p <= p_max for signal and idler."""
    if l_max < 0 or p_max < 0:
        raise ValidationError("l_max and p_max must be non-negative")
    if kernel not in KERNELS:
        raise ValidationError(f"unknown kernel {kernel!r}; expected one of {KERNELS}")
    if kernel == "finite" and crystal is None:
        crystal = CrystalConfig()
    lam = 2.0 * pump.wavelength
    ls = range(-l_max, l_max + 1)
    ps = range(p_max + 1)
    keys = [(l1, p1, l2, p2) for l1, p1, l2, p2 in product(ls, ps, ls, ps)]

    def one(key):
        l1, p1, l2, p2 = key
        return spdc_amplitude(kernel, pump, LGModeSpec(l1, p1, w0, lam), LGModeSpec(l2, p2, w0, lam), crystal)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            values = list(ex.map(one, keys))
    else:
        values = [one(k) for k in keys]

    peak = max(abs(v) for v in values)
    if peak == 0:
        raise ConvergenceError("all amplitudes vanished")
    values = [v if abs(v) >= ZERO_CUTOFF * peak else 0j for v in values]
    raw_norm = float(sum(abs(v) ** 2 for v in values))
    scale = 1.0 / math.sqrt(raw_norm)
    entries = {k: v * scale for k, v in zip(keys, values)}

    trunc = None
    if p_max == 0:
        r = spiral_ratio(pump, w0, kernel, crystal)
        if abs(r) < 1:
            c00 = abs(entries[(0, 0, 0, 0)]) ** 2 * raw_norm
            total = c00 * (1 + r * r) / (1 - r * r)
            trunc = max(0.0, 1.0 - raw_norm / total)
    return ModeSpectrum(entries, w0, pump, kernel, True, raw_norm, trunc, crystal)


def optimal_signal_waist(pump: PumpBeam, crystal: CrystalConfig | None = None,
                         interval: tuple[float, float] = (0.005, 0.5), kernel: str = "finite",
                         n_scan: int = 41, tol: float = 1e-5) -> float:
    """Signal/idler waist maximizing |C_00|.

    A log-spaced pre-scan locates the best grid point; it must be interior,
    otherwise :class:`NoInteriorMaximum` is raised. Golden-section search
    then refines within the neighbouring grid points.
    """
    lo, hi = interval
    if not (0 < lo < hi):
        raise ValidationError("search interval must be positive and ordered")
    lam = 2.0 * pump.wavelength

    def c00(w):
        m = LGModeSpec(0, 0, w, lam)
        return abs(spdc_amplitude(kernel, pump, m, m, crystal or CrystalConfig()))

    grid = np.geomspace(lo, hi, n_scan)
    vals = [c00(w) for w in grid]
    i = int(np.argmax(vals))
    if i == 0 or i == n_scan - 1:
        raise NoInteriorMaximum(
            f"no interior maximum of |C00| in [{lo}, {hi}] mm (best at {'lower' if i == 0 else 'upper'} end)"
        )
    return golden_section_max(c00, grid[i - 1], grid[i + 1], tol=tol)


def hg_condition(w0: float, wp: float, threshold: float = 0.1) -> tuple[float, bool]:
    if not (w0 > 0 and wp > 0):
        raise ValidationError("widths must be positive")
    if not 0 < threshold < 1:
        raise ValidationError("threshold must lie in (0, 1)")
    ratio = w0 / wp
    return ratio, ratio < threshold
