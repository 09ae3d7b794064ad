"""Lens-scan forward model, Poisson simulator and waist extraction.

Geometry: the source waist sits at `s0` on the crystal axis, a scanned thin
lens at `x` re-images it, and a detector plane at `detector_plane` accepts an
effective Gaussian mode of width `detector_mode_waist`. The count rate is

    rate(x) = A * Q(x) + B

with Q the flat-phase Gaussian overlap between the beam at the detector
plane and the detector mode.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .beam_optics import GaussianBeamState, ThinLens, lens_transform, nm_to_mm, transform_waist, width_at
from .errors import ConvergenceError, ValidationError
from .modes_coupling import gaussian_coupling_closed_form, gaussian_coupling_curved
from .optimize import golden_section_max, levenberg_marquardt

LOG_EPS = 1e-9
MIN_SAMPLES = 8
PARAM_NAMES = ("omega0_mm", "s0_mm", "A_hz", "B_hz")


@dataclass(frozen=True)
class ExperimentGeometry:
    """Fixed parts of the scan: detector plane, scanned lens, detector mode.

    Filter bandwidth and emission angle are bookkeeping only.
    """

    detector_plane: float = 852.0
    lens_focal: float = 100.0
    detector_mode_waist: float = 0.157
    wavelength: float = nm_to_mm(702.2)
    filter_bandwidth_nm: float | None = 4.0
    emission_angle_deg: float | None = 6.0

    def __post_init__(self):
        if not self.detector_plane > 0:
            raise ValidationError("detector_plane must be positive")
        if self.lens_focal == 0 or not math.isfinite(self.lens_focal):
            raise ValidationError("lens_focal must be finite and nonzero")
        if not self.detector_mode_waist > 0:
            raise ValidationError("detector_mode_waist must be positive")
        if not self.wavelength > 0:
            raise ValidationError("wavelength must be positive")


@dataclass
class ScanDataset:
    """Count rates (Hz) sampled at increasing lens positions (mm)."""

    positions: np.ndarray
    rates: np.ndarray
    sigma: np.ndarray | None = None
    integration_time: float = 1.0
    seed: int | None = None

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float)
        self.rates = np.asarray(self.rates, dtype=float)
        if self.positions.ndim != 1 or self.positions.shape != self.rates.shape:
            raise ValidationError("positions and rates must be 1-D and of equal length")
        if not (np.all(np.isfinite(self.positions)) and np.all(np.isfinite(self.rates))):
            raise ValidationError("positions and rates must be finite")
        if np.any(np.diff(self.positions) <= 0):
            raise ValidationError("lens positions must be strictly increasing")
        if np.any(self.rates < 0):
            raise ValidationError("count rates must be non-negative")
        if self.sigma is not None:
            self.sigma = np.asarray(self.sigma, dtype=float)
            if self.sigma.shape != self.rates.shape or np.any(~(self.sigma > 0)):
                raise ValidationError("sigma must be positive and match the rates")
        if not self.integration_time > 0:
            raise ValidationError("integration_time must be positive")

    def __len__(self):
        return self.positions.size

    def effective_sigma(self) -> np.ndarray:
        """Given sigma, else Poisson sqrt(counts)/T with a one-count floor."""
        if self.sigma is not None:
            return self.sigma
        t = self.integration_time
        return np.sqrt(np.maximum(self.rates * t, 1.0)) / t


@dataclass
class FitResult:
    omega0: float
    s0: float
    amplitude: float
    background: float
    omega0_prime: float
    z_prime: float
    z: float
    x_star: float
    chi2: float
    dof: int
    covariance: np.ndarray
    iterations: int
    function_evaluations: int
    gradient_norm: float
    reason: str
    derived_errors: dict = field(default_factory=dict)

    @property
    def params(self) -> np.ndarray:
        return np.array([self.omega0, self.s0, self.amplitude, self.background])

    @property
    def param_errors(self) -> np.ndarray:
        return np.sqrt(np.diag(self.covariance))

    @property
    def reduced_chi2(self) -> float:
        return self.chi2 / self.dof if self.dof > 0 else math.nan


def detector_beam(w0, s0, x, f, wavelength, detector_plane):
    """Beam width and wavefront radius at the detector for lens positions `x`.

    Vectorized over `x`; returns (width, radius) with radius = inf where the
    post-lens waist lands exactly on the detector plane.
    """
    x = np.asarray(x, dtype=float)
    z = x - s0
    a = 1.0 - z / f
    b = math.pi * w0 * w0 / (wavelength * f)
    den = a * a + b * b
    wp = w0 / np.sqrt(den)
    zp = (1.0 - a / den) * f
    zr = math.pi * wp * wp / wavelength
    dz = detector_plane - (x + zp)
    width = wp * np.sqrt(1.0 + (dz / zr) ** 2)
    with np.errstate(divide="ignore"):
        radius = np.where(dz == 0, np.inf, dz + zr * zr / np.where(dz == 0, 1.0, dz))
    return width, radius


def _coupling(width, radius, geometry: ExperimentGeometry, curvature_aware: bool):
    wd2 = geometry.detector_mode_waist**2
    w2 = width * width
    q = 4.0 * w2 * wd2 / (w2 + wd2) ** 2
    if curvature_aware:
        curv = math.pi * width * geometry.detector_mode_waist / (geometry.wavelength * radius)
        ratio = width / geometry.detector_mode_waist + geometry.detector_mode_waist / width
        q = 4.0 / (ratio * ratio + curv * curv)
    return q


def _check_positions(x, geometry):
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0) or np.any(x >= geometry.detector_plane):
        raise ValidationError(
            f"lens positions must lie strictly inside (0, {geometry.detector_plane}) mm"
        )
    return x


def model_rates(params, x, geometry: ExperimentGeometry, curvature_aware: bool = False):
    """A * Q(x) + B for natural parameters (w0, s0, A, B), vectorized over x."""
    w0, s0, amp, bg = params
    width, radius = detector_beam(w0, s0, x, geometry.lens_focal, geometry.wavelength,
                                  geometry.detector_plane)
    return amp * _coupling(width, radius, geometry, curvature_aware) + bg


def predict_count_rate(geometry: ExperimentGeometry, source: GaussianBeamState, x: float,
                       A: float, B: float, curvature_aware: bool = False) -> float:
    """Expected count rate (Hz) with the scanned lens at `x`."""
    _check_positions(x, geometry)
    after = lens_transform(source, ThinLens(geometry.lens_focal, x))
    width = width_at(after, geometry.detector_plane)
    if not curvature_aware:
        q = gaussian_coupling_closed_form(width, geometry.detector_mode_waist)
    else:
        dz = geometry.detector_plane - after.waist_position
        zr = math.pi * after.waist_width**2 / after.wavelength
        radius = math.inf if dz == 0 else dz + zr * zr / dz
        q = gaussian_coupling_curved(width, radius, geometry.detector_mode_waist, geometry.wavelength)
    return A * q + B


def simulate_scan(geometry: ExperimentGeometry, source: GaussianBeamState, positions, A: float,
                  B: float, integration_time: float = 1.0, seed: int = 0, noise: bool = True,
                  curvature_aware: bool = False) -> ScanDataset:
    """Poisson-sampled scan; `noise=False` returns the model rates exactly."""
    x = _check_positions(positions, geometry)
    if source.wavelength != geometry.wavelength:
        raise ValidationError("source and geometry wavelengths differ")
    mean = model_rates((source.waist_width, source.waist_position, A, B), x, geometry, curvature_aware)
    if not noise:
        return ScanDataset(x, mean, None, integration_time, seed)
    rng = np.random.default_rng(seed)
    counts = rng.poisson(mean * integration_time)
    return ScanDataset(x, counts / integration_time, None, integration_time, seed)


def _moment_width(x, y):
    y = y - y.min()
    tot = y.sum()
    if tot <= 0:
        return math.nan
    mu = (x * y).sum() / tot
    return math.sqrt(((x - mu) ** 2 * y).sum() / tot)


def initial_guess(dataset: ScanDataset, geometry: ExperimentGeometry,
                  curvature_aware: bool = False) -> np.ndarray:
    """Moment-matched starting point (w0, s0=0, A=max-min, B=min).

    w0 is the candidate whose model curve, sampled at the same positions,
    has the second moment closest to that of the data.
    """
    x, y = dataset.positions, dataset.rates
    target = _moment_width(x, y)
    candidates = np.geomspace(1e-3, 1.0, 241)
    best, best_err = candidates[0], math.inf
    for w in candidates:
        m = model_rates((w, 0.0, 1.0, 0.0), x, geometry, curvature_aware)
        err = abs(math.log(_moment_width(x, m) / target)) if target > 0 else math.inf
        if err < best_err:
            best, best_err = w, err
    amp = float(y.max() - y.min())
    return np.array([best, 0.0, max(amp, 1e-6), float(y.min())])


def _to_internal(p):
    return np.array([math.log(p[0]), p[1], math.log(p[2]), math.log(max(p[3], 0.0) + LOG_EPS)])


def _to_natural(t):
    return np.array([math.exp(t[0]), t[1], math.exp(t[2]), math.exp(t[3]) - LOG_EPS])


def peak_position(params, geometry: ExperimentGeometry, lo: float, hi: float,
                  curvature_aware: bool = False, tol: float = 1e-6) -> float:
    """Argmax of the model rate on [lo, hi].

    A dense grid picks the global maximum (the flat-phase peak can be
    double-humped; ties go to the first grid point), then golden-section
    refines between its neighbours.
    """
    grid = np.linspace(lo, hi, 4001)
    vals = model_rates(params, grid, geometry, curvature_aware)
    i = int(np.argmax(vals))
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    return golden_section_max(lambda t: float(model_rates(params, t, geometry, curvature_aware)),
                              a, b, tol=tol)


def _derived(params, geometry, lo, hi, curvature_aware):
    x_star = peak_position(params, geometry, lo, hi, curvature_aware)
    z = x_star - params[1]
    w_p, z_p = transform_waist(params[0], z, geometry.lens_focal, geometry.wavelength)
    return np.array([w_p, z_p, z, x_star])


def fit_scan(dataset: ScanDataset, geometry: ExperimentGeometry, initial=None,
             curvature_aware: bool = False) -> FitResult:
    """Fit (w0, s0, A, B) to a scan and derive (w0', z', z, x*).

    Raises
    ------
    ValidationError
        Too few samples, or the highest rate sits at either end of the scan.
    ConvergenceError
        The least-squares fit did not converge.
    """
    n = len(dataset)
    if n < MIN_SAMPLES:
        raise ValidationError(f"need at least {MIN_SAMPLES} samples, got {n}")
    i_max = int(np.argmax(dataset.rates))
    if i_max == 0 or i_max == n - 1:
        raise ValidationError("peak not interior: the highest count rate is at the edge of the scan")
    x = _check_positions(dataset.positions, geometry)
    y = dataset.rates
    sig = dataset.effective_sigma()
    p0 = np.asarray(initial, dtype=float) if initial is not None else initial_guess(dataset, geometry, curvature_aware)
    if p0.shape != (4,) or not (p0[0] > 0 and p0[2] > 0):
        raise ValidationError("initial guess must be (w0 > 0, s0, A > 0, B)")

    def residuals(t):
        return (model_rates(_to_natural(t), x, geometry, curvature_aware) - y) / sig

    theta, cov_t, report = levenberg_marquardt(residuals, _to_internal(p0))
    p = _to_natural(theta)
    if not p[0] > 0:
        raise ConvergenceError("fitted waist is not positive")
    jac = np.diag([p[0], 1.0, p[2], p[3] + LOG_EPS])
    cov = jac @ cov_t @ jac.T
    cov = 0.5 * (cov + cov.T)

    lo, hi = float(x[0]), float(x[-1])
    derived = _derived(p, geometry, lo, hi, curvature_aware)

    # secant propagation with one-sigma steps
    errs = np.sqrt(np.maximum(np.diag(cov), 0.0))
    dj = np.zeros((4, 4))
    for j in range(4):
        h = errs[j] if errs[j] > 0 else 1e-9
        pp, pm = p.copy(), p.copy()
        pp[j] += h
        pm[j] -= h
        if j in (0, 2) and pm[j] <= 0:
            pm[j] = p[j]
            dj[:, j] = (_derived(pp, geometry, lo, hi, curvature_aware) - derived) / h
        else:
            dj[:, j] = (_derived(pp, geometry, lo, hi, curvature_aware)
                        - _derived(pm, geometry, lo, hi, curvature_aware)) / (2 * h)
    dcov = dj @ cov @ dj.T
    derr = dict(zip(("omega0_prime_mm", "z_prime_mm", "z_mm", "x_star_mm"),
                    np.sqrt(np.maximum(np.diag(dcov), 0.0)).tolist()))

    return FitResult(
        omega0=float(p[0]), s0=float(p[1]), amplitude=float(p[2]), background=float(p[3]),
        omega0_prime=float(derived[0]), z_prime=float(derived[1]), z=float(derived[2]),
        x_star=float(derived[3]), chi2=float(report.chi2), dof=n - 4, covariance=cov,
        iterations=report.iterations, function_evaluations=report.function_evaluations,
        gradient_norm=report.gradient_norm, reason=report.reason, derived_errors=derr,
    )


def monte_carlo_fits(geometry: ExperimentGeometry, source: GaussianBeamState, positions, A: float,
                     B: float, integration_time: float = 1.0, seeds=range(100),
                     workers: int | None = None) -> list:
    """Simulate and fit one scan per seed; failed fits come back as exceptions.

    Results are in seed order regardless of `workers`.
    """

    def one(seed):
        data = simulate_scan(geometry, source, positions, A, B, integration_time, seed)
        try:
            return fit_scan(data, geometry)
        except (ConvergenceError, ValidationError) as exc:
            return exc

    seeds = list(seeds)
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(one, seeds))
    return [one(s) for s in seeds]
