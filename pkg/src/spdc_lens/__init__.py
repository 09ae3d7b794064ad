"""Gaussian/LG beam optics, fiber coupling and two-photon mode spectra for
SPDC lens-scan experiments, with least-squares waist extraction."""

from .beam_optics import (
    GaussianBeamState,
    ThinLens,
    lens_invert,
    lens_transform,
    nm_to_mm,
    rayleigh_range,
    width_at,
)
from .errors import ConvergenceError, NoInteriorMaximum, ValidationError
from .modes_coupling import (
    FiberMode,
    LGModeSpec,
    RadialField,
    coupling_efficiency,
    fiber_field,
    gaussian_coupling_closed_form,
    lg_amplitude,
)
from .scan_estimation import (
    ExperimentGeometry,
    FitResult,
    ScanDataset,
    fit_scan,
    predict_count_rate,
    simulate_scan,
)
from .spdc_spectrum import (
    CrystalConfig,
    ModeSpectrum,
    PumpBeam,
    build_spectrum,
    hg_condition,
    optimal_signal_waist,
    spdc_amplitude_finite_length,
    spdc_amplitude_thin,
)

__version__ = "0.1.0"
