"""File formats: geometry JSON, scan CSV, fit-result JSON and a static SVG plot."""
from __future__ import annotations

import csv
import io
import json
import math

import numpy as np

from .beam_optics import nm_to_mm
from .errors import ValidationError
from .scan_estimation import PARAM_NAMES, ExperimentGeometry, FitResult, ScanDataset, model_rates

CSV_HEADER = ("lens_position_mm", "count_rate_hz", "sigma_hz")
GEOMETRY_KEYS = {"detector_plane_mm", "lens_focal_mm", "detector_mode_waist_mm", "wavelength_nm", "metadata"}
METADATA_KEYS = {"filter_bandwidth_nm", "emission_angle_deg"}


def fmt(x: float) -> str:
    """17 significant digits; refuses NaN and infinities."""
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"refusing to serialize non-finite number {x!r}")
    return format(x, ".17g")


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with every float written via :func:`fmt`."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _positive(doc, key, nonzero_only=False):
    if key not in doc:
        raise ValidationError(f"geometry: missing required key {key!r}")
    val = doc[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)) or not math.isfinite(val):
        raise ValidationError(f"geometry: {key!r} must be a finite number")
    if nonzero_only and val == 0:
        raise ValidationError(f"geometry: {key!r} must be nonzero")
    if not nonzero_only and val <= 0:
        raise ValidationError(f"geometry: {key!r} must be positive")
    return float(val)


def geometry_from_dict(doc: dict) -> ExperimentGeometry:
    if not isinstance(doc, dict):
        raise ValidationError("geometry: top level must be a JSON object")
    unknown = set(doc) - GEOMETRY_KEYS
    if unknown:
        raise ValidationError(f"geometry: unknown key(s) {sorted(unknown)}")
    meta = doc.get("metadata", {})
    if not isinstance(meta, dict):
        raise ValidationError("geometry: 'metadata' must be an object")
    unknown = set(meta) - METADATA_KEYS
    if unknown:
        raise ValidationError(f"geometry: unknown metadata key(s) {sorted(unknown)}")
    for k, v in meta.items():
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ValidationError(f"geometry: metadata {k!r} must be a number")
    return ExperimentGeometry(
        detector_plane=_positive(doc, "detector_plane_mm"),
        lens_focal=_positive(doc, "lens_focal_mm", nonzero_only=True),
        detector_mode_waist=_positive(doc, "detector_mode_waist_mm"),
        wavelength=nm_to_mm(_positive(doc, "wavelength_nm")),
        filter_bandwidth_nm=meta.get("filter_bandwidth_nm"),
        emission_angle_deg=meta.get("emission_angle_deg"),
    )


def geometry_to_dict(geom: ExperimentGeometry) -> dict:
    meta = {}
    if geom.filter_bandwidth_nm is not None:
        meta["filter_bandwidth_nm"] = geom.filter_bandwidth_nm
    if geom.emission_angle_deg is not None:
        meta["emission_angle_deg"] = geom.emission_angle_deg
    return {
        "detector_plane_mm": geom.detector_plane,
        "lens_focal_mm": geom.lens_focal,
        "detector_mode_waist_mm": geom.detector_mode_waist,
        "wavelength_nm": geom.wavelength * 1e6,
        "metadata": meta,
    }


def load_geometry(path) -> ExperimentGeometry:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"geometry: invalid JSON ({exc})") from exc
    return geometry_from_dict(doc)


def scan_to_csv(dataset: ScanDataset, include_sigma: bool | None = None) -> str:
    include_sigma = dataset.sigma is not None if include_sigma is None else include_sigma
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER if include_sigma else CSV_HEADER[:2])
    sig = dataset.effective_sigma() if include_sigma else None
    for i, (x, r) in enumerate(zip(dataset.positions, dataset.rates)):
        row = [fmt(x), fmt(r)]
        if include_sigma:
            row.append(fmt(sig[i]))
        writer.writerow(row)
    return buf.getvalue()


def write_scan_csv(dataset: ScanDataset, path, include_sigma: bool | None = None):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(scan_to_csv(dataset, include_sigma))


def parse_scan_csv(text: str, integration_time: float = 1.0) -> ScanDataset:
    """Parse ScanCsv text; errors name the offending (1-based) line."""
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise ValidationError("scan csv: empty file")
    if any(line.endswith("\r") for line in lines):
        raise ValidationError("scan csv: CRLF line endings are not accepted")
    header = [h.strip() for h in next(csv.reader([lines[0]]))]
    if header not in (list(CSV_HEADER[:2]), list(CSV_HEADER)):
        raise ValidationError(f"scan csv line 1: expected header {','.join(CSV_HEADER[:2])}[,sigma_hz], got {lines[0]!r}")
    ncol = len(header)
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        cells = next(csv.reader([line])) if line else []
        if len(cells) != ncol:
            raise ValidationError(f"scan csv line {lineno}: expected {ncol} fields, got {len(cells)}")
        try:
            vals = [float(c.strip()) for c in cells]
        except ValueError:
            raise ValidationError(f"scan csv line {lineno}: non-numeric field in {line!r}") from None
        if not all(math.isfinite(v) for v in vals):
            raise ValidationError(f"scan csv line {lineno}: non-finite value")
        if vals[1] < 0:
            raise ValidationError(f"scan csv line {lineno}: negative count rate")
        if ncol == 3 and vals[2] <= 0:
            raise ValidationError(f"scan csv line {lineno}: sigma must be positive")
        if rows and vals[0] <= rows[-1][0]:
            raise ValidationError(f"scan csv line {lineno}: lens positions must be strictly increasing")
        rows.append(vals)
    if not rows:
        raise ValidationError("scan csv: no samples")
    arr = np.array(rows)
    sigma = arr[:, 2] if ncol == 3 else None
    return ScanDataset(arr[:, 0], arr[:, 1], sigma, integration_time)


def read_scan_csv(path, integration_time: float = 1.0) -> ScanDataset:
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_scan_csv(fh.read(), integration_time)


def fit_result_to_dict(res: FitResult) -> dict:
    return {
        "fitted": {"omega0_mm": res.omega0, "s0_mm": res.s0, "A_hz": res.amplitude, "B_hz": res.background},
        "fitted_errors": dict(zip(PARAM_NAMES, res.param_errors.tolist())),
        "derived": {
            "omega0_prime_mm": res.omega0_prime,
            "z_prime_mm": res.z_prime,
            "z_mm": res.z,
            "x_star_mm": res.x_star,
        },
        "derived_errors": dict(res.derived_errors),
        "chi2": res.chi2,
        "dof": res.dof,
        "covariance": {"parameters": list(PARAM_NAMES), "row_major": res.covariance.ravel().tolist()},
        "convergence": {
            "iterations": res.iterations,
            "function_evaluations": res.function_evaluations,
            "gradient_norm": res.gradient_norm,
            "reason": res.reason,
        },
    }


def fit_svg(dataset: ScanDataset, res: FitResult, geometry: ExperimentGeometry,
            width: int = 640, height: int = 400, n_curve: int = 400) -> str:
    """Static SVG: axes, one circle per sample, one polyline for the model."""
    margin = 50
    x = dataset.positions
    xs = np.linspace(x[0], x[-1], n_curve)
    ys = model_rates(res.params, xs, geometry)
    y_hi = max(float(dataset.rates.max()), float(ys.max())) * 1.05 or 1.0
    x_lo, x_hi = float(x[0]), float(x[-1])

    def px(v):
        return margin + (v - x_lo) / (x_hi - x_lo) * (width - 2 * margin)

    def py(v):
        return height - margin - v / y_hi * (height - 2 * margin)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<g id="axes" stroke="black" fill="none"><line x1="{margin}" y1="{height - margin}" '
        f'x2="{width - margin}" y2="{height - margin}"/><line x1="{margin}" y1="{margin}" '
        f'x2="{margin}" y2="{height - margin}"/></g>',
        f'<text x="{width / 2:.1f}" y="{height - 12}" text-anchor="middle" font-size="12">'
        f'lens position (mm)</text>',
        f'<text x="14" y="{height / 2:.1f}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 14 {height / 2:.1f})">count rate (Hz)</text>',
        f'<text x="{margin}" y="{height - margin + 16}" font-size="10">{x_lo:.6g}</text>',
        f'<text x="{width - margin}" y="{height - margin + 16}" font-size="10" '
        f'text-anchor="end">{x_hi:.6g}</text>',
        f'<text x="{margin - 4}" y="{margin}" font-size="10" text-anchor="end">{y_hi:.6g}</text>',
        '<g id="data" fill="black">',
    ]
    for xv, yv in zip(x, dataset.rates):
        out.append(f'<circle cx="{px(xv):.3f}" cy="{py(yv):.3f}" r="2.5"/>')
    out.append("</g>")
    pts = " ".join(f"{px(a):.3f},{py(b):.3f}" for a, b in zip(xs, ys))
    out.append(f'<polyline id="model" fill="none" stroke="red" stroke-width="1.5" points="{pts}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
