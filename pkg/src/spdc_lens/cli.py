"""Command-line interface.

Exit codes: 0 success, 2 invalid input, 3 numerical non-convergence,
4 I/O failure. Failures print a one-line ``{"error": ...}`` to stderr.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import io as sio
from .beam_optics import GaussianBeamState, ThinLens, lens_invert, lens_transform, nm_to_mm
from .errors import ConvergenceError, ValidationError
from .modes_coupling import (
    LGModeSpec,
    RadialField,
    coupling_efficiency,
    gaussian_coupling_closed_form,
)
from .scan_estimation import ExperimentGeometry, fit_scan, simulate_scan
from .spdc_spectrum import (
    CrystalConfig,
    PumpBeam,
    build_spectrum,
    hg_condition,
    optimal_signal_waist,
    spdc_amplitude,
)

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message)


def _emit(doc):
    sys.stdout.write(sio.dumps(doc) + "\n")


def _positions(spec: str) -> np.ndarray:
    try:
        a, b, n = spec.split(":")
        a, b, n = float(a), float(b), int(n)
    except ValueError:
        raise ValidationError(f"--positions must look like start:stop:count, got {spec!r}") from None
    if n < 2 or not b > a:
        raise ValidationError("--positions needs stop > start and count >= 2")
    return np.linspace(a, b, n)


def _geometry(path) -> ExperimentGeometry:
    return sio.load_geometry(path) if path else ExperimentGeometry()


def cmd_lens(args):
    lam = nm_to_mm(args.wavelength_nm)
    lens_pos = args.lens_pos
    if args.invert:
        # input is the post-lens waist; --z is its distance behind the lens
        lens_pos = 0.0 if lens_pos is None else lens_pos
        if args.z is not None:
            after_pos = lens_pos + args.z
        elif args.waist_pos is not None:
            after_pos = args.waist_pos
        else:
            raise ValidationError("lens --invert needs --z (distance behind the lens) or --waist-pos")
        lens = ThinLens(args.f, lens_pos)
        before = lens_invert(GaussianBeamState(args.waist, after_pos, lam), lens)
        _emit({
            "waist_mm": before.waist_width,
            "waist_position_mm": before.waist_position,
            "z_mm": lens_pos - before.waist_position,
            "z_prime_mm": after_pos - lens_pos,
        })
        return
    waist_pos = 0.0 if args.waist_pos is None else args.waist_pos
    if args.z is not None:
        if lens_pos is not None and abs(lens_pos - waist_pos - args.z) > 1e-12 * max(1.0, abs(lens_pos)):
            raise ValidationError("--z disagrees with --lens-pos minus --waist-pos")
        lens_pos = waist_pos + args.z
    elif lens_pos is None:
        raise ValidationError("lens needs --z or --lens-pos")
    after = lens_transform(GaussianBeamState(args.waist, waist_pos, lam), ThinLens(args.f, lens_pos))
    _emit({
        "waist_mm": after.waist_width,
        "waist_position_mm": after.waist_position,
        "z_mm": lens_pos - waist_pos,
        "z_prime_mm": after.waist_position - lens_pos,
    })


def cmd_couple(args):
    gaussian = args.la == 0 and args.pa == 0
    if args.method == "closed" and gaussian:
        eff = gaussian_coupling_closed_form(args.wa, args.wb)
        method = "closed"
    else:
        mode_a = RadialField.from_lg(LGModeSpec(args.la, args.pa, args.wa, nm_to_mm(args.wavelength_nm)))
        eff = coupling_efficiency(mode_a, RadialField.gaussian(args.wb))
        method = "quadrature"
    _emit({"efficiency": eff, "method": method, "wa_mm": args.wa, "wb_mm": args.wb,
           "la": args.la, "pa": args.pa})


def _pump_and_crystal(args):
    pump = PumpBeam(args.pump_waist, nm_to_mm(args.pump_lambda))
    crystal = CrystalConfig(args.crystal_length, args.alpha)
    return pump, crystal


def cmd_spectrum(args):
    pump, crystal = _pump_and_crystal(args)
    w0 = args.signal_waist if args.signal_waist is not None else args.pump_waist
    spec = build_spectrum(pump, w0, args.lmax, args.pmax, args.kernel,
                          crystal if args.kernel == "finite" else None, workers=args.workers)
    entries = [
        {"l1": k[0], "p1": k[1], "l2": k[2], "p2": k[3], "weight": abs(c) ** 2,
         "amplitude_re": c.real, "amplitude_im": c.imag}
        for k, c in spec.sorted_entries()
    ]
    tail = spec.truncation_weight
    ratio, hg_ok = hg_condition(w0, args.pump_waist, args.hg_threshold)
    _emit({
        "kernel": args.kernel,
        "pump_waist_mm": args.pump_waist,
        "signal_waist_mm": w0,
        "l_max": args.lmax,
        "p_max": args.pmax,
        "entries": entries,
        "total_weight": spec.total_weight(),
        "truncation_weight": tail,
        "fundamental_weight": spec.fundamental_weight(),
        "fundamental_weight_tail_corrected": spec.fundamental_weight(True) if tail is not None else None,
        "raw_fundamental_amplitude": spec.raw_fundamental_amplitude(),
        "hg_ratio": ratio,
        "hg_condition_satisfied": hg_ok,
    })


def cmd_optimal_waist(args):
    pump, crystal = _pump_and_crystal(args)
    w = optimal_signal_waist(pump, crystal, (args.lo, args.hi), args.kernel, tol=args.tol)
    m = LGModeSpec(0, 0, w, 2 * pump.wavelength)
    _emit({
        "optimal_signal_waist_mm": w,
        "abs_c00": abs(spdc_amplitude(args.kernel, pump, m, m, crystal)),
        "kernel": args.kernel,
        "pump_waist_mm": args.pump_waist,
        "crystal_length_mm": args.crystal_length,
        "alpha": args.alpha,
    })


def cmd_simulate(args):
    geom = _geometry(args.geometry)
    src = GaussianBeamState(args.waist, args.waist_pos, geom.wavelength)
    data = simulate_scan(geom, src, _positions(args.positions), args.amplitude, args.background,
                         args.integration_time, args.seed, noise=not args.no_noise)
    text = sio.scan_to_csv(data, include_sigma=args.with_sigma)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_fit(args):
    geom = _geometry(args.geometry)
    data = sio.read_scan_csv(args.scan, args.integration_time)
    init = None
    if args.init:
        try:
            init = [float(v) for v in args.init.split(",")]
        except ValueError:
            raise ValidationError("--init must be four comma-separated numbers w0,s0,A,B") from None
        if len(init) != 4:
            raise ValidationError("--init must be four comma-separated numbers w0,s0,A,B")
    res = fit_scan(data, geom, init, curvature_aware=args.curvature_aware)
    doc = sio.fit_result_to_dict(res)
    text = sio.dumps(doc) + "\n"
    if args.emit_plot:
        with open(args.emit_plot, "w", encoding="utf-8", newline="") as fh:
            fh.write(sio.fit_svg(data, res, geom))
    sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="spdc-lens", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    s = sub.add_parser("lens", help="thin-lens waist transform (or its inverse)")
    s.add_argument("--waist", type=float, required=True, help="waist 1/e radius, mm")
    s.add_argument("--z", type=float, help="waist-to-lens distance, mm (after the lens with --invert)")
    s.add_argument("--z-prime", dest="z", type=float, help=argparse.SUPPRESS)
    s.add_argument("--waist-pos", type=float, help="waist axial coordinate, mm")
    s.add_argument("--lens-pos", type=float, help="lens axial coordinate, mm")
    s.add_argument("--lambda", dest="wavelength_nm", type=float, default=702.2, help="wavelength, nm")
    s.add_argument("--f", type=float, required=True, help="focal length, mm")
    s.add_argument("--invert", action="store_true", help="recover the pre-lens waist")
    s.set_defaults(func=cmd_lens)

    s = sub.add_parser("couple", help="mode-overlap coupling efficiency")
    s.add_argument("--wa", type=float, required=True, help="width of field a, mm")
    s.add_argument("--wb", type=float, required=True, help="width of Gaussian b, mm")
    s.add_argument("--la", type=int, default=0, help="winding number of field a")
    s.add_argument("--pa", type=int, default=0, help="radial index of field a")
    s.add_argument("--lambda", dest="wavelength_nm", type=float, default=702.2)
    s.add_argument("--method", choices=("closed", "quadrature"), default="closed")
    s.set_defaults(func=cmd_couple)

    def spdc_opts(s, kernel):
        s.add_argument("--pump-waist", type=float, default=0.5, help="pump waist, mm")
        s.add_argument("--pump-lambda", type=float, default=351.1, help="pump wavelength, nm")
        s.add_argument("--crystal-length", type=float, default=1.0, help="mm")
        s.add_argument("--alpha", type=float, default=0.455, help="Gaussian phase-matching constant")
        s.add_argument("--kernel", choices=("thin", "finite"), default=kernel)

    s = sub.add_parser("spectrum", help="two-photon LG spectrum")
    spdc_opts(s, "thin")
    s.add_argument("--signal-waist", type=float, help="signal/idler basis waist, mm (default: pump waist)")
    s.add_argument("--lmax", type=int, default=4)
    s.add_argument("--pmax", type=int, default=0)
    s.add_argument("--hg-threshold", type=float, default=0.1)
    s.add_argument("--workers", type=int, default=None)
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("optimal-waist", help="signal waist maximizing |C00|")
    spdc_opts(s, "finite")
    s.add_argument("--lo", type=float, default=0.005, help="mm")
    s.add_argument("--hi", type=float, default=0.5, help="mm")
    s.add_argument("--tol", type=float, default=1e-5, help="mm")
    s.set_defaults(func=cmd_optimal_waist)

    s = sub.add_parser("simulate", help="simulate a lens scan to CSV")
    s.add_argument("--geometry", help="geometry JSON (default: 852 mm, f=100 mm, 0.157 mm, 702.2 nm)")
    s.add_argument("--waist", type=float, default=0.024, help="true source waist, mm")
    s.add_argument("--waist-pos", type=float, default=0.0, help="true source waist position, mm")
    s.add_argument("--amplitude", type=float, default=5000.0, help="A, Hz")
    s.add_argument("--background", type=float, default=50.0, help="B, Hz")
    s.add_argument("--integration-time", type=float, default=1.0, help="s")
    s.add_argument("--positions", default="60:180:50", help="start:stop:count, mm")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--no-noise", action="store_true")
    s.add_argument("--with-sigma", action="store_true", help="write the sigma_hz column")
    s.add_argument("--out", help="output CSV (default: stdout)")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("fit", help="fit a lens scan")
    s.add_argument("scan", help="scan CSV")
    s.add_argument("--geometry", help="geometry JSON")
    s.add_argument("--init", help="w0,s0,A,B")
    s.add_argument("--integration-time", type=float, default=1.0, help="s, for Poisson sigma")
    s.add_argument("--curvature-aware", action="store_true")
    s.add_argument("--emit-plot", help="write an SVG of data and fitted curve")
    s.set_defaults(func=cmd_fit)
    return p


def _fail(code, message):
    sys.stderr.write(json.dumps({"error": message, "exit_code": code}) + "\n")
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.func(args)
    except ValidationError as exc:
        return _fail(EXIT_INVALID, str(exc))
    except ConvergenceError as exc:
        return _fail(EXIT_NUMERIC, str(exc))
    except OSError as exc:
        return _fail(EXIT_IO, f"{type(exc).__name__}: {exc}")
    except ValueError as exc:
        return _fail(EXIT_INVALID, str(exc))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
