"""Spiral spectrum P(l, -l) and the fundamental weight for a sweep of pump waists."""
import argparse

from spdc_lens import PumpBeam, build_spectrum, nm_to_mm


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--signal-waist", type=float, default=0.024)
    ap.add_argument("--pump-lambda", type=float, default=351.1)
    ap.add_argument("--lmax", type=int, default=5)
    ap.add_argument("--pump-waists", default="0.5,0.2,0.1,0.05,0.03,0.02")
    args = ap.parse_args()

    lam = nm_to_mm(args.pump_lambda)
    for wp in (float(v) for v in args.pump_waists.split(",")):
        spec = build_spectrum(PumpBeam(wp, lam), args.signal_waist, args.lmax)
        probs = spec.probabilities()
        row = " ".join(f"{probs[(l, 0, -l, 0)]:.4f}" for l in range(args.lmax + 1))
        print(f"wp={wp:6.3f} mm  P00 (tail-corrected) {spec.fundamental_weight(True):.5f}  "
              f"P(l,-l), l=0..{args.lmax}: {row}")


if __name__ == "__main__":
    main()
