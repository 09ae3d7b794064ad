"""Push the fitted (waist, distance) pairs through the thin lens and compare
the implied crystal-to-detector distance with the measured 852 mm."""
import argparse

from spdc_lens import GaussianBeamState, ThinLens, lens_transform, nm_to_mm

FIXTURES = {
    100.0: [(0.024, 115.1), (0.026, 114.7), (0.029, 114.5)],
    200.0: [(0.083, 281.6), (0.078, 282.6)],
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--detector", type=float, default=852.0, help="crystal-to-detector distance, mm")
    ap.add_argument("--lambda-nm", type=float, default=702.2)
    args = ap.parse_args()
    lam = nm_to_mm(args.lambda_nm)

    print(f"{'f_mm':>6} {'w0_mm':>7} {'z_mm':>7} {'w0p_mm':>9} {'zp_mm':>9} {'z+zp':>9} {'dev_%':>7}")
    for f, pairs in FIXTURES.items():
        for w0, z in pairs:
            out = lens_transform(GaussianBeamState(w0, -z, lam), ThinLens(f))
            total = z + out.waist_position
            dev = 100 * (total / args.detector - 1)
            print(f"{f:6.0f} {w0:7.3f} {z:7.1f} {out.waist_width:9.5f} {out.waist_position:9.2f} "
                  f"{total:9.2f} {dev:+7.2f}")


if __name__ == "__main__":
    main()
