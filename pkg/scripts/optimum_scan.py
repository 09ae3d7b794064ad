"""|C00| versus detection waist for the thin and finite-length kernels,
plus the location of the finite-length optimum."""
import argparse

import numpy as np

from spdc_lens import CrystalConfig, LGModeSpec, PumpBeam, optimal_signal_waist, nm_to_mm
from spdc_lens.spdc_spectrum import spdc_amplitude


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--pump-waist", type=float, default=0.5)
    ap.add_argument("--pump-lambda", type=float, default=351.1)
    ap.add_argument("--length", type=float, default=1.0, help="crystal length, mm")
    ap.add_argument("--alpha", type=float, default=0.455)
    ap.add_argument("--points", type=int, default=25)
    args = ap.parse_args()

    pump = PumpBeam(args.pump_waist, nm_to_mm(args.pump_lambda))
    crystal = CrystalConfig(args.length, args.alpha)
    lam = 2 * pump.wavelength
    print(f"{'w0_mm':>9} {'|C00| thin':>12} {'|C00| finite':>13}")
    for w in np.geomspace(0.005, 0.5, args.points):
        m = LGModeSpec(0, 0, w, lam)
        thin = abs(spdc_amplitude("thin", pump, m, m, crystal))
        fin = abs(spdc_amplitude("finite", pump, m, m, crystal))
        print(f"{w:9.5f} {thin:12.5e} {fin:13.5e}")
    w_opt = optimal_signal_waist(pump, crystal)
    print(f"finite-length optimum: w0* = {w_opt:.5f} mm")


if __name__ == "__main__":
    main()
