"""Scan absorber settings: reflected norm for free outgoing Gaussians.

Each packet (sigma = 1, launched at R = 5.5) is propagated on the reference
grid with the absorber and on a doubled grid without it; the reflected norm
is the norm of the difference inside the absorber onset.

    python3 scripts/absorber_calibration.py [--quick]
"""
import argparse
import itertools
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tests"))

from lcpga.model import Absorber  # noqa: E402
from oracles import reflection_test  # noqa: E402

# momentum -> propagation time long enough for a full transit, short enough
# that the doubled reference grid does not wrap around
CASES = {5.0: 3500.0, 18.0: 900.0, 30.0: 600.0}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--quick", action="store_true", help="only the default absorber")
    args = ap.parse_args()
    if args.quick:
        grid = [Absorber()]
    else:
        grid = [
            Absorber(r_start=rs, strength=eta, power=p)
            for rs, p, eta in itertools.product((8.6, 9.2), (2.0, 3.0), (0.01, 0.03, 0.08))
        ]
    print("r_start  power  strength " + "".join(f"   k={k:<5g}" for k in CASES))
    for ab in grid:
        refl = [reflection_test(k, t, absorber=ab)[0] for k, t in CASES.items()]
        print(f"{ab.r_start:7.2f} {ab.power:6.1f} {ab.strength:9.3f} " + "".join(f"  {x:9.2e}" for x in refl))


if __name__ == "__main__":
    main()
