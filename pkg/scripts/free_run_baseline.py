"""Freeze the field-free baseline used by the acceptance tests.

Runs the default setup twice: with the package's split-operator propagator
and with the exact dense one-step propagator from tests/oracles.py. Both
sets of numbers go into tests/golden/free_run.json.

    python3 scripts/free_run_baseline.py [--out tests/golden/free_run.json]
"""
import argparse
import json
import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tests"))

from lcpga.evolver import ControlProblem  # noqa: E402
from oracles import dense_free_run  # noqa: E402

CHECK_TIMES = (99.0, 150.0, 201.0, 300.0, 399.0)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=str(ROOT / "tests" / "golden" / "free_run.json"))
    args = ap.parse_args()

    obs = ControlProblem.build().run(None, stride=16)
    times, pops, flux = dense_free_run(record_every=16)
    assert np.array_equal(times, obs.times)

    def at(t, series):
        return float(series[int(np.argmin(np.abs(times - t)))])

    doc = {
        "description": "field-free run, default setup; 'split' = package, 'dense' = exact dense propagator",
        "split": {
            "j": [float(x) for x in obs.j_flux],
            "ratio_j2_j3": obs.ratio_j2_j3,
            "ti_tmi": [float(x) for x in obs.ti_tmi],
            "final_norm": float(obs.norm[-1]),
            "pop2": {str(t): at(t, obs.populations[:, 1]) for t in CHECK_TIMES},
        },
        "dense": {
            "j": [float(x) for x in flux],
            "ratio_j2_j3": float(flux[1] / flux[2]),
            "pop2": {str(t): at(t, pops[:, 1]) for t in CHECK_TIMES},
        },
    }
    Path(args.out).write_text(json.dumps(doc, indent=2) + "\n")
    print(json.dumps(doc, indent=2))


if __name__ == "__main__":
    main()
