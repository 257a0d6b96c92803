"""Convergence of the free-evolution fluxes in time step and grid spacing.

    python3 scripts/convergence_study.py
"""
from lcpga.evolver import ControlProblem
from lcpga.model import build_grid


def run(dt_div: int = 1, dr_div: int = 1):
    grid = build_grid(0.9, 4.6875e-2 / dr_div, 220 * dr_div)
    problem = ControlProblem.build(grid=grid, dt_full=0.1875 / dt_div, n_steps=8192 * dt_div)
    return problem.run(None).j_flux


def main():
    print(f"{'dt/':>4s} {'dr/':>4s} {'J2':>14s} {'J3':>14s} {'J2/J3':>10s}")
    for dt_div, dr_div in ((1, 1), (2, 1), (4, 1), (1, 2), (2, 2)):
        j = run(dt_div, dr_div)
        print(f"{dt_div:4d} {dr_div:4d} {j[1]:14.10f} {j[2]:14.10f} {j[1] / j[2]:10.6f}")


if __name__ == "__main__":
    main()
