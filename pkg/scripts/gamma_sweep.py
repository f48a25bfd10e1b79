"""Gamma-gap sweep on a cylinder: scaled 3D energy of the reconstructed field vs J0.

Usage: python scripts/gamma_sweep.py [--n 65] [--radius 1.5] [--amplitude 0.05]
"""

import argparse
import time

from cosshell import surface
from cosshell.assemble import limit_energy
from cosshell.cli import gap_slope
from cosshell.grid import ShellGrid, grid_geometry
from cosshell.presets import smooth_state
from cosshell.reconstruct import gamma_gap
from cosshell.verification import DEFAULT_MATERIAL


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=65)
    ap.add_argument("--n3", type=int, default=9)
    ap.add_argument("--radius", type=float, default=1.5)
    ap.add_argument("--amplitude", type=float, default=0.05)
    ap.add_argument("--h", type=float, nargs="+", default=[0.2, 0.1, 0.05, 0.025])
    a = ap.parse_args()
    t0 = time.perf_counter()
    patch = surface.cylinder(a.radius)
    grid = ShellGrid(a.n, a.n, patch.bounds)
    geom = grid_geometry(patch, grid)
    state = smooth_state(grid, patch, a.amplitude)
    j0 = limit_energy(state, grid, geom, DEFAULT_MATERIAL)
    gaps = []
    print(f"J0 = {j0:.10e}")
    for h in a.h:
        gap = gamma_gap(h, state, grid, geom, DEFAULT_MATERIAL, n3=a.n3, j0=j0)
        gaps.append(gap)
        print(f"h = {h:<8g} gap = {gap:.6e}")
    slope, lo, hi = gap_slope(a.h, gaps)
    print(f"slope {slope:.4f}, 95% CI [{lo:.4f}, {hi:.4f}], {time.perf_counter() - t0:.2f}s")


if __name__ == "__main__":
    main()
