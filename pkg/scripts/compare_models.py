"""Print the six-parameter coefficients and the shear-weight comparison for a material.

Usage: python scripts/compare_models.py [--h 0.1] [--mu 1.3 --lam 0.7 --mu-c 0.4 ...]
"""

import argparse

from cosshell.cosserat3d import MaterialParams
from cosshell.linshell import identify_6param, reissner_mindlin_check
from cosshell.verification import DEFAULT_MATERIAL as D


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--h", type=float, default=0.1)
    for name in ("mu", "lam", "mu_c", "L_c", "a1", "a2", "a3"):
        ap.add_argument("--" + name.replace("_", "-"), type=float, default=getattr(D, name))
    a = ap.parse_args()
    mat = MaterialParams(a.mu, a.lam, a.mu_c, a.L_c, a.a1, a.a2, a.a3)
    co = identify_6param(mat, a.h)
    for k, v in vars(co).items():
        print(f"{k:8s} {v:.12g}")
    for row in reissner_mindlin_check(mat, a.h):
        print(row)


if __name__ == "__main__":
    main()
