"""Sweep the coupling of a one-pole model and watch the defect switch on.

Run: python3 demos/defect_regimes.py
"""

from __future__ import annotations

import math

import numpy as np

from friedrichs.core import FriedrichsModel
from friedrichs.detect import defect_Hplus, sperp_basis
from friedrichs.errors import NearEssentialRange
from friedrichs.oracle import build_system
from friedrichs.rational import RationalFn


def model(alpha: complex) -> FriedrichsModel:
    # phi = psi = 1/(x + i): the continued determinant has one zero
    return FriedrichsModel(phi=RationalFn.simple(-1j), psi=RationalFn.simple(-1j), alpha=alpha)


def main() -> None:
    print(f"{'alpha':>22}  {'zero of D+':>22}  defect   oracle")
    for t in np.linspace(0.1, 1.0, 10):
        alpha = 1j * t * 2 / math.pi
        m = model(alpha)
        rep = defect_Hplus(m)
        zero = -1j + 2j * math.pi * alpha / 2j
        try:
            oracle = str(build_system(m).nullity)
        except NearEssentialRange:
            # a real zero puts the coupling on the essential spectrum of the reduced problem
            oracle = "refused"
        print(f"{alpha!s:>22}  {zero!s:>22}  {rep.defect:6d}  {oracle:>7}")
    m = model(2j / math.pi)
    (g,) = sperp_basis(m).vectors
    print("orthogonal complement of the detectable subspace at alpha = 2i/pi is spanned by")
    print(" ", g)


if __name__ == "__main__":
    main()
