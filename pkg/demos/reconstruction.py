"""Recover psi, B and M from resolvent data of a model kept behind a provider.

Run: python3 demos/reconstruction.py
"""

from __future__ import annotations

import numpy as np

from friedrichs.core import FriedrichsModel
from friedrichs.rational import RationalFn
from friedrichs.reconstruct import HiddenModelProvider, compare_with_model, reconstruct


def main() -> None:
    hidden = FriedrichsModel(
        phi=RationalFn.simple(-1j) + RationalFn.simple(1 + 2j, 0.4),
        psi=RationalFn.simple(-2j, 1.5) + RationalFn.simple(0.5 + 1j, -0.7j),
        B=2 - 1j,
        alpha=0.8 + 0.3j,
    )
    result = reconstruct(HiddenModelProvider(hidden))
    print("recovered B:", np.round(result.B_recovered, 10))
    print("recovered psi (up to scale):", result.psi_recovered)
    print(f"{'lambda':>10}  {'M recovered':>40}")
    for p in result.points:
        shown = "refused: eigenvalue of the hidden operator" if p.refused else str(p.M)
        print(f"{p.lam!s:>10}  {shown:>40}")
    print("comparison with the hidden model:", compare_with_model(hidden, result).to_dict())


if __name__ == "__main__":
    main()
