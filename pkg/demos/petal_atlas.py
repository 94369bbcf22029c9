"""Draw the four-petal atlas and a double-cover atlas as SVG files in demos/out/.

Run: python3 demos/petal_atlas.py
"""

from __future__ import annotations

from pathlib import Path

from friedrichs.atlas import Plane, export, figure2_harness, real_root_locus, region_defects
from friedrichs.core import FriedrichsModel
from friedrichs.rational import RationalFn

OUT = Path(__file__).parent / "out"


def main() -> None:
    OUT.mkdir(exist_ok=True)
    petals = figure2_harness(resolution=500)
    export(petals, "svg", OUT / "four_petals.svg")
    print("four petals, 1/alpha plane")
    for r in petals.regions:
        print(f"  region at {r.point:.3f}: defect {r.defect}, zeros of D+ below the axis {r.nu_minus}")

    double = FriedrichsModel(phi=RationalFn.simple(-1j),
                             psi=RationalFn.simple(-1j, -1.0) + RationalFn.simple(-2j, 3.0))
    atlas = region_defects(double, real_root_locus(double, Plane.MU), resolution=300)
    export(atlas, "svg", OUT / "double_cover.svg")
    print("doubly covered curve, mu plane")
    for r in atlas.regions:
        print(f"  region at {r.point:.3f}: defect {r.defect}")
    print(f"wrote {OUT / 'four_petals.svg'} and {OUT / 'double_cover.svg'}")


if __name__ == "__main__":
    main()
