"""Check that the PIII_ii tritronquee solution h+ is pole-free on an annular sector.

Two independent checks: short ODE arcs seeded from the Borel sum, and the
Cauchy mean-value defect of the Borel sum on discs covering the sector.

    python3 scripts/sector_scan.py --r 20 35 --arg -0.785 3.927
"""
import argparse
import cmath

import numpy as np

from tronquee.borel import tritronquee_eval
from tronquee.equations import Case, EquationSpec, normalize
from tronquee.ode import PathSpec, detect_poles, scan_analyticity
from tronquee.series import compute_levels


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--beta", type=float, default=0.7)
    p.add_argument("--r", type=float, nargs=2, default=[20.0, 35.0])
    p.add_argument("--arg", type=float, nargs=2, default=[-np.pi / 4, 5 * np.pi / 4])
    p.add_argument("--side", default="plus", choices=["plus", "minus"])
    a = p.parse_args()
    nf = normalize(EquationSpec(Case.PIII_ii, 0, a.beta, 1))
    ts = compute_levels(nf, 3, 30)
    found = []
    for R in np.linspace(a.r[0], a.r[1], 3):
        angs = np.linspace(a.arg[0], a.arg[1], int((a.arg[1] - a.arg[0]) * R / 4) + 2)
        for lo, hi in zip(angs, angs[1:]):
            arc = tuple(R * cmath.exp(1j * x) for x in np.linspace(lo, hi, 4))
            sv = tritronquee_eval(nf, ts, a.side, arc[0], n_derivs=1, full=True)
            found += detect_poles(nf, (arc[0], sv.value, sv.derivative),
                                  PathSpec(arc, rel_tol=1e-12, abs_tol=1e-20, method="DOP853"))
    print(f"ODE arcs: {len(found)} poles")
    for o in found:
        print(f"  {o.location:.4f} order {o.order_estimate}")
    centers = [R * np.exp(1j * t) for R in np.linspace(a.r[0], a.r[1], 5)
               for t in np.arange(a.arg[0], a.arg[1] + 1e-9, 2.0 / R)]
    cells = scan_analyticity(lambda z: np.array([tritronquee_eval(nf, ts, a.side, w) for w in np.ravel(z)]),
                             centers, 2.0, 32)
    worst = max(cells, key=lambda c: c.relative_defect)
    print(f"Cauchy scan: {len(cells)} discs, max relative defect {worst.relative_defect:.2e} at {worst.center:.3f}")


if __name__ == "__main__":
    main()
