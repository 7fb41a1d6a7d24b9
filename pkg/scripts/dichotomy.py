"""Count poles of the C = 1 upper tronquee solution of PIV_2 in a right half-plane window, for several alpha.

For Re beta1 < 0 (real alpha < -1/2) the pole array drifts into Re w > 0 like
-beta1 log n; for Re beta1 > 0 it stays to the left.

    python3 scripts/dichotomy.py --alpha -2 -1 -0.25 0.5
"""
import argparse

import numpy as np

from tronquee.equations import Case, EquationSpec, normalize
from tronquee.ode import PathSpec, detect_poles, seed_from_borel
from tronquee.series import compute_levels


def window_poles(alpha, beta=0.5, re=(0.5, 12.0), im=(10.0, 60.0), columns=7):
    nf = normalize(EquationSpec(Case.PIV_2, alpha, beta))
    ts = compute_levels(nf, 6, 40)
    pts = []
    for i, x in enumerate(np.linspace(re[1], re[0], columns)):
        ends = [complex(x, im[0]), complex(x, im[1])]
        pts += ends if i % 2 == 0 else ends[::-1]
    seed = seed_from_borel(nf, ts, 1.0, "upper", pts[0])
    obs = detect_poles(nf, seed.as_initial(), PathSpec(tuple(pts), rel_tol=1e-11, abs_tol=1e-14, method="DOP853"))
    inside = [o.location for o in obs if re[0] <= o.location.real <= re[1] and im[0] <= o.location.imag <= im[1]]
    return nf.beta1, inside


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--alpha", type=float, nargs="+", default=[-2.0, 0.5])
    p.add_argument("--beta", type=float, default=0.5)
    a = p.parse_args()
    for alpha in a.alpha:
        b1, poles = window_poles(alpha, a.beta)
        locs = ", ".join(f"{w:.3f}" for w in poles[:6])
        print(f"alpha={alpha:+.3f}  beta1={b1:.3f}  poles in window: {len(poles)}  {locs}")


if __name__ == "__main__":
    main()
