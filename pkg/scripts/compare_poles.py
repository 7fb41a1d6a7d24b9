"""Locate the first pole array of a tronquee solution and compare it with the asymptotic formula.

    python3 scripts/compare_poles.py                 # PIII_ii, A = 1, beta = 0, C = 1
    python3 scripts/compare_poles.py --case PIV_1 --alpha 0.3 --beta 0.2 --n-max 6
"""
import argparse

from tronquee.asymptotics import case_singularities, compare_predictions, predict_poles_case
from tronquee.equations import Case, EquationSpec, normalize
from tronquee.ode import sweep_pole_array
from tronquee.series import compute_levels


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--case", default="PIII_ii", choices=[c.value for c in Case if c != Case.PIV_3])
    p.add_argument("--alpha", type=complex, default=0)
    p.add_argument("--beta", type=complex, default=0)
    p.add_argument("--A", type=complex, default=None)
    p.add_argument("--C", type=complex, default=1)
    p.add_argument("--side", default="upper", choices=["upper", "lower"])
    p.add_argument("--n-max", type=int, default=12)
    p.add_argument("--im-max", type=float, default=80)
    a = p.parse_args()
    A = a.A if a.A is not None or a.case.startswith("PIV") else 1
    spec = EquationSpec(Case(a.case), a.alpha, a.beta, A)
    nf = normalize(spec)
    ts = compute_levels(nf, 3, 30)
    xi_abs = min(abs(x) for x in case_singularities(spec))
    obs = sweep_pole_array(nf, ts, a.C, a.side, xi_abs, (2, a.im_max))
    rep = compare_predictions(obs, predict_poles_case(spec, a.C, a.side, range(1, a.n_max + 1)))
    print(f"{len(obs)} poles detected, {len(rep.rows)} matched, {rep.unmatched} unmatched")
    print(f"{'n':>3} {'xi_s':>18} {'predicted':>26} {'observed':>26} {'gap':>9}")
    for r in sorted(rep.rows, key=lambda r: (r["xi_s"].imag, r["n"])):
        print(f"{r['n']:3d} {r['xi_s']:18.4f} {r['w_pred']:26.6f} {r['w_obs']:26.6f} {r['gap']:9.2e}")
    print(f"gaps decreasing in n: {rep.decreasing}")


if __name__ == "__main__":
    main()
