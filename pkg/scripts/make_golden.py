"""Write the golden files in testdata/ from hand-derived closed forms.

Nothing here calls the package's recursions or evaluators, so the files are an
independent reference for the tests.
"""
import cmath
import json
import math
from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "testdata"

# parameter sets used throughout the tests
CASES = {
    "PIII_i": {"alpha": 0.5, "beta": 0.5, "A": 1.0},
    "PIII_ii": {"alpha": 0.0, "beta": 0.7, "A": 1.0},
    "PIV_1": {"alpha": 0.3, "beta": 0.2, "A": None},
    "PIV_2": {"alpha": -0.75, "beta": 0.5, "A": None},
    "PIV_3": {"alpha": 0.4, "beta": 0.6, "A": cmath.sqrt(-0.3)},
}


def pair(z):
    z = complex(z)
    return [z.real, z.imag]


def h02(case, a, b, A):
    """Dominant balance at order w^-2 with h = 0: h_{0,2} = -lim w^2 g(w, 0, 0)."""
    if case == "PIII_i":
        q = A * (a + A * A * b) / 2
        return a * q - q * q / (2 * A)
    if case == "PIII_ii":
        return 0.0
    if case == "PIV_1":
        return a * a / 4 + 1 / 12 + 3 * b / 8
    if case == "PIV_2":
        return 0.75 * a * a + 0.25 + b / 8
    d = (a * A + b) / 2
    return d * d / (2 * A) - (2 * A - a / 2) * d - 3 / 8 * (A ** 3 - A)


def main():
    OUT.mkdir(exist_ok=True)
    h0 = {}
    for case, p in CASES.items():
        A = p["A"]
        h0[case] = {"alpha": p["alpha"], "beta": p["beta"], "A": None if A is None else pair(A),
                    "h02": pair(h02(case, p["alpha"], p["beta"], 1.0 if A is None else A))}
    (OUT / "h0_leading.json").write_text(json.dumps(h0, indent=1, sort_keys=True) + "\n")

    # PIV_2, alpha = 0, y = -2x: y'' = 0 and the cubic terms cancel, leaving 1/x + beta/(2x)
    rows = []
    for beta in (0.0, 0.5):
        for x in (2.0, complex(3, 1), complex(-1, 4)):
            rows.append({"beta": beta, "x": pair(x), "residual": pair(1 / x + beta / (2 * x))})
    (OUT / "piv2_linear_residual.json").write_text(json.dumps(rows, indent=1, sort_keys=True) + "\n")

    # F0 closed forms at a few points and Taylor coefficients k = 1..6
    taylor = {
        "PIII_i": [1 / 2 ** (k - 1) for k in range(1, 7)],
        "PIII_ii": [k / 6 ** (k - 1) for k in range(1, 7)],      # xi (1 - xi/6)^-2
        "PIV_1": [1, -0.5, 0, 0.125, -0.0625, 0],                  # 4 xi / (xi^2 + 2 xi + 4)
        "PIV_2": [(-0.5) ** (k - 1) for k in range(1, 7)],
        "PIV_3": [1, 0, 0, 0, 0, 0],
    }
    values = {"PIII_i": {"xi": 1.0, "F0": 2.0}, "PIV_2": {"xi": 2.0, "F0": 1.0},
              "PIII_ii": {"xi": 3.0, "F0": 36 * 3 / 9}, "PIV_1": {"xi": 2.0, "F0": 8 / 12}}
    (OUT / "f0.json").write_text(json.dumps({"taylor_A1": taylor, "values_A1": values}, indent=1,
                                            sort_keys=True) + "\n")

    # leading-order pole formula, PIII_ii A = 1, C = 1, upper side
    preds = []
    for n in range(1, 21):
        z = 2j * math.pi * n
        w = z - 0.5 * cmath.log(z) - math.log(6)
        preds.append({"n": n, "w_pred": pair(w)})
    (OUT / "piii_ii_predictions.json").write_text(json.dumps(preds, indent=1, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
