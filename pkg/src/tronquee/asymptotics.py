"""Leading two-scale profiles F0, their ODEs, and asymptotic pole positions.

Near the edge of the analyticity sector h ~ F0(xi) with xi = C e^{-w} w^{-beta1},
so every singularity xi_s of F0 seeds an array of poles at the solutions of
xi(w) = xi_s, to leading order

    w_n = s 2 n pi i - beta ln(s 2 n pi i) + ln C - ln xi_s,   s = +1 (upper), -1 (lower).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .equations import Case, EquationSpec, map_w_to_x, normalize
from .errors import DomainError

TWO_PI = 2 * math.pi
SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class F0Form:
    """A rational F0 stored in partial fractions: F = const + sum_j sum_q c_jq / (xi - xi_j)^q.

    ``num`` and ``den`` are the ascending polynomial coefficients of the same
    function, kept for exact checks and Taylor coefficients.
    """

    case: Case
    A: complex
    num: Tuple[complex, ...]
    den: Tuple[complex, ...]
    singular_set: Tuple[Tuple[complex, int], ...]
    const: complex = 0.0
    parts: Tuple[Tuple[complex, int, complex], ...] = field(default=(), repr=False)

    def _terms(self, xi, d):
        xi = np.asarray(xi, dtype=complex)
        if d == 0:
            out = np.full(xi.shape, self.const, dtype=complex)
        else:
            out = np.zeros(xi.shape, dtype=complex)
        for (pole, q, c) in self.parts:
            # d-th derivative of c (xi - pole)^-q
            fac = 1.0
            for i in range(d):
                fac *= -(q + i)
            out = out + c * fac * (xi - pole) ** (-(q + d))
        if not self.parts and d == 1:
            out = out + 1.0
        if not self.parts and d == 0:
            out = out + xi
        return out

    def _check(self, xi):
        for pole, _ in self.singular_set:
            if np.any(np.abs(np.asarray(xi) - pole) < 1e-14 * max(1.0, abs(pole))):
                raise DomainError(f"xi = {pole} is a pole of F0")

    def eval(self, xi):
        self._check(xi)
        P = np.polynomial.polynomial
        xi = np.asarray(xi, dtype=complex)
        return P.polyval(xi, self.num) / P.polyval(xi, self.den)

    def __call__(self, xi):
        return self.eval(xi)

    def d1(self, xi):
        self._check(xi)
        return self._terms(xi, 1)

    def d2(self, xi):
        self._check(xi)
        return self._terms(xi, 2)

    def taylor(self, K: int) -> np.ndarray:
        """Coefficients of xi^1..xi^K at 0 (series division of num by den)."""
        num = np.zeros(K + 1, dtype=complex)
        num[:len(self.num)] = np.array(self.num[:K + 1])
        den = np.array(self.den, dtype=complex)
        out = np.zeros(K + 1, dtype=complex)
        for n in range(K + 1):
            acc = num[n] - sum(den[j] * out[n - j] for j in range(1, min(n, len(den) - 1) + 1))
            out[n] = acc / den[0]
        return out[1:]


def f0_closed_form(case, A: Optional[complex] = None) -> F0Form:
    """F0 for the case; A is the branch constant (ignored for PIV_1, PIV_2, PIV_3)."""
    case = Case(case)
    if case == Case.PIII_i:
        A = complex(A)
        # 2 A xi / (2A - xi) = -2A - 4A^2 / (xi - 2A)
        return F0Form(case, A, (0, 2 * A), (2 * A, -1), ((2 * A, 1),), -2 * A, ((2 * A, 1, -4 * A * A),))
    if case == Case.PIII_ii:
        A = complex(A)
        p = 6 * A
        # 36 A^2 xi / (xi - p)^2 = 36 A^2 / (xi - p) + 36 A^2 p / (xi - p)^2
        return F0Form(case, A, (0, 36 * A * A), (p * p, -2 * p, 1), ((p, 2),), 0.0,
                      ((p, 1, 36 * A * A), (p, 2, 36 * A * A * p)))
    if case == Case.PIV_1:
        rp, rm = complex(-1, SQRT3), complex(-1, -SQRT3)
        cp = 4 * rp / (rp - rm)
        cm = 4 * rm / (rm - rp)
        return F0Form(case, 1.0, (0, 4), (4, 2, 1), ((rp, 1), (rm, 1)), 0.0, ((rp, 1, cp), (rm, 1, cm)))
    if case == Case.PIV_2:
        # 2 xi / (xi + 2) = 2 - 4 / (xi + 2)
        return F0Form(case, 1.0, (0, 2), (2, 1), ((-2.0, 1),), 2.0, ((-2.0, 1, -4.0),))
    return F0Form(case, 1.0, (0, 1), (1,), (), 0.0, ())


def f0_ode_residual(case, A, xi) -> complex:
    """Residual of the second-order ODE that F0 satisfies, evaluated on the closed form."""
    case = Case(case)
    F = f0_closed_form(case, A)
    xi = complex(xi)
    f, f1, f2 = complex(F.eval(xi)), complex(F.d1(xi)), complex(F.d2(xi))
    lin = xi * xi * f2 + xi * f1
    if case in (Case.PIII_i, Case.PIII_ii):
        A = complex(A)
        Y = A + f
        if abs(Y) < 1e-12:
            raise DomainError("A + F0 = 0: the ODE is singular here")
        if case == Case.PIII_i:
            return lin - xi * xi * f1 * f1 / Y - Y ** 3 / (4 * A * A) + 1 / (4 * A * A * Y)
        return lin - xi * xi * f1 * f1 / Y - Y * Y / (3 * A) + 1 / (3 * A * Y)
    if case == Case.PIV_1:
        Q = 3 * f - 2
        if abs(Q) < 1e-12:
            raise DomainError("3 F0 - 2 = 0: the ODE is singular here")
        return lin - 3 * xi * xi * f1 * f1 / (2 * Q) + Q ** 3 / 24 + Q * Q / 3 + Q / 2
    if case == Case.PIV_2:
        Q = f - 2
        if abs(Q) < 1e-12:
            raise DomainError("F0 - 2 = 0: the ODE is singular here")
        return lin - xi * xi * f1 * f1 / (2 * Q) - 3 * Q ** 3 / 8 - Q * Q - Q / 2
    raise DomainError("no F0 equation is available for PIV_3 (F0(xi) = xi)")


# ---------------------------------------------------------------------------
# pole predictions


@dataclass(frozen=True)
class PolePrediction:
    n: int
    w_pred: complex
    side: str
    refined: bool = False
    xi_s: complex = 0j
    flag: str = ""

    def to_json(self):
        return {"n": self.n, "w_pred": [self.w_pred.real, self.w_pred.imag], "side": self.side,
                "refined": self.refined, "xi_s": [self.xi_s.real, self.xi_s.imag]}


def _side_sign(side: str) -> int:
    if side == "upper":
        return 1
    if side == "lower":
        return -1
    raise DomainError(f"side must be 'upper' or 'lower', got {side!r}")


def log_ratio(C: complex, xi_s: complex) -> complex:
    """ln C - ln xi_s (principal logs), computed from C / xi_s so positive rescalings cancel."""
    C, xi_s = complex(C), complex(xi_s)
    q = C / xi_s
    k = round((cmath.phase(C) - cmath.phase(xi_s) - cmath.phase(q)) / TWO_PI)
    return cmath.log(q) + 2j * math.pi * k


def predict_poles(beta: complex, C: complex, xi_s: complex, side: str, n_range) -> List[PolePrediction]:
    """Leading-order pole positions; empty when C = 0 (no poles on that side)."""
    s = _side_sign(side)
    ns = list(n_range)
    if not ns:
        raise DomainError("empty n range")
    if xi_s == 0:
        raise DomainError("xi_s must be nonzero")
    if C == 0:
        return []
    lr = log_ratio(C, xi_s)
    out = []
    for n in ns:
        if n < 1:
            raise DomainError("n must be >= 1")
        z = s * TWO_PI * n * 1j
        out.append(PolePrediction(int(n), complex(z - beta * cmath.log(z) + lr), side, False, complex(xi_s)))
    return out


def refine_prediction(beta: complex, C: complex, xi_s: complex, w_guess: complex, tol: float = 1e-14,
                      max_iter: int = 50) -> Tuple[complex, bool]:
    """Newton solve of C w^{-beta} e^{-w} = xi_s near w_guess, in logarithmic form.

    The 2 pi i k branch of the logarithm is fixed from the guess.  Returns
    (w, converged); on divergence the guess is returned with converged=False.
    """
    w_guess = complex(w_guess)
    lr = log_ratio(C, xi_s)

    def G(w):
        return lr - beta * cmath.log(w) - w

    k = round(G(w_guess).imag / TWO_PI)
    target = 2j * math.pi * k
    w = w_guess
    for _ in range(max_iter):
        g = G(w) - target
        dw = g / (1 + beta / w)
        w = w + dw
        if abs(dw) < tol * max(1.0, abs(w)):
            return w, True
        if not np.isfinite(abs(w)) or abs(w) < 1e-8:
            break
    return w_guess, False


def case_singularities(spec: EquationSpec):
    return [xs for xs, _ in f0_closed_form(spec.case, spec.A if spec.case in (Case.PIII_i, Case.PIII_ii) else None)
            .singular_set]


def predict_poles_case(spec: EquationSpec, C: complex, side: str, n_range) -> List[PolePrediction]:
    """w-plane predictions for every singular point of the case's F0 (joint list)."""
    if spec.case == Case.PIV_3:
        raise DomainError("not applicable: F0(xi) = xi has no singularities for PIV_3")
    nf = normalize(spec)
    out = []
    for xs in case_singularities(spec):
        out.extend(predict_poles(nf.beta1, C, xs, side, n_range))
    return out


def predict_poles_x(spec: EquationSpec, C: complex, side: str, n_range, sheet: int = 0):
    """Predictions mapped to the x-plane: list of (PolePrediction, x_n)."""
    return [(p, map_w_to_x(spec, p.w_pred, sheet)) for p in predict_poles_case(spec, C, side, n_range)]


# ---------------------------------------------------------------------------
# comparison


@dataclass
class CompareReport:
    rows: List[dict]
    decreasing: bool
    fraction_decreasing: float
    unmatched: int

    @property
    def final_gap(self):
        return self.rows[-1]["gap"] if self.rows else float("nan")

    def to_json(self):
        rows = [{"n": r["n"], "w_pred": [r["w_pred"].real, r["w_pred"].imag],
                 "w_obs": [r["w_obs"].real, r["w_obs"].imag], "gap": r["gap"],
                 "xi_s": [r["xi_s"].real, r["xi_s"].imag]} for r in self.rows]
        return {"rows": rows, "trend": {"decreasing": self.decreasing, "fraction": self.fraction_decreasing},
                "unmatched": self.unmatched}


def compare_predictions(observed: Sequence, predicted: Sequence[PolePrediction],
                        window: float = math.pi / 2) -> CompareReport:
    """Nearest-neighbour matching within ``window`` (a quarter of the 2 pi spacing)."""
    obs = [complex(getattr(o, "location", o)) for o in observed]
    rows = []
    unmatched = 0
    for p in predicted:
        if not obs:
            unmatched += 1
            continue
        d = [abs(o - p.w_pred) for o in obs]
        i = int(np.argmin(d))
        if d[i] <= window:
            rows.append({"n": p.n, "w_pred": p.w_pred, "w_obs": obs[i], "gap": float(d[i]), "xi_s": p.xi_s})
        else:
            unmatched += 1
    trends = []
    for xs in dict.fromkeys(r["xi_s"] for r in rows):
        g = [r["gap"] for r in sorted((r for r in rows if r["xi_s"] == xs), key=lambda r: r["n"])]
        trends.extend(b < a for a, b in zip(g, g[1:]))
    decreasing = bool(rows) and all(trends)
    frac = float(np.mean(trends)) if trends else float("nan")
    return CompareReport(rows, decreasing, frac, unmatched)


def xi_level_path(beta: complex, C: complex, level: float, im_range: Tuple[float, float], n: int = 60):
    """Waypoints on the curve |C e^{-w} w^{-beta}| = level, one per Im w in a uniform grid.

    Used as a sweep path running parallel to a pole array (which sits on
    |xi| = |xi_s|) on its analytic side when level < |xi_s|.
    """
    if C == 0 or level <= 0:
        raise DomainError("need C != 0 and level > 0")
    target = math.log(abs(C)) - math.log(level)
    pts = []
    x = target
    for y in np.linspace(im_range[0], im_range[1], n):
        if y == 0:
            raise DomainError("im_range must not contain 0")
        for _ in range(50):
            w = complex(x, y)
            f = x + (beta * cmath.log(w)).real - target
            df = 1 + (beta / w).real
            dx = f / df
            x -= dx
            if abs(dx) < 1e-13:
                break
        pts.append(complex(x, y))
    return pts
