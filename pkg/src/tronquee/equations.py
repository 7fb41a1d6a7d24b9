"""The five normalized cases of P_III / P_IV and the maps between (x, y) and (w, h).

Every case is brought to the canonical form

    h'' - h + (1/w) [(b2 - b1) h + (b2 + b1) h'] = g(w, h, h')

with g analytic at (w, h, h') = (infinity, 0, 0) and g(w, 0, 0) = O(w^-2).

The right-hand sides are written in terms of ``iw = 1/w`` and the four
arithmetic operations only.  That way the same function evaluates on complex
scalars, on numpy arrays and on the truncated series/transseries objects of
``tronquee.series``.  The derivation for each case is in ``docs/derivations.md``.
"""
from __future__ import annotations

import cmath
import enum
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import BranchConstraintError, DomainError, NearSingularError

SQRT3I = cmath.sqrt(3) * 1j
_BRANCH_TOL = 1e-12


class Case(str, enum.Enum):
    PIII_i = "PIII_i"
    PIII_ii = "PIII_ii"
    PIV_1 = "PIV_1"
    PIV_2 = "PIV_2"
    PIV_3 = "PIV_3"


def _cpair(z):
    z = complex(z)
    return [z.real, z.imag]


def _from_pair(v):
    if v is None:
        return None
    if isinstance(v, (list, tuple)):
        return complex(v[0], v[1])
    return complex(v)


@dataclass(frozen=True)
class EquationSpec:
    """Which Painleve case and its parameters.

    ``branch_A`` is required for PIII_i (A^4 = 1), PIII_ii (A^3 = 1) and
    PIV_3 (A^2 = -beta/2); it is ignored by PIV_1 and PIV_2.
    """

    case: Case
    alpha: complex = 0.0
    beta: complex = 0.0
    branch_A: Optional[complex] = None

    def __post_init__(self):
        object.__setattr__(self, "case", Case(self.case))
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "beta", complex(self.beta))
        if self.branch_A is not None:
            object.__setattr__(self, "branch_A", complex(self.branch_A))

    @property
    def A(self) -> complex:
        return self.branch_A

    def to_json(self) -> dict:
        d = {"case": self.case.value, "alpha": _cpair(self.alpha), "beta": _cpair(self.beta)}
        if self.branch_A is not None:
            d["branch_A"] = _cpair(self.branch_A)
        return d

    @classmethod
    def from_json(cls, d: dict) -> "EquationSpec":
        return cls(Case(d["case"]), _from_pair(d.get("alpha", 0.0)), _from_pair(d.get("beta", 0.0)),
                   _from_pair(d.get("branch_A")))


def check_spec(spec: EquationSpec) -> None:
    """Raise BranchConstraintError when the branch constant violates its constraint."""
    A = spec.branch_A
    c = spec.case
    if c in (Case.PIV_1, Case.PIV_2):
        return
    if A is None:
        raise BranchConstraintError(f"{c.value} needs a branch constant A")
    if c == Case.PIII_i:
        bad = abs(A ** 4 - 1)
        msg = "A^4 = 1"
    elif c == Case.PIII_ii:
        bad = abs(A ** 3 - 1)
        msg = "A^3 = 1"
    else:
        bad = abs(A * A + spec.beta / 2) / max(1.0, abs(spec.beta))
        msg = "A^2 = -beta/2"
        if abs(A) == 0:
            raise BranchConstraintError("PIV_3 needs A != 0 (beta = 0 is degenerate)")
    if bad > _BRANCH_TOL:
        raise BranchConstraintError(f"{c.value}: branch constant violates {msg} (residual {bad:.3e})")


# ---------------------------------------------------------------------------
# second derivative h'' = H(iw, h, h') for each case

def _k3(A):
    """K = (27A/4)^(1/2), principal root."""
    return cmath.sqrt(27 * A / 4)


# Each case has a "direct" form, built by forming Y = Y0 + h, and a "split" form
# base(1/w) + delta(h, h') in which every term of delta carries an explicit factor
# h or h'.  The split form keeps full relative precision when |h| is far below
# machine epsilon (exponentially small solutions); the direct form is kept as an
# independent cross-check.

def _dq(Y, Y0, Yp, Yp0, D, Dp):
    """Yp^2/Y - Yp0^2/Y0 with explicit factors of D = Y - Y0, Dp = Yp - Yp0."""
    return (Y0 * Dp * (Yp + Yp0) - Yp0 * Yp0 * D) / (Y * Y0)


def _hpp_piii_i(spec):
    A, al, be = spec.A, spec.alpha, spec.beta
    q = A * (al + A * A * be) / 2

    def rhs(Y, Yp, iw):
        return Yp * Yp / Y - Yp * iw + (al * Y * Y + be) * iw / (2 * A) + (Y * Y * Y - 1 / Y) / (4 * A * A)

    def direct(iw, h, hp):
        return rhs(A + h - q * iw, hp + q * iw * iw, iw) + 2 * q * iw * iw * iw

    def split(iw, h, hp):
        Y0 = A - q * iw
        Yp0 = q * iw * iw
        Y, Yp = Y0 + h, Yp0 + hp
        d = (_dq(Y, Y0, Yp, Yp0, h, hp) - hp * iw + al * iw / (2 * A) * h * (Y + Y0)
             + (h * (Y * Y + Y * Y0 + Y0 * Y0) + h / (Y * Y0)) / (4 * A * A))
        return rhs(Y0, Yp0, iw) + 2 * q * iw * iw * iw + d
    return direct, split


def _hpp_piii_ii(spec):
    A, be = spec.A, spec.beta
    K = _k3(A)
    c2 = -be * K / (3 * A)

    def rhs(Y, Yp, iw):
        return Yp * Yp / Y - Yp * iw + (Y * Y - 1 / Y + be * K * iw) / (3 * A)

    def direct(iw, h, hp):
        return rhs(A + h + c2 * iw, hp - c2 * iw * iw, iw) - 2 * c2 * iw * iw * iw

    def split(iw, h, hp):
        Y0 = A + c2 * iw
        Yp0 = -c2 * iw * iw
        Y, Yp = Y0 + h, Yp0 + hp
        d = _dq(Y, Y0, Yp, Yp0, h, hp) - hp * iw + (h * (Y + Y0) + h / (Y * Y0)) / (3 * A)
        return rhs(Y0, Yp0, iw) - 2 * c2 * iw * iw * iw + d
    return direct, split


def _piv_zz(Y, Yz, iz, al, be):
    # y = x Y(z), z = x^2 turns P_IV into this equation for Y_zz
    return (Yz * Yz / (2 * Y) - Yz * iz + (Y / 2 + be / Y) * iz * iz / 4
            + 0.375 * Y * Y * Y + Y * Y + Y / 2 - (al / 2) * Y * iz)


def _piv_zz_delta(Y0, Yz0, D, Dz, iz, al, be):
    """_piv_zz(Y0 + D, Yz0 + Dz) - _piv_zz(Y0, Yz0), term by term."""
    Y, Yz = Y0 + D, Yz0 + Dz
    return (_dq(Y, Y0, Yz, Yz0, D, Dz) / 2 - Dz * iz + (D / 2 - be * D / (Y * Y0)) * iz * iz / 4
            + 0.375 * D * (Y * Y + Y * Y0 + Y0 * Y0) + D * (Y + Y0) + D / 2 - (al / 2) * D * iz)


def _hpp_piv_1(spec):
    al, be = spec.alpha, spec.beta
    mu = SQRT3I
    a = al / mu

    def direct(iw, h, hp):
        iz = iw / mu
        Y = -2 / 3 + h + a * iw
        Yw = hp - a * iw * iw
        return mu * mu * _piv_zz(Y, Yw / mu, iz, al, be) - 2 * a * iw * iw * iw

    def split(iw, h, hp):
        iz = iw / mu
        Y0 = -2 / 3 + a * iw
        Yz0 = -a * iw * iw / mu
        base = _piv_zz(Y0, Yz0, iz, al, be)
        return mu * mu * (base + _piv_zz_delta(Y0, Yz0, h, hp / mu, iz, al, be)) - 2 * a * iw * iw * iw
    return direct, split


def _hpp_piv_2(spec):
    al, be = spec.alpha, spec.beta

    def direct(iw, h, hp):
        Y = -2 + h - al * iw
        Yw = hp + al * iw * iw
        return _piv_zz(Y, Yw, iw, al, be) + 2 * al * iw * iw * iw

    def split(iw, h, hp):
        Y0 = -2 - al * iw
        Yw0 = al * iw * iw
        return (_piv_zz(Y0, Yw0, iw, al, be) + _piv_zz_delta(Y0, Yw0, h, hp, iw, al, be)
                + 2 * al * iw * iw * iw)
    return direct, split


def _hpp_piv_3(spec):
    A, al, be = spec.A, spec.alpha, spec.beta
    d = (al * A + be) / 2

    def rhs(Y, Yp, iw):
        return (Yp * Yp / (2 * Y) + Y / 2 + be / (4 * Y) + (4 * Y * Y - 2 * al * Y) * iw / 4
                + 0.375 * (Y * Y * Y - Y) * iw * iw)

    def direct(iw, h, hp):
        return rhs(A + h + d * iw, hp - d * iw * iw, iw) - 2 * d * iw * iw * iw

    def split(iw, h, hp):
        Y0 = A + d * iw
        Yp0 = -d * iw * iw
        Y, Yp = Y0 + h, Yp0 + hp
        delta = (_dq(Y, Y0, Yp, Yp0, h, hp) / 2 + h / 2 - be * h / (4 * Y * Y0)
                 + (4 * h * (Y + Y0) - 2 * al * h) * iw / 4
                 + 0.375 * (h * (Y * Y + Y * Y0 + Y0 * Y0) - h) * iw * iw)
        return rhs(Y0, Yp0, iw) - 2 * d * iw * iw * iw + delta
    return direct, split


_HPP = {Case.PIII_i: _hpp_piii_i, Case.PIII_ii: _hpp_piii_ii, Case.PIV_1: _hpp_piv_1,
        Case.PIV_2: _hpp_piv_2, Case.PIV_3: _hpp_piv_3}


def betas(spec: EquationSpec):
    """(beta1, beta2) of the canonical form for this case."""
    A, al, be = spec.A, spec.alpha, spec.beta
    c = spec.case
    if c == Case.PIII_i:
        return 0.5 + al / 4 - A * A * be / 4, 0.5 - al / 4 + A * A * be / 4
    if c in (Case.PIII_ii, Case.PIV_1):
        return 0.5 + 0j, 0.5 + 0j
    if c == Case.PIV_2:
        return al + 0.5, -al + 0.5
    return -al / 2 + 1.5 * A, al / 2 - 1.5 * A


# ---------------------------------------------------------------------------
# change of variables y = a(x) h(w(x)) + l(x)

def _cbrt(x, sheet=0):
    return cmath.exp((cmath.log(x) + 2j * cmath.pi * sheet) / 3)


def _jet(spec, x, sheet=0):
    """Return (a, a', a'', w', w'', l, l', l'') at x."""
    A, al, be = spec.A, spec.alpha, spec.beta
    c = spec.case
    if c == Case.PIII_i:
        k = (al + A * A * be) / 4
        return 1, 0, 0, 2 * A, 0, A - k / x, k / x ** 2, -2 * k / x ** 3
    if c == Case.PIII_ii:
        s = _cbrt(x, sheet)
        K = _k3(A)
        return (s, s / (3 * x), -2 * s / (9 * x * x), 2 * K * s * s / (3 * x), -2 * K * s * s / (9 * x * x),
                A * s - be / (3 * A * s), A * s / (3 * x) + be / (9 * A * s * x),
                -2 * A * s / (9 * x * x) - 4 * be / (27 * A * s * x * x))
    if c == Case.PIV_1:
        mu = SQRT3I
        return 1 * x, 1, 0, 2 * x / mu, 2 / mu, -2 * x / 3 + al / x, -2 / 3 - al / x ** 2, 2 * al / x ** 3
    if c == Case.PIV_2:
        return 1 * x, 1, 0, 2 * x, 2, -2 * x - al / x, -2 + al / x ** 2, -2 * al / x ** 3
    e = (al * A + be) / 2
    return (1 / x, -1 / x ** 2, 2 / x ** 3, 2 * x, 2, A / x + e / x ** 3, -A / x ** 2 - 3 * e / x ** 4,
            2 * A / x ** 3 + 12 * e / x ** 5)


def _nonzero(v, name):
    if v == 0:
        raise DomainError(f"{name} = 0 is outside the domain")


def map_x_to_w(spec: EquationSpec, x: complex, sheet: int = 0) -> complex:
    """w as a function of x; ``sheet`` adds 2*pi*sheet to arg x inside x^(1/3) (PIII_ii)."""
    x = complex(x)
    _nonzero(x, "x")
    c = spec.case
    if c == Case.PIII_i:
        return 2 * spec.A * x
    if c == Case.PIII_ii:
        return _k3(spec.A) * _cbrt(x, sheet) ** 2
    if c == Case.PIV_1:
        return x * x / SQRT3I
    return x * x


def map_w_to_x(spec: EquationSpec, w: complex, sheet: int = 0) -> complex:
    """Inverse of map_x_to_w; sheet 0 is the principal branch of the inverse power."""
    w = complex(w)
    _nonzero(w, "w")
    c = spec.case
    if c == Case.PIII_i:
        return w / (2 * spec.A)
    if c == Case.PIII_ii:
        return cmath.exp(1.5 * (cmath.log(w / _k3(spec.A)) + 2j * cmath.pi * sheet))
    sign = -1 if sheet % 2 else 1
    if c == Case.PIV_1:
        return sign * cmath.sqrt(SQRT3I * w)
    return sign * cmath.sqrt(w)


def l_of_x(spec: EquationSpec, x: complex, sheet: int = 0) -> complex:
    """The subtracted leading behaviour l(x)."""
    _nonzero(x, "x")
    return _jet(spec, complex(x), sheet)[5]


def assemble_y(spec: EquationSpec, x, h, hp, hpp=None, sheet: int = 0):
    """(y, y') from (h, h') at the point w(x); also y'' when h'' is given."""
    x = complex(x)
    _nonzero(x, "x")
    a, da, dda, dw, ddw, l, dl, ddl = _jet(spec, x, sheet)
    y = a * h + l
    yp = da * h + a * dw * hp + dl
    if hpp is None:
        return y, yp
    ypp = dda * h + 2 * da * dw * hp + a * (dw * dw * hpp + ddw * hp) + ddl
    return y, yp, ypp


def extract_h(spec: EquationSpec, x, y, yp, sheet: int = 0):
    """(h, h') from (y, y'), inverse of assemble_y."""
    x = complex(x)
    _nonzero(x, "x")
    a, da, _, dw, _, l, dl, _ = _jet(spec, x, sheet)
    h = (y - l) / a
    hp = (yp - dl - da * h) / (a * dw)
    return h, hp


def painleve_residual(spec: EquationSpec, x, y, yp, ypp) -> complex:
    """y'' minus the right-hand side of the original equation (P3(i), P3(ii) or P4)."""
    _nonzero(x, "x")
    if y == 0:
        raise DomainError("y = 0 is a pole of the equation")
    al, be = spec.alpha, spec.beta
    c = spec.case
    if c == Case.PIII_i:
        rhs = yp * yp / y - yp / x + (al * y * y + be) / x + y ** 3 - 1 / y
    elif c == Case.PIII_ii:
        rhs = yp * yp / y - yp / x + (y * y + be) / x - 1 / y
    else:
        rhs = yp * yp / (2 * y) + 1.5 * y ** 3 + 4 * x * y * y + 2 * (x * x - al) * y + be / y
    return ypp - rhs


# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NormalizedForm:
    """beta1, beta2, M1, M2 and evaluators of the canonical equation for one case.

    ``hpp(iw, h, hp)`` returns h'' with iw = 1/w and accepts scalars, arrays or
    series objects.  ``g_eval(w, h, hp)`` is the nonlinearity g on the right of the
    canonical equation and ``l_eval(x)`` the subtracted leading behaviour.
    """

    spec: EquationSpec
    beta1: complex
    beta2: complex
    M1: int
    M2: int
    hpp: Callable = field(repr=False, compare=False)
    hpp_direct: Optional[Callable] = field(default=None, repr=False, compare=False)

    def g_eval(self, w, h, hp):
        iw = 1 / w
        return self.g_formal(iw, h, hp)

    def g_formal(self, iw, h, hp):
        return self.hpp(iw, h, hp) - h + iw * ((self.beta2 - self.beta1) * h + (self.beta2 + self.beta1) * hp)

    def l_eval(self, x, sheet=0):
        return l_of_x(self.spec, x, sheet)

    def hpp_w(self, w, h, hp):
        return self.hpp(1 / w, h, hp)


def normalize(spec: EquationSpec) -> NormalizedForm:
    """Canonical form of ``spec``."""
    check_spec(spec)
    b1, b2 = betas(spec)
    M1 = int(np.floor((-b1).real)) + 1
    M2 = int(np.floor((-b2).real)) + 1
    direct, split = _HPP[spec.case](spec)
    return NormalizedForm(spec, complex(b1), complex(b2), M1, M2, split, direct)


def reflect(nf: NormalizedForm) -> NormalizedForm:
    """Canonical form of hhat(wt) = h(-wt): beta1 and beta2 swap, g(w,h,h') -> g(-wt, h, -h')."""
    hpp, direct = nf.hpp, nf.hpp_direct

    def hpp_hat(iw, h, hp):
        return hpp(-iw, h, -hp)

    def direct_hat(iw, h, hp):
        return direct(-iw, h, -hp)
    return NormalizedForm(nf.spec, nf.beta2, nf.beta1, nf.M2, nf.M1, hpp_hat, direct_hat)


def eqh_residual(nf: NormalizedForm, w, h, hp, hpp) -> complex:
    """h'' - h + (1/w)[(b2-b1)h + (b2+b1)h'] - g(w, h, h')."""
    if np.any(np.asarray(w) == 0):
        raise DomainError("w = 0")
    iw = 1 / w
    return hpp - nf.hpp(iw, h, hp)


# ---------------------------------------------------------------------------
# h <-> u matrix substitution

def _htou_matrix(w, b1, b2):
    iw2 = 1 / (2 * w)
    return np.array([[1 - b1 * iw2, 1 + b2 * iw2], [-1 - b1 * iw2, 1 - b2 * iw2]], dtype=complex)


def htou_det(w, b1, b2):
    return 2 + b1 * b2 / (2 * w * w)


def u_to_h(w, b1, b2, u):
    """(h, h') = M(w) u."""
    if w == 0:
        raise DomainError("w = 0")
    M = _htou_matrix(w, b1, b2)
    hv = M @ np.asarray(u, dtype=complex)
    return complex(hv[0]), complex(hv[1])


def h_to_u(w, b1, b2, h, hp):
    """u = M(w)^-1 (h, h')."""
    if w == 0:
        raise DomainError("w = 0")
    det = htou_det(w, b1, b2)
    if abs(det) < 1e-12:
        raise NearSingularError(f"substitution matrix singular at w={w} (det={det})")
    M = _htou_matrix(w, b1, b2)
    u = np.array([M[1, 1] * h - M[0, 1] * hp, -M[1, 0] * h + M[0, 0] * hp]) / det
    return u
