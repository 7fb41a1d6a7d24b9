"""Borel transform, Pade continuation and Laplace quadrature along rays.

A formal series sum a_n w^-(n+r) is mapped to B(p) = sum a_n p^(n+r-1) / Gamma(n+r).
The series part sum c_n p^n is continued by a robust (SVD-based) Pade approximant
and the Laplace integral int_0^{inf e^{i phi}} B(p) e^{-wp} dp is computed by adaptive
Gauss-Kronrod quadrature on a truncated ray.

Level series s_k (offset 0) are summed as w * L[B(s_k / w)], which is the same
function as s_k's Borel sum; the exponential prefactor C^k e^{-kw} w^{-k beta1}
is multiplied in afterwards.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy import special
from scipy.integrate import quad_vec
from scipy.linalg import toeplitz

from .equations import NormalizedForm
from .errors import DomainError, RayError, SectorError
from .series import FormalSeries, Transseries, level_prefactor

DELTA_RAY = 0.1
DOUBLET_TOL = 1e-8


# ---------------------------------------------------------------------------
# Gamma


def gamma(z):
    """Complex Gamma function; raises DomainError at the poles 0, -1, -2, ..."""
    z = complex(z)
    if z.imag == 0 and z.real <= 0 and z.real == math.floor(z.real):
        raise DomainError(f"Gamma has a pole at {z.real:g}")
    if z.imag == 0:
        return complex(special.gamma(z.real))
    return complex(special.gamma(z))


# ---------------------------------------------------------------------------
# Borel series


@dataclass(frozen=True)
class BorelSeries:
    """sum_n coeffs[n] p^(n + r - 1)."""

    r: complex
    coeffs: np.ndarray = field(repr=False)

    @property
    def N(self) -> int:
        return len(self.coeffs) - 1

    def source_coeffs(self) -> np.ndarray:
        """The coefficients a_n of the formal series this came from."""
        return np.array([c * gamma(n + self.r) for n, c in enumerate(self.coeffs)])

    def __call__(self, p):
        """Partial-sum evaluation (inside the disc of convergence)."""
        p = np.asarray(p, dtype=complex)
        return p ** (self.r - 1) * np.polynomial.polynomial.polyval(p, self.coeffs)


def borel_transform(f: FormalSeries) -> BorelSeries:
    """B(sum a_n w^-(n+r)) = sum a_n p^(n+r-1) / Gamma(n+r), r = offset."""
    if f.offset <= 0:
        raise DomainError("Borel transform needs offset >= 1 (shift by a power of w first)")
    r = f.offset
    c = np.array([a / gamma(n + r) for n, a in enumerate(f.coeffs)], dtype=complex)
    return BorelSeries(complex(r), c)


def convolve(a: BorelSeries, b: BorelSeries) -> BorelSeries:
    """Borel-plane convolution, which is the Borel transform of the product."""
    if a.r.real <= 0 or b.r.real <= 0:
        raise DomainError("convolution needs Re r > 0")
    sa, sb = a.source_coeffs(), b.source_coeffs()
    n = min(len(sa), len(sb))
    prod = np.convolve(sa[:n], sb[:n])[:n]
    r = a.r + b.r
    return BorelSeries(r, np.array([c / gamma(k + r) for k, c in enumerate(prod)], dtype=complex))


# ---------------------------------------------------------------------------
# Pade


def pade(c, m: int, n: int, tol: float = 1e-14):
    """Robust Pade approximant of type (m, n) to the Taylor coefficients c.

    SVD-based with diagonal hopping on rank deficiency (Gonnet, Guettel and
    Trefethen, SIAM Rev. 2013).  Returns (num, den, reduced) with ascending
    coefficients and den[0] = 1; ``reduced`` is True when the degrees dropped.
    """
    c = np.asarray(c, dtype=complex)[:m + n + 1]
    if len(c) < m + n + 1:
        c = np.concatenate([c, np.zeros(m + n + 1 - len(c), dtype=complex)])
    m0, n0 = m, n
    nrm = np.linalg.norm(c)
    ts = tol * nrm
    if np.linalg.norm(c[:m + 1], np.inf) <= tol * np.linalg.norm(c, np.inf):
        return np.zeros(1, dtype=complex), np.ones(1, dtype=complex), True
    row = np.zeros(n + 1, dtype=complex)
    row[0] = c[0]
    while True:
        if n == 0:
            a = c[:m + 1].copy()
            b = np.ones(1, dtype=complex)
            break
        Z = toeplitz(c[:m + n + 1], row[:n + 1])
        Cm = Z[m + 1:m + n + 1, :]
        rho = int(np.sum(np.linalg.svd(Cm, compute_uv=False) > ts))
        if rho == n:
            _, _, Vh = np.linalg.svd(Cm)
            b = Vh.conj().T[:, n]
            D = np.diag(np.abs(b) + np.sqrt(np.finfo(float).eps))
            Q, _ = np.linalg.qr((Cm @ D).conj().T, mode="complete")
            b = (D @ Q)[:, n]
            b = b / np.linalg.norm(b)
            a = Z[:m + 1, :n + 1] @ b
            lam = int(np.argmax(np.abs(b) > tol))
            b = b[lam:]
            a = a[lam:]
            break
        m -= n - rho
        n = rho
    b = _trim(b, tol)
    a = _trim(a, tol * max(1.0, np.abs(a).max()))
    a = a / b[0]
    b = b / b[0]
    return a, b, (len(a) - 1, len(b) - 1) != (m0, n0)


def _trim(v, tol):
    nz = np.nonzero(np.abs(v) > tol)[0]
    if len(nz) == 0:
        return v[:1]
    return v[:nz[-1] + 1]


def prune_doublets(num, den, tol: float = DOUBLET_TOL):
    """Remove pole/zero pairs closer than ``tol``; returns (num, den, n_pruned)."""
    if len(den) <= 1 or len(num) <= 1:
        return num, den, 0
    zeros = list(np.roots(num[::-1]))
    poles = list(np.roots(den[::-1]))
    pruned = 0
    for p in list(poles):
        if not zeros:
            break
        d = np.abs(np.array(zeros) - p)
        j = int(np.argmin(d))
        if d[j] < tol * max(1.0, abs(p)):
            zeros.pop(j)
            poles.remove(p)
            pruned += 1
    if not pruned:
        return num, den, 0
    lead_a, lead_b = num[-1], den[-1]
    a = lead_a * np.poly(zeros)[::-1] if zeros else np.array([lead_a])
    b = lead_b * np.poly(poles)[::-1] if poles else np.array([lead_b])
    s = b[0]
    return a / s, b / s, pruned


# ---------------------------------------------------------------------------
# BorelSum


@dataclass(frozen=True)
class BorelSum:
    """p^(r-1) num(p)/den(p) approximating a Borel transform, plus a Laplace ray."""

    borel: BorelSeries
    num: np.ndarray = field(repr=False)
    den: np.ndarray = field(repr=False)
    pade_num_degree: int
    pade_den_degree: int
    pole_locations: tuple
    ray_phi: float
    reduced: bool = False
    pruned: int = 0

    @property
    def r(self):
        return self.borel.r

    @property
    def is_zero(self) -> bool:
        return not np.any(self.num)

    def __call__(self, p):
        p = np.asarray(p, dtype=complex)
        P = np.polynomial.polynomial
        return p ** (self.r - 1) * P.polyval(p, self.num) / P.polyval(p, self.den)

    def rational(self, p):
        P = np.polynomial.polynomial
        return P.polyval(p, self.num) / P.polyval(p, self.den)

    def ray_distance(self, phi: float, radius: float = np.inf) -> float:
        return ray_distance(self.pole_locations, phi, radius)

    def with_ray(self, phi: float, delta: float = DELTA_RAY, radius: float = np.inf) -> "BorelSum":
        d = self.ray_distance(phi, radius)
        if d < delta:
            raise RayError(f"ray phi={phi:.4f} passes within {d:.3g} of a Borel-plane pole; "
                           "try the other side")
        return replace(self, ray_phi=float(phi))


def ray_distance(poles: Sequence[complex], phi: float, radius: float = np.inf) -> float:
    """Distance from the ray {t e^{i phi}: 0 <= t <= radius} to the nearest pole."""
    best = np.inf
    e = cmath.exp(1j * phi)
    for p in poles:
        t = (p * e.conjugate()).real
        t = min(max(t, 0.0), radius)
        best = min(best, abs(p - t * e))
    return float(best)


def build_borel_sum(f, phi: float, pade_orders=None, delta_ray: float = DELTA_RAY,
                    check: bool = True) -> BorelSum:
    """Pade-continued Borel transform of ``f`` (FormalSeries or BorelSeries) on the ray phi."""
    bs = f if isinstance(f, BorelSeries) else borel_transform(f)
    c = bs.coeffs
    if pade_orders is None:
        n = bs.N // 2
        pade_orders = (bs.N - n, n)
    m, n = pade_orders
    if m + n > bs.N:
        raise DomainError(f"Pade orders {pade_orders} need {m + n + 1} coefficients, have {bs.N + 1}")
    if not np.any(c):
        num, den, reduced, pruned = np.zeros(1, dtype=complex), np.ones(1, dtype=complex), False, 0
    else:
        num, den, reduced = pade(c, m, n)
        num, den, pruned = prune_doublets(num, den)
    poles = tuple(complex(z) for z in np.roots(den[::-1])) if len(den) > 1 else ()
    out = BorelSum(bs, num, den, len(num) - 1, len(den) - 1, poles, float(phi), bool(reduced), pruned)
    if check:
        out = out.with_ray(phi, delta_ray)
    return out


# ---------------------------------------------------------------------------
# Laplace quadrature


@dataclass(frozen=True)
class LaplaceValue:
    value: complex
    error: float
    derivs: tuple = ()


def _ray_truncation(lam_re: float, tol: float) -> float:
    return math.log(1e3 / tol) / lam_re


def laplace_many(funcs: Sequence[BorelSum], w: complex, phi: float, n_derivs: int = 0,
                 tol: float = 1e-12):
    """Laplace integrals of several Borel sums along the same ray.

    Returns (values, error) where values has shape (len(funcs), n_derivs + 1) and
    column d is the d-th w-derivative (moments (-p)^d).
    """
    w = complex(w)
    e = cmath.exp(1j * phi)
    lam = w * e
    if lam.real <= 0:
        raise DomainError(f"Re(w e^(i phi)) = {lam.real:.3g} <= 0: the ray integral diverges")
    live = [i for i, f in enumerate(funcs) if not f.is_zero]
    out = np.zeros((len(funcs), n_derivs + 1), dtype=complex)
    if not live:
        return out, 0.0
    T = _ray_truncation(lam.real, tol)
    rs = np.array([funcs[i].r for i in live])
    q = max(1, max(math.ceil(1 / f.real - 1e-12) if f.real < 1 else 1 for f in rs))
    nums = [funcs[i].num for i in live]
    dens = [funcs[i].den for i in live]
    moments = np.arange(n_derivs + 1)
    P = np.polynomial.polynomial

    def integrand(s):
        # p = t e^{i phi}, t = s^q
        t = s ** q
        p = t * e
        ker = np.exp(-lam * t) * e * q * s ** (q - 1)
        vals = np.array([P.polyval(p, a) / P.polyval(p, b) for a, b in zip(nums, dens)])
        vals = vals * p ** (rs - 1) * ker
        return (vals[:, None] * (-p) ** moments[None, :]).ravel()

    res, err = quad_vec(integrand, 0.0, T ** (1 / q), epsabs=tol, epsrel=tol, limit=400)
    res = res.reshape(len(live), n_derivs + 1)
    out[live] = res
    # tail bound: sup of the approximant on [T, 2T] times the kernel tail
    tail = 0.0
    for i in live:
        f = funcs[i]
        pts = np.linspace(T, 2 * T, 5) * e
        tail = max(tail, float(np.max(np.abs(f(pts)))) * math.exp(-lam.real * T) / lam.real)
    return out, float(err) + tail


def laplace_eval(bs: BorelSum, w: complex, tol: float = 1e-10) -> LaplaceValue:
    """int_0^{inf e^{i phi}} bs(p) e^{-wp} dp with an absolute error estimate."""
    vals, err = laplace_many([bs], w, bs.ray_phi, 0, tol=min(tol, 1e-10))
    return LaplaceValue(complex(vals[0, 0]), err)


def laplace_callable(f, w: complex, phi: float, tol: float = 1e-12, growth: float = 0.0) -> LaplaceValue:
    """int_0^{inf e^{i phi}} f(p) e^{-wp} dp for a vectorized callable with |f(p)| <~ e^{growth |p|}."""
    w = complex(w)
    e = cmath.exp(1j * phi)
    lam = w * e
    if lam.real <= 0:
        raise DomainError(f"Re(w e^(i phi)) = {lam.real:.3g} <= 0: the ray integral diverges")
    rate = lam.real - growth
    if rate <= 0:
        raise DomainError("growth rate exceeds the decay of the kernel")
    T = 2 * _ray_truncation(rate, tol)
    res, err = quad_vec(lambda t: f(t * e) * np.exp(-lam * t) * e, 0.0, T, epsabs=tol, epsrel=tol, limit=400)
    return LaplaceValue(complex(res), float(err))


def unit_convolve(f, n_nodes: int = 40):
    """(1 * f)(p) = int_0^p f(s) ds, by Gauss-Legendre on the segment [0, p]."""
    x, wts = np.polynomial.legendre.leggauss(n_nodes)
    u = (x + 1) / 2

    def g(p):
        p = np.asarray(p, dtype=complex)
        return np.sum(f(p[..., None] * u) * wts, axis=-1) * p / 2
    return g


# ---------------------------------------------------------------------------
# Ray choice


def side_interval(side: str):
    """Open interval of ray angles phi allowed for each representation."""
    return {"upper": (-math.pi / 2, 0.0), "lower": (0.0, math.pi / 2),
            "plus": (-math.pi, 0.0), "minus": (0.0, math.pi)}[side]


def admissible_rays(side: str, w: complex, margin: float = 0.05):
    """Sub-interval of the side's arc on which Re(w e^{i phi}) > 0, with a margin."""
    lo, hi = side_interval(side)
    theta = cmath.phase(w)
    best = None
    for k in (-1, 0, 1):
        th = theta + 2 * math.pi * k
        a, b = max(lo, -math.pi / 2 - th), min(hi, math.pi / 2 - th)
        if b - a > 2 * margin and (best is None or b - a > best[1] - best[0]):
            best = (a, b)
    if best is None:
        raise SectorError(f"no admissible ray for side {side!r} at arg w = {theta:.4f}")
    return best[0] + margin, best[1] - margin


def choose_ray(side: str, w: complex, poles: Sequence[complex] = (), delta: float = DELTA_RAY,
               radius: float = np.inf, phi: Optional[float] = None) -> float:
    """A ray angle on the side's arc with decay at w, as far as possible from Borel poles."""
    a, b = admissible_rays(side, w)
    if phi is not None:
        if not (a - 0.05 <= phi <= b + 0.05):
            raise SectorError(f"phi={phi} outside the admissible arc ({a:.3f}, {b:.3f})")
        if ray_distance(poles, phi, radius) < delta:
            raise RayError(f"ray phi={phi:.4f} too close to a Borel pole")
        return float(phi)
    mid = 0.5 * (a + b)
    cands = sorted(np.linspace(a, b, 41), key=lambda x: abs(x - mid))
    for c in cands:
        if ray_distance(poles, c, radius) >= delta:
            return float(c)
    raise RayError(f"every admissible ray for side {side!r} passes within {delta} of a Borel pole")


# ---------------------------------------------------------------------------
# Summation of a transseries


@dataclass(frozen=True)
class SumValue:
    """h and (optionally) h', h'' of a Borel-summed transseries at w."""

    w: complex
    value: complex
    derivative: Optional[complex]
    second: Optional[complex]
    error: float
    phi: float
    warn: bool = False


def _level_series(s: FormalSeries) -> FormalSeries:
    # s / w, offset 1, so that w * L[B(s/w)] reproduces s
    return FormalSeries(s.coeffs, s.offset + 1, None if s.top is None else s.top + 1)


class TransseriesSum:
    """Borel-Pade approximants of h0 and of every level, built once and reused."""

    def __init__(self, ts: Transseries, pade_orders=None):
        self.ts = ts
        self.h0 = build_borel_sum(ts.h0, 0.0, pade_orders, check=False)
        self.levels = [build_borel_sum(_level_series(s), 0.0, pade_orders, check=False) for s in ts.levels]

    def poles(self, K: int):
        out = list(self.h0.pole_locations)
        for b in self.levels[:K]:
            out.extend(b.pole_locations)
        return out

    def evaluate(self, C: complex, side: str, w: complex, K: Optional[int] = None, n_derivs: int = 0,
                 phi: Optional[float] = None, tol: float = 1e-12) -> SumValue:
        ts = self.ts
        K = ts.K if K is None else min(K, ts.K)
        if C == 0:
            K = 0
        w = complex(w)
        if w == 0:
            raise DomainError("w = 0")
        lam_guess = abs(w) * 0.5
        radius = _ray_truncation(max(lam_guess, 1e-3), tol)
        phi = choose_ray(side, w, self.poles(K), radius=radius, phi=phi)
        funcs = [self.h0] + self.levels[:K]
        vals, err = laplace_many(funcs, w, phi, n_derivs, tol=tol)
        h = vals[0].copy()
        b1 = ts.beta1
        xi = level_prefactor(b1, C, w) if K else 0
        warn = False
        for k in range(1, K + 1):
            L = vals[k]
            # level value: C^k e^{-kw} w^{-k b1} * w * L
            pref = xi ** k * w
            a = -k + (1 - k * b1) / w          # (log of e^{-kw} w^{1-k b1})'
            da = -(1 - k * b1) / w ** 2
            v = [pref * L[0]]
            if n_derivs >= 1:
                v.append(pref * (a * L[0] + L[1]))
            if n_derivs >= 2:
                v.append(pref * ((a * a + da) * L[0] + 2 * a * L[1] + L[2]))
            h[:len(v)] += np.array(v)
            err += abs(pref) * 1e-12
        if K and abs(xi) ** (K + 1) > tol:
            warn = True
        if abs(xi) >= 1:
            warn = True
        return SumValue(w, complex(h[0]), complex(h[1]) if n_derivs >= 1 else None,
                        complex(h[2]) if n_derivs >= 2 else None, float(err + (abs(xi) ** (K + 1) if K else 0.0)),
                        phi, warn)


    def components(self, side: str, w: complex, K: Optional[int] = None, tol: float = 1e-12):
        """(L H0(w), error, [e^{-kw} w^{-k beta1} (sum of s_k)(w) for k = 1..K]) with unit constant."""
        K = self.ts.K if K is None else min(K, self.ts.K)
        w = complex(w)
        radius = _ray_truncation(max(abs(w) * 0.5, 1e-3), tol)
        phi = choose_ray(side, w, self.poles(K), radius=radius)
        h0, err0 = laplace_many([self.h0], w, phi, 0, tol=tol)
        vals, err = laplace_many(self.levels[:K], w, phi, 0, tol=tol)
        xi = level_prefactor(self.ts.beta1, 1.0, w)
        lv = [xi ** k * w * vals[k - 1, 0] for k in range(1, K + 1)]
        # the level integrals' absolute error enters multiplied by the prefactor
        return complex(h0[0, 0]), float(err0 + abs(xi * w) * err), lv


def summer_for(ts: Transseries) -> TransseriesSum:
    """Cached TransseriesSum attached to ``ts``."""
    s = getattr(ts, "_summer", None)
    if s is None:
        s = TransseriesSum(ts)
        object.__setattr__(ts, "_summer", s)
    return s


def tronquee_eval(nf: NormalizedForm, ts: Transseries, C: complex, side: str, w: complex,
                  K: Optional[int] = None, n_derivs: int = 0, phi: Optional[float] = None,
                  tol: float = 1e-12, full: bool = False):
    """L_phi H0(w) + sum_k C^k e^{-kw} w^{-k beta1} (Borel sum of s_k)(w).

    ``side`` is 'upper' (rays phi in (-pi/2, 0), constant C_+) or 'lower'
    (phi in (0, pi/2), constant C_-).  Returns a complex value, or a SumValue
    carrying derivatives and error estimates when ``full`` is set.
    """
    if side not in ("upper", "lower"):
        raise DomainError(f"side must be 'upper' or 'lower', got {side!r}")
    sv = summer_for(ts).evaluate(C, side, w, K, n_derivs, phi, tol)
    return sv if full else sv.value


def tritronquee_eval(nf: NormalizedForm, ts: Transseries, side: str, w: complex,
                     phi: Optional[float] = None, n_derivs: int = 0, tol: float = 1e-12,
                     full: bool = False):
    """h^+ (side 'plus', rays phi in (-pi, 0)) or h^- ('minus', phi in (0, pi)): L_phi H0(w)."""
    if side not in ("plus", "minus"):
        raise DomainError(f"side must be 'plus' or 'minus', got {side!r}")
    sv = summer_for(ts).evaluate(0, side, w, 0, n_derivs, phi, tol)
    return sv if full else sv.value


def stokes_jump(ts: Transseries, w: complex, rho: float = 0.3, theta: float = math.pi / 3,
                tol: float = 1e-14) -> complex:
    """h^+(w) - h^-(w) near arg w = 0 as one contour integral around [1, inf).

    The two Laplace rays are deformed to start at p0 = 1 - rho and leave at angles
    -theta (h^+) and +theta (h^-); the common segment [0, p0] cancels.
    """
    s = summer_for(ts).h0
    if s.is_zero:
        return 0j
    w = complex(w)
    p0 = 1 - rho
    out = 0j
    P = np.polynomial.polynomial
    for sign in (-1, 1):
        e = cmath.exp(1j * sign * theta)
        lam = w * e
        if lam.real <= 0:
            raise DomainError("jump contour does not decay at this w")
        T = _ray_truncation(lam.real, tol)

        def f(t):
            p = p0 + t * e
            return np.atleast_1d(p ** (s.r - 1) * P.polyval(p, s.num) / P.polyval(p, s.den) * np.exp(-w * p) * e)

        val, _ = quad_vec(f, 0.0, T, epsabs=tol * math.exp(-w.real * p0), epsrel=1e-13, limit=400)
        out += -sign * complex(val[0])
    return out


# ---------------------------------------------------------------------------
# reflection w -> -w


def reflect_transseries_h0(ts: Transseries) -> FormalSeries:
    """h0(-w) as a series in 1/w (coefficients times (-1)^m)."""
    m = ts.h0.offset + np.arange(len(ts.h0.coeffs))
    return FormalSeries(ts.h0.coeffs * (-1.0) ** m, ts.h0.offset, ts.h0.top)
