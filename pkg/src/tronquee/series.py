"""Truncated power series in 1/w and the transseries recursions.

Two containers live here:

* ``FormalSeries`` is the public object: coefficients of w^-(offset+j) with an
  explicit truncation, used for h0 and the level series s_k.
* ``TransRing`` is a dense (K+1) x (P+1) array of coefficients of
  E^k w^-m, E = C e^-w w^-beta1, truncated at a common order P.  It supports
  + - * / with scalars, so the per-case h'' evaluators of ``equations`` can be
  applied to it directly.  The recursions substitute trial series into that
  evaluator and solve for one coefficient at a time.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .equations import NormalizedForm
from .errors import DomainError, ResonanceError

# ---------------------------------------------------------------------------
# FormalSeries


def _series_recip(a: np.ndarray, n: int) -> np.ndarray:
    """First n coefficients of 1/a for a power series a with a[0] != 0."""
    b = np.zeros(n, dtype=complex)
    if a[0] == 0:
        raise ZeroDivisionError("reciprocal of a series with zero leading coefficient")
    inv0 = 1 / a[0]
    b[0] = inv0
    m = len(a)
    for k in range(1, n):
        lo = max(0, k - m + 1)
        # sum_{j=1..k} a_j b_{k-j}
        j = np.arange(max(1, lo), min(k, m - 1) + 1)
        b[k] = -inv0 * np.dot(a[j], b[k - j])
    return b


class FormalSeries:
    """sum_j coeffs[j] w^-(offset+j) + O(w^-(top+1)).

    ``top`` is the highest power of 1/w that is known; ``None`` means the
    series is an exact polynomial in 1/w.
    """

    __slots__ = ("offset", "coeffs", "top")

    def __init__(self, coeffs, offset: int = 0, top: Optional[int] = None):
        c = np.atleast_1d(np.asarray(coeffs, dtype=complex)).copy()
        self.offset = int(offset)
        if top is not None:
            top = int(top)
            keep = top - self.offset + 1
            if keep < len(c):
                c = c[:max(keep, 0)]
            elif keep > len(c):
                c = np.concatenate([c, np.zeros(keep - len(c), dtype=complex)])
        self.coeffs = c
        self.top = top

    # -- bookkeeping ------------------------------------------------------
    @property
    def N(self) -> int:
        return len(self.coeffs) - 1

    @property
    def exact(self) -> bool:
        return self.top is None

    def coeff(self, m: int) -> complex:
        """Coefficient of w^-m."""
        j = m - self.offset
        if 0 <= j < len(self.coeffs):
            return complex(self.coeffs[j])
        if self.top is not None and m > self.top:
            raise IndexError(f"order {m} beyond truncation {self.top}")
        return 0j

    def _top(self):
        return np.inf if self.top is None else self.top

    def __repr__(self):
        return f"FormalSeries(offset={self.offset}, top={self.top}, coeffs={self.coeffs!r})"

    @staticmethod
    def _lift(x):
        if isinstance(x, FormalSeries):
            return x
        return FormalSeries([x], 0, None)

    def _dense(self, lo, hi):
        """coefficients of w^-lo .. w^-hi as an array (zeros outside the stored range)."""
        out = np.zeros(hi - lo + 1, dtype=complex)
        for j, c in enumerate(self.coeffs):
            m = self.offset + j
            if lo <= m <= hi:
                out[m - lo] = c
        return out

    @staticmethod
    def _make(arr, lo, top):
        top = None if top == np.inf else int(top)
        return FormalSeries(arr, lo, top)

    # -- arithmetic -------------------------------------------------------
    def add(self, other):
        other = self._lift(other)
        top = min(self._top(), other._top())
        lo = min(self.offset, other.offset)
        hi = top if top != np.inf else max(self.offset + self.N, other.offset + other.N)
        return self._make(self._dense(lo, hi) + other._dense(lo, hi), lo, top)

    def mul(self, other):
        other = self._lift(other)
        top = min(self._top() + other.offset, other._top() + self.offset)
        lo = self.offset + other.offset
        prod = np.convolve(self.coeffs, other.coeffs)
        if top != np.inf:
            prod = prod[:int(top) - lo + 1]
        return self._make(prod, lo, top)

    def reciprocal(self, order: Optional[int] = None):
        """1/self; exact inputs need an explicit truncation ``order`` (highest power kept)."""
        if len(self.coeffs) == 0 or self.coeffs[0] == 0:
            raise ZeroDivisionError("reciprocal of a series with zero leading coefficient")
        lo = -self.offset
        if self.exact:
            if order is None:
                if len(self.coeffs) == 1:
                    return FormalSeries([1 / self.coeffs[0]], lo, None)
                raise DomainError("reciprocal of an exact polynomial needs a truncation order")
            top = order
        else:
            top = lo + self.N if order is None else min(order, lo + self.N)
        n = top - lo + 1
        return FormalSeries(_series_recip(self.coeffs, n), lo, top)

    def differentiate(self):
        m = self.offset + np.arange(len(self.coeffs))
        top = None if self.top is None else self.top + 1
        return FormalSeries(-m * self.coeffs, self.offset + 1, top)

    def __add__(self, o):
        return self.add(o)

    __radd__ = __add__

    def __neg__(self):
        return FormalSeries(-self.coeffs, self.offset, self.top)

    def __sub__(self, o):
        return self.add(-self._lift(o))

    def __rsub__(self, o):
        return (-self).add(o)

    def __mul__(self, o):
        return self.mul(o)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = self._lift(o)
        return self.mul(o.reciprocal(None if not self.exact else self.top))

    def __rtruediv__(self, o):
        return self._lift(o).mul(self.reciprocal())

    # -- evaluation -------------------------------------------------------
    def terms(self, w) -> np.ndarray:
        m = self.offset + np.arange(len(self.coeffs))
        return self.coeffs * complex(w) ** (-m.astype(float))

    def evaluate(self, w, n_terms: Optional[int] = None) -> complex:
        t = self.terms(w)
        return complex(np.sum(t if n_terms is None else t[:n_terms]))

    def optimal(self, w):
        """(value, error estimate, n_terms) truncating before the smallest term."""
        t = self.terms(w)
        if len(t) == 0:
            return 0j, 0.0, 0
        a = np.abs(t)
        nz = np.nonzero(a)[0]
        if len(nz) == 0:
            return 0j, 0.0, 0
        start = nz[0]
        idx = start + 1 + int(np.argmin(a[start + 1:])) if len(a) > start + 1 else len(a)
        if idx >= len(a):
            return complex(np.sum(t)), 0.0, len(t)
        return complex(np.sum(t[:idx])), float(a[idx]), int(idx)

    def to_json(self):
        return {"offset": self.offset, "N": self.N, "top": self.top,
                "coeffs": [[c.real, c.imag] for c in self.coeffs]}

    @classmethod
    def from_json(cls, d):
        return cls([complex(a, b) for a, b in d["coeffs"]], d["offset"], d.get("top"))


def series_arith(a: FormalSeries, b: Optional[FormalSeries], op: str) -> FormalSeries:
    """Truncated series algebra: op in {'add', 'mul', 'reciprocal', 'differentiate'}."""
    if op == "add":
        return a.add(b)
    if op == "mul":
        return a.mul(b)
    if op == "reciprocal":
        return a.reciprocal()
    if op == "differentiate":
        return a.differentiate()
    raise ValueError(f"unknown op {op!r}")


# ---------------------------------------------------------------------------
# dense transseries ring


class TransRing:
    """Coefficients data[k, m] of E^k w^-m for k <= K, m <= P."""

    __slots__ = ("data", "beta1")

    def __init__(self, data, beta1=0j):
        self.data = data
        self.beta1 = beta1

    @property
    def K(self):
        return self.data.shape[0] - 1

    @property
    def P(self):
        return self.data.shape[1] - 1

    @classmethod
    def zeros(cls, K, P, beta1=0j):
        return cls(np.zeros((K + 1, P + 1), dtype=complex), beta1)

    @classmethod
    def iw(cls, K, P, beta1=0j):
        r = cls.zeros(K, P, beta1)
        if P >= 1:
            r.data[0, 1] = 1
        return r

    def _lift(self, x):
        if isinstance(x, TransRing):
            return x
        r = TransRing(np.zeros_like(self.data), self.beta1)
        r.data[0, 0] = x
        return r

    def __add__(self, o):
        if isinstance(o, TransRing):
            return TransRing(self.data + o.data, self.beta1)
        d = self.data.copy()
        d[0, 0] += o
        return TransRing(d, self.beta1)

    __radd__ = __add__

    def __neg__(self):
        return TransRing(-self.data, self.beta1)

    def __sub__(self, o):
        return self + (-o)

    def __rsub__(self, o):
        return (-self) + o

    def __mul__(self, o):
        if not isinstance(o, TransRing):
            return TransRing(self.data * o, self.beta1)
        K, P = self.K, self.P
        out = np.zeros_like(self.data)
        a, b = self.data, o.data
        nza = [k for k in range(K + 1) if a[k].any()]
        nzb = [k for k in range(K + 1) if b[k].any()]
        for i in nza:
            for j in nzb:
                if i + j > K:
                    continue
                out[i + j] += np.convolve(a[i], b[j])[:P + 1]
        return TransRing(out, self.beta1)

    __rmul__ = __mul__

    def reciprocal(self):
        P = self.P
        inv0 = TransRing.zeros(self.K, P, self.beta1)
        inv0.data[0] = _series_recip(self.data[0], P + 1)
        rest = TransRing(self.data.copy(), self.beta1)
        rest.data[0] = 0
        if not rest.data.any():
            return inv0
        q = -(rest * inv0)
        term = inv0
        acc = inv0
        for _ in range(self.K):
            term = term * q
            acc = acc + term
        return acc

    def __truediv__(self, o):
        if not isinstance(o, TransRing):
            return TransRing(self.data / o, self.beta1)
        return self * o.reciprocal()

    def __rtruediv__(self, o):
        return self.reciprocal() * o

    def derivative(self):
        """d/dw, with d/dw (E^k s) = E^k (s' - k s - k beta1 s / w)."""
        P = self.P
        d = self.data
        out = np.zeros_like(d)
        m = np.arange(P)
        out[:, 1:] = -m * d[:, :-1]
        k = np.arange(self.K + 1)[:, None]
        out -= k * d
        out[:, 1:] -= k * self.beta1 * d[:, :-1]
        return TransRing(out, self.beta1)


def ring_residual(nf: NormalizedForm, H: TransRing) -> TransRing:
    """Coefficients of the canonical-equation residual of the transseries H."""
    Hp = H.derivative()
    Hpp = Hp.derivative()
    iw = TransRing.iw(H.K, H.P, H.beta1)
    return Hpp - nf.hpp(iw, H, Hp)


# ---------------------------------------------------------------------------
# recursions


@dataclass
class Transseries:
    """h0 + sum_k C^k e^-kw w^-k beta1 s_k."""

    h0: FormalSeries
    levels: List[FormalSeries]
    beta1: complex
    K: int
    pivots: dict = field(default_factory=dict, repr=False)

    def level(self, k: int) -> FormalSeries:
        return self.levels[k - 1]

    def to_json(self):
        return {"beta1": [self.beta1.real, self.beta1.imag], "K": self.K, "h0": self.h0.to_json(),
                "levels": [s.to_json() for s in self.levels]}


_PIVOT_TOL = 1e-10


def _solve_coefficient(nf, H, k, j, m):
    """Set H.data[k, j] so that the level-k residual vanishes at order m; return pivot."""
    H.data[k, j] = 0
    r0 = ring_residual(nf, H).data[k, m]
    # the residual is affine in the unknown; probe with a step comparable to |r0|
    # because the coefficients grow factorially
    step = max(1.0, abs(r0))
    H.data[k, j] = step
    r1 = ring_residual(nf, H).data[k, m]
    piv = (r1 - r0) / step
    if abs(piv) < _PIVOT_TOL:
        H.data[k, j] = 0
        raise ResonanceError(k, j, piv)
    H.data[k, j] = -r0 / piv
    return piv


def _h0_ring(nf, P):
    H = TransRing.zeros(0, P, nf.beta1)
    for j in range(2, P + 1):
        piv = _solve_coefficient(nf, H, 0, j, j)
        if abs(piv + 1) > 1e-9:
            raise ResonanceError(0, j, piv)
    return H


def compute_h0(nf: NormalizedForm, N: int) -> FormalSeries:
    """The formal power series solution h0 = sum_{j=2}^{N} h_j w^-j."""
    if N < 2:
        raise DomainError("compute_h0 needs N >= 2")
    H = _h0_ring(nf, N)
    return FormalSeries(H.data[0, 2:], 2, N)


def compute_levels(nf: NormalizedForm, K: int, N: int) -> Transseries:
    """h0 (to order N) and the level series s_1..s_K (each through w^-N), s_{1,0} = 1.

    Level 1 coefficient s_{1,j} is fixed at order w^-(j+1) (pivot 2j), level k >= 2
    coefficient s_{k,j} at order w^-j (pivot k^2 - 1).
    """
    if K < 1:
        raise DomainError("compute_levels needs K >= 1")
    if N < 2:
        raise DomainError("compute_levels needs N >= 2")
    P = N + 1
    H0 = _h0_ring(nf, P)
    H = TransRing.zeros(K, P, nf.beta1)
    H.data[0] = H0.data[0]
    pivots = {}
    for k in range(1, K + 1):
        # solve level k with the ring truncated at K = k (higher levels cannot feed back)
        Hk = TransRing(H.data[:k + 1].copy(), nf.beta1)
        if k == 1:
            Hk.data[1, 0] = 1
            for j in range(1, N + 1):
                pivots[(1, j)] = _solve_coefficient(nf, Hk, 1, j, j + 1)
        else:
            for j in range(0, N + 1):
                pivots[(k, j)] = _solve_coefficient(nf, Hk, k, j, j)
        H.data[k, :N + 1] = Hk.data[k, :N + 1]
    h0 = FormalSeries(H0.data[0, 2:N + 1], 2, N)
    levels = [FormalSeries(H.data[k, :N + 1], 0, N) for k in range(1, K + 1)]
    return Transseries(h0, levels, nf.beta1, K, pivots)


def transseries_ring(ts: Transseries, P: Optional[int] = None) -> TransRing:
    """Pack a Transseries into a TransRing (for residual checks)."""
    P = ts.h0.N + 2 if P is None else P
    R = TransRing.zeros(ts.K, P, ts.beta1)
    for m in range(2, min(P, ts.h0.top) + 1):
        R.data[0, m] = ts.h0.coeff(m)
    for k, s in enumerate(ts.levels, start=1):
        n = min(P + 1, len(s.coeffs))
        R.data[k, :n] = s.coeffs[:n]
    return R


@dataclass(frozen=True)
class SeriesValue:
    value: complex
    error: float
    warn: bool = False


def level_prefactor(beta1, C, w, k=1):
    """C^k e^-kw w^-k beta1 with the principal branch of w^-beta1."""
    w = complex(w)
    return (C * np.exp(-w - beta1 * np.log(w))) ** k if k else 1.0


def evaluate_transseries(ts: Transseries, C: complex, w: complex) -> SeriesValue:
    """Optimally truncated h0 plus sum_k C^k e^-kw w^-k beta1 s_k(w)."""
    w = complex(w)
    if w == 0:
        raise DomainError("w = 0")
    v, err, _ = ts.h0.optimal(w)
    xi = level_prefactor(ts.beta1, C, w)
    warn = bool(abs(xi) >= 1)
    for k, s in enumerate(ts.levels, start=1):
        if C == 0:
            break
        sv, se, _ = s.optimal(w)
        v += xi ** k * sv
        err += abs(xi) ** k * se
    if C != 0:
        err += abs(xi) ** (ts.K + 1)
    return SeriesValue(complex(v), float(err), warn)


def truncation_residual(nf: NormalizedForm, f: FormalSeries, w, extra: int = 150) -> complex:
    """Canonical-equation residual of the polynomial f (truncated h0) at w.

    The residual of a finite polynomial in 1/w is analytic at w = infinity; it is
    expanded to ``extra`` orders beyond the truncation and summed there, which
    avoids the catastrophic cancellation of evaluating h'' - H(w, h, h') directly.
    Orders up to f.top vanish by construction and are dropped.
    """
    P = f.top + extra
    H = TransRing.zeros(0, P, nf.beta1)
    for m in range(f.offset, f.top + 1):
        H.data[0, m] = f.coeff(m)
    r = ring_residual(nf, H).data[0]
    m = np.arange(f.top + 1, P + 1)
    w = np.asarray(w, dtype=complex)
    return np.sum(r[f.top + 1:] * w[..., None] ** (-m.astype(float)), axis=-1)
