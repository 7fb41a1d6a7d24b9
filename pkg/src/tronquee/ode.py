"""Complex-path integration of the canonical equation, pole location and constant fitting.

Paths are polygons in the w-plane; each straight segment is integrated in its arc
length with scipy's embedded Runge-Kutta pairs (Dormand-Prince 5(4) by default,
DOP853 for tight tolerances), with a terminal event when |h| exceeds the blowup
threshold.

Poles are refined on a small circle around a local-model estimate: the
argument principle gives the order m = -(1/2 pi i) oint h'/h dw and the location
w_p = oint w h'/h dw / oint h'/h dw, both by the trapezoid rule, which converges
geometrically for integrands analytic in an annulus.
"""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import least_squares

from .asymptotics import xi_level_path
from .borel import tronquee_eval, summer_for
from .equations import NormalizedForm
from .errors import DomainError, FitError, PathError, StiffnessError
from .series import Transseries

BLOWUP = 1e8


@dataclass(frozen=True)
class PathSpec:
    waypoints: Tuple[complex, ...]
    max_step: float = np.inf
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    method: str = "RK45"

    def __post_init__(self):
        wp = tuple(complex(z) for z in self.waypoints)
        object.__setattr__(self, "waypoints", wp)
        if len(wp) < 2:
            raise PathError("a path needs at least two waypoints")
        for a, b in zip(wp, wp[1:]):
            if a == b:
                raise PathError(f"consecutive waypoints coincide at {a}")
        for t in (self.rel_tol, self.abs_tol):
            if not (0 < t <= 1e-2):
                raise PathError(f"tolerance {t} outside (0, 1e-2]")


@dataclass
class Segment:
    start: complex
    direction: complex
    length: float
    sol: object = field(repr=False)

    def __call__(self, s):
        """(h, h') at arc length s along the segment."""
        y = self.sol.sol(s)
        return y[0], y[1]


@dataclass
class Trajectory:
    nodes: List[Tuple[complex, complex, complex]]
    segments: List[Segment]
    blowup: bool = False
    blowup_at: Optional[complex] = None
    completed: bool = True

    @property
    def end(self):
        return self.nodes[-1]

    def sample(self, n_per_unit: float = 20.0):
        """(w, h, h') on a uniform grid along the whole path."""
        ws, hs, hps = [], [], []
        for seg in self.segments:
            n = max(2, int(math.ceil(seg.length * n_per_unit)) + 1)
            s = np.linspace(0, seg.length, n)
            h, hp = seg(s)
            ws.append(seg.start + s * seg.direction)
            hs.append(h)
            hps.append(hp)
        return np.concatenate(ws), np.concatenate(hs), np.concatenate(hps)


def _rhs_factory(nf: NormalizedForm, w0: complex, e: complex):
    hpp = nf.hpp

    def f(s, y):
        w = w0 + s * e
        return np.array([e * y[1], e * hpp(1 / w, y[0], y[1])])
    return f


def _blowup_event(s, y):
    return BLOWUP - abs(y[0])


_blowup_event.terminal = True
_blowup_event.direction = -1


def _integrate_segment(nf, wa, wb, y0, path: PathSpec):
    d = wb - wa
    L = abs(d)
    e = d / L
    method = path.method
    sol = solve_ivp(_rhs_factory(nf, wa, e), (0.0, L), np.asarray(y0, dtype=complex), method=method,
                    rtol=path.rel_tol, atol=path.abs_tol, max_step=path.max_step,
                    dense_output=True, events=_blowup_event)
    return sol, e, L


def integrate_path(nf: NormalizedForm, initial, path: PathSpec, raise_on_blowup: bool = False) -> Trajectory:
    """Integrate the canonical equation along the polygon ``path`` from (w0, h, h')."""
    w0, h, hp = initial
    w0 = complex(w0)
    if abs(w0 - path.waypoints[0]) > 1e-12 * max(1.0, abs(w0)):
        raise PathError("initial point must be the first waypoint")
    if not (np.isfinite(h) and np.isfinite(hp)):
        raise DomainError("initial data must be finite")
    nodes = [(w0, complex(h), complex(hp))]
    segs = []
    y = np.array([h, hp], dtype=complex)
    for wa, wb in zip(path.waypoints, path.waypoints[1:]):
        if wa == 0 or wb == 0 or _segment_hits_origin(wa, wb):
            raise PathError("path passes through w = 0")
        sol, e, L = _integrate_segment(nf, wa, wb, y, path)
        reached = sol.t[-1]
        seg = Segment(wa, e, float(reached), sol)
        segs.append(seg)
        for s, yy in zip(sol.t[1:], sol.y.T[1:]):
            nodes.append((wa + s * e, complex(yy[0]), complex(yy[1])))
        if sol.status == 1:
            wb_hit = wa + reached * e
            if raise_on_blowup:
                raise PathError(f"blowup at w={wb_hit}")
            return Trajectory(nodes, segs, True, wb_hit, False)
        if sol.status < 0 or reached < L * (1 - 1e-12):
            if "step size" in (sol.message or "").lower():
                raise StiffnessError(f"step size underflow at w={wa + reached * e}: {sol.message}")
            raise PathError(f"waypoint {wb} not reached: {sol.message}")
        y = sol.y[:, -1]
    return Trajectory(nodes, segs)


def _segment_hits_origin(a, b):
    d = b - a
    t = -(a * d.conjugate()).real / abs(d) ** 2
    return 0 < t < 1 and abs(a + t * d) < 1e-12


def integrate_to(nf: NormalizedForm, initial, waypoints: Sequence[complex], rtol=1e-10, atol=1e-14,
                 method="DOP853", max_step=np.inf):
    """Convenience wrapper: integrate along waypoints and return the final (w, h, h')."""
    path = PathSpec(tuple([initial[0]] + list(waypoints)), max_step, rtol, atol, method)
    tr = integrate_path(nf, initial, path, raise_on_blowup=True)
    return tr.end


# ---------------------------------------------------------------------------
# seeding from the Borel sum


@dataclass(frozen=True)
class Seed:
    w0: complex
    h: complex
    hp: complex
    error: float
    warn: bool = False

    def as_initial(self):
        return (self.w0, self.h, self.hp)


def seed_from_borel(nf: NormalizedForm, ts: Transseries, C: complex, side: str, w0: complex,
                    tol: float = 1e-13) -> Seed:
    """(w0, h, h') from the Borel-summed representation; h' from the differentiated Laplace integral."""
    sv = tronquee_eval(nf, ts, C, side, w0, n_derivs=1, tol=tol, full=True)
    warn = sv.warn or abs(w0) < 10
    if abs(w0) < 10:
        warnings.warn(f"|w0| = {abs(w0):.3g} is small for a Borel seed", RuntimeWarning, stacklevel=2)
    return Seed(complex(w0), sv.value, sv.derivative, sv.error, bool(warn))


# ---------------------------------------------------------------------------
# poles


@dataclass(frozen=True)
class PoleObservation:
    location: complex
    order_estimate: int
    laurent_coeff: complex
    uncertainty: float
    order_raw: float = float("nan")
    method: str = "contour"
    flagged: bool = False
    note: str = ""


def local_pole_estimate(w, h, hp, hpp):
    """(order m, location) of the model a (w - w_p)^-m from one (h, h', h'') triple."""
    q = h * hpp / (hp * hp) - 1
    if q == 0:
        return np.inf, complex(np.nan)
    m = 1 / q
    return m, w + m * h / hp


def locate_pole_from_samples(ws, hs, orders=(1, 2, 3, 4)):
    """Fit h = a (w - w_p)^-m + b to >= 4 samples; returns a PoleObservation.

    The integer m with the smallest least-squares misfit wins.
    """
    ws = np.asarray(ws, dtype=complex)
    hs = np.asarray(hs, dtype=complex)
    if len(ws) < 4:
        raise DomainError("need at least four samples")
    i = int(np.argmax(np.abs(hs)))
    best = None
    for m in orders:
        # initial guess from |h|^(-1/m) being locally linear in w
        k = np.argsort(np.abs(ws - ws[i]))[:3]
        v = hs[k] ** (-1.0 / m)
        slope = (v[1] - v[0]) / (ws[k[1]] - ws[k[0]])
        wp0 = ws[k[0]] - v[0] / slope if slope != 0 else ws[i]
        a0 = hs[i] * (ws[i] - wp0) ** m

        def resid(x, m=m):
            wp = x[0] + 1j * x[1]
            a = x[2] + 1j * x[3]
            b = x[4] + 1j * x[5]
            r = a / (ws - wp) ** m + b - hs
            r = r / np.maximum(np.abs(hs), 1e-300)
            return np.concatenate([r.real, r.imag])

        x0 = [wp0.real, wp0.imag, a0.real, a0.imag, 0.0, 0.0]
        try:
            sol = least_squares(resid, x0, xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=2000)
        except ValueError:
            continue
        cost = float(np.sqrt(np.mean(sol.fun ** 2)))
        if best is None or cost < best[0]:
            best = (cost, m, sol.x)
    cost, m, x = best
    wp = x[0] + 1j * x[1]
    a = x[2] + 1j * x[3]
    # uncertainty from the misfit relative to the pole-distance scale
    unc = cost * float(np.min(np.abs(ws - wp)))
    return PoleObservation(complex(wp), int(m), complex(a), float(max(unc, 1e-15)), float(m), "samples")


def _circle(nf, center, radius, theta0, h, hp, rtol, atol, n_points):
    """Integrate once around the circle |w - center| = radius starting at angle theta0."""
    def f(t, y):
        z = radius * cmath.exp(1j * t)
        w = center + z
        dw = 1j * z
        return np.array([dw * y[1], dw * nf.hpp(1 / w, y[0], y[1])])

    sol = solve_ivp(f, (theta0, theta0 + 2 * math.pi), np.array([h, hp], dtype=complex), method="DOP853",
                    rtol=rtol, atol=atol, dense_output=True, events=_blowup_event)
    if sol.status != 0:
        return None
    th = theta0 + 2 * math.pi * np.arange(n_points) / n_points
    y = sol.sol(th)
    closure = abs(sol.y[0, -1] - h) / max(abs(h), 1e-300)
    return th, y[0], y[1], closure


def _argument_principle(center, radius, th, h, hp):
    z = radius * np.exp(1j * th)
    w = center + z
    dw = 1j * z
    g = hp / h * dw
    I0 = np.mean(g) / 1j              # (1/2 pi i) oint h'/h dw
    I1 = np.mean(w * g) / 1j
    return I0, I1


def refine_pole_contour(nf: NormalizedForm, w_start, h, hp, w_guess, radius: float = 0.5,
                        rtol: float = 1e-12, atol: float = 1e-14, n_points: int = 128) -> PoleObservation:
    """Refine a pole near ``w_guess`` from data (h, h') known at ``w_start``."""
    w_guess = complex(w_guess)
    u = complex(w_start) - w_guess
    u = u / abs(u) if u != 0 else 1.0
    p0 = w_guess + radius * u
    try:
        wq, hq, hpq = integrate_to(nf, (w_start, h, hp), [p0], rtol=rtol, atol=atol)
    except (PathError, StiffnessError) as exc:
        return PoleObservation(w_guess, 0, 0j, float("inf"), flagged=True, note=f"approach failed: {exc}")
    res = _circle(nf, w_guess, radius, cmath.phase(u), hq, hpq, rtol, atol, n_points)
    if res is None:
        return PoleObservation(w_guess, 0, 0j, float("inf"), flagged=True, note="blowup on the refinement circle")
    th, hs, hps, closure = res
    I0, I1 = _argument_principle(w_guess, radius, th, hs, hps)
    I0h, I1h = _argument_principle(w_guess, radius, th[::2], hs[::2], hps[::2])
    m_raw = -I0
    m = int(round(m_raw.real))
    flagged = m < 1 or abs(m_raw - m) > 0.05 or closure > 1e-6
    if m < 1:
        return PoleObservation(w_guess, m, 0j, float("inf"), float(m_raw.real), "contour", True,
                               "no pole inside the circle")
    wp = I1 / I0
    wph = I1h / I0h
    # Laurent coefficient a_{-m} = (1/2 pi i) oint h (w - wp)^(m-1) dw
    z = radius * np.exp(1j * th)
    a = np.mean(hs * (w_guess + z - wp) ** (m - 1) * 1j * z) / 1j
    unc = abs(wp - wph) + abs(m_raw - m) * radius + closure * radius + 100 * rtol * radius
    if abs(wp - w_guess) > 0.8 * radius:
        flagged = True
    return PoleObservation(complex(wp), m, complex(a), float(unc), float(m_raw.real), "contour", bool(flagged),
                           "" if not flagged else "refinement did not converge cleanly")


def refine_pole_reciprocal(nf: NormalizedForm, w_start, h, hp, w_guess, order: int,
                           rtol: float = 1e-12, atol: float = 1e-16, max_iter: int = 12,
                           stop: float = 1e-3) -> PoleObservation:
    """Newton iteration on v = 1/h (regular with a zero of order m at the pole).

    v'' = 2 v'^2 / v - v^2 h''(w, 1/v, -v'/v^2).  Each step integrates v from the
    current point to the Newton update w - m v / v'; iteration stops when the
    update is below ``stop`` times the initial distance, and the last update is
    the uncertainty.
    """
    hpp = nf.hpp

    def rhs(e, w0):
        def f(s, y):
            w = w0 + s * e
            v, vp = y
            return np.array([e * vp, e * (2 * vp * vp / v - v * v * hpp(1 / w, 1 / v, -vp / (v * v)))])
        return f

    # approach to a point at distance ~0.5 in the h variable first
    w_guess = complex(w_guess)
    u = complex(w_start) - w_guess
    u = u / abs(u) if u != 0 else 1.0
    w, h1, hp1 = integrate_to(nf, (w_start, h, hp), [w_guess + 0.5 * u], rtol=rtol, atol=atol)
    v, vp = 1 / h1, -hp1 / (h1 * h1)
    d0 = abs(w - w_guess)
    step = None
    for _ in range(max_iter):
        wn = w - order * v / vp
        step = abs(wn - w)
        if step < stop * d0:
            break
        # move only part of the way when far (the model is local)
        target = wn if step < 0.25 * d0 else w + (wn - w) * 0.5
        d = target - w
        L = abs(d)
        e = d / L
        sol = solve_ivp(rhs(e, w), (0, L), np.array([v, vp]), method="DOP853", rtol=rtol, atol=atol)
        if sol.status != 0:
            return PoleObservation(wn, order, 0j, float("inf"), float(order), "reciprocal", True, sol.message)
        w = target
        v, vp = sol.y[:, -1]
    wn = w - order * v / vp
    # Laurent coefficient: v ~ (w - wp)^m / a
    unc = float(abs(wn - w) ** 2 / max(d0, 1e-300) + abs(wn - w) * 1e-3 + 1e3 * rtol * d0)
    return PoleObservation(complex(wn), order, complex(0), unc, float(order), "reciprocal", False)


def cluster_poles(obs: Sequence[PoleObservation]) -> List[PoleObservation]:
    """Merge observations closer than 3x the largest uncertainty (keeping the most certain)."""
    good = sorted([o for o in obs if np.isfinite(o.uncertainty)], key=lambda o: o.uncertainty)
    if not good:
        return []
    radius = max(3 * max(o.uncertainty for o in good), 1e-6)
    out: List[PoleObservation] = []
    for o in good:
        if all(abs(o.location - p.location) > radius for p in out):
            out.append(o)
    return sorted(out, key=lambda o: (o.location.imag, o.location.real))


def _candidates(ws, hs):
    """Indices of local maxima of |h| along sampled path data."""
    a = np.abs(hs)
    return [i for i in range(1, len(a) - 1) if a[i] >= a[i - 1] and a[i] > a[i + 1]]


def approach_pole(nf: NormalizedForm, w, h, hp, rtol: float = 1e-12, atol: float = 1e-14,
                  max_steps: int = 40, max_travel: float = 8.0, close: float = 0.7):
    """Walk from (w, h, h') toward a nearby pole until the local power-law model is consistent.

    Each step moves along h/h' (which points at a pole a (w - w_p)^-m whatever m is)
    by half the estimated distance, capped at 0.5.  Returns (w, h, h', m, w_p)
    or None when no pole is approached within ``max_travel``.
    """
    w0 = w
    for _ in range(max_steps):
        hpp = nf.hpp(1 / w, h, hp)
        m, wp = local_pole_estimate(w, h, hp, hpp)
        if not np.isfinite(m):
            return None
        r = h / hp
        mc = float(np.clip(m.real, 1.0, 4.0))
        d = mc * abs(r)
        if d < close and abs(m - round(m.real)) < 0.25 and round(m.real) >= 1:
            return w, h, hp, m, wp
        step = min(0.5, 0.5 * d)
        target = w + step * r / abs(r)
        if abs(target - w0) > max_travel:
            return None
        try:
            w, h, hp = integrate_to(nf, (w, h, hp), [target], rtol=rtol, atol=atol)
        except (PathError, StiffnessError):
            return None
    return None


def detect_poles(nf: NormalizedForm, traj_or_initial, sweep: PathSpec, radius: float = 0.5,
                 n_per_unit: float = 20.0, max_distance: float = 4.0, refine_rtol: float = 1e-12,
                 detour: float = 0.6) -> List[PoleObservation]:
    """Integrate along ``sweep`` and report refined poles near the swept path.

    ``traj_or_initial`` is either a Trajectory whose end is the first sweep
    waypoint, or an initial triple (w, h, h').  Local maxima of |h| on the sweep
    (and blowups, which trigger a small detour) are candidates; each is refined
    on a circle by the argument principle.
    """
    if isinstance(traj_or_initial, Trajectory):
        init = traj_or_initial.end
    else:
        init = tuple(traj_or_initial)
    wps = list(sweep.waypoints)
    obs: List[PoleObservation] = []
    cur = init
    i = 1
    pieces = []
    guard = 0
    while i < len(wps):
        guard += 1
        if guard > 10 * len(wps) + 50:
            raise PathError("too many detours on the sweep")
        target = wps[i]
        path = PathSpec((cur[0], target), sweep.max_step, sweep.rel_tol, sweep.abs_tol, sweep.method)
        tr = integrate_path(nf, cur, path)
        pieces.append(tr)
        if tr.blowup:
            # back off, go around the singular point on a small detour
            seg = tr.segments[-1]
            back = max(0.0, seg.length - detour)
            hb, hpb = seg(back)
            wb = seg.start + back * seg.direction
            side = 1j * seg.direction * detour
            cur_w = wb
            detour_pts = [wb + side, wb + side + 2 * detour * seg.direction]
            try:
                end = integrate_to(nf, (cur_w, hb, hpb), detour_pts, sweep.rel_tol, sweep.abs_tol)
            except PathError:
                end = integrate_to(nf, (cur_w, hb, hpb), [wb - side, wb - side + 2 * detour * seg.direction],
                                   sweep.rel_tol, sweep.abs_tol)
            blow = tr.blowup_at
            obs.append(refine_pole_contour(nf, end[0], end[1], end[2], blow, radius, refine_rtol))
            cur = end
            continue
        cur = tr.end
        i += 1
    samples = [tr.sample(n_per_unit) for tr in pieces]
    ws, hs, hps = (np.concatenate([smp[j] for smp in samples]) for j in range(3))
    for i in _candidates(ws, hs):
        got = approach_pole(nf, ws[i], hs[i], hps[i], refine_rtol, max_travel=max_distance)
        if got is None:
            continue
        w, h, hp, m, wp = got
        obs.append(refine_pole_contour(nf, w, h, hp, wp, min(radius, 0.8 * abs(wp - w)), refine_rtol))
    obs = [o for o in obs if not o.flagged]
    return cluster_poles(obs)


def sweep_pole_array(nf: NormalizedForm, ts: Transseries, C: complex, side: str, xi_abs: float,
                     im_range: Tuple[float, float], level_shift: float = 0.8, rtol: float = 1e-11,
                     n_waypoints: Optional[int] = None, **detect_kw) -> List[PoleObservation]:
    """Seed from the Borel sum and sweep alongside the pole array on |xi(w)| = xi_abs.

    The sweep follows |xi| = e^{-level_shift} xi_abs for |Im w| in ``im_range``
    (sign taken from ``side``); the seed sits at Re w = max(10, 0.2 |Im w| + 6)
    on the analytic side, level with the first waypoint.
    """
    sgn = 1 if side == "upper" else -1
    lo, hi = im_range
    n = n_waypoints or max(10, int(abs(hi - lo) / 2))
    wps = xi_level_path(nf.beta1, C, xi_abs * math.exp(-level_shift), (sgn * lo, sgn * hi), n)
    start = wps[0]
    w0 = complex(max(10.0, abs(start.imag) * 0.2 + 6.0), start.imag)
    init = seed_from_borel(nf, ts, C, side, w0).as_initial()
    init = integrate_to(nf, init, [start], rtol=rtol, atol=rtol * 1e-3)
    sweep = PathSpec(tuple(wps), rel_tol=rtol, abs_tol=rtol * 1e-3, method="DOP853")
    return detect_poles(nf, init, sweep, **detect_kw)


# ---------------------------------------------------------------------------
# constant fitting


@dataclass(frozen=True)
class FitResult:
    C: complex
    spread: float
    per_sample: tuple
    side: str
    zero: bool = False


def fit_constant(nf: NormalizedForm, ts: Transseries, samples, side: str = "upper", K: Optional[int] = None,
                 iterations: int = 6, max_spread: float = 0.1) -> FitResult:
    """Estimate the transseries constant C from samples (w, h) of one solution.

    The side's Borel-summed h0 is subtracted and the remainder divided by
    e^{-w} w^{-beta1} s_1(w) (s_1 Borel summed).  Higher levels are removed by
    fixed-point iteration on C.
    """
    samples = [(complex(w), complex(h)) for w, h in samples]
    if not samples:
        raise DomainError("no samples")
    sm = summer_for(ts)
    base, levels = [], []
    for w, h in samples:
        h0, err, lv = sm.components(side, w, K)
        base.append((w, h, h0, err))
        levels.append(lv)
    K = len(levels[0])
    noise = max(max(err, 1e-15 * abs(h)) / abs(lv[0]) for (w, h, _, err), lv in zip(base, levels))
    C = 0j
    per = []
    for _ in range(iterations):
        per = []
        for (w, h, h0, _), lv in zip(base, levels):
            r = h - h0 - sum(C ** k * lv[k - 1] for k in range(2, K + 1))
            per.append(r / lv[0])
        C = complex(np.mean(per))
    if abs(C) < 10 * noise:
        return FitResult(C, float("nan"), tuple(per), side, True)
    spread = float(max(abs(p - C) for p in per) / abs(C))
    if spread > max_spread:
        raise FitError(f"constant fit spread {spread:.3g} exceeds {max_spread}")
    return FitResult(C, spread, tuple(per), side)


@dataclass(frozen=True)
class AnalyticityCell:
    center: complex
    radius: float
    defect: float
    scale: float

    @property
    def relative_defect(self):
        return self.defect / self.scale if self.scale > 0 else 0.0


def scan_analyticity(f, centers: Sequence[complex], radius: float, n_points: int = 64) -> List[AnalyticityCell]:
    """Cauchy-formula test on discs: for f analytic in the closed disc the circle mean equals f(center).

    A pole of order m at w_p inside the disc leaves a defect |a / (center - w_p)^m|,
    so a relative defect far above the evaluation accuracy signals a singularity.
    ``f`` maps an array of points to values (e.g. a Borel-sum evaluator).
    """
    th = 2 * math.pi * np.arange(n_points) / n_points
    out = []
    for c in centers:
        c = complex(c)
        ring = np.asarray(f(c + radius * np.exp(1j * th)), dtype=complex)
        fc = complex(np.asarray(f(np.array([c])), dtype=complex)[0])
        scale = float(max(np.max(np.abs(ring)), abs(fc)))
        out.append(AnalyticityCell(c, radius, float(abs(np.mean(ring) - fc)), scale))
    return out
