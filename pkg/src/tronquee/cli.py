"""Command-line front end: ``python -m tronquee <command> [flags]``.

Commands: series, sum, integrate, poles, predict, compare, selftest.  Complex
numbers are written as [re, im] pairs; JSON is emitted with sorted keys so two
runs with the same configuration produce identical bytes.  Exit codes: 0 ok,
1 numerical failure, 2 usage error (with a JSON error object on stderr).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from dataclasses import asdict, dataclass, field, fields
from typing import List, Optional

import numpy as np

from .asymptotics import (compare_predictions, f0_closed_form, f0_ode_residual, predict_poles,
                          predict_poles_case)
from .borel import tritronquee_eval, tronquee_eval
from .equations import Case, EquationSpec, normalize
from .errors import TronqueeError
from .ode import PathSpec, detect_poles, integrate_path, seed_from_borel, sweep_pole_array
from .series import compute_levels, truncation_residual

COMMANDS = ("series", "sum", "integrate", "poles", "predict", "compare", "selftest")


class UsageError(Exception):
    pass


def _pair(z):
    z = complex(z)
    return [z.real, z.imag]


def _parse_complex(s) -> complex:
    if isinstance(s, (list, tuple)):
        return complex(s[0], s[1])
    if isinstance(s, (int, float, complex)):
        return complex(s)
    try:
        return complex(str(s).replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise UsageError(f"cannot parse complex number {s!r}") from exc


def _parse_range(s) -> List[int]:
    if isinstance(s, list):
        return [int(v) for v in s]
    s = str(s)
    if ".." in s:
        a, b = s.split("..")
        out = list(range(int(a), int(b) + 1))
    else:
        out = [int(v) for v in s.split(",") if v.strip()]
    if not out:
        raise UsageError(f"empty n range {s!r}")
    return out


@dataclass
class RunConfig:
    case: str = "PIII_ii"
    alpha: complex = 0.0
    beta: complex = 0.0
    A: Optional[complex] = None
    N: int = 30
    K: int = 3
    C: complex = 0.0
    side: str = "upper"
    phi: Optional[float] = None
    tol: float = 1e-12
    rtol: float = 1e-11
    w: List[complex] = field(default_factory=list)
    waypoints: List[complex] = field(default_factory=list)
    n: List[int] = field(default_factory=lambda: list(range(1, 11)))
    level_sweep: Optional[List[float]] = None
    seed: int = 0
    out: Optional[str] = None
    format: str = "json"

    def spec(self) -> EquationSpec:
        try:
            case = Case(self.case)
        except ValueError as exc:
            raise UsageError(f"unknown case {self.case!r}") from exc
        A = self.A
        if A is None and case in (Case.PIII_i, Case.PIII_ii):
            A = 1.0
        if A is None and case == Case.PIV_3:
            A = complex(-self.beta / 2) ** 0.5
        return EquationSpec(case, self.alpha, self.beta, A)

    def validate(self, command: str):
        if self.tol <= 0 or self.rtol <= 0:
            raise UsageError("tolerances must be positive")
        if self.N < 2 or self.K < 0:
            raise UsageError("need N >= 2 and K >= 0")
        if self.format not in ("json", "csv"):
            raise UsageError("format must be json or csv")
        if command == "sum" and not self.w:
            raise UsageError("sum needs at least one --w point")
        if command in ("integrate", "poles") and len(self.waypoints) < 2 and not (command == "poles" and self.level_sweep):
            raise UsageError(f"{command} needs at least two waypoints")
        if command in ("predict", "compare", "poles") and not self.n:
            raise UsageError("empty n range")

    def to_json(self):
        d = asdict(self)
        for k in ("alpha", "beta", "C", "A"):
            if d[k] is not None:
                d[k] = _pair(d[k])
        d["w"] = [_pair(z) for z in self.w]
        d["waypoints"] = [_pair(z) for z in self.waypoints]
        return d

    @classmethod
    def from_json(cls, d: dict) -> "RunConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise UsageError(f"unknown config keys {sorted(unknown)}")
        d = dict(d)
        for k in ("alpha", "beta", "C", "A"):
            if d.get(k) is not None:
                d[k] = _parse_complex(d[k])
        for k in ("w", "waypoints"):
            if k in d:
                d[k] = [_parse_complex(z) for z in d[k]]
        if "n" in d:
            d["n"] = _parse_range(d["n"])
        return cls(**d)


# ---------------------------------------------------------------------------
# commands


def _levels(cfg: RunConfig, nf):
    return compute_levels(nf, max(cfg.K, 1), cfg.N)


def cmd_series(cfg: RunConfig):
    nf = normalize(cfg.spec())
    ts = _levels(cfg, nf)
    out = {"spec": cfg.spec().to_json(), "beta1": _pair(nf.beta1), "beta2": _pair(nf.beta2)}
    out.update(ts.to_json())
    rows = [{"level": 0, "j": j + 2, "re": c.real, "im": c.imag} for j, c in enumerate(ts.h0.coeffs)]
    for k, s in enumerate(ts.levels, 1):
        rows += [{"level": k, "j": j, "re": c.real, "im": c.imag} for j, c in enumerate(s.coeffs)]
    return out, rows


def cmd_sum(cfg: RunConfig):
    nf = normalize(cfg.spec())
    ts = _levels(cfg, nf)
    rows = []
    for w in cfg.w:
        if cfg.side in ("plus", "minus"):
            sv = tritronquee_eval(nf, ts, cfg.side, w, phi=cfg.phi, n_derivs=1, tol=cfg.tol, full=True)
        else:
            sv = tronquee_eval(nf, ts, cfg.C, cfg.side, w, K=cfg.K, n_derivs=1, phi=cfg.phi, tol=cfg.tol, full=True)
        row = {"w": _pair(w), "h": _pair(sv.value), "hp": _pair(sv.derivative), "error": sv.error,
               "phi": sv.phi, "warn": bool(sv.warn)}
        if cfg.C == 0 and cfg.side in ("upper", "lower"):
            # side dependence of the C = 0 sum is exponentially small: report its size
            row["side_gap_bound"] = float(abs(np.exp(-complex(w)) * complex(w) ** (-nf.beta1)))
        rows.append(row)
    flat = [{"w_re": r["w"][0], "w_im": r["w"][1], "h_re": r["h"][0], "h_im": r["h"][1],
             "hp_re": r["hp"][0], "hp_im": r["hp"][1], "error": r["error"]} for r in rows]
    return {"spec": cfg.spec().to_json(), "C": _pair(cfg.C), "side": cfg.side, "values": rows}, flat


def _seed(cfg: RunConfig, nf, ts, w0):
    if cfg.side in ("plus", "minus"):
        sv = tritronquee_eval(nf, ts, cfg.side, w0, n_derivs=1, tol=cfg.tol, full=True)
        return (complex(w0), sv.value, sv.derivative)
    return seed_from_borel(nf, ts, cfg.C, cfg.side, w0, tol=cfg.tol).as_initial()


def cmd_integrate(cfg: RunConfig):
    nf = normalize(cfg.spec())
    ts = _levels(cfg, nf)
    init = _seed(cfg, nf, ts, cfg.waypoints[0])
    tr = integrate_path(nf, init, PathSpec(tuple(cfg.waypoints), rel_tol=cfg.rtol, abs_tol=cfg.rtol * 1e-3,
                                           method="DOP853"))
    rows = [{"w_re": w.real, "w_im": w.imag, "h_re": h.real, "h_im": h.imag, "hp_re": hp.real, "hp_im": hp.imag}
            for w, h, hp in tr.nodes]
    return {"spec": cfg.spec().to_json(), "blowup": tr.blowup,
            "blowup_at": None if tr.blowup_at is None else _pair(tr.blowup_at), "nodes": len(rows),
            "end": {"w": _pair(tr.end[0]), "h": _pair(tr.end[1]), "hp": _pair(tr.end[2])}}, rows


def cmd_poles(cfg: RunConfig):
    nf = normalize(cfg.spec())
    ts = _levels(cfg, nf)
    if cfg.level_sweep:
        lo, hi = cfg.level_sweep[:2]
        xs = [x for x, _ in f0_closed_form(cfg.spec().case, cfg.spec().A).singular_set]
        if not xs:
            raise UsageError("level sweep needs a case with singular F0")
        obs = sweep_pole_array(nf, ts, cfg.C, cfg.side, min(abs(x) for x in xs), (lo, hi), rtol=cfg.rtol)
    else:
        init = _seed(cfg, nf, ts, cfg.waypoints[0])
        obs = detect_poles(nf, init, PathSpec(tuple(cfg.waypoints), rel_tol=cfg.rtol, abs_tol=cfg.rtol * 1e-3,
                                              method="DOP853"))
    rows = [{"w_re": o.location.real, "w_im": o.location.imag, "order": o.order_estimate,
             "a_re": o.laurent_coeff.real, "a_im": o.laurent_coeff.imag, "uncertainty": o.uncertainty} for o in obs]
    return {"spec": cfg.spec().to_json(), "C": _pair(cfg.C), "side": cfg.side, "poles": rows}, rows, obs


def cmd_predict(cfg: RunConfig):
    spec = cfg.spec()
    if cfg.C == 0:
        return {"w_pred": [], "reason": "C = 0: no poles on this side"}, []
    preds = predict_poles_case(spec, cfg.C, cfg.side, cfg.n)
    rows = [{"n": p.n, "w_re": p.w_pred.real, "w_im": p.w_pred.imag, "xi_re": p.xi_s.real, "xi_im": p.xi_s.imag}
            for p in preds]
    return {"spec": spec.to_json(), "C": _pair(cfg.C), "side": cfg.side,
            "w_pred": [p.to_json() for p in preds]}, rows


def cmd_compare(cfg: RunConfig):
    _, _, obs = cmd_poles(cfg)
    preds = predict_poles_case(cfg.spec(), cfg.C, cfg.side, cfg.n)
    rep = compare_predictions(obs, preds)
    rows = [{"n": r["n"], "pred_re": r["w_pred"].real, "pred_im": r["w_pred"].imag, "obs_re": r["w_obs"].real,
             "obs_im": r["w_obs"].imag, "gap": r["gap"]} for r in rep.rows]
    return rep.to_json(), rows


def selftest_checks():
    """Quick invariant checks: list of (label, passed, detail)."""
    out = []
    rng = np.random.default_rng(0)
    xs = rng.uniform(-3, 3, 20) + 1j * rng.uniform(-3, 3, 20)
    for case, A in (("PIII_i", 1), ("PIII_ii", 1), ("PIV_1", None), ("PIV_2", None)):
        r = max(abs(f0_ode_residual(case, A, x)) for x in xs)
        out.append((f"F0 ODE residual {case}", r < 1e-9, f"{r:.2e}"))
    nf = normalize(EquationSpec(Case.PIII_ii, 0, 0.7, 1))
    ts = compute_levels(nf, 3, 12)
    F = f0_closed_form("PIII_ii", 1)
    d = max(abs(ts.level(k).coeffs[0] - F.taylor(3)[k - 1]) for k in range(1, 4))
    out.append(("F0 Taylor vs level leading coefficients", d < 1e-10, f"{d:.2e}"))
    r = abs(truncation_residual(nf, ts.h0, 30.0))
    out.append(("truncated h0 residual small at w=30", r < 1e-10, f"{r:.2e}"))
    p = predict_poles(0.5, 1, 6, "upper", [10])[0].w_pred
    out.append(("pole formula example n=10", abs(p - (-3.8620 + 62.0465j)) < 1e-3, f"{p:.4f}"))
    return out


def cmd_selftest(cfg: RunConfig):
    checks = selftest_checks()
    rows = [{"check": c, "passed": bool(ok), "detail": d} for c, ok, d in checks]
    return {"checks": rows, "passed": all(r["passed"] for r in rows)}, rows


HANDLERS = {"series": cmd_series, "sum": cmd_sum, "integrate": cmd_integrate,
            "poles": lambda cfg: cmd_poles(cfg)[:2], "predict": cmd_predict, "compare": cmd_compare,
            "selftest": cmd_selftest}


# ---------------------------------------------------------------------------
# output


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, complex):
        return _pair(o)
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.complexfloating):
        return _pair(o)
    if isinstance(o, np.bool_):
        return bool(o)
    raise TypeError(f"not serializable: {type(o)}")


def _csv(rows) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    wr = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
    wr.writeheader()
    for r in rows:
        wr.writerow(r)
    return buf.getvalue()


def write_atomic(path: str, text: str):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    with os.fdopen(fd, "w") as f:
        f.write(text)
    os.replace(tmp, path)


def run(command: str, cfg: RunConfig, stdout=None) -> int:
    stdout = stdout or sys.stdout
    cfg.validate(command)
    report, rows = HANDLERS[command](cfg)
    text = _dumps(report) if cfg.format == "json" else _csv(rows)
    if cfg.out:
        write_atomic(os.path.join(cfg.out, f"{command}.{cfg.format}"), text)
    else:
        stdout.write(text)
    if command == "selftest":
        for r in report["checks"]:
            print(f"{'PASS' if r['passed'] else 'FAIL'}  {r['check']}  ({r['detail']})", file=sys.stderr)
        return 0 if report["passed"] else 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tronquee", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON config file; its values override the flags")
    p.add_argument("--case", default="PIII_ii", choices=[c.value for c in Case])
    p.add_argument("--alpha", default="0")
    p.add_argument("--beta", default="0")
    p.add_argument("--A", default=None, help="branch constant (PIII_i, PIII_ii, PIV_3)")
    p.add_argument("--N", type=int, default=30)
    p.add_argument("--K", type=int, default=3)
    p.add_argument("--C", default="0")
    p.add_argument("--side", default="upper", choices=["upper", "lower", "plus", "minus"])
    p.add_argument("--phi", type=float, default=None)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--rtol", type=float, default=1e-11)
    p.add_argument("--w", action="append", default=[], help="evaluation point (repeatable)")
    p.add_argument("--waypoint", action="append", default=[], help="path waypoint (repeatable)")
    p.add_argument("--n", default="1..10", help="index range a..b or a list a,b,c")
    p.add_argument("--level-sweep", type=float, nargs=2, default=None, metavar=("IM_LO", "IM_HI"),
                   help="sweep along |xi| = e^-0.8 |xi_s| between these |Im w|")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.add_argument("--format", default="json", choices=["json", "csv"])
    return p


def config_from_args(ns) -> RunConfig:
    cfg = RunConfig(case=ns.case, alpha=_parse_complex(ns.alpha), beta=_parse_complex(ns.beta),
                    A=None if ns.A is None else _parse_complex(ns.A), N=ns.N, K=ns.K, C=_parse_complex(ns.C),
                    side=ns.side, phi=ns.phi, tol=ns.tol, rtol=ns.rtol, w=[_parse_complex(z) for z in ns.w],
                    waypoints=[_parse_complex(z) for z in ns.waypoint], n=_parse_range(ns.n),
                    level_sweep=ns.level_sweep, seed=ns.seed, out=ns.out, format=ns.format)
    if ns.config:
        try:
            with open(ns.config) as f:
                override = json.load(f)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config: {exc}") from exc
        merged = cfg.to_json()
        merged.update(override)
        cfg = RunConfig.from_json(merged)
    return cfg


def _error(kind: str, msg: str):
    sys.stderr.write(json.dumps({"error": kind, "message": msg}, sort_keys=True) + "\n")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and 2
    try:
        cfg = config_from_args(ns)
        return run(ns.command, cfg)
    except (UsageError, ValueError) as exc:
        # DomainError and BranchConstraintError are ValueErrors: bad input, not bad numerics
        _error("usage", str(exc))
        return 2
    except (TronqueeError, ArithmeticError) as exc:
        _error("numeric", str(exc))
        return 1
