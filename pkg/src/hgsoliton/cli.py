"""Command-line front end.

Every command writes one JSON report::

    {"command", "version", "inputs", "inputs_digest", "results",
     "quadrature_error", "wall_time"}

``results`` depends only on the inputs and the version; ``wall_time`` is the
only non-deterministic field. Exit codes: 0 success, 2 invalid input,
3 not coercive, 4 no convergence / quadrature tolerance not met.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import __version__
from . import rational as rq
from .dhm import d1, discrete_dh, twist_measure
from .errors import HgError, InvalidInput
from .geom import Polytope, polytope_from_json
from .invariants import (
    delta_toric,
    ding,
    geodesic_check,
    hg_grad_hess,
    s_weighted,
    working_interval,
)
from .rankone import Profile, beta_tilde, minimize_beta
from .solver import minimize_hg, weight_sweep
from .weights import check_admissible, constant_weight, derivative, weight_from_json

COMMANDS = ("soliton", "eval", "ding", "dh", "d1", "delta", "geodesic", "rankone", "sweep", "check")

log = logging.getLogger("hgsoliton")


def _load_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise InvalidInput(f"no such file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"{path}: invalid JSON ({exc})") from exc


def _polytope(args) -> Polytope:
    if not args.polytope:
        raise InvalidInput("--polytope is required")
    return polytope_from_json(_load_json(args.polytope))


def _weight(args, required: bool = True):
    if not args.weight:
        if required:
            raise InvalidInput("--weight is required")
        return None
    return weight_from_json(_load_json(args.weight))


def _vector(text: str | None, P: Polytope, name: str) -> tuple[Fraction, ...]:
    if text is None:
        raise InvalidInput(f"--{name} is required")
    parts = [p for p in text.replace(" ", "").split(",") if p]
    vec = rq.to_vector(parts)
    if len(vec) != P.dim:
        raise InvalidInput(f"--{name} has {len(vec)} entries, polytope has dim {P.dim}")
    return vec


def _fmt_vec(v):
    return [rq.fmt_rational(x) if isinstance(x, Fraction) else rq.fmt_float(x) for x in v]


def _fmt_num(x):
    return rq.fmt_rational(x) if isinstance(x, Fraction) else rq.fmt_float(x)


def _cmd_soliton(args, inputs):
    P, g = _polytope(args), _weight(args)
    inputs.update(polytope=P.to_json(), weight=g.to_json(), tol=args.tol)
    cert = minimize_hg(P, g, tol=args.tol)
    exit_code = 0 if cert.converged else 4
    return cert.to_json(), cert.quadrature_error, exit_code


def _cmd_eval(args, inputs):
    P, g = _polytope(args), _weight(args)
    xi = _vector(args.xi, P, "xi")
    inputs.update(polytope=P.to_json(), weight=g.to_json(), xi=_fmt_vec(xi), normalization=args.normalization)
    rep = hg_grad_hess(P, g, xi)
    out = rep.to_json()
    if args.normalization == "lebesgue":
        import math

        out["value"] = rq.fmt_float(rep.value + math.log(P.volume))
    out["normalization"] = args.normalization
    return out, rep.quadrature_error, 0


def _cmd_ding(args, inputs):
    P, g = _polytope(args), _weight(args)
    xi, eta = _vector(args.xi, P, "xi"), _vector(args.eta, P, "eta")
    inputs.update(polytope=P.to_json(), weight=g.to_json(), xi=_fmt_vec(xi), eta=_fmt_vec(eta))
    gp = derivative(g)
    return {"ding": _fmt_num(ding(P, gp, xi, eta)), "s_weighted": _fmt_num(s_weighted(P, gp, xi, eta))}, 0.0, 0


def _cmd_dh(args, inputs):
    P = _polytope(args)
    xi = _vector(args.xi, P, "xi")
    inputs.update(polytope=P.to_json(), xi=_fmt_vec(xi), m=args.m, normalization=args.normalization)
    nu = discrete_dh(P, xi, args.m) if args.m else twist_measure(P, xi, args.normalization)
    out = nu.to_json()
    out["kind"] = nu.kind
    return out, 0.0, 0


def _cmd_d1(args, inputs):
    P = _polytope(args)
    xi, eta = _vector(args.xi, P, "xi"), _vector(args.eta, P, "eta")
    inputs.update(polytope=P.to_json(), xi=_fmt_vec(xi), eta=_fmt_vec(eta))
    return {"d1": _fmt_num(d1(P, xi, eta))}, 0.0, 0


def _cmd_delta(args, inputs):
    P = _polytope(args)
    g = _weight(args, required=False)
    xi = _vector(args.xi or ",".join("0" * P.dim), P, "xi")
    inputs.update(polytope=P.to_json(), weight=None if g is None else g.to_json(), xi=_fmt_vec(xi))
    gp = constant_weight() if g is None else derivative(g)
    value, normal = delta_toric(P, gp, xi)
    return {"delta_toric": _fmt_num(value), "argmin_normal": list(normal), "restricted_to": "toric valuations"}, 0.0, 0


def _cmd_geodesic(args, inputs):
    P, g = _polytope(args), _weight(args)
    xi, eta = _vector(args.xi, P, "xi"), _vector(args.eta, P, "eta")
    n = max(2, args.samples)
    ts = [Fraction(k, n - 1) for k in range(n)]
    if Fraction(1, 2) not in ts:
        ts = sorted(ts + [Fraction(1, 2)])
    inputs.update(polytope=P.to_json(), weight=g.to_json(), xi=_fmt_vec(xi), eta=_fmt_vec(eta), samples=n)
    return geodesic_check(P, g, xi, eta, ts).to_json(), 0.0, 0


def _cmd_rankone(args, inputs):
    if not args.profile:
        raise InvalidInput("--profile is required")
    p = Profile.from_json(_load_json(args.profile))
    g = _weight(args)
    inputs.update(profile=p.to_json(), weight=g.to_json(), eval=args.eval, minimize=args.minimize)
    if args.eval is not None:
        return {"a": _fmt_num(args.eval), "beta_tilde": rq.fmt_float(beta_tilde(p, g, args.eval))}, 0.0, 0
    return minimize_beta(p, g).to_json(), 0.0, 0


def _cmd_sweep(args, inputs):
    P = _polytope(args)
    if not args.weights_dir:
        raise InvalidInput("--weights-dir is required")
    wdir = Path(args.weights_dir)
    if not wdir.is_dir():
        raise InvalidInput(f"not a directory: {wdir}")
    family = [(f.stem, weight_from_json(_load_json(str(f)))) for f in sorted(wdir.glob("*.json"))]
    if not family:
        raise InvalidInput(f"no weight files in {wdir}")
    inputs.update(polytope=P.to_json(), weights={k: g.to_json() for k, g in family}, tol=args.tol)
    rows = weight_sweep(P, family, tol=args.tol, workers=args.workers)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["weight_id"] + [f"xi0_{i}" for i in range(P.dim)] + ["hg_value", "digest", "converged", "error"])
    for row in rows:
        j = row.to_json()
        writer.writerow([j["weight_id"]] + (j["xi0"] or [""] * P.dim) + [j["hg_value"] or "", j["digest"] or "", j["converged"], j["error"] or ""])
    if args.out:
        Path(args.out).with_suffix(".csv").write_text(buf.getvalue())
    return {"rows": [r.to_json() for r in rows], "csv": buf.getvalue()}, 0.0, 0


def _cmd_check(args, inputs):
    P = _polytope(args)
    g = _weight(args, required=False)
    inputs.update(polytope=P.to_json(), weight=None if g is None else g.to_json())
    out = {
        "polytope": {
            "dim": P.dim,
            "vertices": len(P.vertices),
            "volume": rq.fmt_rational(P.volume),
            "origin_interior": P.contains_origin_in_interior(),
            **P.facets_json(),
        }
    }
    passed = True
    if g is not None:
        lo, hi = working_interval(P, tuple(1 for _ in range(P.dim)))
        span = max(abs(lo), abs(hi))
        rep = check_admissible(g, (-span, span))
        out["admissibility"] = rep.to_json()
        passed = rep.passed
    out["passed"] = passed
    return out, 0.0, 0 if passed else 2


HANDLERS = {
    "soliton": _cmd_soliton,
    "eval": _cmd_eval,
    "ding": _cmd_ding,
    "dh": _cmd_dh,
    "d1": _cmd_d1,
    "delta": _cmd_delta,
    "geodesic": _cmd_geodesic,
    "rankone": _cmd_rankone,
    "sweep": _cmd_sweep,
    "check": _cmd_check,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hgsoliton", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--polytope")
        p.add_argument("--weight")
        p.add_argument("--xi")
        p.add_argument("--eta")
        p.add_argument("--m", type=int)
        p.add_argument("--tol", type=float, default=1e-10)
        p.add_argument("--normalization", choices=("probability", "lebesgue"), default="probability")
        p.add_argument("--out")
        p.add_argument("--profile")
        p.add_argument("--weights-dir", "--weights", dest="weights_dir")
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--samples", type=int, default=5)
        p.add_argument("--eval", type=float)
        p.add_argument("--minimize", action="store_true")
    return parser


def run(args) -> tuple[int, dict]:
    inputs: dict = {}
    t0 = time.perf_counter()
    report = {"command": args.command, "version": __version__}
    try:
        results, qerr, code = HANDLERS[args.command](args, inputs)
    except HgError as exc:
        print(f"hgsoliton {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        report.update(inputs=inputs, error={"type": type(exc).__name__, "message": str(exc)})
        return exc.exit_code, report
    digest = hashlib.sha256(json.dumps(inputs, sort_keys=True, default=str).encode()).hexdigest()
    report.update(
        inputs=inputs,
        inputs_digest=digest,
        results=results,
        quadrature_error=rq.fmt_float(qerr),
        wall_time=round(time.perf_counter() - t0, 6),
    )
    return code, report


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    code, report = run(args)
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
