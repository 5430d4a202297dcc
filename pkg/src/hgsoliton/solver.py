"""Damped Newton minimization of xi -> H^g(xi) with an optimality certificate."""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field

import numpy as np

from . import rational as rq
from .errors import HgError, NotCoercive
from .geom import Polytope
from .invariants import (
    DEFAULT_REL_TOL,
    delta_toric,
    ding,
    hg_grad_hess,
    hg_with_error,
    weight_normalized,
)
from .weights import PolytopeWeight, constant_weight, derivative

log = logging.getLogger(__name__)

ARMIJO_SLOPE = 1e-4
BACKTRACK = 0.5
MAX_HALVINGS = 60
HESS_FLOOR = 1e-12


@dataclass
class SolitonCert:
    xi0: np.ndarray
    hg_value: float
    grad_norm: float
    hessian_min_eig: float
    ding_residuals: np.ndarray
    delta_at_min: float
    iterations: int
    converged: bool
    quadrature_error: float = 0.0
    history: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "xi0": [rq.fmt_float(x) for x in self.xi0],
            "hg_value": rq.fmt_float(self.hg_value),
            "hg_label": "h^g (toric twist restriction)",
            "grad_norm": rq.fmt_float(self.grad_norm),
            "hessian_min_eig": rq.fmt_float(self.hessian_min_eig),
            "ding_residuals": [rq.fmt_float(x) for x in self.ding_residuals],
            "delta_at_min": _fmt(self.delta_at_min),
            "iterations": self.iterations,
            "converged": self.converged,
            "quadrature_error": rq.fmt_float(self.quadrature_error),
        }

    def digest(self) -> str:
        blob = json.dumps(self.to_json(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def _fmt(x):
    from fractions import Fraction

    return rq.fmt_rational(x) if isinstance(x, Fraction) else rq.fmt_float(x)


def _objective(P, g, xi, rel_tol):
    return hg_with_error(P, g, tuple(float(x) for x in xi), 1.0, rel_tol)[0]


def minimize_hg(
    P: Polytope,
    g,
    tol: float = 1e-10,
    max_iter: int = 100,
    x0=None,
    rel_tol: float = DEFAULT_REL_TOL,
) -> SolitonCert:
    """Damped Newton from ``x0`` (default the origin) with Armijo backtracking.

    Raises :class:`NotCoercive` unless the origin is interior to ``P``. On
    exhausting ``max_iter`` the certificate comes back with
    ``converged=False``.

    Each history entry is ``(kind, H, grad_norm, step)``, ``kind`` being
    ``"armijo"`` for a line-search step with verified decrease or ``"polish"``
    for a full Newton step whose predicted decrease is below the resolution of
    H in floating point.
    """
    if not P.contains_origin_in_interior():
        raise NotCoercive("origin is not interior to the polytope; H^g is not coercive")
    r = P.dim
    xi = np.zeros(r) if x0 is None else np.asarray(x0, dtype=float).copy()
    history = []
    converged = False
    it = 0
    rep = hg_grad_hess(P, g, tuple(xi), rel_tol)
    for it in range(max_iter + 1):
        gnorm = float(np.linalg.norm(rep.gradient))
        if gnorm <= tol:
            converged = True
            break
        if it == max_iter:
            break
        evals, vecs = np.linalg.eigh(rep.hessian)
        shift = HESS_FLOOR if evals.min() < HESS_FLOOR else 0.0
        step = -vecs @ ((vecs.T @ rep.gradient) / (evals + shift))
        slope = float(rep.gradient @ step)
        h0 = rep.value
        t = 1.0
        kind = None
        for _ in range(MAX_HALVINGS):
            trial = _objective(P, g, xi + t * step, rel_tol)
            if trial <= h0 + ARMIJO_SLOPE * t * slope and trial < h0:
                kind = "armijo"
                break
            t *= BACKTRACK
        if kind is None:
            if abs(slope) <= 1e-13 * max(1.0, abs(h0)):
                t, kind = 1.0, "polish"
            else:
                log.warning("line search failed at iteration %d (slope %.3g)", it, slope)
                break
        xi = xi + t * step
        rep = hg_grad_hess(P, g, tuple(xi), rel_tol)
        history.append((kind, rep.value, float(np.linalg.norm(rep.gradient)), t))

    gp = derivative(g)
    ding_res = np.array(
        [float(ding(P, gp, tuple(xi), tuple(float(i == j) for j in range(r)), rel_tol)) for i in range(r)]
    )
    delta, _ = delta_toric(P, gp, tuple(xi), rel_tol)
    return SolitonCert(
        xi0=xi,
        hg_value=rep.value,
        grad_norm=float(np.linalg.norm(rep.gradient)),
        hessian_min_eig=rep.hessian_min_eig,
        ding_residuals=ding_res,
        delta_at_min=delta,
        iterations=len(history),
        converged=converged,
        quadrature_error=rep.quadrature_error,
        history=history,
    )


@dataclass
class PolystabilityReport:
    cert: SolitonCert
    weight_residuals: tuple
    delta_at_min: object
    delta_classical: object
    delta_classical_normal: tuple
    verdict: str
    passed: bool

    def to_json(self) -> dict:
        return {
            "certificate": self.cert.to_json(),
            "weight_residuals": [_fmt(x) for x in self.weight_residuals],
            "delta_at_min": _fmt(self.delta_at_min),
            "delta_classical": _fmt(self.delta_classical),
            "delta_classical_normal": list(self.delta_classical_normal),
            "verdict": self.verdict,
            "passed": self.passed,
        }


def polystable_report(P: Polytope, g, tol: float = 1e-10, residual_tol: float = 1e-9) -> PolystabilityReport:
    """Solve, then check that ``g0 = g'(-<., xi0>)`` is a weight function and
    the weighted delta at ``xi0`` is 1."""
    cert = minimize_hg(P, g, tol=tol)
    gp = derivative(g)
    res = weight_normalized(P, PolytopeWeight(gp, tuple(cert.xi0)))
    d0, n0 = delta_toric(P, constant_weight(), tuple(0 for _ in range(P.dim)))
    ok = (
        cert.converged
        and max(abs(float(x)) for x in res) <= residual_tol
        and max(abs(cert.ding_residuals)) <= residual_tol
        and abs(float(cert.delta_at_min) - 1) <= 1e-8
    )
    verdict = "g'-weighted K-polystable toric data" if ok else "not certified"
    return PolystabilityReport(cert, res, cert.delta_at_min, d0, n0, verdict, ok)


@dataclass
class SweepRow:
    weight_id: str
    xi0: np.ndarray | None
    hg_value: float | None
    digest: str | None
    converged: bool
    error: str | None = None

    def to_json(self) -> dict:
        return {
            "weight_id": self.weight_id,
            "xi0": None if self.xi0 is None else [rq.fmt_float(x) for x in self.xi0],
            "hg_value": None if self.hg_value is None else rq.fmt_float(self.hg_value),
            "digest": self.digest,
            "converged": self.converged,
            "error": self.error,
        }


def _sweep_one(args) -> SweepRow:
    P, wid, g, tol = args
    try:
        cert = minimize_hg(P, g, tol=tol)
    except HgError as exc:
        return SweepRow(wid, None, None, None, False, f"{type(exc).__name__}: {exc}")
    return SweepRow(wid, cert.xi0, cert.hg_value, cert.digest(), cert.converged)


def weight_sweep(P: Polytope, family, tol: float = 1e-10, workers: int = 1) -> list[SweepRow]:
    """Tabulate the minimizer across a family of weights.

    ``family`` is a list of weights or ``(id, weight)`` pairs; rows keep input
    order and per-row failures are recorded rather than raised.
    """
    items = []
    for k, entry in enumerate(family):
        wid, g = entry if isinstance(entry, tuple) else (str(entry) or f"w{k}", entry)
        items.append((P, wid, g, tol))
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(workers) as ex:
            return list(ex.map(_sweep_one, items))
    return [_sweep_one(it) for it in items]
