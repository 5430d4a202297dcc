"""H^g on twist filtrations, its derivatives, weighted S / Ding / delta.

Everything reduces to one-dimensional integrals: an exact pushforward density
along ``<., xi>`` followed by a single adaptive quadrature of the weight.
With ``I(xi) = int g(-<alpha, xi>) dnu_P`` we have ``H^g = log I`` and

    grad H = -int alpha g'(-<alpha, xi>) dnu / I
    Hess H = int alpha alpha^T g''(-<alpha, xi>) dnu / I - grad grad^T.

The twist ``a F_{triv,xi}(b)`` has concave transform ``a<alpha, xi> + b`` and
slope ``b``, so the shift cancels in ``mu - G`` and H^g only sees ``a xi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import rational as rq
from .dhm import _lattice_values, coordinate_pushforwards
from .errors import InvalidInput
from .geom import Polytope, support_value
from .quad import integrate_against
from .weights import PolytopeWeight, WeightFn

DEFAULT_REL_TOL = 1e-13


@dataclass(frozen=True)
class Twist:
    """The filtration ``a * F_{triv, xi}(b)``."""

    xi: tuple
    a: float = 1.0
    b: float = 0.0

    def __post_init__(self):
        if not self.a > 0:
            raise InvalidInput("twist scale must be positive")

    @property
    def slope(self):
        """Log canonical slope: ``mu(F_triv) = 0`` rescaled and shifted."""
        return self.b

    def concave_transform(self, alpha: Sequence) -> float:
        return self.a * float(rq.dot(rq.to_vector(alpha), rq.to_vector(self.xi))) + self.b


@dataclass
class InvariantReport:
    value: float
    gradient: np.ndarray
    hessian: np.ndarray
    quadrature_error: float
    snap_error: float = 0.0
    extras: dict = field(default_factory=dict)

    @property
    def hessian_min_eig(self) -> float:
        return float(np.linalg.eigvalsh(self.hessian).min())

    @property
    def psd_certified(self) -> bool:
        return self.hessian_min_eig >= -1e-10

    def to_json(self) -> dict:
        out = {
            "value": rq.fmt_float(self.value),
            "gradient": [rq.fmt_float(x) for x in self.gradient],
            "hessian": [[rq.fmt_float(x) for x in row] for row in self.hessian],
            "hessian_min_eig": rq.fmt_float(self.hessian_min_eig),
            "quadrature_error": rq.fmt_float(self.quadrature_error),
            "snap_error": rq.fmt_float(self.snap_error),
        }
        out.update(self.extras)
        return out


def _coweight(P: Polytope, xi) -> tuple[tuple[Fraction, ...], float]:
    if isinstance(xi, Twist):
        xi = xi.xi
    vec, err = rq.snap_vector(xi)
    if len(vec) != P.dim:
        raise InvalidInput(f"coweight of length {len(vec)} for a polytope of dim {P.dim}")
    return vec, err


def _is_zero(v) -> bool:
    return all(x == 0 for x in v)


def _is_constant(w) -> bool:
    return isinstance(w, WeightFn) and all(a == 0 for _, a in w.terms)


def working_interval(P: Polytope, xi) -> tuple[float, float]:
    """Range of ``-<alpha, xi>`` over P, padded by 1 on each side."""
    xi = rq.to_vector(xi)
    return (-float(support_value(P, tuple(-x for x in xi))) - 1, float(support_value(P, xi)) + 1)


def _integrate(density, g, order: int, scale: float, rel_tol: float):
    return integrate_against(density, g.integrand(order, scale=scale), rel_tol)


def hg_with_error(P: Polytope, g, xi, a: float = 1.0, rel_tol: float = DEFAULT_REL_TOL):
    """``(H^g, quadrature error)`` of ``a F_{triv, xi}``."""
    vec, _ = _coweight(P, xi)
    if _is_zero(vec):
        return math.log(g(0.0)), 0.0
    mass, _, _ = coordinate_pushforwards(P, vec, 0)
    val, err = _integrate(mass, g, 0, -float(a), rel_tol)
    return math.log(val), err / val


def hg(P: Polytope, g, twist, rel_tol: float = DEFAULT_REL_TOL, normalization: str = "probability") -> float:
    """H^g of a twist (a :class:`Twist` or a bare coweight).

    ``normalization="lebesgue"`` adds ``log vol(P)``.
    """
    if isinstance(twist, Twist):
        val, _ = hg_with_error(P, g, twist.xi, twist.a, rel_tol)
    else:
        val, _ = hg_with_error(P, g, twist, 1.0, rel_tol)
    if normalization == "lebesgue":
        val += math.log(P.volume)
    elif normalization != "probability":
        raise InvalidInput(f"unknown normalization {normalization!r}")
    return val


def hg_grad_hess(P: Polytope, g, xi, rel_tol: float = DEFAULT_REL_TOL) -> InvariantReport:
    vec, snap_err = _coweight(P, xi)
    r = P.dim
    if _is_zero(vec):
        g0, g1, g2 = g(0.0), g(0.0, 1), g(0.0, 2)
        bary = np.array([float(x) for x in P.barycenter])
        mom2 = np.array([[float(x) for x in row] for row in P.second_moments])
        grad = -g1 / g0 * bary
        hess = g2 / g0 * mom2 - np.outer(grad, grad)
        return InvariantReport(math.log(g0), grad, hess, 0.0, snap_err)

    mass, first, second = coordinate_pushforwards(P, vec, 2)
    ival, ierr = _integrate(mass, g, 0, -1.0, rel_tol)
    jv = np.zeros(r)
    je = np.zeros(r)
    kv = np.zeros((r, r))
    ke = np.zeros((r, r))
    for i in range(r):
        v, e = _integrate(first[i], g, 1, -1.0, rel_tol)
        jv[i], je[i] = -v, e
        for j in range(i, r):
            v, e = _integrate(second[i][j], g, 2, -1.0, rel_tol)
            kv[i, j] = kv[j, i] = v
            ke[i, j] = ke[j, i] = e
    grad = jv / ival
    hess = kv / ival - np.outer(grad, grad)
    hess = 0.5 * (hess + hess.T)
    grad_err = je / ival + np.abs(jv) * ierr / ival**2
    hess_err = ke / ival + np.abs(kv) * ierr / ival**2 + 2 * np.outer(np.abs(grad), grad_err)
    qerr = float(max(ierr / ival, grad_err.max(), hess_err.max()))
    return InvariantReport(math.log(ival), grad, hess, qerr, snap_err)


def weighted_barycenter(P: Polytope, gp, xi, rel_tol: float = DEFAULT_REL_TOL):
    """``b = int alpha gp(-<alpha, xi>) dnu / int gp(-<alpha, xi>) dnu``.

    Returns ``(b, error)``; entries are exact Fractions when the weight is
    constant or ``xi = 0``.
    """
    vec, _ = _coweight(P, xi)
    if _is_zero(vec) or _is_constant(gp):
        return P.barycenter, 0.0
    mass, first, _ = coordinate_pushforwards(P, vec, 1)
    vv, ve = _integrate(mass, gp, 0, -1.0, rel_tol)
    out, err = [], 0.0
    for dens in first:
        v, e = _integrate(dens, gp, 0, -1.0, rel_tol)
        out.append(v / vv)
        err = max(err, e / vv + abs(v) * ve / vv**2)
    return tuple(out), err


def weighted_volume(P: Polytope, gp, xi, rel_tol: float = DEFAULT_REL_TOL) -> float:
    """``v^{gp} = int gp(-<alpha, xi>) dnu_P``."""
    vec, _ = _coweight(P, xi)
    if _is_zero(vec):
        return float(gp(0.0))
    mass, _, _ = coordinate_pushforwards(P, vec, 0)
    return _integrate(mass, gp, 0, -1.0, rel_tol)[0]


def _pair(b, eta):
    eta = rq.to_vector(eta) if all(isinstance(x, (int, Fraction, str)) for x in eta) else eta
    if all(isinstance(x, Fraction) for x in b) and all(isinstance(x, Fraction) for x in eta):
        return rq.dot(b, eta)
    return float(sum(float(x) * float(y) for x, y in zip(b, eta)))


def s_weighted(P: Polytope, gp, xi, eta, rel_tol: float = DEFAULT_REL_TOL):
    """Weighted expected vanishing order ``S^{gp, xi}`` of the twist by ``eta``."""
    if len(eta) != P.dim:
        raise InvalidInput("direction has the wrong length")
    b, _ = weighted_barycenter(P, gp, xi, rel_tol)
    return _pair(b, eta)


def ding(P: Polytope, gp, xi, eta, rel_tol: float = DEFAULT_REL_TOL):
    """Weighted Ding invariant ``mu - S`` of a twist; twists have ``mu = 0``."""
    return -s_weighted(P, gp, xi, eta, rel_tol)


def s_finite_level(P: Polytope, gp, xi, eta, m: int) -> float:
    """``S_m``: the monomial basis of ``R_m`` is adapted to every twist, so

        S_m = sum gp(-<alpha, xi>/m) <alpha, eta>/m / sum gp(-<alpha, xi>/m)

    over the lattice points of ``mP``.
    """
    if m < 1:
        raise InvalidInput("level m must be >= 1")
    xi_v, _ = _coweight(P, xi)
    eta_v, _ = _coweight(P, eta)
    xs, dx, pts = _lattice_values(P, xi_v, m)
    ys, dy, _ = _lattice_values(P, eta_v, m, pts)
    x = -np.asarray(xs, dtype=float) / (dx * m)
    y = np.asarray(ys, dtype=float) / (dy * m)
    if isinstance(gp, WeightFn):
        from . import kernels

        c, a = gp._arrays(0)
        num, den = kernels.lattice_exp_sums(x, y, c, a)
    else:
        w = np.asarray(gp(x), dtype=float)
        num, den = float(w @ y), float(w.sum())
    return num / den


def weight_normalized(P: Polytope, g0: PolytopeWeight, rel_tol: float = DEFAULT_REL_TOL):
    """Residuals ``int alpha_i g0(alpha) dnu_P``; ``g0`` is a weight function
    when all vanish."""
    vec, _ = _coweight(P, g0.xi0)
    base = g0.base
    if _is_constant(base):
        c = sum(ci for ci, _ in base.terms)
        return tuple(c * x for x in P.barycenter)
    if _is_zero(vec):
        return tuple(base(0.0) * float(x) for x in P.barycenter)
    _, first, _ = coordinate_pushforwards(P, vec, 1)
    return tuple(_integrate(d, base, 0, -1.0, rel_tol)[0] for d in first)


@dataclass
class GeodesicReport:
    samples: list
    residuals: list[float]
    min_residual: float
    midpoint_residual: float | None
    strict: bool | None
    passed: bool

    def to_json(self) -> dict:
        return {
            "samples": [rq.fmt_float(float(t)) for t in self.samples],
            "residuals": [rq.fmt_float(x) for x in self.residuals],
            "min_residual": rq.fmt_float(self.min_residual),
            "midpoint_residual": None
            if self.midpoint_residual is None
            else rq.fmt_float(self.midpoint_residual),
            "strict": self.strict,
            "passed": self.passed,
        }


def geodesic_check(P: Polytope, g, xi, eta, t_samples, rel_tol: float = DEFAULT_REL_TOL) -> GeodesicReport:
    """Convexity residuals ``(1-t) H(xi) + t H(eta) - H((1-t) xi + t eta)``
    along the geodesic of twists."""
    xi_v, _ = _coweight(P, xi)
    eta_v, _ = _coweight(P, eta)
    ts = [rq.to_fraction(t) for t in t_samples]
    if any(t < 0 or t > 1 for t in ts):
        raise InvalidInput("geodesic samples must lie in [0, 1]")
    h0 = hg(P, g, xi_v, rel_tol)
    h1 = hg(P, g, eta_v, rel_tol)
    res = []
    for t in ts:
        mid = tuple((1 - t) * a + t * b for a, b in zip(xi_v, eta_v))
        res.append(float(1 - t) * h0 + float(t) * h1 - hg(P, g, mid, rel_tol))
    half = Fraction(1, 2)
    mid_res = res[ts.index(half)] if half in ts else None
    strict = None
    if xi_v != eta_v and mid_res is not None:
        strict = mid_res > 0
    min_res = min(res) if res else 0.0
    passed = min_res >= -1e-10 and strict is not False
    return GeodesicReport(ts, res, min_res, mid_res, strict, passed)


def s_toric_valuation(P: Polytope, gp, xi, rho, rel_tol: float = DEFAULT_REL_TOL):
    """``S^{gp, xi}(wt_rho) = a(rho) + <b, rho>``: the valuation's filtration
    is the twist by ``rho`` shifted by its log discrepancy ``a(rho)``."""
    b, _ = weighted_barycenter(P, gp, xi, rel_tol)
    rho = rq.to_vector(rho)
    return support_value(P, rho) + _pair(b, rho)


def delta_ratio(P: Polytope, gp, xi, rho, rel_tol: float = DEFAULT_REL_TOL):
    rho = rq.to_vector(rho)
    return support_value(P, rho) / s_toric_valuation(P, gp, xi, rho, rel_tol)


def delta_toric(P: Polytope, gp, xi, rel_tol: float = DEFAULT_REL_TOL):
    """Toric-restricted weighted delta: ``min_j c_j / (c_j + <b, rho_j>)``.

    Returns ``(value, minimizing facet normal)``; exact when ``b`` is.
    Ties go to the lexicographically least normal.
    """
    b, _ = weighted_barycenter(P, gp, xi, rel_tol)
    best = None
    for f in P.facets:
        ratio = f.offset / (f.offset + _pair(b, f.normal))
        key = (ratio, f.normal)
        if best is None or key < best:
            best = key
    return best[0], best[1]
