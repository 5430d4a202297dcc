"""Reference (numpy) implementation of the numeric kernels.

Semantics must match ``_ckernels.pyx`` to rounding; see ``kernels.py``.
"""

import numpy as np


def panels_exp(coef, s0, s1, t0, h, c, a, scale, shift, nodes, weights):
    """Gauss-Legendre sums of ``q_k(s) * f(t0_k + h_k*s) * h_k`` over panels.

    ``coef[k]`` holds the power coefficients of ``q_k`` in the scaled local
    variable ``s`` in [0, 1]; panel ``k`` covers ``[s0[k], s1[k]]``.
    ``f(t) = sum_i c_i * exp(a_i * (scale*t + shift))``.

    Returns (whole, halves, abs_halves): the rule on the panel, the sum of the
    rule on its two halves, and the same with ``|integrand|``.
    """
    coef = np.asarray(coef, dtype=float)
    s0 = np.asarray(s0, dtype=float)
    s1 = np.asarray(s1, dtype=float)
    t0 = np.asarray(t0, dtype=float)
    h = np.asarray(h, dtype=float)
    c = np.asarray(c, dtype=float)
    a = np.asarray(a, dtype=float)
    mid = 0.5 * (s0 + s1)

    def rule(lo, hi):
        width = hi - lo
        s = lo[:, None] + width[:, None] * nodes[None, :]
        q = np.zeros_like(s)
        for j in range(coef.shape[1] - 1, -1, -1):
            q = q * s + coef[:, j : j + 1]
        x = scale * (t0[:, None] + h[:, None] * s) + shift
        f = np.exp(x[:, :, None] * a[None, None, :]) @ c
        vals = q * f
        fac = (width * h)[:, None]
        return (vals * weights * fac).sum(axis=1), (np.abs(vals) * weights * fac).sum(axis=1)

    whole, _ = rule(s0, s1)
    left, left_abs = rule(s0, mid)
    right, right_abs = rule(mid, s1)
    return whole, left + right, left_abs + right_abs


def lattice_exp_sums(x, y, c, a):
    """``(sum_k f(x_k) * y_k, sum_k f(x_k))`` with ``f(x) = sum_i c_i exp(a_i x)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    f = np.exp(np.multiply.outer(x, np.asarray(a, dtype=float))) @ np.asarray(c, dtype=float)
    return float(f @ y), float(f.sum())
