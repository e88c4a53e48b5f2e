"""Bessel functions of the first kind, their running integrals and the
alternating Bessel sums.

Two independent evaluators are provided. The integral representation

    J_n(t) = (1/pi) * int_0^pi cos(n x - t sin x) dx

is evaluated with composite Gauss-Legendre panels and serves as the ground
truth. The fast path is Miller's backward recurrence normalised by
J_0 + 2 sum_k J_2k = 1, which yields every order up to ``nmax`` at once and
vectorises over arrays of arguments.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .quadrature import DEFAULT_DEGREE, QuadratureError, gl_rule, panel_rule

__all__ = [
    "BesselEvaluator",
    "bessel_j",
    "bessel_j_integral",
    "bessel_j_table",
    "identity_residual",
    "integral_G",
    "integral_G_table",
    "alternating_sums",
    "alternating_sums_table",
]

_RESCALE = 1e250
_TINY_T = 1e-8


def _miller_start(nmax, tmax):
    m = max(nmax, int(np.ceil(tmax)))
    m += 30 + int(np.ceil(20.0 * (max(tmax, 1.0) / 2.0) ** (1.0 / 3.0)))
    return m + (m % 2)


def bessel_j_table(nmax, t):
    """J_0 .. J_nmax at every point of ``t``.

    Returns an array of shape ``(nmax + 1,) + np.shape(t)``. Arguments must be
    nonnegative.
    """
    t = np.asarray(t, dtype=float)
    shape = t.shape
    tf = t.ravel()
    if np.any(tf < 0):
        raise ValueError("bessel_j_table expects nonnegative arguments")
    nmax = int(nmax)
    out = np.zeros((nmax + 1, tf.size))

    tiny = tf < _TINY_T
    if np.any(tiny):
        # two-term power series; relative error O(t^4)
        ts = tf[tiny]
        k = np.arange(nmax + 1)[:, None]
        half = ts[None, :] / 2.0
        with np.errstate(divide="ignore"):
            lead = np.where(k == 0, 1.0,
                            np.exp(k * np.log(np.where(half > 0, half, 1.0)) - gammaln(k + 1.0)))
        lead = np.where((half == 0) & (k > 0), 0.0, lead)
        out[:, tiny] = lead * (1.0 - half ** 2 / (k + 1.0))

    big = ~tiny
    if np.any(big):
        out[:, big] = _miller(nmax, tf[big])
    return out.reshape((nmax + 1,) + shape)


def _miller(nmax, t):
    M = _miller_start(nmax, float(t.max()))
    store = np.zeros((nmax + 1, t.size))
    two_over_t = 2.0 / t
    bjp = np.zeros_like(t)
    bj = np.ones_like(t)  # J_M up to scale
    norm = np.zeros_like(t)
    if M <= nmax:
        store[M] = bj
    if M % 2 == 0:
        norm += 2.0 * bj
    for k in range(M, 0, -1):
        bjm = k * two_over_t * bj - bjp
        bjp, bj = bj, bjm  # bj is now J_{k-1}
        huge = np.abs(bj) > _RESCALE
        if huge.any():
            bj[huge] /= _RESCALE
            bjp[huge] /= _RESCALE
            norm[huge] /= _RESCALE
            if k <= nmax:
                store[k:, huge] /= _RESCALE
        if k - 1 <= nmax:
            store[k - 1] = bj
        if (k - 1) % 2 == 0:
            norm += bj if k == 1 else 2.0 * bj
    return store / norm


def _integral_nodes(nmax_order, t, panels):
    # each panel spans at most about one oscillation of the integrand
    need = int(np.ceil(nmax_order + t)) + 1
    return panel_rule(0.0, np.pi, max(int(panels), need))


def bessel_j_integral(n, t, panels=64):
    """J_n(t) from the integral representation; ``n`` may be an array of
    nonnegative integers, ``t`` a scalar."""
    n_arr = np.atleast_1d(np.asarray(n, dtype=float))
    x, w = _integral_nodes(n_arr.max(initial=0.0), float(t), panels)
    vals = np.cos(np.outer(n_arr, x) - t * np.sin(x)) @ w / np.pi
    return vals if np.ndim(n) else float(vals[0])


def bessel_j(n, t, method="recurrence", panels=64):
    """J_n(t) for integer ``n >= 0`` and ``t >= 0``.

    Negative orders follow J_{-n} = (-1)^n J_n.
    """
    n = int(n)
    sign = -1.0 if (n < 0 and n % 2) else 1.0
    n = abs(n)
    if t < 0:
        raise ValueError("bessel_j is defined here for t >= 0")
    if method == "integral":
        return sign * bessel_j_integral(n, t, panels)
    if method != "recurrence":
        raise ValueError(f"unknown Bessel method {method!r}")
    return sign * float(bessel_j_table(n, float(t))[n])


@dataclass(frozen=True)
class BesselEvaluator:
    """Bessel J evaluator bound to one method.

    On construction the two methods are compared on a small fixed sample of
    (n, t) with n <= 50, t <= 100; a disagreement above ``check_tol`` raises.
    """

    method: str = "recurrence"
    quad_panels: int = 64
    check: bool = True
    check_tol: float = 1e-12

    def __post_init__(self):
        if self.method not in ("recurrence", "integral"):
            raise ValueError(f"unknown Bessel method {self.method!r}")
        if self.check:
            worst = self.cross_check([0, 1, 2, 7, 25, 50], [0.5, 3.0, 10.0, 47.3, 100.0])
            if worst > self.check_tol:
                raise RuntimeError(f"Bessel methods disagree by {worst:.3e}")

    def __call__(self, n, t):
        return bessel_j(n, t, self.method, self.quad_panels)

    def table(self, nmax, t):
        if self.method == "recurrence":
            return bessel_j_table(nmax, t)
        t = np.atleast_1d(np.asarray(t, dtype=float))
        orders = np.arange(nmax + 1)
        cols = [bessel_j_integral(orders, ti, self.quad_panels) for ti in t.ravel()]
        return np.stack(cols, axis=-1).reshape((nmax + 1,) + t.shape)

    def cross_check(self, orders, times):
        """Largest |difference| between the two methods over the grid."""
        orders = np.asarray(orders)
        worst = 0.0
        for ti in times:
            rec = bessel_j_table(orders.max(), ti)[orders]
            quad = bessel_j_integral(orders, ti, self.quad_panels)
            worst = max(worst, float(np.max(np.abs(rec - quad))))
        return worst


def identity_residual(t, K, method="integral"):
    """|J_0(t) + 2 sum_{k=1}^K J_2k(t) - 1|.

    The integral representation is the default so that the check stays
    independent of the recurrence, whose normalisation is this identity.
    """
    if K < t / 2.0 + 40.0 and t > 0:
        raise ValueError(f"K={K} too small for t={t}; need K >= t/2 + 40")
    orders = np.arange(0, 2 * K + 1, 2)
    if method == "integral":
        j = bessel_j_integral(orders, float(t))
    else:
        j = bessel_j_table(2 * K, float(t))[orders]
    return abs(j[0] + 2.0 * j[1:].sum() - 1.0)


def _g_rule(t, width=1.0, degree=DEFAULT_DEGREE):
    panels = max(1, int(np.ceil(t / width)))
    return panel_rule(0.0, t, panels, degree)


def integral_G(n, t, rtol=1e-12, reduction_tol=1e-8):
    """G_n(t) = int_0^t J_n(s) ds by panel quadrature with one refinement.

    For even n the result is cross-checked against

        G_2m(t) = G_0(t) - 2 sum_{k=0}^{m-1} J_{2k+1}(t),

    which follows from 2 J_n' = J_{n-1} - J_{n+1}.
    """
    n = int(n)
    if n < 0:
        raise ValueError("integral_G expects n >= 0")
    t = float(t)
    if t == 0.0:
        return 0.0
    nmax = max(n, 1)

    def estimate(width):
        x, w = _g_rule(t, width)
        jt = bessel_j_table(nmax, x)
        return jt @ w

    coarse, fine = estimate(1.0), estimate(0.5)
    if abs(fine[n] - coarse[n]) > max(1e-13, rtol * abs(fine[n])):
        raise QuadratureError(f"G_{n}({t}) quadrature did not settle")
    value = float(fine[n])
    if n % 2 == 0 and n > 0:
        jt = bessel_j_table(n, t)
        reduced = fine[0] - 2.0 * jt[1:n:2].sum()
        if abs(reduced - value) > reduction_tol:
            raise RuntimeError(
                f"G_{n}({t}) = {value!r} disagrees with the odd-order reduction "
                f"{reduced!r}")
    return value


def integral_G_table(nmax, t_grid, degree=DEFAULT_DEGREE, sub=1):
    """G_n(t) for n = 0..nmax on an increasing grid starting at 0.

    Integrates J_n over each grid interval (split into ``sub`` panels) and
    accumulates, so the whole table costs one vectorised recurrence.
    Returns shape ``(nmax + 1, len(t_grid))``.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid[0] != 0.0 or np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must start at 0 and increase")
    edges = np.linspace(0.0, 1.0, sub + 1)
    lo, hi = t_grid[:-1], t_grid[1:]
    panel_edges = (lo[:, None] + (hi - lo)[:, None] * edges[None, :])
    nodes, weights = [], []
    for row in panel_edges:
        x, w = gl_rule(row, degree)
        nodes.append(x)
        weights.append(w)
    nodes = np.concatenate(nodes)
    weights = np.concatenate(weights)
    jt = bessel_j_table(nmax, nodes)
    per_node = jt * weights
    per_interval = per_node.reshape(nmax + 1, len(lo), -1).sum(axis=2)
    out = np.zeros((nmax + 1, len(t_grid)))
    out[:, 1:] = np.cumsum(per_interval, axis=1)
    return out


def alternating_sums(n, t):
    """(sum_{k=0}^{n-1} (-1)^k J_{2k+1}(t), sum_{k=1}^{n} (-1)^k J_{2k}(t))."""
    if n < 1:
        raise ValueError("alternating_sums expects n >= 1")
    jt = bessel_j_table(2 * n, float(t))
    k = np.arange(n)
    odd = np.sum((-1.0) ** k * jt[2 * k + 1])
    k = np.arange(1, n + 1)
    even = np.sum((-1.0) ** k * jt[2 * k])
    return float(odd), float(even)


def alternating_sums_table(nmax, t):
    """Both alternating sums for n = 1..nmax at every t; each output has shape
    ``(nmax, len(t))`` with row i holding n = i + 1."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    jt = bessel_j_table(2 * nmax, t)
    k = np.arange(nmax)
    signs = ((-1.0) ** k)[:, None]
    odd = np.cumsum(signs * jt[2 * k + 1], axis=0)
    even = np.cumsum(-signs * jt[2 * k + 2], axis=0)
    return odd, even
