"""Fourier data of q^Delta, membership evidence for the class l^Delta and the
limits L+, L-, nu of a member sequence.

Conventions
-----------
Q(lambda) = sum_k exp(i k lambda) q^Delta_k, split as Q = Q+ + i Q- into its
cosine and sine parts. With s = sin(lambda/2) and A = 2 sum_k k q^Delta_k,

    phi+ = Q+ / s^2,        phi- = (Q- / s - A) / s.

Both are evaluated through cancellation-free forms (sums of
sin^2(k lambda / 2) and of x - sin x), so they stay accurate down to
lambda ~ 1e-8.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .lattice import clamped_q_delta, discrete_laplacian, sample_slice
from .quadrature import (QuadratureError, adaptive_panels, gl_rule,
                         graded_rule, sinc, x_minus_sin)

__all__ = [
    "InconclusiveError",
    "NotMemberError",
    "SpectralProfile",
    "ClassificationReport",
    "C2Result",
    "LimitsResult",
    "VERDICTS",
    "q_delta_fourier",
    "compute_A",
    "phi_decompose",
    "h_function",
    "spectral_profile",
    "profile_for_ic",
    "integrability_trace",
    "integrability_traces",
    "trace_converges",
    "classify",
    "c2_criterion",
    "tilde_q",
    "limits_and_nu",
    "limits_for_ic",
    "dirichlet_kernel_integral",
    "dirichlet_kernel_sum",
]

VERDICTS = ("MemberByFiniteSupport", "MemberBySufficientCondition", "NonMember",
            "Inconclusive")

DEFAULT_DELTAS = tuple(10.0 ** -np.arange(2, 9))
_CHUNK = 1 << 22


class InconclusiveError(ValueError):
    """The finite window does not support a reliable answer."""


class NotMemberError(InconclusiveError):
    """An operation that needs an l^Delta member received something else."""

    def __init__(self, message, verdict):
        super().__init__(message)
        self.verdict = verdict


def _chunks(n_rows, n_cols):
    step = max(1, _CHUNK // max(1, n_cols))
    for i in range(0, n_rows, step):
        yield slice(i, min(n_rows, i + step))


def q_delta_fourier(q_delta, lambda_grid):
    """Truncated Fourier sum Q(lambda) = sum_k exp(i k lambda) q_k."""
    lam = np.asarray(lambda_grid, dtype=float)
    if lam.size == 0:
        raise ValueError("empty lambda grid")
    qd = q_delta.trimmed()
    k = qd.indices.astype(float)
    out = np.empty(lam.shape, dtype=complex)
    flat = lam.ravel()
    res = out.ravel()
    for sl in _chunks(flat.size, k.size):
        res[sl] = np.exp(1j * np.outer(flat[sl], k)) @ qd.values
    return res.reshape(lam.shape)


def compute_A(q_delta, edge_rtol=1e-9, edge_fraction=0.05):
    """A = 2 sum_k k q^Delta_k over the slice.

    The outer ``edge_fraction`` of the slice (at least one entry per side) is
    treated as the tail; if its share of sum |k q_k| exceeds ``edge_rtol``
    the window is judged too small and InconclusiveError is raised.
    """
    k = q_delta.indices.astype(float)
    terms = k * q_delta.values
    total = np.sum(np.abs(terms))
    if total == 0.0:
        return 0.0
    m = max(1, int(len(terms) * edge_fraction))
    edge = np.sum(np.abs(terms[:m])) + np.sum(np.abs(terms[-m:]))
    if len(terms) <= 2 * m or edge > edge_rtol * total:
        raise InconclusiveError(
            f"edge mass {edge:.3e} of sum|k q_k| = {total:.3e} is not negligible; "
            "use a larger window")
    return 2.0 * float(math.fsum(terms))


def _trig_sums(qd, lam):
    """(Q(0), sum q sin^2(k l/2), sum q (sin kl - 2k sin(l/2)), sum q (sin kl - kl),
    sum k q) for each lambda."""
    k = qd.indices.astype(float)
    v = qd.values
    q0 = float(math.fsum(v))
    ksum = float(math.fsum(k * v))
    s2 = np.empty(lam.size)
    odd = np.empty(lam.size)
    odd_h = np.empty(lam.size)
    for sl in _chunks(lam.size, k.size):
        kl = np.outer(lam[sl], k)
        s2[sl] = np.sin(kl / 2.0) ** 2 @ v
        xms_kl = x_minus_sin(kl)
        odd_h[sl] = -(xms_kl @ v)
        odd[sl] = odd_h[sl] + 2.0 * x_minus_sin(lam[sl] / 2.0) * ksum
    return q0, s2, odd, odd_h, ksum


def phi_decompose(q_delta, lambda_grid, A=None):
    """phi+ and phi- on a grid that excludes lambda = 0."""
    lam = np.asarray(lambda_grid, dtype=float).ravel()
    if np.any(lam <= 0.0):
        raise ValueError("lambda grid must exclude 0 (removable singularity)")
    qd = q_delta.trimmed()
    q0, s2, odd, _, ksum = _trig_sums(qd, lam)
    A_win = 2.0 * ksum
    A = A_win if A is None else float(A)
    s = np.sin(lam / 2.0)
    phi_plus = (q0 - 2.0 * s2) / s ** 2
    phi_minus = odd / s ** 2 + (A_win - A) / s
    return phi_plus, phi_minus


def h_function(q_delta, lambda_grid, A=None):
    """h(lambda) = (Q(lambda)/lambda - i A/2) / lambda, the lambda-normalised
    counterpart of phi (A keeps the phi normalisation)."""
    lam = np.asarray(lambda_grid, dtype=float).ravel()
    if np.any(lam <= 0.0):
        raise ValueError("lambda grid must exclude 0")
    qd = q_delta.trimmed()
    q0, s2, _, odd_h, ksum = _trig_sums(qd, lam)
    A_win = 2.0 * ksum
    A = A_win if A is None else float(A)
    re = (q0 - 2.0 * s2) / lam ** 2
    im = odd_h / lam ** 2 + 0.5 * (A_win - A) / lam
    return re + 1j * im


@dataclass(frozen=True)
class SpectralProfile:
    """Samples of Q, phi+ and phi- on a Gauss-Legendre grid over [delta, pi].

    ``weights`` are the quadrature weights of ``lambda_grid``; the strip
    [0, delta) is covered by a one-point rule using ``phi_at_delta``.
    """

    lambda_grid: np.ndarray
    weights: np.ndarray
    q_delta_ft: np.ndarray
    A: float
    phi_plus: np.ndarray
    phi_minus: np.ndarray
    delta: float = 1e-6
    phi_at_delta: tuple = (0.0, 0.0)
    support: tuple = (0, 0)

    def to_dict(self):
        return {
            "A": self.A,
            "delta": self.delta,
            "support": list(self.support),
            "lambda": self.lambda_grid.tolist(),
            "weights": self.weights.tolist(),
            "Q_re": self.q_delta_ft.real.tolist(),
            "Q_im": self.q_delta_ft.imag.tolist(),
            "phi_plus": self.phi_plus.tolist(),
            "phi_minus": self.phi_minus.tolist(),
        }

    def csv_rows(self):
        """Rows (lambda, Re Q, Im Q, phi+, phi-)."""
        return np.column_stack([self.lambda_grid, self.q_delta_ft.real,
                                self.q_delta_ft.imag, self.phi_plus,
                                self.phi_minus])


def spectral_profile(q_delta, A=None, delta=1e-6, panels=None, max_order=64):
    """Build a SpectralProfile from a finitely supported q^Delta.

    ``A`` defaults to ``compute_A(q_delta)``, which raises InconclusiveError
    when the slice carries non-negligible mass at its edges. ``panels`` is
    sized so that each panel sees at most about one oscillation of
    exp(i k lambda) for k in the support and of cos(n lambda) for
    |n| <= max_order.
    """
    if A is None:
        A = compute_A(q_delta)
    qd = q_delta.trimmed()
    extent = max(abs(qd.offset), abs(qd.last))
    if panels is None:
        panels = max(64, 2 * (extent + max_order))
    lam, w = graded_rule(delta, np.pi, panels, first=np.pi / panels)
    Q = q_delta_fourier(qd, lam)
    pp, pm = phi_decompose(qd, lam, A)
    pd, md = phi_decompose(qd, [delta], A)
    return SpectralProfile(lam, w, Q, float(A), pp, pm, delta,
                           (float(pd[0]), float(md[0])), (qd.offset, qd.last))


def profile_for_ic(ic, **kwargs):
    """Profile of the window-clamped q^Delta of an initial condition."""
    return spectral_profile(clamped_q_delta(ic), **kwargs)


def dirichlet_kernel_sum(n):
    """4 sum_{k=0}^{n-1} (-1)^k / (2k+1), extended oddly to n <= 0."""
    n_arr = np.atleast_1d(np.asarray(n, dtype=np.int64))
    top = int(np.abs(n_arr).max(initial=0))
    k = np.arange(top)
    partial = np.concatenate([[0.0], np.cumsum(4.0 * (-1.0) ** k / (2 * k + 1))])
    out = np.sign(n_arr) * partial[np.abs(n_arr)]
    return out if np.ndim(n) else float(out[0])


def dirichlet_kernel_integral(n, rtol=1e-14):
    """int_0^pi sin(n lambda) / sin(lambda/2) d lambda by panel quadrature."""
    n = int(n)
    if n < 1:
        raise ValueError("dirichlet_kernel_integral expects n >= 1")

    def f(lam):
        return 2.0 * n * sinc(n * lam) / sinc(lam / 2.0)

    return float(adaptive_panels(f, 0.0, np.pi, max(8, 2 * n), rtol=rtol, atol=1e-15))


def tilde_q(profile, n):
    """The bounded sequence q~_n assembled from phi+, phi- and the Dirichlet
    term; q_n(0) - q~_n is constant in n for member sequences."""
    n_arr = np.atleast_1d(np.asarray(n, dtype=np.int64)).astype(float)
    lam, w = profile.lambda_grid, profile.weights
    d = profile.delta
    cos_part = np.cos(np.outer(n_arr, lam)) @ (w * profile.phi_plus)
    sin_part = np.sin(np.outer(n_arr, lam)) @ (w * profile.phi_minus)
    # strip [0, delta): one-point rule at its midpoint
    cos_part += d * profile.phi_at_delta[0] * np.cos(n_arr * d / 2.0)
    sin_part += d * profile.phi_at_delta[1] * np.sin(n_arr * d / 2.0)
    out = (cos_part + sin_part) / (4.0 * np.pi)
    out += profile.A / (4.0 * np.pi) * dirichlet_kernel_sum(n_arr.astype(np.int64))
    return out if np.ndim(n) else float(out[0])


@dataclass(frozen=True)
class LimitsResult:
    L_plus: float
    L_minus: float
    nu: float
    c: float
    A: float
    probes: tuple
    c_values: tuple

    def to_dict(self):
        return {"L_plus": self.L_plus, "L_minus": self.L_minus, "nu": self.nu,
                "c": self.c, "A": self.A, "probes": list(self.probes),
                "c_values": list(self.c_values)}


def limits_and_nu(profile, q0, probes=(32, 48, 64), tol=1e-3):
    """Limits L+ and L- of q_k(0) as k -> +-inf and the long-time limit nu.

    c = q_n(0) - q~_n is evaluated at n = +-probes; its spread must stay
    within ``tol``. Then L+- = c +- A/4 and nu = c.
    """
    ns = np.array(sorted({int(s) * p for p in probes for s in (-1, 1)}))
    if ns.min() < q0.offset or ns.max() > q0.last:
        raise ValueError("q0 does not cover the probe indices")
    c = q0.at(ns) - tilde_q(profile, ns)
    spread = float(c.max() - c.min())
    if spread > tol:
        raise InconclusiveError(
            f"q_n(0) - q~_n varies by {spread:.3e} across probes (> {tol})")
    cbar = float(np.mean(c))
    A = profile.A
    return LimitsResult(cbar + A / 4.0, cbar - A / 4.0, cbar, cbar, A,
                        tuple(int(v) for v in ns), tuple(float(v) for v in c))


def limits_for_ic(ic, probes=(32, 48, 64), tol=1e-3):
    """classify + profile + limits_and_nu for an initial condition."""
    report = classify(ic)
    if not report.verdict.startswith("Member"):
        raise NotMemberError(f"initial condition is {report.verdict}; "
                             "limits need an l^Delta member", report.verdict)
    reach = max(probes)
    window = max(ic.window, reach + 2)
    q0 = sample_slice(ic, -window, window)
    profile = spectral_profile(clamped_q_delta(ic, window), max_order=reach)
    return limits_and_nu(profile, q0, probes, tol)


# ----------------------------------------------------------------------
# membership evidence

def _trace_rule(q_delta, deltas, panels):
    qd = q_delta.trimmed()
    extent = max(abs(qd.offset), abs(qd.last))
    if panels is None:
        panels = max(64, extent)
    top, bottom = deltas[0], deltas[-1]
    n_geo = 4 * max(1, int(round(np.log10(top / bottom)))) + 1
    edges = np.concatenate([np.geomspace(bottom, top, n_geo)[:-1],
                            np.linspace(top, np.pi, panels + 1)])
    return qd, gl_rule(edges)


def _cumulative_from_top(lam, contrib, deltas):
    return [(float(d), float(math.fsum(contrib[lam >= d]))) for d in deltas]


def integrability_trace(q_delta, deltas=DEFAULT_DELTAS, kind="phi", A=None,
                        panels=None):
    """[(delta, int_delta^pi |f|)] for f = phi or h, with delta decreasing.

    Values are accumulated panel by panel from pi downwards, so they are
    nonnegative and nondecreasing by construction.
    """
    return integrability_traces(q_delta, deltas, A, panels)[0 if kind == "phi" else 1] \
        if kind in ("phi", "h") else _bad_kind(kind)


def _bad_kind(kind):
    raise ValueError(f"unknown trace kind {kind!r}")


def integrability_traces(q_delta, deltas=DEFAULT_DELTAS, A=None, panels=None):
    """Both traces (phi, h) from a single evaluation of the trigonometric sums."""
    deltas = np.sort(np.asarray(deltas, dtype=float))[::-1]
    qd, (lam, w) = _trace_rule(q_delta, deltas, panels)
    q0, s2, odd, odd_h, ksum = _trig_sums(qd, lam)
    A_win = 2.0 * ksum
    A = A_win if A is None else float(A)
    s = np.sin(lam / 2.0)
    even = q0 - 2.0 * s2
    phi = np.hypot(even / s ** 2, odd / s ** 2 + (A_win - A) / s)
    h = np.hypot(even / lam ** 2, odd_h / lam ** 2 + 0.5 * (A_win - A) / lam)
    return (_cumulative_from_top(lam, w * phi, deltas),
            _cumulative_from_top(lam, w * h, deltas))


def trace_converges(trace, rtol=1e-3):
    """True when the last decade of the trace adds less than ``rtol`` of the
    total."""
    (_, prev), (_, last) = trace[-2], trace[-1]
    return last - prev <= rtol * max(last, 1e-300)


@dataclass
class ClassificationReport:
    verdict: str
    sufficient_sum: float
    l2_norm_qdelta: float
    integrability_trace: list
    A: float = None
    window: int = 0
    tail_exponent: float = None
    l2_growth: float = None
    h_trace: list = field(default_factory=list)
    notes: str = ""

    @property
    def is_member(self):
        return self.verdict.startswith("Member")

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "sufficient_sum": self.sufficient_sum,
            "l2_norm_qdelta": self.l2_norm_qdelta,
            "integrability_trace": [list(p) for p in self.integrability_trace],
            "h_trace": [list(p) for p in self.h_trace],
            "A": self.A,
            "window": self.window,
            "tail_exponent": self.tail_exponent,
            "l2_growth": self.l2_growth,
            "notes": self.notes,
        }


def _tail_exponent(k, terms, blocks=12):
    """Exponent p in terms ~ C / (k ln^p k), fitted to block maxima over the
    upper half (in log scale) of the window. +inf when the tail vanishes."""
    K = int(k.max())
    lo = max(3, int(math.sqrt(K)))
    if K < 4 * lo:
        return None
    edges = np.unique(np.geomspace(lo, K + 1, blocks + 1).astype(int))
    mids, peaks = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        sel = (k >= a) & (k < b)
        if not sel.any():
            continue
        peak = float(np.max(terms[sel] * k[sel]))
        mids.append(math.sqrt(a * b))
        peaks.append(peak)
    peaks = np.array(peaks)
    if np.all(peaks[len(peaks) // 2:] == 0.0):
        return math.inf
    good = peaks > 0
    if good.sum() < 3:
        return None
    x = np.log(np.log(np.array(mids)[good]))
    y = np.log(peaks[good])
    slope = np.polyfit(x, y, 1)[0]
    return float(-slope)


def classify(ic, trace_window=1024, deltas=DEFAULT_DELTAS, min_exponent=1.25,
             growth_witness=1.5):
    """Evidence for or against q in l^Delta.

    Verdicts, in order of precedence:

    * MemberByFiniteSupport: q^Delta is finitely supported inside the window
      and sums to zero;
    * MemberBySufficientCondition: the terms |q^Delta_k| |k| ln|k| have a
      tail decaying like 1/(k ln^p k) with fitted p >= ``min_exponent``;
    * NonMember: the l2 norm of q^Delta on the window exceeds that on the
      quarter window by ``growth_witness`` (no decay at all);
    * Inconclusive otherwise.

    These are numerical verdicts on a finite window, not proofs.
    """
    K = ic.window
    q = sample_slice(ic)
    qd = discrete_laplacian(q)
    k = qd.indices
    v = qd.values
    absk = np.abs(k).astype(float)
    nz = absk > 1
    terms = np.zeros_like(v)
    terms[nz] = np.abs(v[nz]) * absk[nz] * np.log(absk[nz])
    partial = float(math.fsum(terms))
    l2 = float(np.linalg.norm(v))
    inner = np.abs(k) <= max(1, K // 4)
    l2_inner = float(np.linalg.norm(v[inner]))
    growth = l2 / l2_inner if l2_inner > 0 else (math.inf if l2 > 0 else 1.0)

    try:
        A = compute_A(qd)
    except InconclusiveError:
        A = None

    tw = min(K - 1, trace_window)
    qd_trace = qd.restrict(-tw, tw)
    trace, h_tr = integrability_traces(qd_trace, deltas)

    notes = ""
    exponent = None
    if ic.finite_delta_support:
        trimmed = qd.trimmed()
        inside = not np.any(v) or (trimmed.offset > qd.offset and trimmed.last < qd.last)
        q_zero = math.fsum(v)
        if inside and abs(q_zero) <= 1e-12 * max(1.0, float(np.sum(np.abs(v)))):
            return ClassificationReport("MemberByFiniteSupport", partial, l2, trace,
                                        A, K, None, growth, h_tr,
                                        "q^Delta finitely supported with Q(0) = 0")
        notes = "finite-support rule but support reaches the window edge"

    pos = absk > 1
    kk = absk[pos]
    order = np.argsort(kk, kind="stable")
    kk, tt = kk[order], terms[pos][order]
    # fold +k and -k
    uniq, inv = np.unique(kk, return_inverse=True)
    folded = np.zeros(uniq.size)
    np.add.at(folded, inv, tt)
    exponent = _tail_exponent(uniq, folded)
    if exponent is not None and exponent >= min_exponent:
        return ClassificationReport("MemberBySufficientCondition", partial, l2, trace,
                                    A, K, exponent, growth, h_tr,
                                    notes or "tail of |q^Delta_k||k|ln|k| summable")
    if growth > growth_witness:
        return ClassificationReport("NonMember", math.inf, l2, trace, A, K, exponent,
                                    growth, h_tr,
                                    "l2 norm of q^Delta grows with the window")
    return ClassificationReport("Inconclusive", math.inf, l2, trace, A, K, exponent,
                                growth, h_tr, notes or "no decisive evidence")


@dataclass(frozen=True)
class C2Result:
    value: float
    trace: tuple
    status: str

    def to_dict(self):
        return {"value": self.value, "trace": [list(p) for p in self.trace],
                "status": self.status}


def _second_derivative(f, h):
    eps = np.finfo(float).eps

    def f2(x):
        a, b, c = f(x - h), f(x), f(x + h)
        d2 = (c - 2.0 * b + a) / (h * h)
        # values below the rounding floor of the stencil are treated as zero
        noise = 8.0 * eps * (abs(a) + 2.0 * abs(b) + abs(c) + abs(x)) / (h * h)
        return 0.0 if abs(d2) <= noise else d2
    return f2


def _quad_abs(g, a, b, chunk):
    pieces = max(1, int(np.ceil((b - a) / chunk)))
    edges = np.linspace(a, b, pieces + 1)
    total = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        for lo, hi in zip(edges[:-1], edges[1:]):
            try:
                val, _ = integrate.quad(g, lo, hi, limit=200, epsabs=1e-13, epsrel=1e-10)
            except integrate.IntegrationWarning as exc:
                if "roundoff" in str(exc):
                    # finite-difference noise; the estimate itself is usable
                    with warnings.catch_warnings():
                        warnings.simplefilter("ignore", integrate.IntegrationWarning)
                        val, _ = integrate.quad(g, lo, hi, limit=200,
                                                epsabs=1e-13, epsrel=1e-10)
                    total += val
                    continue
                raise QuadratureError(f"quadrature failed on [{lo}, {hi}]: {exc}") from exc
            total += val
    return total


def c2_criterion(f, window, f2=None, h=1e-4, doublings=3, chunk=None):
    """Integral of |f''(x)| |x| ln(1 + |x|) over [-W, W] for a C^2 function.

    ``f2`` is the second derivative if known, otherwise central differences
    with step ``h`` are used. The integral is evaluated at W, W/2, ...,
    W/2^doublings; the trace of these values decides the status:
    ``converged`` when the last doubling adds under 1e-6 relative,
    ``diverging`` when the increments do not shrink, else ``undetermined``.
    """
    if f2 is None:
        f2 = _second_derivative(f, h)

    def g(x):
        return abs(f2(x)) * abs(x) * math.log1p(abs(x))

    widths = [window / 2.0 ** j for j in range(doublings, -1, -1)]
    if chunk is None:
        chunk = max(1.0, window / 256.0)
    trace = []
    for W in widths:
        trace.append((W, _quad_abs(g, -W, 0.0, chunk) + _quad_abs(g, 0.0, W, chunk)))
    vals = [v for _, v in trace]
    d_last = vals[-1] - vals[-2]
    d_prev = vals[-2] - vals[-3] if len(vals) > 2 else d_last
    if d_last <= 1e-6 * max(vals[-1], 0.0) or vals[-1] == 0.0:
        status = "converged"
    elif d_last > 1e-3 * vals[-1] and d_last >= 0.9 * d_prev:
        status = "diverging"
    else:
        status = "undetermined"
    return C2Result(vals[-1], tuple(trace), status)
