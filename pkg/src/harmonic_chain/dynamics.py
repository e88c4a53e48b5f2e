"""Trajectories of the chain q_k'' = omega^2 (q_{k+1} - 2 q_k + q_{k-1}) with
q(0) given and p(0) = 0, computed four ways.

* ``OdeTruncated``: symplectic time stepping on a finite lattice whose outer
  cells are frozen; the lattice is wide enough that the frozen cells cannot
  influence the reported ones.
* ``SpectralFormula``: q_n(t) = q_n(0) - (1/pi) int_0^pi K_t(lambda)
  [Q+(lambda) cos n lambda + Q-(lambda) sin n lambda] d lambda with the bounded
  kernel K_t = (omega t)^2 / 2 * sinc^2(omega t sin(lambda/2)).
* ``BesselSeries``: closed Bessel expansions for Sign, Spike and constants, and
  the lattice Green's function q_n(t) = sum_m J_{2|n-m|}(2 omega t) q_m(0)
  otherwise.
* ``ClosedForm``: q(t) = cos(2 omega t) q for the alternating sequence and
  q(t) = q for constants.
"""

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .bessel import _miller_start, bessel_j_table
from .lattice import clamped_q_delta
from .quadrature import QuadratureError, panel_rule, sinc
from .reports import BoundSweepReport, write_csv

__all__ = [
    "SOLVERS",
    "SolverNotApplicable",
    "Trajectory",
    "CrossValidationReport",
    "required_half_width",
    "integrate_chain",
    "chain_energy",
    "solve_ode",
    "solve_spectral",
    "solve_bessel_sign",
    "sign_bessel_table",
    "solve_bessel",
    "solve_closed_form",
    "solve",
    "applicable_solvers",
    "cross_validate",
    "boundedness_sweep",
]

SOLVERS = ("OdeTruncated", "SpectralFormula", "BesselSeries", "ClosedForm")

_ALIASES = {
    "ode": "OdeTruncated", "odetruncated": "OdeTruncated",
    "spectral": "SpectralFormula", "spectralformula": "SpectralFormula",
    "bessel": "BesselSeries", "besselseries": "BesselSeries",
    "closed-form": "ClosedForm", "closed_form": "ClosedForm",
    "closedform": "ClosedForm",
}

DEFAULT_MARGIN = 32

# fourth-order triple-jump composition of velocity Verlet
_W1 = 1.0 / (2.0 - 2.0 ** (1.0 / 3.0))
_W0 = -(2.0 ** (1.0 / 3.0)) * _W1
_YOSHIDA = (_W1, _W0, _W1)


class SolverNotApplicable(ValueError):
    """The requested solver cannot handle this initial condition."""

    def __init__(self, message, alternatives=()):
        super().__init__(message)
        self.alternatives = tuple(alternatives)


def canonical_solver(name):
    if name in SOLVERS:
        return name
    key = str(name).lower()
    if key not in _ALIASES:
        raise ValueError(f"unknown solver {name!r}; choose from {', '.join(SOLVERS)}")
    return _ALIASES[key]


@dataclass
class Trajectory:
    """q_k(t) on ``times`` x ``indices`` (rows are times)."""

    solver: str
    omega: float
    indices: np.ndarray
    times: np.ndarray
    q: np.ndarray
    p: np.ndarray = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.indices = np.asarray(self.indices, dtype=np.int64)
        self.times = np.asarray(self.times, dtype=float)
        self.q = np.asarray(self.q, dtype=float).reshape(len(self.times), len(self.indices))

    @property
    def index_window(self):
        return int(self.indices.min()), int(self.indices.max())

    def column(self, k):
        hit = np.flatnonzero(self.indices == k)
        if hit.size == 0:
            raise KeyError(f"index {k} not in trajectory")
        return self.q[:, hit[0]]

    def header(self):
        return dict({"solver": self.solver, "omega": self.omega}, **self.meta)

    def to_csv(self, path=None, header=None):
        """Long-format CSV with columns t, k, q."""
        rows = ((t, int(k), self.q[i, j]) for i, t in enumerate(self.times)
                for j, k in enumerate(self.indices))
        return write_csv(path, ("t", "k", "q"), rows,
                         self.header() if header is None else header)

    def plot_text(self, k, path=None, header=None):
        """Two-column (t, q_k) text for one index."""
        rows = zip(self.times, self.column(k))
        hdr = dict(self.header() if header is None else header, index=int(k))
        return write_csv(path, ("t", f"q_{k}"), rows, hdr)


# ----------------------------------------------------------------------
# truncated ODE

def required_half_width(indices, omega, T, margin=DEFAULT_MARGIN):
    """Half-width N = max|k| + ceil(omega T) + margin of the truncated lattice."""
    kmax = int(np.max(np.abs(indices)))
    return kmax + int(math.ceil(omega * T)) + int(margin)


def chain_energy(q, p, omega):
    """1/2 sum p^2 + omega^2/2 sum (q_{k+1} - q_k)^2 over a finite lattice
    (columns of 2-D input are independent chains)."""
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    return 0.5 * np.sum(p * p, axis=0) + 0.5 * omega ** 2 * np.sum(np.diff(q, axis=0) ** 2, axis=0)


def _accel(q, w2, out):
    # interior cells only; cells 0 and -1 are frozen
    np.subtract(q[:-2], q[1:-1], out=out[1:-1])
    out[1:-1] += q[2:] - q[1:-1]
    out[1:-1] *= w2
    out[0] = 0.0
    out[-1] = 0.0
    return out


def integrate_chain(q0, p0, omega, times, dt, order=4):
    """Advance the frozen-boundary chain and sample it at ``times``.

    ``q0``/``p0`` have shape (cells,) or (cells, batch); the first and last
    cells never move. Steps are shrunk between consecutive report times so
    that every report time is hit exactly. ``order`` 2 is plain velocity
    Verlet, 4 its triple-jump composition.

    Returns (q, p) sampled with shape (len(times),) + q0.shape.
    """
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) < 0) or times[0] < 0:
        raise ValueError("times must be nonnegative and nondecreasing")
    if order not in (2, 4):
        raise ValueError("order must be 2 or 4")
    coeffs = _YOSHIDA if order == 4 else (1.0,)
    q = np.array(q0, dtype=float)
    p = np.array(p0, dtype=float)
    w2 = float(omega) ** 2
    a = np.zeros_like(q)
    _accel(q, w2, a)
    out_q = np.empty((len(times),) + q.shape)
    out_p = np.empty_like(out_q)
    t = 0.0
    for j, target in enumerate(times):
        span = target - t
        if span > 0:
            steps = int(math.ceil(span / dt - 1e-9))
            h = span / steps
            for _ in range(steps):
                for c in coeffs:
                    hc = c * h
                    p += 0.5 * hc * a
                    q += hc * p
                    _accel(q, w2, a)
                    p += 0.5 * hc * a
            t = target
        out_q[j] = q
        out_p[j] = p
    return out_q, out_p


def _report_times(T, times, dt_report=0.1):
    if times is not None:
        return np.asarray(times, dtype=float)
    steps = max(1, int(round(T / dt_report)))
    return np.linspace(0.0, T, steps + 1)


def _as_indices(indices):
    if isinstance(indices, tuple) and len(indices) == 2 and all(
            isinstance(v, (int, np.integer)) for v in indices):
        return np.arange(indices[0], indices[1] + 1)
    return np.atleast_1d(np.asarray(indices, dtype=np.int64))


def solve_ode(ic, omega, T, dt=None, report_window=(-10, 10), times=None,
              margin=DEFAULT_MARGIN, half_width=None, order=4):
    """Integrate the truncated chain up to T.

    Parameters
    ----------
    ic : InitialCondition
    omega : float
        Coupling, must be positive.
    T : float
        Final time.
    dt : float, optional
        Time step, at most 0.1/omega. Defaults to min(0.01/omega, 0.01).
    report_window : (lo, hi) or sequence of int
        Indices to report.
    times : array_like, optional
        Report times; default is a 0.1 grid on [0, T].
    margin : int
        Extra cells beyond the light cone on each side.
    half_width : int, optional
        Explicit lattice half-width; must be at least the required value.
    order : {2, 4}
        Verlet (2) or its fourth-order composition (4).

    Returns
    -------
    Trajectory
        With velocities in ``p`` and run parameters in ``meta``.
    """
    if omega <= 0:
        raise ValueError("omega must be positive")
    if dt is None:
        dt = min(0.01 / omega, 0.01)
    if dt <= 0 or dt > 0.1 / omega + 1e-15:
        raise ValueError(f"dt={dt} must lie in (0, 0.1/omega = {0.1 / omega}]")
    idx = _as_indices(report_window)
    times = _report_times(T, times)
    T = float(times[-1]) if len(times) else float(T)
    need = required_half_width(idx, omega, T, margin)
    N = need if half_width is None else int(half_width)
    if N < need:
        raise ValueError(f"lattice half-width {N} too small: need N >= {need} "
                         f"(max|k| + ceil(omega*T) + {margin})")
    q0 = ic.values(np.arange(-N, N + 1))
    qs, ps = integrate_chain(q0, np.zeros_like(q0), omega, times, dt, order)
    cols = idx + N
    e = chain_energy(qs.T, ps.T, omega)
    meta = {"dt": dt, "half_width": N, "margin": margin, "order": order,
            "ic": _ic_meta(ic),
            "energy_drift": float(np.max(np.abs(e - e[0])) / max(abs(e[0]), 1e-300))}
    return Trajectory("OdeTruncated", omega, idx, times, qs[:, cols], ps[:, cols], meta)


def _ic_meta(ic):
    try:
        return ic.to_dict()
    except TypeError:
        return {"rule": ic.rule, "window": ic.window}


# ----------------------------------------------------------------------
# spectral formula

def _spectral_q_delta(ic, idx, tmax, omega, margin=DEFAULT_MARGIN):
    from .spectral import classify

    if ic.finite_delta_support:
        return clamped_q_delta(ic).trimmed()
    report = classify(ic)
    if not report.is_member:
        raise SolverNotApplicable(
            f"{ic.rule} initial condition is {report.verdict}; the spectral "
            "formula needs an l^Delta member", alternatives=("OdeTruncated", "BesselSeries"))
    # values beyond the light cone cannot reach the reported cells
    W = min(ic.window, required_half_width(idx, omega, tmax, margin))
    return clamped_q_delta(ic, W).trimmed()


def solve_spectral(ic, omega, times, indices, panels=None, check=True, rtol=1e-10):
    """q_n(t) from the spectral representation by panel quadrature on [0, pi].

    The panel count follows the fastest oscillation in the integrand (the
    kernel phase omega t, the index n and the support of q^Delta); when
    ``check`` is set the result is recomputed with twice the panels and the
    two must agree to ``rtol`` (absolute, relative to max|q(0)|).
    """
    idx = _as_indices(indices)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    tmax = float(times.max(initial=0.0))
    qd = _spectral_q_delta(ic, idx, tmax, omega)
    extent = max(abs(qd.offset), abs(qd.last))
    if panels is None:
        panels = max(32, int(math.ceil(2 * (omega * tmax + np.abs(idx).max() + extent))))

    def evaluate(P):
        lam, w = panel_rule(0.0, np.pi, P)
        k = qd.indices.astype(float)
        phase = np.outer(lam, k)
        Qp = np.cos(phase) @ qd.values
        Qm = np.sin(phase) @ qd.values
        nl = np.outer(lam, idx.astype(float))
        B = (w * Qp)[:, None] * np.cos(nl) + (w * Qm)[:, None] * np.sin(nl)
        wt = omega * times
        K = 0.5 * wt[:, None] ** 2 * sinc(np.outer(wt, np.sin(lam / 2.0))) ** 2
        return K @ B / np.pi

    corr = evaluate(panels)
    diff = 0.0
    if check:
        fine = evaluate(2 * panels)
        diff = float(np.max(np.abs(fine - corr), initial=0.0))
        scale = max(1.0, float(np.max(np.abs(ic.values(idx)))))
        if diff > rtol * scale:
            raise QuadratureError(f"spectral quadrature unsettled (change {diff:.3e})")
        corr = fine
        panels *= 2
    q = ic.values(idx)[None, :] - corr
    meta = {"panels": panels, "refinement_change": diff, "support": [qd.offset, qd.last],
            "ic": _ic_meta(ic)}
    return Trajectory("SpectralFormula", omega, idx, times, q, None, meta)


# ----------------------------------------------------------------------
# Bessel series

def _tail_order(n, tau):
    return max(2 * int(n), _miller_start(2 * int(n), float(tau)))


def sign_bessel_table(omega, ns, times, agree_tol=1e-10):
    """Sign solution for n in ``ns`` (n >= 1) at every time, both forms.

    Returns an array (len(times), len(ns)); raises if the finite sum and the
    tail form 1 + J_2n - 2 sum_{m >= n} J_2m disagree beyond ``agree_tol``.
    """
    ns = np.atleast_1d(np.asarray(ns, dtype=np.int64))
    if np.any(ns < 1):
        raise ValueError("the Sign Bessel series needs n >= 1")
    tau = 2.0 * omega * np.atleast_1d(np.asarray(times, dtype=float))
    top = _tail_order(ns.max(), tau.max(initial=0.0))
    top += top % 2
    J = bessel_j_table(top, tau)  # (top+1, len(tau))
    even = J[0::2]  # J_0, J_2, ...
    csum = np.cumsum(even, axis=0)  # csum[m] = sum_{j<=m} J_2j
    finite = 2.0 * csum[ns - 1] - even[0][None, :] + even[ns]
    tail_all = np.cumsum(even[::-1], axis=0)[::-1]  # tail_all[m] = sum_{j>=m} J_2j
    tail = 1.0 + even[ns] - 2.0 * tail_all[ns]
    gap = float(np.max(np.abs(finite - tail), initial=0.0))
    if gap > agree_tol:
        raise RuntimeError(f"Bessel series forms disagree by {gap:.3e}")
    return finite.T


def solve_bessel_sign(omega, n, t):
    """Sign solution q_n(t) at one (n, t), n >= 1."""
    if int(n) < 1:
        raise ValueError("solve_bessel_sign expects n >= 1")
    return float(sign_bessel_table(omega, [int(n)], [float(t)])[0, 0])


def _signed_sign_table(omega, idx, times):
    out = np.zeros((len(times), len(idx)))
    pos = idx != 0
    if np.any(pos):
        tab = sign_bessel_table(omega, np.abs(idx[pos]), times)
        out[:, pos] = np.sign(idx[pos])[None, :] * tab
    return out


def _green_convolution(ic, omega, idx, times):
    tau = 2.0 * omega * times
    reach = _tail_order(0, float(tau.max(initial=0.0)))
    kmin, kmax = int(idx.min()) - reach, int(idx.max()) + reach
    q0 = ic.values(np.arange(kmin, kmax + 1))
    J = bessel_j_table(2 * reach, tau)
    out = np.empty((len(times), len(idx)))
    m = np.arange(kmin, kmax + 1)
    for j, n in enumerate(idx):
        dist = np.abs(n - m)
        near = dist <= reach
        out[:, j] = J[2 * dist[near]].T @ q0[near]
    return out


def solve_bessel(ic, omega, times, indices):
    """Bessel-series trajectory.

    Sign uses the even-order series (odd in n), Spike(b) uses
    q_n = 1 + (b - 1) J_2n(2 omega t), constants are static and every other
    rule goes through the lattice Green's function sum_m J_{2|n-m|} q_m(0),
    truncated where the Bessel factors drop below 1e-16.
    """
    idx = _as_indices(indices)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    rule = ic.rule
    if rule == "sign":
        q, form = _signed_sign_table(omega, idx, times), "sign-series"
    elif rule == "spike":
        J = bessel_j_table(2 * int(np.abs(idx).max()), 2.0 * omega * times)
        q = 1.0 + (ic.params["b"] - 1.0) * J[2 * np.abs(idx)].T
        form = "spike"
    elif rule == "constant":
        q, form = np.full((len(times), len(idx)), ic.params["value"]), "constant"
    else:
        q, form = _green_convolution(ic, omega, idx, times), "green-function"
    return Trajectory("BesselSeries", omega, idx, times, q, None,
                      {"form": form, "ic": _ic_meta(ic)})


def solve_closed_form(ic, omega, times, indices):
    """cos(2 omega t) (-1)^k for Alternating, the constant itself for Constant."""
    idx = _as_indices(indices)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if ic.rule == "alternating":
        q = np.cos(2.0 * omega * times)[:, None] * ic.values(idx)[None, :]
    elif ic.rule == "constant":
        q = np.full((len(times), len(idx)), ic.params["value"])
    else:
        raise SolverNotApplicable(
            f"no closed form for the {ic.rule} rule",
            alternatives=tuple(applicable_solvers(ic, quick=True)))
    return Trajectory("ClosedForm", omega, idx, times, q, None, {"ic": _ic_meta(ic)})


def applicable_solvers(ic, quick=False):
    """Solvers that accept ``ic``. ``quick`` skips the membership test and
    admits the spectral solver only for finite-support rules."""
    out = ["OdeTruncated"]
    if ic.finite_delta_support:
        out.append("SpectralFormula")
    elif not quick:
        from .spectral import classify
        if classify(ic).is_member:
            out.append("SpectralFormula")
    out.append("BesselSeries")
    if ic.rule in ("alternating", "constant"):
        out.append("ClosedForm")
    return out


def solve(ic, omega, times, indices, solver="OdeTruncated", dt=None, **kwargs):
    """Dispatch to one solver by name."""
    solver = canonical_solver(solver)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if solver == "OdeTruncated":
        return solve_ode(ic, omega, float(times[-1]), dt=dt, report_window=indices,
                         times=times, **kwargs)
    if solver == "SpectralFormula":
        return solve_spectral(ic, omega, times, indices, **kwargs)
    if solver == "BesselSeries":
        return solve_bessel(ic, omega, times, indices)
    return solve_closed_form(ic, omega, times, indices)


@dataclass
class CrossValidationReport:
    solvers: tuple
    rows: list
    verdict: str
    threshold: float
    max_diff: float

    def to_dict(self):
        return {"solvers": list(self.solvers), "threshold": self.threshold,
                "max_diff": self.max_diff, "verdict": self.verdict,
                "pairs": [dict(r) for r in self.rows]}


def cross_validate(ic, omega, times, indices, solvers=None, threshold=1e-5, dt=None):
    """Pairwise sup differences between every applicable solver.

    PASS iff every pair differs by less than ``threshold``; a solver that
    raises is reported as a failing row rather than aborting the run.
    """
    names = applicable_solvers(ic) if solvers is None else [canonical_solver(s) for s in solvers]
    times = np.atleast_1d(np.asarray(times, dtype=float))
    results, rows = {}, []
    for name in names:
        try:
            results[name] = solve(ic, omega, times, indices, name, dt=dt).q
        except (ValueError, RuntimeError) as exc:
            rows.append({"a": name, "b": None, "sup_diff": math.inf, "pass": False,
                         "error": str(exc)})
    for a, b in itertools.combinations([n for n in names if n in results], 2):
        d = float(np.max(np.abs(results[a] - results[b])))
        rows.append({"a": a, "b": b, "sup_diff": d, "pass": d < threshold})
    ok = len(results) >= 2 and all(r["pass"] for r in rows)
    worst = max((r["sup_diff"] for r in rows), default=math.inf)
    return CrossValidationReport(tuple(names), rows, "PASS" if ok else "FAIL",
                                 threshold, worst)


def boundedness_sweep(ic, omega, T, indices, dt_report=0.1, solver=None,
                      growth_tol=0.01, doublings=3):
    """sup |q_k(t)| over indices x [0, T] and its stability under doubling T.

    The running sup is recorded at T/2^doublings, ..., T/2, T; the verdict is
    PASS when the last doubling raises it by less than ``growth_tol``
    (relative). The Bessel solver is used by default since it has no
    truncation; any solver name may be passed instead.
    """
    idx = _as_indices(indices)
    times = _report_times(T, None, dt_report)
    solver = "BesselSeries" if solver is None else canonical_solver(solver)
    traj = solve(ic, omega, times, idx, solver)
    mags = np.abs(traj.q)
    running = np.maximum.accumulate(mags.max(axis=1))
    checkpoints = [T / 2.0 ** j for j in range(doublings, -1, -1)]
    trace = [(float(c), float(running[np.searchsorted(times, c, side="right") - 1]))
             for c in checkpoints]
    prev, last = trace[-2][1], trace[-1][1]
    growth = (last - prev) / prev if prev > 0 else (0.0 if last == 0 else math.inf)
    verdict = "PASS" if np.isfinite(last) and growth < growth_tol else "FAIL"
    tt, kk = np.meshgrid(times, idx, indexing="ij")
    grid = np.column_stack([kk.ravel(), tt.ravel()])
    return BoundSweepReport("Trajectory", grid, traj.q.ravel(), verdict=verdict,
                            meta={"solver": solver, "omega": omega, "T": T,
                                  "dt_report": dt_report, "sup_trace": trace,
                                  "growth_last_doubling": growth,
                                  "ic": _ic_meta(ic)})
