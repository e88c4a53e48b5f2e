"""The ten acceptance checks of the package as callable functions.

Each check returns a CriterionResult with the measured quantities; the CLI
``verify`` command and the test-suite both run them.
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from . import bounds, dynamics, spectral
from .bessel import identity_residual
from .lattice import InitialCondition
from .spectral import dirichlet_kernel_integral, dirichlet_kernel_sum

__all__ = ["CriterionResult", "CRITERIA", "run_criteria", "format_table", "v_ratio_oracle"]


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def to_dict(self):
        return {"criterion": self.number, "name": self.name, "passed": self.passed,
                "seconds": self.seconds, "details": self.details}


def _timed(number, name, budget=None):
    def wrap(fn):
        def run():
            t0 = time.perf_counter()
            passed, details = fn()
            secs = time.perf_counter() - t0
            if budget is not None:
                details["runtime_budget_s"] = budget
                details["within_budget"] = secs < budget
                passed = passed and secs < budget
            return CriterionResult(number, name, bool(passed), details, secs)
        run.number = number
        run.title = name
        return run
    return wrap


@_timed(1, "alternating closed form", budget=10.0)
def criterion_1():
    worst = {}
    for omega in (0.5, 1.0):
        times = np.linspace(0.0, 20.0, 2001)
        tr = dynamics.solve_ode(InitialCondition.alternating(), omega, 20.0, dt=1e-3,
                                report_window=(-10, 10), times=times)
        exact = np.cos(2 * omega * times)[:, None] * (-1.0) ** tr.indices[None, :]
        worst[str(omega)] = float(np.max(np.abs(tr.q - exact)))
    return max(worst.values()) < 1e-6, {"max_abs_error": worst, "tolerance": 1e-6}


@_timed(2, "three-solver agreement for sign", budget=60.0)
def criterion_2():
    times = np.arange(0.0, 40.0 + 1e-9, 0.5)
    rep = dynamics.cross_validate(InitialCondition.sign(), 0.5, times, np.arange(1, 21),
                                  solvers=("OdeTruncated", "SpectralFormula", "BesselSeries"))
    pairs = {f"{r['a']}~{r['b']}": r["sup_diff"] for r in rep.rows}
    return rep.verdict == "PASS" and len(pairs) == 3, {"pairs": pairs, "tolerance": 1e-5}


@_timed(3, "Bessel even-sum identity")
def criterion_3():
    res = [identity_residual(float(t), int(math.ceil(t / 2)) + 60) for t in range(51)]
    return max(res) < 1e-10, {"max_residual": max(res), "tolerance": 1e-10}


@_timed(4, "Dirichlet kernel integral")
def criterion_4():
    diffs = [abs(dirichlet_kernel_integral(n) - dirichlet_kernel_sum(n)) for n in range(1, 201)]
    v1000 = dirichlet_kernel_integral(1000)
    gap = abs(v1000 - math.pi)
    return max(diffs) < 1e-10 and gap < 1e-3, {
        "max_diff_n_le_200": max(diffs), "value_n_1000": v1000, "abs_minus_pi": gap}


@_timed(5, "limits and long-time decay")
def criterion_5():
    targets = {"sign": (InitialCondition.sign(), (1.0, -1.0, 0.0)),
               "spike(3)": (InitialCondition.spike(3.0), (1.0, 1.0, 1.0))}
    details, ok = {}, True
    for name, (ic, want) in targets.items():
        lim = spectral.limits_for_ic(ic)
        got = (lim.L_plus, lim.L_minus, lim.nu)
        err = max(abs(a - b) for a, b in zip(got, want))
        details[name] = {"L_plus": got[0], "L_minus": got[1], "nu": got[2], "max_error": err}
        ok &= err < 1e-2
    Ts = (50.0, 100.0, 200.0, 400.0)
    # literal pointwise check for Sign from the truncated ODE
    dev = []
    for T in Ts:
        tr = dynamics.solve_ode(InitialCondition.sign(), 0.5, T, report_window=[1], times=[0.0, T])
        dev.append(abs(tr.q[-1, 0] - 0.0))
    decreasing = all(b < a for a, b in zip(dev, dev[1:]))
    details["sign_q1_deviation"] = dict(zip(map(str, Ts), dev))
    details["sign_decreasing"] = decreasing
    # Spike(3): |2 J_2(T)| oscillates, so its decay is read off the envelope
    spike = InitialCondition.spike(3.0)
    point = [abs(dynamics.solve_bessel(spike, 0.5, [T], [1]).q[0, 0] - 1.0) for T in Ts]
    env = []
    for T in Ts:
        s = np.linspace(T, 2 * T, int(20 * T) + 1)
        env.append(float(np.max(np.abs(dynamics.solve_bessel(spike, 0.5, s, [1]).q[:, 0] - 1.0))))
    env_decreasing = all(b < a for a, b in zip(env, env[1:]))
    details["spike_q1_deviation_pointwise"] = dict(zip(map(str, Ts), point))
    details["spike_q1_envelope_T_to_2T"] = dict(zip(map(str, Ts), env))
    details["spike_envelope_decreasing"] = env_decreasing
    return ok and decreasing and env_decreasing, details


def v_ratio_oracle(ns):
    """V_n / (n ln n) by adaptive QUADPACK on the direct integrand."""
    out = []
    for n in ns:
        f = lambda l: abs(math.sin(n * l) - 2 * n * math.sin(l / 2)) / math.sin(l / 2) ** 2
        v = integrate.quad(f, 0.0, math.pi, limit=4000, epsabs=1e-12, epsrel=1e-12)[0]
        out.append(v / (n * math.log(n)))
    return np.array(out)


@_timed(6, "V_n growth law")
def criterion_6():
    ns = np.arange(2, 201)
    rep = bounds.sweep("V_n", ns)
    ratio = rep.values / (ns * np.log(ns))
    oracle = v_ratio_oracle(ns)
    running_max_200 = float(np.maximum.accumulate(oracle)[-1])
    last = ns >= 20
    slope = bounds.v_ratio_trend(ns[last], rep.values[last])
    ok = ratio.max() <= 1.05 * running_max_200 and slope <= 0 and ratio[-1] <= ratio[last][0]
    return ok, {"ratio_max": float(ratio.max()), "oracle_running_max": running_max_200,
                "ratio_n20": float(ratio[last][0]), "ratio_n200": float(ratio[-1]),
                "trend_slope_last_decade": slope,
                "max_abs_diff_vs_oracle": float(np.max(np.abs(ratio - oracle)))}


REGIME_GRIDS = {
    "gamma<=g1": np.round(np.arange(0.02, 0.5 + 1e-9, 0.02), 10),
    "gamma>=g2": np.round(np.arange(2.0, 4.0 + 1e-9, 0.05), 10),
    "g1<gamma<=1": np.round(np.arange(0.51, 1.0 + 1e-9, 0.01), 10),
    "1<gamma<g2": np.round(np.arange(1.01, 1.99 + 1e-9, 0.01), 10),
}


def _densify(values):
    v = np.asarray(values, dtype=float)
    mids = 0.5 * (v[:-1] + v[1:])
    return np.sort(np.concatenate([v, mids]))


@_timed(7, "uniform-bound sweeps", budget=600.0)
def criterion_7():
    details, ok = {}, True
    ns = np.arange(0, 201)
    t_base = np.arange(0.0, 400.0 + 1e-9, 0.5)
    t_fine = _densify(t_base)
    for target, nn in (("I_n", ns), ("G_n", ns), ("AltSums", ns[1:])):
        base = bounds.sweep(target, nn, t_base)
        fine = bounds.sweep(target, nn, t_fine)
        change = abs(fine.empirical_sup - base.empirical_sup) / fine.empirical_sup
        entry = {"sup": base.empirical_sup, "argmax": base.argmax,
                 "sup_dense_grid": fine.empirical_sup, "grid_change": change,
                 "quadrature_change": base.meta.get("quadrature_change", 0.0)}
        if target == "AltSums":
            entry["odd_sup"] = base.meta["odd_sup"]
            entry["even_sup"] = base.meta["even_sup"]
            for key in ("odd_sup", "even_sup"):
                c = abs(fine.meta[key] - base.meta[key]) / fine.meta[key]
                entry[key + "_grid_change"] = c
                ok &= c < 0.01
        details[target] = entry
        ok &= np.isfinite(base.empirical_sup) and change < 0.01
        ok &= entry["quadrature_change"] < 0.01
    ok &= details["G_n"]["sup"] < 5.0
    n_reg = np.arange(10, 301)
    for regime, gammas in REGIME_GRIDS.items():
        base = bounds.regime_sweep(regime, n_reg, gammas, quantity="C")
        dense = np.array([g for g in _densify(gammas)])
        fine = bounds.regime_sweep(regime, n_reg, dense, quantity="C", refine=False)
        change = abs(fine.empirical_sup - base.empirical_sup) / fine.empirical_sup
        details[f"C_n[{regime}]"] = {"sup": base.empirical_sup, "argmax": base.argmax,
                                     "sup_dense_grid": fine.empirical_sup,
                                     "grid_change": change,
                                     "quadrature_change": base.meta["quadrature_change"]}
        ok &= np.isfinite(base.empirical_sup) and change < 0.01
        ok &= base.meta["quadrature_change"] < 0.01
    return ok, details


@_timed(8, "spectral reconstruction constancy")
def criterion_8():
    details, ok = {}, True
    ns = np.arange(-64, 65)
    for name, ic in (("sign", InitialCondition.sign()), ("spike(3)", InitialCondition.spike(3.0))):
        prof = spectral.profile_for_ic(ic)
        c = ic.values(ns) - spectral.tilde_q(prof, ns)
        spread = float(np.max(c) - np.min(c))
        details[name] = {"spread": spread, "c": float(np.mean(c))}
        ok &= spread < 1e-6
    return ok, details


@_timed(9, "physics invariants")
def criterion_9():
    ic = InitialCondition.sign()
    tr = dynamics.solve_ode(ic, 0.5, 100.0, report_window=(-5, 5))
    drift = tr.meta["energy_drift"]

    T, omega = 50.0, 0.5
    N = dynamics.required_half_width([10], omega, T)
    q0 = ic.values(np.arange(-N, N + 1))
    qs, ps = dynamics.integrate_chain(q0, np.zeros_like(q0), omega, [T], 0.01)
    back, _ = dynamics.integrate_chain(qs[-1], -ps[-1], omega, [T], 0.01)
    reversal = float(np.max(np.abs(back[-1] - q0)))

    rng = np.random.default_rng(20240517)
    worst_lin = 0.0
    for _ in range(3):
        t1 = {int(k): float(v) for k, v in zip(range(-4, 5), rng.normal(size=9))}
        t2 = {int(k): float(v) for k, v in zip(range(-3, 7), rng.normal(size=10))}
        a, b = rng.normal(size=2)
        combo = {k: a * t1.get(k, 0.0) + b * t2.get(k, 0.0) for k in set(t1) | set(t2)}
        kw = dict(report_window=(-15, 15), times=np.linspace(0, 30, 31))
        s1 = dynamics.solve_ode(InitialCondition.custom(t1), 1.0, 30.0, **kw).q
        s2 = dynamics.solve_ode(InitialCondition.custom(t2), 1.0, 30.0, **kw).q
        sc = dynamics.solve_ode(InitialCondition.custom(combo), 1.0, 30.0, **kw).q
        worst_lin = max(worst_lin, float(np.max(np.abs(sc - (a * s1 + b * s2)))))
    ok = drift < 1e-6 and reversal < 1e-8 and worst_lin < 1e-10
    return ok, {"energy_drift": drift, "time_reversal_error": reversal,
                "linearity_residual": worst_lin}


@_timed(10, "decomposition identities")
def criterion_10():
    rng = np.random.default_rng(7)
    mg, rm = 0.0, 0.0
    for n, t in zip(rng.integers(1, 201, 50), rng.uniform(0.0, 400.0, 50)):
        val = bounds.eval_main_gest(int(n), float(t))
        split = dirichlet_kernel_integral(int(n)) - 2.0 * bounds.eval_I(2 * int(n), float(t))
        mg = max(mg, abs(val - split))
    for n, t in zip(rng.uniform(0.5, 200.0, 50), rng.uniform(0.0, 400.0, 50)):
        R, M = bounds.eval_R_M(float(n), float(t))
        rm = max(rm, abs(bounds.eval_C_tilde(float(n), float(t)) - 0.5 * (R + M)))
    return mg < 1e-8 and rm < 1e-8, {"main_gest_max_mismatch": mg, "R_M_max_mismatch": rm}


CRITERIA = (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10)


def run_criteria(only=None):
    """Run the selected criteria (all by default) in order."""
    chosen = [c for c in CRITERIA if only is None or c.number in set(only)]
    return [c() for c in chosen]


def format_table(results):
    lines = [f"{'#':>2}  {'criterion':<36} {'result':<6} {'seconds':>8}"]
    for r in results:
        lines.append(f"{r.number:>2}  {r.name:<36} {'PASS' if r.passed else 'FAIL':<6} "
                     f"{r.seconds:8.2f}")
    return "\n".join(lines)
