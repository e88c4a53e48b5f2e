import math

import numpy as np
import pytest
from scipy import integrate
from scipy.special import sici

from harmonic_chain.bounds import (EPS_PRIME, C_matrix, I_matrix, eval_C, eval_C_tilde, eval_I,
                                   eval_L, eval_main_gest, eval_R_M, eval_V, regime_bound_factor,
                                   regime_sweep, sweep, v_ratio_trend)
from harmonic_chain.reports import BoundSweepReport
from harmonic_chain.spectral import dirichlet_kernel_integral


def test_I_examples():
    assert eval_I(0, 3.0) == 0.0
    assert eval_I(1, 0.0) == pytest.approx(math.pi / 2, abs=1e-14)
    assert eval_I(2, 0.0) == pytest.approx(2.0, abs=1e-14)
    # QUADPACK on the raw integrand, frozen
    assert eval_I(20, 15.0) == pytest.approx(1.59857365807817045, abs=1e-12)


def test_C_examples():
    assert eval_C(0, 5.0) == 0.0
    # C_n(0) = Si(n pi / 2)
    for n in (1, 2, 9):
        assert eval_C(n, 0.0) == pytest.approx(sici(n * math.pi / 2)[0], abs=1e-13)
    assert sici(math.pi)[0] == pytest.approx(1.85193705198246617, abs=1e-15)
    assert eval_C(10, 10.0) == pytest.approx(1.00319230096028088, abs=1e-12)
    assert eval_C_tilde(4, 0.0) == pytest.approx(sici(math.pi)[0], abs=1e-13)


def test_C_against_quad():
    for n, t in ((3, 2.0), (7.5, 20.0), (40, 35.0)):
        f = lambda x: math.cos(t * math.sin(x)) * math.sin(n * x) / x
        ref = integrate.quad(f, 0, math.pi / 2, limit=400, epsabs=1e-13, epsrel=1e-12)[0]
        assert eval_C(n, t) == pytest.approx(ref, abs=1e-11)


def test_V_examples():
    assert eval_V(2) == pytest.approx(13.5451774444795625, rel=1e-10)
    with pytest.raises(ValueError):
        eval_V(1)
    v, roots = eval_V(12, return_roots=True)
    assert all(0 < r < math.pi for r in roots)
    assert roots == sorted(roots)


def test_V_against_quad():
    for n in (3, 10):
        f = lambda l: abs(math.sin(n * l) - 2 * n * math.sin(l / 2)) / math.sin(l / 2) ** 2
        _, roots = eval_V(n, return_roots=True)
        pts = [1e-12] + roots + [math.pi]
        ref = sum(integrate.quad(f, a, b, limit=200, epsrel=1e-12)[0] for a, b in zip(pts, pts[1:]))
        assert eval_V(n) == pytest.approx(ref, rel=1e-9)


def test_V_ratio_bounded_and_flat():
    ns = np.unique(np.geomspace(2, 2000, 30).astype(int))
    vals = np.array([eval_V(n) for n in ns])
    ratio = vals / (ns * np.log(ns))
    assert ratio.max() < 15
    assert abs(v_ratio_trend(ns[ns >= 200], vals[ns >= 200])) < 1.0


def test_main_gest_examples():
    assert eval_main_gest(0, 3.0) == 0.0
    assert eval_main_gest(4, 0.0) == 0.0
    assert eval_main_gest(3, 7.0) == pytest.approx(2.01914497343849859, abs=1e-12)
    # large t washes out the oscillatory part toward the Dirichlet integral
    assert eval_main_gest(5, 0.0001) == pytest.approx(0.0, abs=1e-3)
    v = eval_main_gest(6, 300.0)
    assert abs(v - dirichlet_kernel_integral(6)) < 0.2


def test_R_M_and_L():
    R, M = eval_R_M(20, 20.0)
    assert M == pytest.approx(0.4612454907011999, abs=1e-12)
    assert eval_L(20, 0.0) == pytest.approx(0.4612454907011999, abs=1e-12)
    assert (R + M) / 2 == pytest.approx(eval_C_tilde(20, 20.0), abs=1e-10)
    with pytest.raises(ValueError):
        eval_R_M(0, 1.0)


def test_L_against_quad():
    for n, eps in ((10, 0.05), (50, EPS_PRIME), (200, 0.0)):
        f = lambda x: math.sin(n * (x - (1 + eps) * math.sin(x))) / x
        ref = integrate.quad(f, 0, math.pi / 4, limit=400, epsabs=1e-14)[0]
        assert eval_L(n, eps) == pytest.approx(ref, abs=1e-11)


def test_matrix_paths_match_scalar():
    ns, ts = np.array([1, 5, 30]), np.array([0.0, 3.3, 60.0])
    Im, Cm = I_matrix(ns, ts), C_matrix(ns, ts)
    for i, n in enumerate(ns):
        for j, t in enumerate(ts):
            assert Im[i, j] == pytest.approx(eval_I(n, t), abs=1e-12)
            assert Cm[i, j] == pytest.approx(eval_C(n, t), abs=1e-12)


def test_sweep_report_invariants():
    rep = sweep("I_n", np.arange(0, 21), np.arange(0, 40.01, 0.5))
    assert isinstance(rep, BoundSweepReport)
    assert rep.empirical_sup == pytest.approx(np.max(np.abs(rep.values)))
    assert rep.argmax == (2.0, 0.0)
    assert rep.empirical_sup == pytest.approx(2.0, abs=1e-12)
    assert rep.verdict == "PASS" and rep.meta["quadrature_change"] < 1e-6
    d = rep.to_dict()
    assert set(d) >= {"target", "empirical_sup", "argmax", "verdict", "meta"}
    assert len(rep.csv_rows()) == 21 * 81


def test_sweep_rejects_unknown_target():
    with pytest.raises(ValueError):
        sweep("Z_n", [1, 2], [0.0, 1.0])


@pytest.mark.parametrize("target", ["C_n", "I_n"])
def test_no_growth_with_n(target):
    sups = []
    for n in (50, 100, 200):
        rep = sweep(target, [n], np.linspace(0, 4 * n, 8 * n + 1), refine=False)
        sups.append(rep.empirical_sup)
    assert sups[2] <= sups[0] * 1.05 + 1e-9


def test_main_gest_sweep_bounded():
    rep = sweep("MainGest", np.arange(1, 41), np.arange(0, 80.01, 1.0))
    assert rep.verdict == "PASS" and rep.empirical_sup < 10


def test_regime_validation():
    with pytest.raises(ValueError, match="violate"):
        regime_sweep("gamma<=g1", [10], [0.2, 0.7])
    with pytest.raises(ValueError, match="violate"):
        regime_sweep("1<gamma<g2", [10], [1.0])
    with pytest.raises(ValueError, match="unknown regime"):
        regime_sweep("gamma~1", [10], [1.0])
    with pytest.raises(ValueError):
        regime_sweep("gamma<=g1", [10], [0.3], quantity="X")


def test_regime_factors():
    assert regime_bound_factor("gamma<=g1") == pytest.approx(math.exp(4 / 3) * 4 / 3)
    assert regime_bound_factor("gamma>=g2") == pytest.approx(4 / 3 * math.exp(2 / 3))
    assert regime_bound_factor("g1<gamma<=1") is None


def test_regime_sweeps():
    rep = regime_sweep("gamma<=g1", np.arange(1, 61), np.linspace(0, 0.5, 11))
    assert rep.verdict == "INFORMATIONAL" and rep.meta["implied_constant"] > 0
    rep = regime_sweep("1<gamma<g2", np.arange(1, 101), np.linspace(1.01, 1.99, 50))
    assert rep.verdict == "PASS"
    assert rep.bound_formula == 49.0
    assert rep.meta["sup_within_eps_prime"] <= 49.0
