import numpy as np
import pytest
from scipy.special import jv

from harmonic_chain.dynamics import (SolverNotApplicable, Trajectory, boundedness_sweep,
                                     chain_energy, cross_validate, integrate_chain,
                                     required_half_width, sign_bessel_table, solve_bessel,
                                     solve_bessel_sign, solve_closed_form, solve_ode,
                                     solve_spectral)
from harmonic_chain.lattice import InitialCondition
from harmonic_chain.reports import read_header


def sign_oracle(n, t):
    # scipy Bessel functions, omega = 1/2
    return jv(0, t) + 2 * sum(jv(2 * k, t) for k in range(1, n)) + jv(2 * n, t)


@pytest.mark.parametrize("omega", [0.5, 1.0, 1.7])
def test_alternating_closed_form(omega):
    times = np.linspace(0, 20, 201)
    tr = solve_ode(InitialCondition.alternating(), omega, 20.0, dt=min(1e-3, 0.1 / omega),
                   report_window=(-4, 4), times=times)
    exact = np.cos(2 * omega * times)[:, None] * (-1.0) ** tr.indices[None, :]
    assert np.max(np.abs(tr.q - exact)) < 1e-6


def test_constant_is_static():
    tr = solve_ode(InitialCondition.constant(2.0), 0.8, 10.0, report_window=(-3, 3))
    assert np.all(tr.q == 2.0)


def test_initial_row_matches_ic():
    ic = InitialCondition.log_decay(4000)
    tr = solve_ode(ic, 1.0, 1.0, report_window=(-30, 30))
    assert np.max(np.abs(tr.q[0] - ic.values(tr.indices))) <= 1e-14


def test_ode_matches_bessel_sign():
    times = np.arange(0, 40.01, 0.5)
    ns = np.arange(1, 21)
    tr = solve_ode(InitialCondition.sign(), 0.5, 40.0, report_window=ns, times=times)
    ref = solve_bessel(InitialCondition.sign(), 0.5, times, ns)
    assert np.max(np.abs(tr.q - ref.q)) < 1e-6


def test_ode_preconditions():
    ic = InitialCondition.sign()
    with pytest.raises(ValueError, match="dt"):
        solve_ode(ic, 1.0, 5.0, dt=0.2)
    with pytest.raises(ValueError, match="need N >= 47"):
        solve_ode(ic, 1.0, 5.0, report_window=(-10, 10), half_width=30)
    assert required_half_width([-10, 10], 1.0, 5.0) == 47


def test_boundary_influence_is_negligible():
    # a wider lattice must not change the reported cells
    ic = InitialCondition.alternating()
    a = solve_ode(ic, 1.0, 15.0, report_window=(-5, 5))
    b = solve_ode(ic, 1.0, 15.0, report_window=(-5, 5), half_width=200)
    assert np.max(np.abs(a.q - b.q)) < 1e-10


def test_spectral_at_time_zero():
    for ic in (InitialCondition.sign(), InitialCondition.spike(3.0)):
        tr = solve_spectral(ic, 0.7, [0.0], np.arange(-5, 6))
        assert np.all(tr.q[0] == ic.values(tr.indices))


def test_spectral_sign_point():
    v = solve_spectral(InitialCondition.sign(), 0.5, [10.0], [5]).q[0, 0]
    assert abs(v - solve_bessel_sign(0.5, 5, 10.0)) < 1e-8
    # independent scipy oracle, frozen
    assert sign_oracle(5, 10.0) == pytest.approx(0.6383961668663792, abs=1e-15)
    assert abs(v - 0.6383961668663792) < 1e-8


def test_spectral_spike_matches_ode():
    ic = InitialCondition.spike(3.0)
    times = np.linspace(0, 30, 31)
    a = solve_spectral(ic, 0.5, times, np.arange(-8, 9))
    b = solve_ode(ic, 0.5, 30.0, report_window=(-8, 8), times=times)
    assert np.max(np.abs(a.q - b.q)) < 1e-6
    # decomposition g + (b - 1) e0(t): the dispersing part is J_2n(t)
    exact = 1 + 2 * jv(2 * np.abs(a.indices)[None, :], times[:, None])
    assert np.max(np.abs(a.q - exact)) < 1e-10


def test_spectral_rejects_non_member():
    with pytest.raises(SolverNotApplicable):
        solve_spectral(InitialCondition.alternating(), 1.0, [1.0], [0])


def test_spectral_log_decay_member():
    ic = InitialCondition.log_decay()
    times = np.array([0.0, 5.0, 10.0])
    a = solve_spectral(ic, 1.0, times, [-3, 0, 4])
    b = solve_ode(ic, 1.0, 10.0, report_window=[-3, 0, 4], times=times)
    assert np.max(np.abs(a.q - b.q)) < 1e-6


def test_bessel_sign_examples():
    assert solve_bessel_sign(0.5, 1, 0.0) == 1.0
    for n in (2, 7, 30):
        assert solve_bessel_sign(0.5, n, 0.0) == 1.0
    assert abs(solve_bessel_sign(0.5, 1, 400.0)) < 0.1
    with pytest.raises(ValueError):
        solve_bessel_sign(0.5, 0, 1.0)


def test_bessel_sign_against_scipy():
    ts = np.array([0.3, 4.0, 17.5, 60.0])
    tab = sign_bessel_table(0.5, [1, 3, 12], ts)
    for j, n in enumerate((1, 3, 12)):
        np.testing.assert_allclose(tab[:, j], sign_oracle(n, ts), rtol=0, atol=1e-13)
    # general omega uses the argument 2 omega t
    assert solve_bessel_sign(1.3, 4, 2.0) == pytest.approx(sign_oracle(4, 2 * 1.3 * 2.0), abs=1e-13)


def test_bessel_sign_is_odd():
    tr = solve_bessel(InitialCondition.sign(), 0.5, [3.0, 9.0], np.arange(-6, 7))
    np.testing.assert_array_equal(tr.q[:, ::-1], -tr.q)


def test_green_function_matches_closed_form():
    times = np.linspace(0, 12, 7)
    g = solve_bessel(InitialCondition.alternating(), 1.0, times, np.arange(-3, 4))
    assert g.meta["form"] == "green-function"
    c = solve_closed_form(InitialCondition.alternating(), 1.0, times, np.arange(-3, 4))
    assert np.max(np.abs(g.q - c.q)) < 1e-13


def test_closed_form_rejects_sign():
    with pytest.raises(SolverNotApplicable) as info:
        solve_closed_form(InitialCondition.sign(), 1.0, [0.0], [1])
    assert "OdeTruncated" in info.value.alternatives


def test_cross_validate_examples():
    times = np.arange(0, 40.01, 0.5)
    rep = cross_validate(InitialCondition.sign(), 0.5, times, np.arange(1, 21))
    assert rep.verdict == "PASS" and rep.max_diff < 1e-5
    rep = cross_validate(InitialCondition.alternating(), 1.0, times[:41], np.arange(-3, 4),
                         solvers=("ode", "closed-form"))
    assert rep.verdict == "PASS"
    rep = cross_validate(InitialCondition.constant(-0.5), 0.9, times[:21], np.arange(-3, 4))
    assert rep.verdict == "PASS" and rep.max_diff <= 1e-12
    assert set(rep.solvers) == {"OdeTruncated", "SpectralFormula", "BesselSeries", "ClosedForm"}


def test_cross_validate_reports_failures_as_rows():
    rep = cross_validate(InitialCondition.alternating(), 1.0, [0.0, 1.0], [0],
                         solvers=("ode", "spectral"))
    assert rep.verdict == "FAIL"
    assert any("error" in r for r in rep.rows)


def test_boundedness_examples():
    rep = boundedness_sweep(InitialCondition.sign(), 0.5, 400.0, np.arange(1, 21))
    assert rep.verdict == "PASS"
    assert 1.0 <= rep.empirical_sup < 1.5
    rep = boundedness_sweep(InitialCondition.alternating(), 1.0, 50.0, np.arange(-3, 4))
    assert rep.empirical_sup == 1.0 and rep.verdict == "PASS"
    rep = boundedness_sweep(InitialCondition.constant(-2.5), 1.0, 10.0, [0, 1])
    assert rep.empirical_sup == 2.5


def test_energy_drift_small():
    tr = solve_ode(InitialCondition.sign(), 0.5, 100.0, report_window=(-2, 2))
    assert tr.meta["energy_drift"] < 1e-6


def test_plain_verlet_is_second_order():
    # halving dt cuts the phase error by about 4 for order 2 and 16 for order 4
    def err(dt, order):
        tr = solve_ode(InitialCondition.alternating(), 1.0, 10.0, dt=dt, report_window=[0],
                       times=[0.0, 10.0], order=order)
        return abs(tr.q[-1, 0] - np.cos(20.0))
    assert err(0.02, 2) / err(0.01, 2) == pytest.approx(4.0, rel=0.05)
    assert err(0.04, 4) / err(0.02, 4) == pytest.approx(16.0, rel=0.1)


def test_time_reversal():
    ic = InitialCondition.spike(-1.0)
    N = 80
    q0 = ic.values(np.arange(-N, N + 1))
    qs, ps = integrate_chain(q0, np.zeros_like(q0), 0.9, [30.0], 0.01)
    back, _ = integrate_chain(qs[-1], -ps[-1], 0.9, [30.0], 0.01)
    assert np.max(np.abs(back[-1] - q0)) < 1e-8


def test_linearity_of_flow():
    rng = np.random.default_rng(5)
    t1 = dict(zip(range(-3, 4), rng.normal(size=7)))
    t2 = dict(zip(range(0, 5), rng.normal(size=5)))
    a, b = 0.7, -1.9
    combo = {k: a * t1.get(k, 0) + b * t2.get(k, 0) for k in set(t1) | set(t2)}
    kw = dict(report_window=(-8, 8), times=np.linspace(0, 12, 13))
    s1 = solve_ode(InitialCondition.custom(t1), 1.0, 12.0, **kw).q
    s2 = solve_ode(InitialCondition.custom(t2), 1.0, 12.0, **kw).q
    sc = solve_ode(InitialCondition.custom(combo), 1.0, 12.0, **kw).q
    assert np.max(np.abs(sc - (a * s1 + b * s2))) < 1e-10


def test_decay_to_nu_for_sign():
    dev = [abs(solve_bessel_sign(0.5, 1, T)) for T in (50, 100, 200, 400)]
    assert all(b < a for a, b in zip(dev, dev[1:]))


def test_chain_energy():
    q = np.array([0.0, 1.0, 1.0])
    p = np.array([0.0, 2.0, 0.0])
    assert chain_energy(q, p, 2.0) == pytest.approx(0.5 * 4 + 0.5 * 4 * 1)


def test_trajectory_exports(tmp_path):
    tr = solve_bessel(InitialCondition.spike(2.0), 0.5, [0.0, 1.0], [0, 3])
    text = tr.to_csv(tmp_path / "t.csv")
    assert text.splitlines()[1] == "t,k,q"
    assert len(text.splitlines()) == 2 + 4
    assert read_header(str(tmp_path / "t.csv"))["solver"] == "BesselSeries"
    plot = tr.plot_text(3)
    assert plot.splitlines()[1] == "t,q_3"
    assert read_header(plot)["index"] == 3
    assert isinstance(tr, Trajectory) and tr.index_window == (0, 3)
