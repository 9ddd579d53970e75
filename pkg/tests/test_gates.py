"""Gate protocol tests: CZ, Toffoli-class, scaling factors, error budget."""

import numpy as np
import pytest

from heraldgate import SystemParams, effective_closed_form
from heraldgate.effective import conditional_sector_evolution, sector_weights
from heraldgate.gates import (
    DegenerateGateError,
    ErrorBudget,
    GateReport,
    ToffoliScaling,
    cz_analytic_detunings,
    cz_protocol,
    rb87_error_budget,
    toffoli_detuning,
    toffoli_protocol,
    toffoli_scaling,
)


def cz_model(C, a=0.25, alpha=1.0, beta=1.0):
    dE, de = cz_analytic_detunings(C, alpha, beta)
    p = SystemParams(n_qubits=2, C=C, alpha=alpha, beta=beta, delta_E=dE,
                     delta_e=de, omega=a * np.sqrt(C))
    return effective_closed_form(p)


def toffoli_model(C, N, a=0.25, alpha=1.0, beta=1.0):
    dE = toffoli_detuning(C, alpha, beta)
    p = SystemParams(n_qubits=N, C=C, alpha=alpha, beta=beta, delta_E=dE,
                     delta_e=0.0, omega=a * np.sqrt(C))
    return effective_closed_form(p)


# -- analytic CZ detunings -------------------------------------------------

def test_analytic_detunings_reference():
    dE, de = cz_analytic_detunings(100.0)
    assert dE == pytest.approx(10.012492197250394, rel=1e-12)
    assert de == pytest.approx(4.993761694389223, rel=1e-12)
    # and they do equalize the three sector rates
    eff = cz_model(100.0)
    spread = eff.Gamma.max() - eff.Gamma.min()
    assert spread < 1e-9 * eff.Gamma[0]


def test_analytic_detunings_large_beta_limit():
    _, de = cz_analytic_detunings(100.0, 1.0, 1e8)
    assert de < 1e-3


def test_analytic_detunings_validation():
    with pytest.raises(ValueError):
        cz_analytic_detunings(-1.0)
    with pytest.raises(ValueError):
        cz_analytic_detunings(100.0, 0.0, 1.0)


# -- CZ protocol -----------------------------------------------------------

def test_cz_reference_point():
    rep = cz_protocol(cz_model(100.0))
    assert rep.t_gate == pytest.approx(38.036160406620084, rel=1e-10)
    assert rep.P_success == pytest.approx(0.5535749000137674, rel=1e-10)
    assert rep.fidelity >= 1.0 - 1e-12


def test_cz_phases_match_analytic():
    rep = cz_protocol(cz_model(100.0))
    phi = rep.metadata["phase_per_qubit_analytic"]
    for got in rep.phases:
        diff = (got - phi + np.pi) % (2 * np.pi) - np.pi
        assert abs(diff) < 1e-5


def test_cz_phase_invariant():
    """Post-correction propagator is diag(1,1,1,-1) up to a global phase."""
    eff = cz_model(300.0, a=0.2)
    rep = cz_protocol(eff)
    phi = rep.metadata["phase_per_qubit_analytic"]
    n_of = np.array([0, 1, 1, 2])
    nbits = np.array([0, 1, 1, 2])
    theta = -eff.delta[n_of] * rep.t_gate + nbits * phi
    u = np.exp(1j * theta)
    u = u / u[0]
    assert np.max(np.abs(u - np.array([1, 1, 1, -1]))) < 1e-10


def test_cz_fidelity_one_any_input():
    eff = cz_model(50.0, a=0.3)
    rng = np.random.default_rng(406)
    for _ in range(5):
        a = rng.normal(size=4) + 1j * rng.normal(size=4)
        a /= np.linalg.norm(a)
        rep = cz_protocol(eff, input_amplitudes=a)
        assert rep.fidelity >= 1.0 - 1e-12


def test_cz_unequal_rates_lower_fidelity():
    dE, de = cz_analytic_detunings(100.0)
    p = SystemParams(n_qubits=2, C=100.0, delta_E=dE, delta_e=1.6 * de,
                     omega=2.5)
    rep = cz_protocol(effective_closed_form(p))
    assert 0.9 < rep.fidelity < 1.0 - 1e-6


def test_cz_success_consistency():
    """Report P equals the weighted norm^2 of the conditional amplitudes."""
    eff = cz_model(100.0)
    rep = cz_protocol(eff)
    c0 = np.full(3, 0.5, dtype=complex)
    c_t = conditional_sector_evolution(eff, c0, rep.t_gate)
    P = float(np.sum(sector_weights(2) * np.abs(c_t) ** 2))
    assert rep.P_success == pytest.approx(P, abs=1e-12)


def test_cz_gate_time_asymptote():
    eff = cz_model(1e4)
    rep = cz_protocol(eff)
    ratio = rep.t_gate / rep.metadata["t_gate_asymptotic"]
    assert 0.95 <= ratio <= 1.05
    # and the asymptote sharpens with C
    eff6 = cz_model(1e6)
    rep6 = cz_protocol(eff6)
    assert abs(rep6.t_gate / rep6.metadata["t_gate_asymptotic"] - 1) < 1e-4


def test_cz_failure_asymptote():
    rep = cz_protocol(cz_model(1e6))
    got = (1.0 - rep.P_success) * 1e3
    assert got == pytest.approx(5.873173619459715, rel=1e-8)
    assert abs(got / (15 * np.pi / 8) - 1.0) < 0.02
    for alpha, beta in [(1.0, 2.0), (2.0, 0.5)]:
        rep = cz_protocol(cz_model(1e6, alpha=alpha, beta=beta))
        pred = (np.pi * (8 * beta ** 2 + 6 * beta * alpha + alpha ** 2)
                / (8 * beta ** 1.5 * np.sqrt(alpha)))
        assert abs((1.0 - rep.P_success) * 1e3 / pred - 1.0) < 0.01


def test_cz_degenerate_when_undriven():
    dE, de = cz_analytic_detunings(100.0)
    p = SystemParams(n_qubits=2, C=100.0, delta_E=dE, delta_e=de, omega=0.0)
    with pytest.raises(DegenerateGateError):
        cz_protocol(effective_closed_form(p))


def test_cz_input_validation():
    eff = cz_model(100.0)
    with pytest.raises(ValueError):
        cz_protocol(eff, input_amplitudes=np.ones(3))
    with pytest.raises(ValueError):
        cz_protocol(eff, input_amplitudes=np.ones(4))
    eff3 = toffoli_model(100.0, 3)
    with pytest.raises(ValueError):
        cz_protocol(eff3)


def test_gate_report_validation():
    with pytest.raises(ValueError):
        GateReport(t_gate=-1.0, P_success=0.5, fidelity=0.5, phases=np.zeros(2))
    with pytest.raises(ValueError):
        GateReport(t_gate=1.0, P_success=1.5, fidelity=0.5, phases=np.zeros(2))
    with pytest.raises(ValueError):
        GateReport(t_gate=1.0, P_success=0.5, fidelity=-0.5, phases=np.zeros(2))


# -- Toffoli protocol ------------------------------------------------------

def test_toffoli_detuning_reference():
    root = toffoli_detuning(100.0)
    assert root == pytest.approx(14.15097169808491, rel=1e-10)
    eff = toffoli_model(100.0, 2)
    assert abs(eff.Gamma[0] - eff.Gamma[1]) < 1e-12 * eff.Gamma[0]


def test_toffoli_detuning_tracks_branch():
    # stays on the branch connected to sqrt(alpha(alpha+beta) C)
    for C in [10.0, 1e3, 1e5]:
        root = toffoli_detuning(C)
        assert abs(root / np.sqrt(2.0 * C) - 1.0) < 0.1


def test_toffoli_reference_point():
    rep = toffoli_protocol(toffoli_model(100.0, 2))
    assert rep.t_gate == pytest.approx(28.593946163418305, rel=1e-10)
    assert rep.P_success == pytest.approx(0.660446856277233, rel=1e-10)
    assert rep.fidelity == pytest.approx(0.9993782481345181, rel=1e-10)


def test_toffoli_worst_case_finite_n():
    rep = toffoli_protocol(toffoli_model(1e5, 12), input_state="worst")
    got = (1.0 - rep.fidelity) * 1e5
    pred = np.pi ** 2 / 32.0 * (1.0 - 1.0 / 12) ** 2
    assert got == pytest.approx(pred, rel=1e-3)
    assert rep.fidelity == pytest.approx(rep.metadata["fidelity_worst_finite_n"],
                                         abs=2e-9)


def test_toffoli_worst_case_failure():
    rep = toffoli_protocol(toffoli_model(4e5, 12), input_state="worst")
    got = (1.0 - rep.P_success) * np.sqrt(4e5)
    base = 3.0 * np.pi / (2.0 * np.sqrt(2.0))
    finite_n = base * (1.0 + (1.0 + 1.0 / 12) / 2.0) / 1.5
    assert abs(got / finite_n - 1.0) < 0.01
    assert abs(got / base - 1.0) < 0.04


def test_toffoli_fidelity_approaches_one():
    rep = toffoli_protocol(toffoli_model(1e8, 3))
    assert rep.fidelity > 1.0 - 1e-8


def test_toffoli_validation():
    eff = toffoli_model(100.0, 3)
    with pytest.raises(ValueError):
        toffoli_protocol(eff, n_qubits=2)
    with pytest.raises(ValueError):
        toffoli_protocol(eff, input_state="typical")
    p = SystemParams(n_qubits=2, C=100.0, delta_E=14.0, delta_e=1.0, omega=2.5)
    with pytest.raises(ValueError):
        toffoli_protocol(effective_closed_form(p))
    p1 = SystemParams(n_qubits=1, C=100.0, delta_E=14.0, delta_e=0.0, omega=2.5)
    with pytest.raises(ValueError):
        toffoli_protocol(effective_closed_form(p1))


def test_toffoli_generic_matches_basis_enumeration():
    """Sector-weight arithmetic vs brute force over the 2^N register basis."""
    eff = toffoli_model(100.0, 2)
    rep = toffoli_protocol(eff)
    c0 = np.full(3, 0.5, dtype=complex)
    c_t = conditional_sector_evolution(eff, c0, rep.t_gate)
    amps = np.array([c_t[0], c_t[1], c_t[1], c_t[2]])
    target = np.array([1.0, -1.0, -1.0, -1.0]) * 0.5
    P = float(np.sum(np.abs(amps) ** 2))
    F = abs(np.vdot(target, amps)) ** 2 / P
    assert rep.P_success == pytest.approx(P, abs=1e-14)
    assert rep.fidelity == pytest.approx(F, abs=1e-12)


# -- scaling factors -------------------------------------------------------

def test_toffoli_scaling_frozen_values():
    rows = toffoli_scaling([2, 5, 10, 15], 1e5)
    ks = [0.011729620672619305, 0.01700425004667911,
          0.003364742837389617, 0.000673019455415913]
    ds = [1.7250815943641111, 0.9703788639317006,
          0.44904143189138646, 0.2805671893130879]
    for row, k, d in zip(rows, ks, ds):
        assert row.k == pytest.approx(k, rel=1e-8)
        assert row.d == pytest.approx(d, rel=1e-8)
        assert row.asymptote_ok


def test_toffoli_scaling_monotonic_beyond_peak():
    rows = toffoli_scaling([4, 5, 6, 10, 15], 1e5)
    ks = [r.k for r in rows]
    ds = [r.d for r in rows]
    assert all(a > b for a, b in zip(ks, ks[1:]))
    assert all(a > b for a, b in zip(ds, ds[1:]))
    # below the peak k still rises with N; d falls over the whole range
    low = toffoli_scaling([2, 3, 4], 1e5)
    assert low[0].k < low[1].k < low[2].k
    assert low[0].d > low[1].d > low[2].d


def test_toffoli_scaling_flags_small_C():
    row = toffoli_scaling([5], 100.0)[0]
    assert not row.asymptote_ok


def test_toffoli_generic_error_ordering_at_c100():
    errs = {N: 1.0 - toffoli_protocol(toffoli_model(100.0, N)).fidelity
            for N in (5, 10, 15)}
    assert errs[15] < errs[10] < errs[5]


def test_scaling_result_validation():
    with pytest.raises(ValueError):
        ToffoliScaling(n_qubits=5, k=-1.0, d=1.0)


# -- technical error budget ------------------------------------------------

def budget_params(C=100.0, delta_E2=100.0):
    return SystemParams(n_qubits=2, C=C, scheme="two_photon",
                        delta_E=np.sqrt(2.0 * C), delta_e=0.0,
                        delta_E2=delta_E2, omega=delta_E2 / 8.0,
                        omega_mw=4.0 * C ** 0.25, gamma_g=1.0)


def test_error_budget_frozen_values():
    b = rb87_error_budget(budget_params())
    assert b.crosstalk_drive == pytest.approx(3.90625e-5, rel=1e-12)
    assert b.crosstalk_mw == pytest.approx(2.2575762940063774e-4, rel=1e-12)
    assert b.open_transition == pytest.approx(4.8387096774193543e-4, rel=1e-12)
    assert b.n_scat == pytest.approx(0.75, rel=1e-12)
    assert b.adiabaticity_ratio == pytest.approx(2.9296875e-3, rel=1e-12)
    assert b.delta_g == 1000.0 and b.delta_23 == 44.0
    assert set(b.regime) >= {"crosstalk_drive", "crosstalk_mw",
                             "open_transition"}


def test_error_budget_open_transition_shape():
    lo = rb87_error_budget(budget_params(C=1.0)).open_transition
    mid = rb87_error_budget(budget_params(C=3000.0)).open_transition
    hi = rb87_error_budget(budget_params(C=30000.0)).open_transition
    assert lo == pytest.approx(5e-5, rel=1e-3)
    assert mid > lo and mid > hi
    assert 1e-3 < mid < 3e-3


def test_error_budget_vanishing_microwave():
    p = budget_params()
    tiny = p.replace(omega_mw=1e-8)
    b = rb87_error_budget(tiny)
    assert b.crosstalk_mw < 1e-19
    assert b.n_scat > 1e10


def test_error_budget_requires_two_photon():
    p = SystemParams(n_qubits=2, C=100.0, delta_E=14.0, omega=2.5)
    with pytest.raises(ValueError):
        rb87_error_budget(p)


def test_error_budget_override_constants():
    b = rb87_error_budget(budget_params(), delta_g=2000.0, delta_23=10.0)
    assert b.delta_g == 2000.0
    assert b.crosstalk_drive == pytest.approx((12.5 / 4000.0) ** 2, rel=1e-12)
