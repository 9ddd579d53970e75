"""Acceptance suite: one test per headline number the toolkit must reproduce.

Each test prints a single verdict line (shown with -s, or in the captured
output of a failure) so the whole table can be audited at a glance.
Criteria 5 and 6 share three full master-equation integrations at a = 0.25
and carry the slow marker; everything else runs in seconds.
"""

import math

import numpy as np
import pytest

from heraldgate import (
    DriveSchedule,
    Envelope,
    RateSource,
    RepeaterConfig,
    SystemParams,
    build_model,
    cz_analytic_detunings,
    cz_protocol,
    effective_closed_form,
    effective_generic,
    equalize_rates,
    extract_gate_report,
    integrate_master_equation,
    max_links,
    rate_exact_recursive,
    rate_scaling,
    sector_decay_rate,
    toffoli_detuning,
    toffoli_protocol,
    tradeoff_search,
)
from heraldgate.dynamics import cz_target_state, gate_sampling_grid


def verdict(num, ok, text):
    print(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'} - {text}")
    return ok


def rel(a, b):
    scale = np.maximum(np.abs(a), np.abs(b))
    return np.where(scale > 0, np.abs(a - b) / np.maximum(scale, 1e-300), 0.0)


# -- 1: closed-form rates against the generic weak-drive oracle -----------

def draw_direct(rng):
    return SystemParams(
        n_qubits=int(rng.integers(1, 4)),
        C=float(10 ** rng.uniform(0, 3)),
        alpha=float(rng.uniform(0.3, 3)),
        beta=float(rng.uniform(0.3, 3)),
        gamma_g=float(rng.uniform(0, 2)),
        delta_E=float(rng.uniform(-50, 50)),
        delta_e=float(rng.uniform(-50, 50)),
        omega=float(rng.uniform(0.01, 1.0)),
        kappa_ratio=float(rng.uniform(30, 300)),
        photon_cutoff=1,
    )


def draw_two_photon(rng):
    return draw_direct(rng).replace(
        n_qubits=int(rng.integers(1, 3)),
        delta_E2=float(rng.uniform(20, 300)),
        omega_mw=float(rng.uniform(0.5, 8.0)),
        scheme="two_photon",
    )


def test_01_closed_form_matches_generic_oracle():
    rng = np.random.default_rng(90210)
    worst = 0.0
    for _ in range(12):
        for p in (draw_direct(rng), draw_two_photon(rng)):
            cf = effective_closed_form(p)
            gn = effective_generic(build_model(p))
            for name in ("delta", "Gamma"):
                worst = max(worst, rel(getattr(cf, name),
                                       getattr(gn, name)).max())
    ok = verdict(1, worst < 1e-10,
                 f"shifts and rates vs generic oracle, both drive schemes, "
                 f"24 random draws, worst rel dev {worst:.2e}")
    assert ok


# -- 2: analytic detunings equalize the sector rates ----------------------

def test_02_analytic_detunings_equalize_sector_rates():
    worst = 0.0
    for C in (10.0, 100.0, 1000.0):
        for alpha in (0.5, 1.0, 2.0):
            for beta in (0.5, 1.0, 2.0):
                dE, de = cz_analytic_detunings(C, alpha, beta)
                p = SystemParams(n_qubits=2, C=C, alpha=alpha, beta=beta,
                                 delta_E=dE, delta_e=de, omega=0.3)
                G = effective_closed_form(p).Gamma
                worst = max(worst, (G.max() - G.min()) / G.mean())
    ok = verdict(2, worst < 1e-9,
                 f"rate spread over 27 (C, alpha, beta) points, "
                 f"worst {worst:.2e}")
    assert ok


# -- 3: CZ failure-probability asymptote ----------------------------------

def test_03_cz_failure_probability_asymptote():
    C = 1e6
    worst = 0.0
    for alpha in (0.5, 1.0, 2.0):
        for beta in (0.5, 1.0, 2.0):
            dE, de = cz_analytic_detunings(C, alpha, beta)
            p = SystemParams(n_qubits=2, C=C, alpha=alpha, beta=beta,
                             delta_E=dE, delta_e=de, omega=0.3)
            rep = cz_protocol(effective_closed_form(p))
            val = (1.0 - rep.P_success) * math.sqrt(C)
            tgt = (math.pi * (8 * beta ** 2 + 6 * beta * alpha + alpha ** 2)
                   / (8 * beta ** 1.5 * math.sqrt(alpha)))
            worst = max(worst, abs(val / tgt - 1.0))
    ok = verdict(3, worst < 0.02,
                 f"(1-P)*sqrt(C) at C=1e6 vs closed form "
                 f"(15pi/8 at alpha=beta=1), worst rel dev {worst:.2e}")
    assert ok


# -- 4: CZ gate-time asymptote --------------------------------------------

def test_04_cz_gate_time_asymptote():
    C = 1e4
    dE, de = cz_analytic_detunings(C, 1.0, 1.0)
    p = SystemParams(n_qubits=2, C=C, delta_E=dE, delta_e=de, omega=1.0)
    rep = cz_protocol(effective_closed_form(p))
    ratio = rep.t_gate * 2.0 * p.omega ** 2 / (15.0 * math.pi * math.sqrt(C))
    ok = verdict(4, 0.95 <= ratio <= 1.05,
                 f"t_gate * 2 Omega^2 / (15 pi sqrt(C)) = {ratio:.4f} "
                 f"at C=1e4")
    assert ok


# -- 5 and 6: full integrations vs the effective theory -------------------

@pytest.fixture(scope="module")
def full_cz_runs():
    """Full CZ runs at a = 0.25, kappa = 100, no undetectable decay.

    The detunings are refined off the analytic seed so the Liouvillian
    sector rates match at the actual drive; the effective-theory report
    that each run is compared against stays at the analytic point.  Two
    integrations per C: a flat drive read out at the fidelity maximum,
    and a ramped pulse of equal integrated power.  The flat readout
    happens with the drive still dressing the ground state, which the
    herald counts against the success probability; the ramp hands that
    population back before the pulse ends, so the success comparison
    uses the pulsed run.
    """
    runs = {}
    for C in (10.0, 100.0, 1000.0):
        dE, de = cz_analytic_detunings(C, 1.0, 1.0)
        p = SystemParams(n_qubits=2, C=C, kappa_ratio=100.0, gamma_g=0.0,
                         delta_E=dE, delta_e=de, omega=0.25 * math.sqrt(C))
        eff = cz_protocol(effective_closed_form(p))
        cal = equalize_rates(p, rate_source=RateSource.SECTOR_LIOUVILLIAN)
        model = build_model(p.replace(delta_E=cal.delta_E,
                                      delta_e=cal.delta_e))
        t_max = 1.35 * eff.t_gate
        series = integrate_master_equation(
            model, t_max=t_max,
            t_eval=gate_sampling_grid(eff.t_gate, t_max),
            target=cz_target_state())
        # sin^2 ramps carry 3/8 of the plateau's Omega^2 exposure each
        ramp = 2.0
        sched = DriveSchedule(envelope=Envelope.SIN_SQUARED, t_ramp=ramp,
                              t_hold=eff.t_gate - 0.75 * ramp)
        pulsed = integrate_master_equation(
            model, t_max=sched.t_end,
            t_eval=np.linspace(0.0, sched.t_end, 161), schedule=sched)
        runs[C] = (extract_gate_report(series), eff,
                   float(pulsed.success[-1]))
    return runs


@pytest.mark.slow
def test_05_full_simulation_infidelity(full_cz_runs):
    worst = max(1.0 - rep.F for rep, _, _ in full_cz_runs.values())
    ok = verdict(5, worst < 4e-5,
                 f"conditional infidelity at a=0.25, C in (10,100,1000), "
                 f"worst {worst:.2e}")
    assert ok


@pytest.mark.slow
def test_06_full_matches_effective(full_cz_runs):
    worst_t = worst_p = 0.0
    for rep, eff, P_pulsed in full_cz_runs.values():
        worst_t = max(worst_t, abs(rep.t_gate / eff.t_gate - 1.0))
        worst_p = max(worst_p, abs((1.0 - P_pulsed)
                                   / (1.0 - eff.P_success) - 1.0))
    ok = verdict(6, worst_t < 0.05 and worst_p < 0.05,
                 f"full vs effective: gate time dev {worst_t:.2e}, "
                 f"failure-probability dev {worst_p:.2e}")
    assert ok


# -- 7: two-photon scheme error scaling -----------------------------------

def two_photon_error(C, delta_E2):
    p = SystemParams(n_qubits=2, C=C, scheme="two_photon", gamma_g=1.0,
                     delta_E2=delta_E2, omega=delta_E2 / 8.0,
                     omega_mw=4.0 * C ** 0.25)
    cal = equalize_rates(p, RateSource.EFFECTIVE_CLOSED_FORM)
    rep = cz_protocol(effective_closed_form(
        p.replace(delta_E=cal.delta_E, delta_e=cal.delta_e)))
    return 1.0 - rep.fidelity


def test_07_two_photon_error_scaling():
    errs = {(C, s): two_photon_error(C, s * 400.0)
            for C in (10.0, 100.0) for s in (1, 2)}
    ratios = [errs[(C, 1)] / errs[(C, 2)] for C in (10.0, 100.0)]
    cvar = max(abs(errs[(10.0, s)] / errs[(100.0, s)] - 1.0) for s in (1, 2))
    ok = verdict(7, all(abs(r / 4.0 - 1.0) < 0.2 for r in ratios)
                 and cvar < 0.2,
                 f"doubling the upper detuning cuts the error by "
                 f"{ratios[0]:.3f}x and {ratios[1]:.3f}x; C-dependence "
                 f"{cvar:.3f}")
    assert ok


# -- 8: Toffoli worst-case error constant ---------------------------------

def test_08_toffoli_worst_case_constant():
    C, N = 1e5, 200
    p = SystemParams(n_qubits=N, C=C, delta_E=toffoli_detuning(C),
                     delta_e=0.0, omega=0.25 * math.sqrt(C))
    rep = toffoli_protocol(effective_closed_form(p), input_state="worst")
    val = (1.0 - rep.fidelity) * C
    tgt = math.pi ** 2 / 32.0
    ok = verdict(8, abs(val / tgt - 1.0) < 0.05,
                 f"(1-F_up)*C = {val:.4f} vs pi^2/32 = {tgt:.4f} "
                 f"at C=1e5, N={N}")
    assert ok


# -- 9: Toffoli generic-input ordering and failure probability ------------

def test_09_toffoli_generic_ordering_and_failure_gap():
    errs = {}
    for N in (5, 10, 15):
        p = SystemParams(n_qubits=N, C=100.0, delta_E=toffoli_detuning(100.0),
                         delta_e=0.0, omega=2.5)
        errs[N] = 1.0 - toffoli_protocol(effective_closed_form(p),
                                         input_state="generic").fidelity
    ordered = errs[15] < errs[10] < errs[5]
    # the N=5 generic failure probability sits on the worst-case asymptote
    C = 1e5
    p5 = SystemParams(n_qubits=5, C=C, delta_E=toffoli_detuning(C),
                      delta_e=0.0, omega=0.25 * math.sqrt(C))
    fail_gen = 1.0 - toffoli_protocol(effective_closed_form(p5),
                                      input_state="generic").P_success
    fail_up = 3.0 * math.pi / (2.0 * math.sqrt(2.0)) / math.sqrt(C)
    gap = abs(fail_gen - fail_up) / fail_up
    ok = verdict(9, ordered and gap < 0.05,
                 f"generic error falls with N "
                 f"({errs[15]:.2e} < {errs[10]:.2e} < {errs[5]:.2e}); "
                 f"N=5 failure gap to worst-case asymptote {gap:.3f}")
    assert ok


# -- 10: Liouvillian sector rate vs the closed form -----------------------

def test_10_sector_rate_matches_closed_form():
    C, a = 100.0, 0.05
    dE, de = cz_analytic_detunings(C, 1.0, 1.0)
    p = SystemParams(n_qubits=1, C=C, delta_E=dE, delta_e=de,
                     omega=a * math.sqrt(C))
    gl = sector_decay_rate(p, ("1",))
    g1 = effective_closed_form(p).Gamma[1]
    dev = abs(gl / g1 - 1.0)
    ok = verdict(10, dev < 1e-4,
                 f"Liouvillian sector rate vs closed form at a=0.05, "
                 f"rel dev {dev:.2e}")
    assert ok, (
        f"sector rate {gl:.10e} vs closed form {g1:.10e}: deviation "
        f"{dev:.3e} exceeds 1e-4.  The gap is the O(a^2) finite-drive "
        f"correction (about 0.59 a^2 here) that second-order perturbation "
        f"theory does not contain; it shrinks as a^2 but cannot reach "
        f"1e-4 at a = 0.05.")


# -- 11: repeater waiting-time anchor -------------------------------------

def test_11_repeater_anchor():
    cfg = RepeaterConfig(L=128.0, L0=1.0, p=1.0)
    ratio = (1.0 / rate_exact_recursive(cfg)) / rate_scaling(cfg)
    n = max_links(0.9, 0.01, 0.0)
    ok = verdict(11, abs(ratio / 3.0 - 1.0) < 0.30 and abs(n - 10.54) < 0.01,
                 f"exact rate / scaling-law rate = {ratio:.3f} at 128 links; "
                 f"link budget {n:.3f}")
    assert ok


# -- 12: detuning trade-off reachability ----------------------------------

def test_12_tradeoff_reachability():
    p = SystemParams(n_qubits=2, C=100.0, omega=2.5)
    res = tradeoff_search(p, weight=0.5)
    fail_scaled = res.failure * math.sqrt(p.C)
    ok = verdict(12, fail_scaled <= 3.9 and res.error <= 5.0 / p.C,
                 f"(1-P)*sqrt(C) = {fail_scaled:.3f} at error "
                 f"{res.error:.2e}")
    assert ok


# -- unit note: gate times at a typical atomic linewidth ------------------

def test_unit_note_gate_times_in_microseconds():
    gamma = 2.0 * math.pi * 6e6
    dE, de = cz_analytic_detunings(100.0, 1.0, 1.0)
    pA = SystemParams(n_qubits=2, C=100.0, delta_E=dE, delta_e=de, omega=2.5)
    tA = cz_protocol(effective_closed_form(pA)).t_gate / gamma
    pB = SystemParams(n_qubits=2, C=100.0, scheme="two_photon", gamma_g=1.0,
                      delta_E2=400.0, omega=50.0,
                      omega_mw=4.0 * 100.0 ** 0.25)
    cal = equalize_rates(pB, RateSource.EFFECTIVE_CLOSED_FORM)
    tB = cz_protocol(effective_closed_form(
        pB.replace(delta_E=cal.delta_E, delta_e=cal.delta_e))).t_gate / gamma
    ok = 0.5e-6 < tA < 1.5e-6 and 5e-6 < tB < 15e-6
    print(f"unit note   : {'PASS' if ok else 'FAIL'} - gate times "
          f"{tA * 1e6:.2f} us (direct) and {tB * 1e6:.2f} us (two-photon) "
          f"at gamma = 2 pi 6 MHz")
    assert ok
