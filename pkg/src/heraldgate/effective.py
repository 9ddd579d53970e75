"""Effective ground-manifold theory of the heralded gate.

Second-order adiabatic elimination of the excited manifold yields, for each
qubit sector n (n register atoms in "1"), an AC Stark shift delta_n of the
driven |g> state together with effective decay amplitudes

    r0_n   cavity photon loss,            aux |g> -> |f>     (detectable)
    rg_n   decay of the driven level,     aux |g> -> |g>     (undetectable)
    rf_n   auxiliary decay to the flag,   aux |g> -> |f>     (detectable)
    rk_n   qubit-atom photon scattering,  |1>_k -> |o>_k     (detectable, per atom)

The detectable rate Gamma_n = |r0_n|^2 + |rf_n|^2 + n*|rk_n|^2 governs the
heralded success probability.  rg_n leaves the auxiliary atom in |g>, so it
never reduces the success probability; because it is nearly sector
independent it only weakly dephases qubit sectors against each other.

Two routes produce the same EffectiveModel and are kept deliberately
independent: `effective_closed_form` evaluates exact rational expressions in
the complex detunings, while `effective_generic` inverts the no-jump
Hamiltonian numerically on the excited block (the validation oracle).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np
import scipy.linalg as la
from scipy.special import comb

from .models import ModelSplit, build_model, no_jump_hamiltonian
from .params import Scheme, SystemParams
from .space import BasisLabel

__all__ = [
    "EffectiveModel",
    "SingularParameterError",
    "effective_closed_form",
    "effective_generic",
    "asymptotic_limits",
    "conditional_sector_evolution",
    "sector_density_evolution",
    "success_probability",
    "sector_weights",
    "two_photon_residual_error",
]


class SingularParameterError(ValueError):
    """Raised when a closed-form denominator vanishes or the excited block
    of the no-jump Hamiltonian is numerically singular."""


@dataclass(frozen=True)
class EffectiveModel:
    """Per-sector effective quantities, n = 0..N, in units of gamma.

    delta, Gamma are real arrays of length N+1; r0, rg, rf, rk are complex
    arrays of the same length (rk[0] is identically zero: sector 0 has no
    coupled atom to scatter).  delta_E_c, delta_e_c, delta_E2_c are the
    dimensionless complex detunings actually used (detuning minus i/2 times
    the total linewidth of the level).
    """

    params: SystemParams
    delta: np.ndarray
    r0: np.ndarray
    rg: np.ndarray
    rf: np.ndarray
    rk: np.ndarray
    Gamma: np.ndarray
    delta_E_c: complex
    delta_e_c: complex
    delta_E2_c: complex | None
    source: str

    def __post_init__(self):
        for name in ("delta", "r0", "rg", "rf", "rk", "Gamma"):
            arr = getattr(self, name)
            if arr.shape != (self.params.n_qubits + 1,):
                raise ValueError(f"{name} must have length N+1")
            arr.setflags(write=False)

    @property
    def n_qubits(self) -> int:
        return self.params.n_qubits


def _complex_detunings(params: SystemParams):
    """Complex detunings in units of gamma; imaginary part is half the
    total linewidth of the respective level."""
    de = params.delta_e - 0.5j
    if params.scheme is Scheme.TWO_PHOTON:
        # |E> decays by gamma_f only; |E2> carries the gamma_g branch
        dE = params.delta_E - 0.5j * params.gamma_f
        dE2 = params.delta_E2 - 0.5j * params.gamma_g
    else:
        # direct drive: both decay channels empty |E>
        dE = params.delta_E - 0.5j * (params.gamma_f + params.gamma_g)
        dE2 = None
    return dE, de, dE2


def effective_closed_form(params: SystemParams) -> EffectiveModel:
    """Closed-form effective model for either scheme.

    Direct drive, sector n, with D_n = de*(i*dE/2 + C_f) + n*dE*C:

        delta_n = -(Omega^2/4) Re[(i*de/2 + n C)/D_n]
        r0_n    =  (Omega/2) sqrt(C_f) de / D_n
        rg_n    =  (Omega/2) (i*de/2 + n C) sqrt(gamma_g) / D_n
        rf_n    =  (Omega/2) (i*de/2 + n C) sqrt(gamma_f) / D_n
        rk_n    = -(Omega/2) sqrt(C_f C) / D_n            (n >= 1)

    Two-photon drive replaces D_n by

        D2_n = dE2*D_n - (Omega_MW^2/4)(i*de/2 + n C)

    and carries one extra factor Omega_MW/2 through the chain (the drive
    reaches the cavity via |E2> -> |E>), with the sign flips that the longer
    chain produces.
    """
    n = np.arange(params.n_qubits + 1, dtype=float)
    C, Cf = params.C, params.C_f
    om = params.omega
    dE, de, dE2 = _complex_detunings(params)
    num = 0.5j * de + n * C
    D = de * (0.5j * dE + Cf) + n * dE * C
    _check_denominator(D, abs(de) * (0.5 * abs(dE) + Cf) + n * abs(dE) * C)

    if params.scheme is Scheme.TWO_PHOTON:
        om_mw = params.omega_mw
        D2 = dE2 * D - 0.25 * om_mw ** 2 * num
        _check_denominator(D2, abs(dE2) * np.abs(D) + 0.25 * om_mw ** 2 * np.abs(num))
        delta = -0.25 * om ** 2 * np.real(D / D2)
        r0 = -0.25 * om * om_mw * math.sqrt(Cf) * de / D2
        rg = 0.5 * om * math.sqrt(params.gamma_g) * D / D2
        rf = -0.25 * om * om_mw * math.sqrt(params.gamma_f) * num / D2
        rk = 0.25 * om * om_mw * math.sqrt(Cf * C) / D2
    else:
        delta = -0.25 * om ** 2 * np.real(num / D)
        r0 = 0.5 * om * math.sqrt(Cf) * de / D
        rg = 0.5 * om * math.sqrt(params.gamma_g) * num / D
        rf = 0.5 * om * math.sqrt(params.gamma_f) * num / D
        rk = -0.5 * om * math.sqrt(Cf * C) / D * np.ones_like(D)

    rk = rk.astype(complex)
    rk[0] = 0.0
    Gamma = np.abs(r0) ** 2 + np.abs(rf) ** 2 + n * np.abs(rk) ** 2
    return EffectiveModel(params=params, delta=delta, r0=r0.astype(complex),
                          rg=rg.astype(complex), rf=rf.astype(complex), rk=rk,
                          Gamma=Gamma, delta_E_c=complex(dE), delta_e_c=complex(de),
                          delta_E2_c=None if dE2 is None else complex(dE2),
                          source="closed_form")


def _check_denominator(D, scale):
    bad = np.abs(D) < 1e-12 * np.maximum(scale, 1e-30)
    if np.any(bad):
        raise SingularParameterError(
            f"effective-theory denominator vanishes in sector(s) {np.where(bad)[0].tolist()}")


# -- generic numeric oracle -----------------------------------------------

_DETECTABLE = ("cavity", "herald_f")  # plus every qubit_k channel


def effective_generic(model: ModelSplit, cond_limit: float = 1e12) -> EffectiveModel:
    """Numeric effective model by direct inversion of the no-jump Hamiltonian.

    Computes H_eff = -1/2 V^dag (H_NH^-1 + h.c.) V and L_eff = L H_NH^-1 V
    with a dense solve restricted to the excited block, then reads delta_n
    from the H_eff diagonal and the r coefficients from L_eff matrix
    elements.  Gamma_n is accumulated from full column norms of the
    detectable channels, so no structural assumption of the closed form is
    reused.  Serves as the independent oracle for `effective_closed_form`.
    """
    params, space = model.params, model.space
    N = params.n_qubits
    H_NH = no_jump_hamiltonian(model).matrix

    excited = []
    for i, lab in enumerate(space.labels()):
        in_ground = lab.aux in ("g", "f") and lab.n_ph == 0 and "e" not in lab.qubits
        if not in_ground:
            excited.append(i)
    excited = np.asarray(excited)
    H_QQ = H_NH[np.ix_(excited, excited)]
    cond = np.linalg.cond(H_QQ)
    if not np.isfinite(cond) or cond > cond_limit:
        raise SingularParameterError(
            f"no-jump Hamiltonian excited block is numerically singular (cond={cond:.2e})")

    configs = list(product("01", repeat=N))
    cols = np.asarray([space.ground_state_index(cfg) for cfg in configs])
    sectors = np.asarray([cfg.count("1") for cfg in configs])

    B = model.V.matrix[np.ix_(excited, cols)]
    X = la.solve(H_QQ, B)

    Z = B.conj().T @ X
    H_eff = -0.5 * (Z + Z.conj().T)

    scale = max(np.abs(H_eff).max(), 1e-300)
    off = H_eff - np.diag(np.diag(H_eff))
    if np.abs(off).max() > 1e-10 * scale:
        raise AssertionError("effective Hamiltonian is not sector-diagonal")

    delta = _collect_by_sector(np.real(np.diag(H_eff)), sectors, N)

    r0 = np.zeros(N + 1, dtype=complex)
    rg = np.zeros(N + 1, dtype=complex)
    rf = np.zeros(N + 1, dtype=complex)
    rk = np.zeros(N + 1, dtype=complex)
    Gamma = np.zeros(N + 1)
    counts = np.bincount(sectors, minlength=N + 1).astype(float)

    for op in model.lindblads:
        L_eff = op.matrix[:, excited] @ X  # (dim, n_cols)
        if op.name != "herald_g":
            Gamma += np.bincount(sectors, weights=np.sum(np.abs(L_eff) ** 2, axis=0),
                                 minlength=N + 1) / counts
        for j, cfg in enumerate(configs):
            nj = sectors[j]
            if op.name == "cavity":
                row = space.index(BasisLabel("f", cfg, 0))
                _accumulate(r0, nj, L_eff[row, j])
            elif op.name == "herald_g":
                row = space.index(BasisLabel("g", cfg, 0))
                _accumulate(rg, nj, L_eff[row, j])
            elif op.name == "herald_f":
                row = space.index(BasisLabel("f", cfg, 0))
                _accumulate(rf, nj, L_eff[row, j])
            else:
                k = int(op.name.split("_")[1])
                if cfg[k] == "1":
                    flipped = cfg[:k] + ("o",) + cfg[k + 1:]
                    row = space.index(BasisLabel("f", flipped, 0))
                    _accumulate(rk, nj, L_eff[row, j])

    # representative averaging: _accumulate summed, normalize per sector
    reps_r0 = counts
    reps_rk = np.array([counts[n] * n for n in range(N + 1)])  # n atoms per config
    r0 /= reps_r0
    rg /= reps_r0
    rf /= reps_r0
    with np.errstate(invalid="ignore", divide="ignore"):
        rk = np.where(reps_rk > 0, rk / np.maximum(reps_rk, 1), 0.0)

    dE, de, dE2 = _complex_detunings(params)
    return EffectiveModel(params=params, delta=delta, r0=r0, rg=rg, rf=rf, rk=rk,
                          Gamma=Gamma, delta_E_c=complex(dE), delta_e_c=complex(de),
                          delta_E2_c=None if dE2 is None else complex(dE2),
                          source="generic")


def _accumulate(arr, n, value):
    arr[n] += value


def _collect_by_sector(values, sectors, N):
    out = np.zeros(N + 1)
    for n in range(N + 1):
        vals = values[sectors == n]
        spread = vals.max() - vals.min()
        if spread > 1e-9 * max(np.abs(vals).max(), 1e-300):
            raise AssertionError(f"sector {n} representatives disagree (spread {spread:.3e})")
        out[n] = vals.mean()
    return out


# -- sector evolution ------------------------------------------------------

def sector_weights(n_qubits: int) -> np.ndarray:
    """Binomial multiplicities C(N, n) of the qubit sectors."""
    return comb(n_qubits, np.arange(n_qubits + 1))


def conditional_sector_evolution(eff: EffectiveModel, c0, t: float) -> np.ndarray:
    """No-jump evolution of sector amplitudes conditioned on the |g> herald.

    c_n(t) = c_n(0) * exp(-i delta_n t - Gamma_n t / 2).  Amplitudes are per
    basis state within a sector; the input must satisfy
    sum_n C(N,n) |c_n|^2 = 1.  The result is left unnormalized, its weighted
    norm^2 is the success-probability contribution.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    c0 = np.asarray(c0, dtype=complex)
    if c0.shape != eff.delta.shape:
        raise ValueError(f"expected {eff.delta.shape[0]} sector amplitudes")
    norm = float(np.sum(sector_weights(eff.n_qubits) * np.abs(c0) ** 2))
    if abs(norm - 1.0) > 1e-6:
        raise ValueError(f"sector amplitudes not normalized (weighted norm^2 = {norm})")
    return c0 * np.exp((-1j * eff.delta - 0.5 * eff.Gamma) * t)


def success_probability(eff: EffectiveModel, t: float, c0=None) -> float:
    """Heralded success probability sum_n w_n |c_n|^2 e^{-Gamma_n t}.

    Defaults to the symmetric product input ((|0>+|1>)/sqrt(2))^N, for which
    w_n |c_n|^2 = C(N,n)/2^N.
    """
    w = sector_weights(eff.n_qubits)
    if c0 is None:
        pops = w / 2.0 ** eff.n_qubits
    else:
        pops = w * np.abs(np.asarray(c0)) ** 2
    return float(np.sum(pops * np.exp(-eff.Gamma * t)))


def sector_density_evolution(eff: EffectiveModel, rho0: np.ndarray, t: float) -> np.ndarray:
    """Herald-conditioned evolution of the sector-resolved density matrix.

    Every term of the effective master equation is diagonal in the sector
    basis, so the matrix element between (any representative of) sectors n
    and m evolves by a closed exponential.  The undetectable channel rg
    returns the auxiliary atom to |g>; it keeps populations intact
    (|rg_n|^2 cancels on the diagonal) and contributes the cross-sector
    dephasing rg_n rg_m^* - (|rg_n|^2 + |rg_m|^2)/2.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    rho0 = np.asarray(rho0, dtype=complex)
    d = eff.delta
    G = eff.Gamma
    rg = eff.rg
    K = (-1j * (d[:, None] - d[None, :])
         - 0.5 * (G[:, None] + G[None, :])
         + rg[:, None] * rg[None, :].conj()
         - 0.5 * (np.abs(rg[:, None]) ** 2 + np.abs(rg[None, :]) ** 2))
    return rho0 * np.exp(K * t)


# -- reporting-only asymptotics -------------------------------------------

def asymptotic_limits(params: SystemParams) -> dict:
    """Leading-order large-C expressions, for comparison and reporting only.

    Never used in place of the exact sector quantities.  Keys:
      delta_0          dark-sector shift, delta_E * Omega^2 / (16 C^2)
      delta_coupled    shift of coupled sectors, Omega^2 / (4 sqrt(C))
    and for the two-photon scheme additionally
      omega_eff        effective drive Omega*Omega_MW / (2 delta_E2)
      gamma_g_eff      effective undetectable decay gamma_g*Omega_MW^2/delta_E2^2

    The shift entries are magnitudes: the exact delta_n here come out
    negative at positive detunings (sign fixed by H_eff = -V R V/2), so
    compare against |delta_n|.
    """
    out = {
        "delta_0": params.delta_E * params.omega ** 2 / (16.0 * params.C ** 2),
        "delta_coupled": params.omega ** 2 / (4.0 * math.sqrt(params.C)),
    }
    if params.scheme is Scheme.TWO_PHOTON:
        out["omega_eff"] = params.omega * params.omega_mw / (2.0 * params.delta_E2)
        out["gamma_g_eff"] = params.gamma_g * params.omega_mw ** 2 / params.delta_E2 ** 2
    return out


def two_photon_residual_error(params: SystemParams) -> float:
    """Residual conditional-error estimate of the two-photon mapping.

    Sum of a quartic term in gamma_g/delta_E2 and the dominant term
    proportional to gamma_g * Omega_MW^2 / delta_E2^2 / sqrt(C).  Order of
    magnitude only; the exact sector quantities supersede it.
    """
    if params.scheme is not Scheme.TWO_PHOTON:
        raise ValueError("two_photon_residual_error applies to the two-photon scheme")
    a, b = params.alpha, params.beta
    gg = params.gamma_g
    d2 = params.delta_E2
    t1 = (a ** 2 - 4 * a * b - 6 * b ** 2) * math.pi ** 2 / (128.0 * b ** 2) * gg ** 4 / d2 ** 4
    t2 = ((a ** 2 + 4 * a * b + 6 * b ** 2) * math.pi
          / (16.0 * math.sqrt(a * b) * (a + 2 * b) * (a + 5 * b))
          * gg * params.omega_mw ** 2 / d2 ** 2 / math.sqrt(params.C))
    return t1 + t2


def effective_for(params: SystemParams) -> EffectiveModel:
    """Convenience: closed-form effective model straight from parameters."""
    return effective_closed_form(params)


def generic_for(params: SystemParams) -> EffectiveModel:
    """Convenience: generic-oracle effective model straight from parameters."""
    return effective_generic(build_model(params))
