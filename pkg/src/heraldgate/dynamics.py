"""Full Lindblad master-equation integration and Liouvillian sector rates.

This is the validation layer: nothing here reuses the closed-form effective
theory.  The density matrix is evolved as a whole (no trajectory
unraveling) with an adaptive 8th-order explicit integrator on the
vectorized Liouvillian, and gate figures are extracted by conditioning on
the auxiliary |g> herald.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
from scipy.integrate import solve_ivp

from .models import ModelSplit, build_model
from .params import DriveSchedule, Scheme, SystemParams, envelope_value
from .space import BasisLabel, ProductSpace

__all__ = [
    "AmbiguousSpectrumError",
    "GateWindowError",
    "IntegrationQualityError",
    "TimeSeries",
    "conditional_qubit_state",
    "cutoff_convergence",
    "cz_target_state",
    "extract_gate_report",
    "gate_sampling_grid",
    "integrate_master_equation",
    "optimize_phases",
    "plus_product_state",
    "sector_decay_rate",
    "unconditional_qubit_state",
]


class IntegrationQualityError(RuntimeError):
    """Integration failed its own quality guards (trace drift, step underflow)."""


class GateWindowError(RuntimeError):
    """Fidelity maximum sits on the boundary of the sampled window."""


class AmbiguousSpectrumError(RuntimeError):
    """Two distinct candidate decay eigenvalues within 1% of each other."""


# -- vectorized Liouvillian ------------------------------------------------

def _liouvillian_parts(model: ModelSplit):
    """Static Liouvillian and the drive part, row-major vec convention:
    vec(A rho B) = (A kron B^T) vec(rho)."""
    d = model.space.dim
    I = sp.identity(d, dtype=complex, format="csr")
    H = sp.csr_matrix(model.H_e.matrix)
    static = -1j * (sp.kron(H, I) - sp.kron(I, H.T))
    for L in model.lindblad_matrices():
        Ls = sp.csr_matrix(L)
        LdL = (Ls.conj().T @ Ls).tocsr()
        static = static + sp.kron(Ls, Ls.conj()) \
            - 0.5 * sp.kron(LdL, I) - 0.5 * sp.kron(I, LdL.T)
    Vd = sp.csr_matrix(model.V.matrix)
    Hd = Vd + Vd.conj().T
    drive = -1j * (sp.kron(Hd, I) - sp.kron(I, Hd.T))
    return static.tocsr(), drive.tocsr()


def plus_product_state(space: ProductSpace) -> np.ndarray:
    """|g> (aux) x ((|0>+|1>)/sqrt2)^N x |vac>, as a state vector."""
    psi = np.zeros(space.dim, dtype=complex)
    amp = 2.0 ** (-space.n_qubits / 2.0)
    for cfg in product("01", repeat=space.n_qubits):
        psi[space.index(BasisLabel("g", cfg, 0))] = amp
    return psi


def cz_target_state() -> np.ndarray:
    """(|00> + |01> + |10> - |11>)/2 on the computational register."""
    return np.array([1.0, 1.0, 1.0, -1.0], dtype=complex) / 2.0


def _computational_indices(space: ProductSpace):
    """Full-space indices of |g, computational register, vac>, ordered so
    that qubit k maps to bit k (qubit 0 most significant)."""
    idx = []
    for cfg in product("01", repeat=space.n_qubits):
        idx.append(space.index(BasisLabel("g", cfg, 0)))
    return np.asarray(idx)


def _aux_g_indices(space: ProductSpace):
    return np.asarray([i for i, lab in enumerate(space.labels()) if lab.aux == "g"])


def conditional_qubit_state(rho: np.ndarray, space: ProductSpace):
    """(P_g, rho_q): herald probability and the normalized register state.

    P_g = Tr[rho |g><g|]; rho_q is <g|rho|g> with the cavity traced out,
    restricted to the computational register (2^N x 2^N) and divided by
    P_g.  Population shelved outside the computational levels shows up as
    missing weight in rho_q, which is exactly its fidelity cost.
    """
    gidx = _aux_g_indices(space)
    P_g = float(np.real(np.trace(rho[np.ix_(gidx, gidx)])))
    comp = _computational_indices(space)
    nq = 2 ** space.n_qubits
    rho_q = np.zeros((nq, nq), dtype=complex)
    # trace over photon number at fixed computational labels
    for p in range(space.n_photon):
        ids = comp + p  # photon index is the fastest axis
        rho_q += rho[np.ix_(ids, ids)]
    return P_g, rho_q / P_g


def unconditional_qubit_state(rho: np.ndarray, space: ProductSpace) -> np.ndarray:
    """Register state with auxiliary atom and cavity traced out, restricted
    to the computational levels (no herald conditioning)."""
    nq = 2 ** space.n_qubits
    rho_q = np.zeros((nq, nq), dtype=complex)
    comp_cfgs = list(product("01", repeat=space.n_qubits))
    for aux in space.aux_levels:
        for p in range(space.n_photon):
            ids = np.asarray([space.index(BasisLabel(aux, cfg, p)) for cfg in comp_cfgs])
            rho_q += rho[np.ix_(ids, ids)]
    return rho_q


# -- phase-optimized fidelity ---------------------------------------------

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_max(f, lo, hi, tol):
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > tol:
        if fc < fd:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
        else:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
    x = 0.5 * (a + b)
    return x, f(x)


def optimize_phases(rho_q: np.ndarray, target: np.ndarray, n_qubits: int,
                    tol: float = 1e-10):
    """max over per-qubit z rotations of <target| D(phi)^+ rho D(phi) |target>.

    Alternating golden-section over each angle (the objective is a single
    harmonic per angle), restarted from the four quadrant seed points.
    Returns (F, phis).
    """
    nq = 2 ** n_qubits
    bits = np.array([[(s >> (n_qubits - 1 - k)) & 1 for k in range(n_qubits)]
                     for s in range(nq)])

    def overlap(phis):
        ph = np.exp(1j * (bits @ phis))
        vec = ph * target
        return float(np.real(np.vdot(vec, rho_q @ vec)))

    best = (-np.inf, None)
    seeds = list(product((0.25 * math.pi, 1.25 * math.pi), repeat=n_qubits))
    for seed in seeds:
        phis = np.asarray(seed, dtype=float)
        prev = -np.inf
        for _ in range(100):
            for k in range(n_qubits):
                def f1(x, k=k):
                    trial = phis.copy()
                    trial[k] = x
                    return overlap(trial)
                phis[k], val = _golden_max(f1, phis[k] - math.pi,
                                           phis[k] + math.pi, tol)
            if val - prev < 1e-14:
                break
            prev = val
        if val > best[0]:
            best = (val, np.mod(phis + math.pi, 2 * math.pi) - math.pi)
    return best


# -- integration -----------------------------------------------------------

@dataclass(frozen=True)
class TimeSeries:
    """Sampled herald-conditioned gate trajectory."""

    params: SystemParams
    times: np.ndarray
    success: np.ndarray           # P_g(t)
    fidelity: np.ndarray | None   # conditional F(t), None when no target given
    phases: np.ndarray | None     # optimal per-qubit phases at each sample
    rho_q: np.ndarray             # (nt, 2^N, 2^N) conditional register states
    trace_err: float
    min_eig: float
    target: np.ndarray | None = None
    rho_full: np.ndarray | None = None   # (nt, dim, dim) when requested

    def __post_init__(self):
        for name in ("times", "success", "rho_q"):
            getattr(self, name).setflags(write=False)


def gate_sampling_grid(t_predicted: float, t_max: float, coarse: int = 81,
                       dense: int = 400) -> np.ndarray:
    """Coarse grid over [0, t_max] plus a dense window (+-20%) around the
    predicted gate time."""
    ts = np.linspace(0.0, t_max, coarse)
    lo = max(0.8 * t_predicted, 0.0)
    hi = min(1.2 * t_predicted, t_max)
    window = np.linspace(lo, hi, dense)
    return np.unique(np.concatenate([ts, window]))


def integrate_master_equation(model: ModelSplit, rho0: np.ndarray | None = None,
                              t_max: float = 10.0, rtol: float = 1e-10,
                              atol: float = 1e-12, t_eval: np.ndarray | None = None,
                              schedule: DriveSchedule | None = None,
                              target: np.ndarray | None = None,
                              check_positivity: bool = True,
                              store_full: bool = False) -> TimeSeries:
    """Solve the full master equation and sample herald-conditioned figures.

    rho0 defaults to the plus-product pure state with auxiliary |g> and an
    empty cavity.  target (a 2^N computational vector) switches on the
    phase-optimized conditional fidelity column.  Raises
    IntegrationQualityError on solver failure or trace drift above 1e-8.
    """
    space = model.space
    if rho0 is None:
        psi = plus_product_state(space)
        rho0 = np.outer(psi, psi.conj())
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (space.dim, space.dim):
        raise ValueError("initial state has wrong dimension")
    if np.abs(rho0 - rho0.conj().T).max() > 1e-10:
        raise ValueError("initial state not Hermitian")
    if abs(np.trace(rho0).real - 1.0) > 1e-10:
        raise ValueError("initial state not trace one")
    if la.eigvalsh(rho0).min() < -1e-10:
        raise ValueError("initial state not positive semidefinite")
    if t_max <= 0:
        raise ValueError("t_max must be positive")

    static, drive = _liouvillian_parts(model)
    if t_eval is None:
        t_eval = np.linspace(0.0, t_max, 201)
    t_eval = np.asarray(t_eval, dtype=float)

    if schedule is None or (schedule.envelope.name == "FLAT" and schedule.plateau == 1.0):
        A = (static + drive).tocsr()

        def rhs(t, y):
            return A.dot(y)
    else:
        def rhs(t, y):
            return static.dot(y) + envelope_value(schedule, t) * drive.dot(y)

    sol = solve_ivp(rhs, (0.0, t_max), rho0.reshape(-1), method="DOP853",
                    t_eval=t_eval, rtol=rtol, atol=atol)
    if not sol.success:
        raise IntegrationQualityError(f"integrator failed: {sol.message}")

    nt = len(sol.t)
    nq = 2 ** space.n_qubits
    success = np.empty(nt)
    rho_q = np.empty((nt, nq, nq), dtype=complex)
    rho_full = np.empty((nt, space.dim, space.dim), dtype=complex) if store_full else None
    fid = np.empty(nt) if target is not None else None
    phases = np.empty((nt, space.n_qubits)) if target is not None else None
    trace_err = 0.0
    min_eig = np.inf
    for i in range(nt):
        rho = sol.y[:, i].reshape(space.dim, space.dim)
        rho = 0.5 * (rho + rho.conj().T)
        trace_err = max(trace_err, abs(np.trace(rho).real - 1.0))
        if check_positivity:
            min_eig = min(min_eig, float(la.eigvalsh(rho).min()))
        if store_full:
            rho_full[i] = rho
        P_g, rq = conditional_qubit_state(rho, space)
        success[i] = P_g
        rho_q[i] = rq
        if target is not None:
            fid[i], phases[i] = optimize_phases(rq, target, space.n_qubits)
    if trace_err > 1e-8:
        raise IntegrationQualityError(f"trace drift {trace_err:.3e} exceeds 1e-8")

    return TimeSeries(params=model.params, times=sol.t.copy(), success=success,
                      fidelity=fid, phases=phases, rho_q=rho_q,
                      trace_err=trace_err, min_eig=float(min_eig), target=target,
                      rho_full=rho_full)


# -- gate-report extraction -----------------------------------------------

@dataclass(frozen=True)
class FullGateReport:
    """Gate figures read off a TimeSeries at the fidelity maximum."""

    t_gate: float
    F: float
    P_success: float
    phases: np.ndarray
    metadata: dict = field(default_factory=dict)


def extract_gate_report(series: TimeSeries, target: np.ndarray | None = None
                        ) -> FullGateReport:
    """Locate t_gate = argmax F(t) with a local quadratic refinement.

    The maximum must lie strictly inside the sampled window; a boundary
    maximum raises GateWindowError so the caller can extend t_max.
    """
    if series.fidelity is None:
        if target is None:
            raise ValueError("series carries no fidelity; provide a target")
        fid = np.empty(len(series.times))
        phases = np.empty((len(series.times), series.params.n_qubits))
        for i in range(len(series.times)):
            fid[i], phases[i] = optimize_phases(series.rho_q[i], target,
                                                series.params.n_qubits)
    else:
        fid, phases = series.fidelity, series.phases

    i = int(np.argmax(fid))
    if i == 0 or i == len(fid) - 1:
        raise GateWindowError(
            f"fidelity maximum at window edge t={series.times[i]:.3f}; extend t_max")
    # local quadratic fit for a sampling-robust vertex
    sl = slice(max(i - 2, 0), min(i + 3, len(fid)))
    coef = np.polyfit(series.times[sl], fid[sl], 2)
    if coef[0] < 0:
        t_gate = float(np.clip(-0.5 * coef[1] / coef[0],
                               series.times[sl][0], series.times[sl][-1]))
        F = float(np.polyval(coef, t_gate))
    else:  # flat top at sampling resolution
        t_gate = float(series.times[i])
        F = float(fid[i])
    P = float(np.interp(t_gate, series.times, series.success))
    return FullGateReport(t_gate=t_gate, F=F, P_success=P, phases=phases[i],
                          metadata={"samples": len(series.times),
                                    "trace_err": series.trace_err,
                                    "min_eig": series.min_eig})


# -- sector decay rates ----------------------------------------------------

def _sector_space(params: SystemParams, n_coupled: int):
    """Reduced space for a frozen classical register: auxiliary levels x
    photons x {1, e} per coupled atom.  Shelved levels are dropped; they
    never feed population back, so the nonzero spectrum is unchanged, and
    their absence only removes steady-state directions."""
    aux = ("g", "f", "E", "E2") if params.scheme is Scheme.TWO_PHOTON else ("g", "f", "E")
    dims = (len(aux),) + (2,) * n_coupled + (params.photon_cutoff + 1,)
    dim = int(np.prod(dims))
    return aux, dims, dim


def _sector_op(dims, which, local):
    mats = [np.eye(d, dtype=complex) for d in dims]
    mats[which] = local
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def sector_decay_rate(params: SystemParams, sector_config) -> float:
    """Decay rate of the driven sector from the Liouvillian spectrum.

    sector_config is a classical register configuration such as "11" or
    ("0", "1"); atoms in "1" couple, atoms in "0" are spectators and are
    dropped.  Builds the vectorized Liouvillian on the reduced sector
    space, takes a dense eigendecomposition, and returns |Re lambda| of the
    slowest mode that actually contributes to the herald signal P_g(t)
    started from |g, sector, vacuum> (modes with zero weight in that signal
    are projected away; |Re lambda| < 1e-12 counts as zero).  Two distinct
    contributing candidates within 1% raise AmbiguousSpectrumError.
    """
    cfg = tuple(sector_config)
    if any(q not in ("0", "1") for q in cfg):
        raise ValueError(f"sector config must be classical 0/1, got {sector_config!r}")
    if params.omega == 0.0:
        return 0.0
    n_coupled = sum(q == "1" for q in cfg)
    aux, dims, dim = _sector_space(params, n_coupled)
    npph = params.photon_cutoff + 1

    def aux_op(u, l):
        m = np.zeros((len(aux), len(aux)), dtype=complex)
        m[aux.index(u), aux.index(l)] = 1.0
        return _sector_op(dims, 0, m)

    a_loc = np.diag(np.sqrt(np.arange(1, npph, dtype=float)), k=1).astype(complex)
    a = _sector_op(dims, len(dims) - 1, a_loc)

    H = params.delta_E * aux_op("E", "E")
    H += params.g_f * (a @ aux_op("E", "f"))
    H += params.g_f * (a @ aux_op("E", "f")).conj().T
    if params.scheme is Scheme.TWO_PHOTON:
        H += params.delta_E2 * aux_op("E2", "E2")
        mw = 0.5 * params.omega_mw * aux_op("E", "E2")
        H += mw + mw.conj().T
        H += 0.5 * params.omega * (aux_op("E2", "g") + aux_op("g", "E2"))
        herald_src = "E2"
    else:
        H += 0.5 * params.omega * (aux_op("E", "g") + aux_op("g", "E"))
        herald_src = "E"

    up = np.array([[0, 0], [1, 0]], dtype=complex)  # |e><1| locally
    for k in range(n_coupled):
        e_proj = _sector_op(dims, 1 + k, np.diag([0.0, 1.0]).astype(complex))
        H += params.delta_e * e_proj
        cav = params.g * (a @ _sector_op(dims, 1 + k, up))
        H += cav + cav.conj().T

    jumps = [(np.sqrt(params.kappa) * a, True)]
    if params.gamma_g > 0:
        jumps.append((np.sqrt(params.gamma_g) * aux_op("g", herald_src), True))
    if params.gamma_f > 0:
        jumps.append((np.sqrt(params.gamma_f) * aux_op("f", "E"), True))
    down = np.array([[0, 0], [0, 1]], dtype=complex)  # sqrt of e population
    for k in range(n_coupled):
        # decay target is outside the reduced space: keep only the
        # anticommutator part (no refill term)
        jumps.append((_sector_op(dims, 1 + k, down), False))

    I = np.eye(dim, dtype=complex)
    Lv = -1j * (np.kron(H, I) - np.kron(I, H.T))
    for L, refill in jumps:
        LdL = L.conj().T @ L
        if refill:
            Lv += np.kron(L, L.conj())
        Lv -= 0.5 * np.kron(LdL, I) + 0.5 * np.kron(I, LdL.T)

    lam, R = la.eig(Lv)

    idx0 = np.ravel_multi_index((0,) * len(dims), dims)  # |g, all-1, vac>
    rho0 = np.zeros((dim, dim), dtype=complex)
    rho0[idx0, idx0] = 1.0
    c = la.solve(R, rho0.reshape(-1))
    # P_g(t) = sum_i s_i exp(lambda_i t)
    g_trace = np.zeros(dim * dim, dtype=complex)
    g_rows = np.asarray([i for i in range(dim)
                         if i // int(np.prod(dims[1:])) == aux.index("g")])
    g_trace[g_rows * dim + g_rows] = 1.0
    s = c * (R.T @ g_trace)
    weight = np.abs(s)
    active = weight > 1e-8 * weight.sum()
    rates = np.abs(np.real(lam[active]))
    rates = rates[rates > 1e-12]
    if rates.size == 0:
        return 0.0
    gam = float(rates.min())
    close = rates[rates < 1.01 * gam]
    if np.any(close / gam - 1.0 > 1e-6):
        raise AmbiguousSpectrumError(
            f"two distinct slow modes within 1%: {np.unique(np.round(close, 15))}")
    return gam


# -- cutoff convergence ----------------------------------------------------

@dataclass(frozen=True)
class CutoffReport:
    cutoffs: tuple
    deviations: tuple   # max |observable difference| between consecutive cutoffs
    observable: str


def cutoff_convergence(params: SystemParams, observable: str = "success",
                       t_max: float = 5.0, cutoffs=None) -> CutoffReport:
    """Integrate at increasing photon cutoffs and report the sampled
    deviation of the chosen observable ("success" or "fidelity")."""
    if cutoffs is None:
        cutoffs = (params.photon_cutoff, params.photon_cutoff + 1)
    target = cz_target_state() if (observable == "fidelity"
                                   and params.n_qubits == 2) else None
    t_eval = np.linspace(0.0, t_max, 41)
    series = []
    for cut in cutoffs:
        m = build_model(params.replace(photon_cutoff=int(cut)))
        series.append(integrate_master_equation(
            m, t_max=t_max, t_eval=t_eval, target=target,
            check_positivity=False))
    devs = []
    for s0, s1 in zip(series, series[1:]):
        if observable == "fidelity" and s0.fidelity is not None:
            devs.append(float(np.abs(s0.fidelity - s1.fidelity).max()))
        else:
            devs.append(float(np.abs(s0.success - s1.success).max()))
    return CutoffReport(cutoffs=tuple(int(c) for c in cutoffs),
                        deviations=tuple(devs), observable=observable)
