"""Parameter containers for the heralded cavity-gate model.

Everything is expressed in units of the qubit-atom optical linewidth gamma
(gamma = 1): detunings and Rabi frequencies in gamma, times in 1/gamma.
The cavity couplings are derived quantities,

    g   = sqrt(C * kappa),        g_f = sqrt(alpha * C * kappa),

with kappa = kappa_ratio * gamma, so the cooperativities C = g^2/(kappa*gamma)
and C_f = alpha*C are the primary inputs.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass


class Scheme(enum.Enum):
    """Drive topology of the auxiliary atom."""

    DIRECT_DRIVE = "direct"      # weak optical drive |g> -> |E>
    TWO_PHOTON = "two_photon"    # optical drive |g> -> |E2> plus microwave |E2> -> |E>


class Envelope(enum.Enum):
    FLAT = "flat"
    SIN_SQUARED = "sin_squared"


_REAL = (int, float)


def _require_real(name: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, _REAL):
        raise TypeError(f"{name} must be a real number, got {value!r}")
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")
    return float(value)


@dataclass(frozen=True)
class SystemParams:
    """Immutable model parameters, validated on construction.

    Attributes
    ----------
    n_qubits : number of register atoms N (>= 1).
    C : cavity cooperativity of the qubit transition, C = g^2/(kappa*gamma).
    kappa_ratio : kappa/gamma (default 100, i.e. a fast cavity).
    alpha : C_f/C, relative cooperativity of the auxiliary f transition.
    beta : gamma_f/gamma, relative linewidth of |E> -> |f|.
    gamma_g : decay rate of the closed transition back to |g> (units of gamma).
        In the direct-drive scheme this is |E> -> |g>, in the two-photon
        scheme |E2> -> |g>.
    delta_E, delta_e, delta_E2 : laser detunings (units of gamma).
    omega : optical drive Rabi frequency Omega (units of gamma).
    omega_mw : microwave Rabi frequency Omega_MW (two-photon scheme only).
    photon_cutoff : cavity Fock-space truncation (>= 1, default 2).
    scheme : Scheme.DIRECT_DRIVE or Scheme.TWO_PHOTON.
    """

    n_qubits: int = 2
    C: float = 100.0
    kappa_ratio: float = 100.0
    alpha: float = 1.0
    beta: float = 1.0
    gamma_g: float = 0.0
    delta_E: float = 0.0
    delta_e: float = 0.0
    delta_E2: float = 0.0
    omega: float = 0.0
    omega_mw: float = 0.0
    photon_cutoff: int = 2
    scheme: Scheme = Scheme.DIRECT_DRIVE

    def __post_init__(self):
        if not isinstance(self.n_qubits, int) or self.n_qubits < 1:
            raise ValueError(f"n_qubits must be an integer >= 1, got {self.n_qubits!r}")
        if not isinstance(self.photon_cutoff, int) or self.photon_cutoff < 1:
            raise ValueError(f"photon_cutoff must be an integer >= 1, got {self.photon_cutoff!r}")
        if isinstance(self.scheme, str):
            object.__setattr__(self, "scheme", Scheme(self.scheme))
        if not isinstance(self.scheme, Scheme):
            raise TypeError(f"scheme must be a Scheme, got {self.scheme!r}")
        for name in ("C", "kappa_ratio", "alpha", "beta", "gamma_g",
                     "delta_E", "delta_e", "delta_E2", "omega", "omega_mw"):
            object.__setattr__(self, name, _require_real(name, getattr(self, name)))
        if self.C <= 0:
            raise ValueError(f"C must be > 0, got {self.C}")
        if self.kappa_ratio <= 0:
            raise ValueError(f"kappa_ratio must be > 0, got {self.kappa_ratio}")
        if self.alpha <= 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        if self.beta < 0 or self.gamma_g < 0:
            raise ValueError("beta and gamma_g must be >= 0")
        if self.omega < 0:
            raise ValueError(f"omega must be >= 0, got {self.omega}")
        if self.scheme is Scheme.TWO_PHOTON:
            if self.omega_mw <= 0:
                raise ValueError("two-photon scheme requires omega_mw > 0")
        elif self.omega_mw != 0.0:
            raise ValueError("omega_mw is only meaningful in the two-photon scheme")

    # -- derived couplings (units of gamma) --------------------------------

    @property
    def kappa(self) -> float:
        return self.kappa_ratio

    @property
    def C_f(self) -> float:
        return self.alpha * self.C

    @property
    def gamma_f(self) -> float:
        return self.beta

    @property
    def g(self) -> float:
        return math.sqrt(self.C * self.kappa)

    @property
    def g_f(self) -> float:
        return math.sqrt(self.alpha * self.C * self.kappa)

    @property
    def adiabaticity(self) -> float:
        """a = Omega / (gamma * sqrt(C)), the drive-strength expansion parameter."""
        return self.omega / math.sqrt(self.C)

    def replace(self, **changes) -> "SystemParams":
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["scheme"] = self.scheme.value
        return d


@dataclass(frozen=True)
class DriveSchedule:
    """Drive envelope u(t) multiplying the optical Rabi frequency.

    FLAT holds u = plateau for all t >= 0.  SIN_SQUARED ramps as
    sin^2(pi*t / (2*t_ramp)) up to the plateau and stays there.  A finite
    t_hold turns the envelope into a pulse: the plateau is held for t_hold
    past the up-ramp, mirrored back down over another t_ramp, and zero
    afterwards (FLAT pulses cut off without ramps).
    """

    envelope: Envelope = Envelope.FLAT
    t_ramp: float = 0.0
    plateau: float = 1.0
    t_hold: float | None = None

    def __post_init__(self):
        if not isinstance(self.envelope, Envelope):
            raise TypeError(f"envelope must be an Envelope, got {self.envelope!r}")
        object.__setattr__(self, "t_ramp", _require_real("t_ramp", self.t_ramp))
        object.__setattr__(self, "plateau", _require_real("plateau", self.plateau))
        if not 0.0 <= self.plateau <= 1.0:
            raise ValueError(f"plateau must lie in [0, 1], got {self.plateau}")
        if self.envelope is Envelope.SIN_SQUARED and self.t_ramp <= 0:
            raise ValueError("sin_squared envelope requires t_ramp > 0")
        if self.t_hold is not None:
            object.__setattr__(self, "t_hold",
                               _require_real("t_hold", self.t_hold))
            if self.t_hold < 0:
                raise ValueError(f"t_hold must be >= 0, got {self.t_hold}")

    @property
    def t_end(self) -> float:
        """Time at which a pulsed envelope reaches zero (inf if held)."""
        if self.t_hold is None:
            return math.inf
        if self.envelope is Envelope.FLAT:
            return self.t_hold
        return 2.0 * self.t_ramp + self.t_hold


def envelope_value(schedule: DriveSchedule, t: float) -> float:
    """Evaluate the drive envelope at time t.  Returns a value in [0, 1]."""
    if t < 0:
        return 0.0
    if schedule.envelope is Envelope.FLAT:
        if schedule.t_hold is not None and t > schedule.t_hold:
            return 0.0
        return schedule.plateau
    up = schedule.t_ramp
    if t < up:
        return schedule.plateau * math.sin(math.pi * t / (2.0 * up)) ** 2
    if schedule.t_hold is None or t <= up + schedule.t_hold:
        return schedule.plateau
    t_end = schedule.t_end
    if t >= t_end:
        return 0.0
    return schedule.plateau * math.sin(math.pi * (t_end - t) / (2.0 * up)) ** 2
