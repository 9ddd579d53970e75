"""Tree-structured repeater rate model fed by heralded-gate performance.

Entanglement is distributed over L/L0 elementary links and connected by
nested swapping; the closed-form scaling law and an explicit waiting-time
recursion are both provided because the former systematically undervalues
the achievable rate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid


@dataclass(frozen=True)
class RepeaterConfig:
    """Nested entanglement-swapping chain over total distance L.

    Distances are in km; p is the swap success probability; eps0 and epsg
    are the elementary-pair and per-swap error contributions; F_final is
    the fidelity still required after the full chain.
    """

    L: float
    L0: float
    p: float
    eps0: float = 0.0
    epsg: float = 0.0
    F_final: float = 0.9

    def __post_init__(self):
        if not 0.0 < self.L0 <= self.L:
            raise ValueError("need L >= L0 > 0")
        if not 0.0 < self.p <= 1.0:
            raise ValueError("swap success probability must lie in (0, 1]")
        if self.eps0 < 0.0 or self.epsg < 0.0:
            raise ValueError("error contributions must be nonnegative")
        if not 0.0 < self.F_final < 1.0:
            raise ValueError("F_final must lie in (0, 1)")

    @property
    def n_links(self) -> int:
        return int(round(self.L / self.L0))


def rate_scaling(config: RepeaterConfig) -> float:
    """Relative distribution rate (L/L0)^(1 - log2(3/p)).

    A scaling law normalized to a single elementary link, not an absolute
    rate; it treats every nesting level as costing the mean waiting factor
    3/2 on top of the 1/p swap retries.
    """
    exponent = 1.0 - np.log2(3.0 / config.p)
    return float((config.L / config.L0) ** exponent)


def _levels(config: RepeaterConfig) -> int:
    n = config.n_links
    if abs(config.L / config.L0 - n) > 1e-9 or n & (n - 1) != 0:
        raise ValueError(
            f"exact recursion needs a power-of-2 link count, got L/L0 = "
            f"{config.L / config.L0!r}")
    return n.bit_length() - 1


def rate_exact_recursive(config: RepeaterConfig,
                         grid_points: int = 200001) -> float:
    """Expected time per distributed pair from the waiting recursion.

    Elementary pairs arrive after an exponential wait of unit mean.  Each
    nesting level waits for both child pairs to be ready, which squares
    the waiting-time distribution function (for unit exponentials this is
    the standard mean pairing factor 3/2), then retries the level until
    the swap succeeds, stretching the waiting time by 1/p.  The final
    expectation is integrated on a dense grid.
    """
    levels = _levels(config)
    t = np.linspace(0.0, 20.0 + 2.0 * levels, grid_points)
    G = 1.0 - np.exp(-t)
    for _ in range(levels):
        G = G * G
    return float(trapezoid(1.0 - G, t) / config.p ** levels)


def max_links(F_final: float, eps0: float, epsg: float) -> float:
    """Largest usable link number -ln(F_final)/(eps0+epsg).

    Returned as a real number; the caller rounds down to an integer link
    count.  Vanishing errors give an unbounded (infinite) result.
    """
    if not 0.0 < F_final < 1.0:
        raise ValueError("F_final must lie in (0, 1)")
    if eps0 < 0.0 or epsg < 0.0:
        raise ValueError("error contributions must be nonnegative")
    total = eps0 + epsg
    if total == 0.0:
        return float(np.inf)
    return float(-np.log(F_final) / total)
