"""Figure registry: one fixed recipe per figure id.

A recipe names its input tables (paths relative to the data root), the axis
scales, and the overlay formula used for analytic reference lines.  The
builder functions turn verified tables into plain series of floats; they
know the sweep layout (which rows are simulation symbols, which are
effective-theory lines) but nothing about rendering.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

from .io import DataError, SweepTable, load_table

FIGURE_IDS = ("2a", "2b", "S2a", "S2b", "S3", "S4", "S5")

# roles: "symbols" and "reference" are data points, "line" and "bound" are
# analytic curves; a series with pair set is compared against the line of
# that label by check_overlay
ROLES = ("symbols", "line", "bound", "reference")


@dataclass(frozen=True)
class AxisSpec:
    label: str
    scale: str  # "linear" | "log"

    def __post_init__(self):
        if self.scale not in ("linear", "log"):
            raise ValueError(f"axis scale must be linear/log, got {self.scale}")


@dataclass(frozen=True)
class FigureSpec:
    figure_id: str
    inputs: tuple[str, ...]
    x: AxisSpec
    y: AxisSpec
    overlay: str
    y2: AxisSpec | None = None
    band_below: float | None = None


@dataclass(frozen=True)
class Series:
    label: str
    role: str
    x: tuple[float, ...]
    y: tuple[float, ...]
    pair: str | None = None  # label of the analytic line this is checked against

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"unknown series role {self.role}")
        if len(self.x) != len(self.y):
            raise ValueError(f"series {self.label}: x/y length mismatch")


@dataclass(frozen=True)
class FigureData:
    spec: FigureSpec
    series: tuple[Series, ...]
    y2_series: tuple[Series, ...] = ()
    notes: dict = field(default_factory=dict)


def _fmt_C(C: float) -> str:
    return f"C={C:g}"


def _sorted_xy(rows: list[dict], xcol: str, ycol) -> tuple[tuple, tuple]:
    pts = sorted((r[xcol], ycol(r)) for r in rows)
    return tuple(p[0] for p in pts), tuple(p[1] for p in pts)


def _load(spec: FigureSpec, data_dir: str, index: int,
          required: tuple[str, ...]) -> SweepTable:
    return load_table(os.path.join(data_dir, spec.inputs[index]), required)


# -- builders --------------------------------------------------------------

def _build_2a(spec: FigureSpec, data_dir: str) -> FigureData:
    tab = _load(spec, data_dir, 0,
                ("C", "a", "t_gate", "P_success", "source"))
    rows = tab.select(source="effective")
    if not rows:
        raise DataError(f"{tab.path}: no effective-source rows")
    x, fail = _sorted_xy(rows, "C", lambda r: 1.0 - r["P_success"])
    _, t = _sorted_xy(rows, "C", lambda r: r["t_gate"])
    return FigureData(
        spec=spec,
        series=(Series("1-P_s", "line", x, fail),),
        y2_series=(Series("t_CZ", "line", x, t),),
        notes={"a": rows[0]["a"]})


def _build_2b(spec: FigureSpec, data_dir: str) -> FigureData:
    # one single-point run per (C, delta_E2); delta_E2 lives in the manifest
    by_C: dict[float, list[tuple[float, float]]] = {}
    for i in range(len(spec.inputs)):
        tab = _load(spec, data_dir, i, ("C", "infidelity", "source"))
        rows = tab.select(source="effective")
        if not rows:
            raise DataError(f"{tab.path}: no effective-source rows")
        dE2 = tab.options.get("delta_E2")
        if dE2 is None:
            raise DataError(f"{tab.path}: manifest lacks delta_E2")
        for r in rows:
            by_C.setdefault(r["C"], []).append((float(dE2), r["infidelity"]))

    series = []
    for C in sorted(by_C):
        pts = sorted(by_C[C])
        x = tuple(p[0] for p in pts)
        y = tuple(p[1] for p in pts)
        # anchor the inverse-square reference on the largest detuning,
        # where the scaling is purest
        line = tuple(y[-1] * (x[-1] / xi) ** 2 for xi in x)
        lbl = _fmt_C(C)
        series.append(Series(f"{lbl} error", "symbols", x, y,
                             pair=f"{lbl} ~1/Delta_E2^2"))
        series.append(Series(f"{lbl} ~1/Delta_E2^2", "line", x, line))
    return FigureData(spec=spec, series=tuple(series))


def _toffoli_series(tab: SweepTable, value, scale_line, bound, bound_label):
    """Shared S2a/S2b shape: per-N symbols, per-N analytic line, one bound."""
    alpha = float(tab.options.get("alpha", 1.0))
    beta = float(tab.options.get("beta", 1.0))
    series = []
    for N in sorted(set(tab.column("N"))):
        rows = tab.select(N=N)
        x, y = _sorted_xy(rows, "C", value)
        line = tuple(scale_line(r, alpha, beta)
                     for r in sorted(rows, key=lambda r: r["C"]))
        lbl = f"N={N:g}"
        series.append(Series(f"{lbl} data", "symbols", x, y,
                             pair=f"{lbl} scaling"))
        series.append(Series(f"{lbl} scaling", "line", x, line))
    if alpha == 1.0 and beta == 1.0:
        Cs = tuple(sorted(set(tab.column("C"))))
        series.append(Series(bound_label, "bound", Cs,
                             tuple(bound(C) for C in Cs)))
    return tuple(series)


def _build_S2a(spec: FigureSpec, data_dir: str) -> FigureData:
    tab = _load(spec, data_dir, 0, ("N", "C", "F", "k(N)"))
    series = _toffoli_series(
        tab,
        value=lambda r: 1.0 - r["F"],
        scale_line=lambda r, al, be: r["k(N)"] * math.pi ** 2 * al
        / ((al + be) * r["C"]),
        bound=lambda C: math.pi ** 2 / (32.0 * C),
        bound_label="worst-input bound")
    return FigureData(spec=spec, series=series)


def _build_S2b(spec: FigureSpec, data_dir: str) -> FigureData:
    tab = _load(spec, data_dir, 0, ("N", "C", "P_success", "d(N)"))
    series = _toffoli_series(
        tab,
        value=lambda r: 1.0 - r["P_success"],
        scale_line=lambda r, al, be: (2.0 * be + al * r["d(N)"]) * math.pi
        / (2.0 * math.sqrt(al * (al + be)) * math.sqrt(r["C"])),
        bound=lambda C: 3.0 * math.pi / (2.0 * math.sqrt(2.0) * math.sqrt(C)),
        bound_label="large-N bound")
    return FigureData(spec=spec, series=series)


def _cz_pair_series(tab: SweepTable, ycol_sym, ycol_line, sym_suffix):
    """Per-C pairs of full-simulation symbols and effective-theory lines."""
    series = []
    for C in sorted(set(tab.column("C"))):
        full = tab.select(C=C, source="full")
        eff = tab.select(C=C, source="effective")
        if not full or not eff:
            raise DataError(f"{tab.path}: C={C:g} lacks full or effective rows")
        lbl = _fmt_C(C)
        xs, ys = _sorted_xy(full, "a", ycol_sym)
        xl, yl = _sorted_xy(eff, "a", ycol_line)
        series.append(Series(f"{lbl} {sym_suffix}", "symbols", xs, ys,
                             pair=f"{lbl} effective"))
        series.append(Series(f"{lbl} effective", "line", xl, yl))
    return series


def _build_S3(spec: FigureSpec, data_dir: str) -> FigureData:
    tab = _load(spec, data_dir, 0, ("C", "a", "t_gate", "source"))
    t = lambda r: r["t_gate"]
    return FigureData(spec=spec,
                      series=tuple(_cz_pair_series(tab, t, t, "full")))


def _build_S4(spec: FigureSpec, data_dir: str) -> FigureData:
    # pulsed-drive symbols carry the herald statistics of the finished gate;
    # the flat-drive rows are kept as a reference trace showing the driven
    # readout deficit that grows past a ~ 0.25
    pulsed = _load(spec, data_dir, 0, ("C", "a", "P_success", "source"))
    flat = _load(spec, data_dir, 1, ("C", "a", "P_success", "source"))
    fail = lambda r: 1.0 - r["P_success"]
    series = _cz_pair_series(pulsed, fail, fail, "pulsed")
    for C in sorted(set(flat.column("C"))):
        rows = flat.select(C=C, source="full")
        if not rows:
            continue
        lbl = _fmt_C(C)
        x, y = _sorted_xy(rows, "a", fail)
        series.append(Series(f"{lbl} flat readout", "reference", x, y,
                             pair=f"{lbl} effective"))
    return FigureData(spec=spec, series=tuple(series))


def _build_S5(spec: FigureSpec, data_dir: str) -> FigureData:
    tab = _load(spec, data_dir, 0, ("C", "a", "infidelity", "source"))
    series = []
    for C in sorted(set(tab.column("C"))):
        rows = tab.select(C=C, source="full")
        if not rows:
            raise DataError(f"{tab.path}: C={C:g} has no full-source rows")
        x, y = _sorted_xy(rows, "a", lambda r: r["infidelity"])
        series.append(Series(_fmt_C(C), "symbols", x, y))
    return FigureData(spec=spec, series=tuple(series))


_BUILDERS = {
    "2a": _build_2a, "2b": _build_2b, "S2a": _build_S2a, "S2b": _build_S2b,
    "S3": _build_S3, "S4": _build_S4, "S5": _build_S5,
}

_FIG2B_INPUTS = tuple(
    f"fig2b/C{C}_dE{d}/cz.csv"
    for C in (10, 100) for d in (200, 300, 400, 600, 800))

FIGURES: dict[str, FigureSpec] = {
    "2a": FigureSpec(
        "2a", ("fig2a/cz.csv",),
        x=AxisSpec("cooperativity C", "log"),
        y=AxisSpec("1 - P_s", "log"),
        y2=AxisSpec("t_CZ [1/gamma]", "log"),
        overlay="none"),
    "2b": FigureSpec(
        "2b", _FIG2B_INPUTS,
        x=AxisSpec("Delta_E2 [gamma]", "log"),
        y=AxisSpec("gate error", "log"),
        overlay="anchored_inverse_square"),
    "S2a": FigureSpec(
        "S2a", ("figS2/toffoli.csv",),
        x=AxisSpec("cooperativity C", "log"),
        y=AxisSpec("generic-input error", "log"),
        overlay="toffoli_error_scaling"),
    "S2b": FigureSpec(
        "S2b", ("figS2/toffoli.csv",),
        x=AxisSpec("cooperativity C", "log"),
        y=AxisSpec("generic-input failure", "log"),
        overlay="toffoli_failure_scaling"),
    "S3": FigureSpec(
        "S3", ("figS3/cz.csv",),
        x=AxisSpec("drive strength a", "linear"),
        y=AxisSpec("gate time [1/gamma]", "log"),
        overlay="effective_vs_full"),
    "S4": FigureSpec(
        "S4", ("figS4/cz.csv", "figS3/cz.csv"),
        x=AxisSpec("drive strength a", "linear"),
        y=AxisSpec("failure probability 1 - P_s", "log"),
        overlay="effective_vs_full"),
    "S5": FigureSpec(
        "S5", ("figS3/cz.csv",),
        x=AxisSpec("drive strength a", "linear"),
        y=AxisSpec("conditional infidelity 1 - F", "log"),
        overlay="none",
        band_below=1e-6),
}


def figure_spec(figure_id: str) -> FigureSpec:
    try:
        return FIGURES[figure_id]
    except KeyError:
        known = ", ".join(FIGURE_IDS)
        raise KeyError(f"unknown figure id {figure_id!r} (known: {known})")


def build_figure(figure_id_or_spec, data_dir: str) -> FigureData:
    """Load, verify, and assemble every series of one figure."""
    spec = (figure_id_or_spec if isinstance(figure_id_or_spec, FigureSpec)
            else figure_spec(figure_id_or_spec))
    return _BUILDERS[spec.figure_id](spec, data_dir)
