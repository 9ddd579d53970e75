"""Deviation checks between simulation symbols and analytic overlay curves.

check_overlay pairs every symbol series of a figure with the analytic line
it was drawn against and reports the maximum relative deviation.  Reference
traces (flat-drive readout in the strong-drive figure) are reported
separately: they exist to exhibit the driven-readout deficit, so they feed
the qualitative growth flag instead of the binding deviation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .figures import FigureData, Series, build_figure


class OverlayError(Exception):
    """No comparable series pair, or mismatched series geometry."""


@dataclass(frozen=True)
class PairReport:
    symbol_label: str
    line_label: str
    role: str
    max_rel_dev: float
    # restricted to points with drive a <= 0.25 (NaN when no such point);
    # only meaningful for figures whose x axis is the drive strength
    max_rel_dev_weak: float
    dev_by_x: tuple[tuple[float, float], ...] = field(repr=False)


@dataclass(frozen=True)
class OverlayReport:
    figure_id: str
    max_rel_dev: float       # over symbol pairs, all points
    max_rel_dev_weak: float  # over symbol pairs, points with a <= 0.25
    pairs: tuple[PairReport, ...]
    growth_flag: bool | None = None

    def pair(self, symbol_label: str) -> PairReport:
        for p in self.pairs:
            if p.symbol_label == symbol_label:
                return p
        raise KeyError(symbol_label)


_WEAK_DRIVE = 0.25
_X_IS_DRIVE = {"S3", "S4", "S5"}


def _compare(sym: Series, line: Series, path_hint: str) -> tuple:
    if len(sym.x) != len(line.x):
        raise OverlayError(
            f"{path_hint}: {sym.label} has {len(sym.x)} points but "
            f"{line.label} has {len(line.x)}")
    devs = []
    for xs, ys, xl, yl in zip(sym.x, sym.y, line.x, line.y):
        if xs != xl:
            raise OverlayError(
                f"{path_hint}: {sym.label} and {line.label} sample "
                f"different points ({xs:g} vs {xl:g})")
        scale = max(abs(yl), abs(ys))
        devs.append((xs, abs(ys - yl) / scale if scale > 0 else 0.0))
    return tuple(devs)


def check_overlay(figure, data_dir: str | None = None) -> OverlayReport:
    """Compare each symbol series of a figure with its analytic overlay.

    Accepts either a figure id plus the data root, or an already built
    FigureData.  Figures without any symbol/line pair (line-only, or
    band-only like the infidelity figure) raise OverlayError.
    """
    if isinstance(figure, FigureData):
        data = figure
    else:
        if data_dir is None:
            raise TypeError("data_dir required when passing a figure id")
        data = build_figure(figure, data_dir)

    fid = data.spec.figure_id
    lines = {s.label: s for s in data.series if s.role in ("line", "bound")}
    x_is_drive = fid in _X_IS_DRIVE

    pairs = []
    for s in data.series:
        if s.pair is None or s.role in ("line", "bound"):
            continue
        if s.pair not in lines:
            raise OverlayError(f"{fid}: no analytic series {s.pair!r} "
                               f"for {s.label!r}")
        devs = _compare(s, lines[s.pair], fid)
        weak = [d for x, d in devs if x <= _WEAK_DRIVE] if x_is_drive else []
        pairs.append(PairReport(
            symbol_label=s.label, line_label=s.pair, role=s.role,
            max_rel_dev=max(d for _, d in devs),
            max_rel_dev_weak=max(weak) if weak else float("nan"),
            dev_by_x=devs))

    binding = [p for p in pairs if p.role == "symbols"]
    if not binding:
        raise OverlayError(f"{fid}: figure has no symbol/overlay pair to check")

    growth = None
    refs = [p for p in pairs if p.role == "reference"]
    if refs:
        # grows beyond the weak-drive window: the deviation at the strongest
        # drive exceeds everything seen at a <= 0.25, for every reference trace
        growth = True
        for p in refs:
            beyond = [d for x, d in p.dev_by_x if x > _WEAK_DRIVE]
            weak = [d for x, d in p.dev_by_x if x <= _WEAK_DRIVE]
            if not beyond or not weak or max(beyond) <= max(weak):
                growth = False

    weak_vals = [p.max_rel_dev_weak for p in binding
                 if p.max_rel_dev_weak == p.max_rel_dev_weak]
    return OverlayReport(
        figure_id=fid,
        max_rel_dev=max(p.max_rel_dev for p in binding),
        max_rel_dev_weak=max(weak_vals) if weak_vals else float("nan"),
        pairs=tuple(pairs),
        growth_flag=growth)
