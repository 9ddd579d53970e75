"""Command line: render figures or check overlays from sweep CSV data.

Exit codes follow the sweep CLI convention: 0 success, 2 usage error,
3 unusable data (missing/corrupt/empty tables, mismatched series).
"""

from __future__ import annotations

import argparse
import sys

from .figures import FIGURE_IDS
from .io import DataError
from .overlay import OverlayError, check_overlay
from .render import render


def cmd_render(args) -> int:
    res = render(args.figure, data_dir=args.data, out_dir=args.out)
    print(f"wrote {res.image_path} and {res.sidecar_path}")
    return 0


def cmd_check(args) -> int:
    rep = check_overlay(args.figure, args.data)
    weak = rep.max_rel_dev_weak
    weak_txt = f"{weak:.3e}" if weak == weak else "n/a"
    print(f"figure {rep.figure_id}: max overlay deviation "
          f"{rep.max_rel_dev:.3e} (weak drive: {weak_txt})")
    for p in rep.pairs:
        print(f"  {p.symbol_label} vs {p.line_label} [{p.role}]: "
              f"{p.max_rel_dev:.3e}")
    if rep.growth_flag is not None:
        print(f"  reference deviation grows past a=0.25: {rep.growth_flag}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="heraldplots",
        description="Regenerate sweep figures from heraldgate CSV output.")
    sub = parser.add_subparsers(dest="command", required=True)

    ren = sub.add_parser("render", help="write one figure image + sidecar")
    ren.add_argument("--figure", required=True, choices=FIGURE_IDS)
    ren.add_argument("--data", required=True, metavar="DIR",
                     help="data root holding the CLI-produced CSV tables")
    ren.add_argument("--out", default=".", metavar="DIR")
    ren.set_defaults(func=cmd_render)

    chk = sub.add_parser("check", help="report symbol-vs-overlay deviations")
    chk.add_argument("--figure", required=True, choices=FIGURE_IDS)
    chk.add_argument("--data", required=True, metavar="DIR")
    chk.set_defaults(func=cmd_check)

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (DataError, OverlayError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
