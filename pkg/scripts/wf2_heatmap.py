#!/usr/bin/env python3
"""Scan the quasimode family u_k and draw the cell statuses as a character map.

Rows are normal-direction cells (angle of I-hat), columns are x1-cells at a
fixed x2-cell.  '.' no mass, 'o' bounded mass, '#' detected.

    python3 scripts/wf2_heatmap.py --order 1 0 --csv wf2.csv
"""
import argparse

import numpy as np

from twomicro.integrable import uk_family
from twomicro.microlocal import wf2_scan

GLYPH = {"no_mass": ".", "mass": "o", "detected": "#"}


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--ks", type=int, nargs="+", default=[8, 16, 32, 64])
    ap.add_argument("--order", type=int, nargs=2, default=[0, 0])
    ap.add_argument("--x-cells", type=int, default=8)
    ap.add_argument("--angle-cells", type=int, default=16)
    ap.add_argument("--x2-cell", type=int, default=0)
    ap.add_argument("--csv")
    args = ap.parse_args()
    rep = wf2_scan(uk_family(args.ks), order=tuple(args.order), x_cells=args.x_cells,
                   angle_cells=args.angle_cells)
    print(f"order {tuple(args.order)}   x2-cell {args.x2_cell}   "
          f"detected {len(rep.detected)}   with mass {len(rep.mass)}")
    for a in range(rep.angle_cells):
        ang = 360.0 * a / rep.angle_cells
        row = "".join(GLYPH[rep.cell((i, args.x2_cell), a).status] for i in range(rep.x_cells))
        slopes = [rep.cell((i, args.x2_cell), a).regression.slope for i in range(rep.x_cells)]
        s = "" if np.all(np.isnan(slopes)) else f"   slope {np.nanmean(slopes):+.3f}"
        print(f"{ang:6.1f} deg  {row}{s}")
    if args.csv:
        rep.to_csv(args.csv)


if __name__ == "__main__":
    main()
