#!/usr/bin/env python3
"""Iterated-regularity profile of u_k against a WKB control family.

    python3 scripts/quasimode_profile.py --depth 4
"""
import argparse

from twomicro.integrable import uk_family, wkb_family
from twomicro.microlocal import iterated_regularity_profile
from twomicro.symbols import xi_monomial


def show(name, prof):
    print(f"\n{name}: growth exponent {prof.growth_exponent:.4f}   divergent {prof.divergent}")
    print("depth  " + "  ".join(f"h={h:.3e}" for h in prof.hs))
    for j, row in enumerate(prof.member_values):
        print(f"{j:5d}  " + "  ".join(f"{v:11.5g}" for v in row))


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--ks", type=int, nargs="+", default=[8, 16, 32, 64])
    ap.add_argument("--depth", type=int, default=4)
    args = ap.parse_args()
    gen = [xi_monomial(2, 1)]
    show("u_k", iterated_regularity_profile(uk_family(args.ks), gen, args.depth))
    ctrl = wkb_family([2.0 ** -j for j in range(3, 8)], amplitude={(0, 0): 1.0, (0, 1): 0.5})
    show("WKB control", iterated_regularity_profile(ctrl, gen, args.depth))


if __name__ == "__main__":
    main()
