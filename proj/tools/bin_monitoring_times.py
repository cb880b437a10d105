#!/usr/bin/env python3
"""Convert the Hoel-Walburg RFM mice data to a current status table on a coarse grid.

Input rows are (l, u, grp) as shipped with lifelines: a tumour found at
examination gives l=0 and u=<exam time>; no tumour gives l=<exam time>, u=Inf.
Each examination time is moved down to the largest grid knot not exceeding it,
so the survival estimate is constant between consecutive knots.
"""
import argparse
import bisect
import csv

DEFAULT_KNOTS = [45, 381, 477, 515, 650, 679, 773, 779, 839, 888, 1008]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("raw")
    ap.add_argument("out")
    ap.add_argument("--knots", type=float, nargs="+", default=DEFAULT_KNOTS)
    args = ap.parse_args()
    knots = sorted(args.knots)

    rows = []
    with open(args.raw, newline="") as fh:
        for rec in csv.DictReader(fh):
            if rec["u"] == "Inf":
                exam, delta = float(rec["l"]), 0
            else:
                exam, delta = float(rec["u"]), 1
            pos = bisect.bisect_right(knots, exam)
            if pos == 0:
                raise SystemExit(f"examination time {exam} precedes the first knot")
            env = 0 if rec["grp"] == "ce" else 1
            rows.append((knots[pos - 1], delta, env, exam))

    with open(args.out, "w", newline="") as fh:
        fh.write("# RFM mice lung tumour data (Hoel and Walburg 1972), binned to knots "
                 + " ".join(f"{k:g}" for k in knots) + "\n")
        fh.write("# env: 0 = conventional environment, 1 = germ-free environment\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["u", "delta", "env", "exam_time"])
        for u, d, e, t in rows:
            w.writerow([f"{u:g}", d, e, f"{t:g}"])


if __name__ == "__main__":
    main()
