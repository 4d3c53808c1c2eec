"""Peak-confinement sweep: numerical vs (p1, p2) estimate of the rocking-mode |beta|^2."""

import argparse
import math

from phonon_pairs.cli import FIG3_RANGE, shipped_config
from phonon_pairs.scenario import SweepSpec, run_sweep, write_comparison


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--range", default=FIG3_RANGE, help="start:stop:count in MHz")
    p.add_argument("--out", default="out")
    p.add_argument("--workers", type=int, default=None)
    args = p.parse_args()

    table = run_sweep(shipped_config(), SweepSpec.from_range("pulse.omega_ax_max", args.range), workers=args.workers)
    print(f"{'w_max/2pi MHz':>14} {'numeric':>12} {'p1p2':>12} {'ratio':>9}  note")
    for row in table.rows:
        num, est = row["beta_sq_numeric"], row["beta_sq_p1p2"]
        if row["error"]:
            print(f"{row['value']:14.4g} {'':>12} {'':>12} {'':>9}  {row['error']}")
        else:
            print(f"{row['value']:14.4g} {num:12.4e} {est:12.4e} {num / est:9.3g}  log10 ratio {math.log10(num / est):+.2f}")
    print("wrote", write_comparison(table, args.out))


if __name__ == "__main__":
    main()
