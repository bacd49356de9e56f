"""Reduced-size versions of the two Monte Carlo studies.  The full presets
(500 trials per point) run from the command line, e.g.

    uplink-isac simulate --preset fig2 --out fig2.csv

This script uses 40 trials per point and prints a small table.

    python demos/04_sweeps.py
"""

import uplink_isac as ui


def show(records, metrics):
    print(f"{'value':>7} {'scheme':>11} " + " ".join(f"{m:>10}" for m in metrics))
    for r in records:
        print(f"{r.sweep_value:7g} {r.scheme:>11} "
              + " ".join(f"{getattr(r, m):10.3g}" for m in metrics))


print("BER and rate versus the number of snapshots (M_r = 8)")
show(ui.run_sweep(ui.preset("fig2", trials=40)), ("ber", "bler", "rate"))

print("\nDetection and estimation versus radar power (L = 20)")
show(ui.run_sweep(ui.preset("fig3", trials=40)), ("ber", "bler", "nmse", "crb"))
