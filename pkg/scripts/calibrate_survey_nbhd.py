"""Tune the neighborhood allocation tilts.

The deterministic allocation tensor fixes each neighborhood's mean
willingness score and mean satisfaction exactly; this script searches the
tilt parameters so the eight-point regression R^2 lands on 0.438 and the
satisfaction means stay near the published column, then prints the frozen
tilts.
"""

from __future__ import annotations

import numpy as np

from tenurekit import community

TARGET_R2 = 0.438
SAT_TARGETS = {"A": 4.2, "B": 4.3, "C": 4.4, "D": 4.4,
               "E": 4.3, "F": 4.3, "G": 4.4, "H": 4.4}


def evaluate(tilts):
    saved = community.NBHD_TILTS
    community.NBHD_TILTS = tilts
    try:
        tensor = community._allocate_neighborhoods(community.SAT_COMPOSITION)
    finally:
        community.NBHD_TILTS = saved
    names = sorted(tilts)
    s = np.arange(1, 6, dtype=float)
    v = np.arange(1, 6, dtype=float)
    mean_wtp = {}
    mean_sat = {}
    for i, n in enumerate(names):
        cell = tensor[i]
        total = cell.sum()
        mean_wtp[n] = (cell.sum(axis=1) @ s) / total
        mean_sat[n] = (cell.sum(axis=0) @ v) / total
    x = np.array([mean_wtp[n] for n in names])
    y = np.array([mean_sat[n] for n in names])
    r2 = np.corrcoef(x, y)[0, 1] ** 2
    return r2, mean_wtp, mean_sat


def main():
    rng = np.random.default_rng(11)
    names = sorted(community.NBHD_TILTS)
    best = dict(community.NBHD_TILTS)
    best_pen = np.inf
    for trial in range(6000):
        if trial == 0:
            cand = dict(best)
        else:
            cand = {n: (float(np.clip(best[n][0] + rng.normal(0, 0.02), -0.3, 0.3)),
                        float(np.clip(best[n][1] + rng.normal(0, 0.02), -0.3, 0.3)))
                    for n in names}
        r2, mw, ms = evaluate(cand)
        pen = (r2 - TARGET_R2) ** 2 * 500
        for n in names:
            pen += max(0.0, abs(ms[n] - SAT_TARGETS[n]) - 0.06) ** 2 * 30
        if pen < best_pen:
            best, best_pen = cand, pen
    r2, mw, ms = evaluate(best)
    print("penalty:", best_pen, " r2:", round(r2, 4))
    for n in names:
        print(f"  {n}: wtp {mw[n]:.3f}  sat {ms[n]:.3f} (target {SAT_TARGETS[n]})")
    print("NBHD_TILTS = {")
    for n in names:
        print(f'    "{n}": ({best[n][0]:+.4f}, {best[n][1]:+.4f}),')
    print("}")


if __name__ == "__main__":
    main()
