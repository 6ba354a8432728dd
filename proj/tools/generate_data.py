#!/usr/bin/env python3
"""Regenerates the synthetic map grids and the demo drive cycle.

The engine maps follow a Willans-line fuel model, the EM efficiency a
quadratic-loss model, and the SCR conversion surfaces are logistic in
temperature with a flow-dependent ceiling. Values are plausible for a
class-6 diesel parallel hybrid but are not measurements; see
docs/config.md. Outputs are committed under data/ -- rerun only when the
models here change.
"""

import math
import os

OUT = os.path.join(os.path.dirname(__file__), "..", "data")

LHV_J_PER_G = 42500.0
WILLANS_EFF = 0.42
P_RATED_W = 164000.0  # ~220 hp
IDLE_RADPS = 57.6     # 550 rpm


def drag_nm(w):
    return 25.0 + 0.12 * w


def write_grid(path, col_axis, row_axis, fn):
    lines = [",".join("%.10g" % a for a in col_axis)]
    for b in row_axis:
        cells = ["%.10g" % b] + ["%.10g" % fn(a, b) for a in col_axis]
        lines.append(",".join(cells))
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")
    print("wrote", path)


def engine_maps():
    omega = [50, 70, 90, 110, 130, 150, 170, 190, 210, 230, 250, 270, 290]
    tau = [-100, -50, 0, 50, 100, 150, 200, 250, 300, 350, 400,
           450, 500, 550, 600, 650, 700, 750, 800, 850]

    def fuel(w, t):
        p_ind = max(0.0, (t + drag_nm(w)) * w)
        return p_ind / (WILLANS_EFF * LHV_J_PER_G)

    def exhaust(w, t):
        return 0.04 + 3.04e-4 * w + 9.2e-7 * w * max(t, 0.0)

    def load(w, t):
        return w * max(t, 0.0) / P_RATED_W

    def tot(w, t):
        return 87.0 + 0.05 * w + 340.0 * load(w, t) ** 0.7

    def eonox(w, t):
        return 8.4 + 280.0 * load(w, t) ** 1.35

    d = os.path.join(OUT, "maps")
    write_grid(os.path.join(d, "engine_fuel_gps.csv"), omega, tau, fuel)
    write_grid(os.path.join(d, "engine_exhaust_kgps.csv"), omega, tau, exhaust)
    write_grid(os.path.join(d, "engine_tot_c.csv"), omega, tau, tot)
    write_grid(os.path.join(d, "engine_eonox_mgps.csv"), omega, tau, eonox)


def em_map():
    omega = [0, 40, 80, 120, 150, 180, 210, 240, 270, 300, 320]
    tau = [-700, -600, -500, -400, -300, -200, -100, -50, 0,
           50, 100, 200, 300, 400, 500, 600, 700]

    def eff(w, t):
        p = abs(w * t)
        loss = 300.0 + 2500.0 * (t / 600.0) ** 2 + 1200.0 * (w / 314.0) ** 2 + 0.05 * p
        return 0.05 + 0.93 * p / (p + loss)

    write_grid(os.path.join(OUT, "maps", "em_efficiency.csv"), omega, tau, eff)


def conv_maps():
    t_scr = [0, 50, 100, 150, 175, 200, 225, 250, 300, 350, 400, 450, 500]
    mdot = [0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5]

    def sigmoid(x):
        return 1.0 / (1.0 + math.exp(-x))

    def no(t, m):
        cap = 0.975 - 0.31 * m / (m + 0.12)
        return min(0.99, max(0.0, cap * sigmoid((t - 205.0) / 24.0)))

    def no2(t, m):
        cap = 0.96 - 0.33 * m / (m + 0.12)
        return min(0.99, max(0.0, cap * sigmoid((t - 192.0) / 21.0)))

    write_grid(os.path.join(OUT, "maps", "conv_no.csv"), t_scr, mdot, no)
    write_grid(os.path.join(OUT, "maps", "conv_no2.csv"), t_scr, mdot, no2)


def demo_cycle():
    # (duration_s, v_start, v_end); cosine ramps keep accel within
    # [-2, 1.5] and hit the endpoints exactly (stops are exact zeros).
    phases = [
        (9, 0.0, 0.0),
        (30, 0.0, 12.0),
        (47, 12.0, 12.0),
        (24, 12.0, 0.0),
        (13, 0.0, 0.0),
        (45, 0.0, 16.0),
        (62, 16.0, 16.0),
        (30, 16.0, 5.0),
        (21, 5.0, 5.0),
        (14, 5.0, 0.0),
        (5, 0.0, 0.0),
    ]
    speeds = []
    for dur, v0, v1 in phases:
        for i in range(dur):
            s = i / dur
            speeds.append(v0 + (v1 - v0) * (1.0 - math.cos(math.pi * s)) / 2.0)
    speeds.append(0.0)  # t = 300

    lines = ["t_s,v_org_mps,grade_rad"]
    dist = 0.0
    for t, v in enumerate(speeds):
        grade = 0.012 * math.sin(2 * math.pi * t / 150.0 + 1.2) + 0.006 * math.sin(2 * math.pi * t / 47.0)
        lines.append("%d,%.6f,%.6f" % (t, v, grade))
        if t + 1 < len(speeds):
            dist += 0.5 * (v + speeds[t + 1])
    path = os.path.join(OUT, "cycle_demo_300s.csv")
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")
    print("wrote %s (%d samples, %.0f m)" % (path, len(speeds), dist))


if __name__ == "__main__":
    os.makedirs(os.path.join(OUT, "maps"), exist_ok=True)
    engine_maps()
    em_map()
    conv_maps()
    demo_cycle()
