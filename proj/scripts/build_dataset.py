#!/usr/bin/env python3
"""Rebuild the synthetic parts of the bundled France dataset.

The aggregate series under data/france (exogenous projections, survival
schedule, emission factors, reference trajectories) are transcriptions of
published case-study data. Two inputs of the simulator are not published in
age-resolved form and are reconstructed here:

  initial_fleet.csv      2022 stock by powertrain and age. Scenario
                         trajectories are affine in the initial state, so the
                         age profile is recovered by bounded least squares
                         against the reference emission / stock / sales
                         series of the four published policy scenarios.
  historical/stock_by_age.csv and friends
                         a 2011-2022 panel consistent with the published
                         survival-ratio law and fleet aggregates, used only
                         by the calibration commands.

Run from the repository root:  python3 scripts/build_dataset.py
Requires numpy + scipy. Deterministic; overwrites the generated CSVs in
place and prints reproduction errors of the reference trajectories.
"""
import csv
import os
import sys

import numpy as np
from scipy.optimize import lsq_linear

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
DATA = os.path.join(ROOT, "data", "france")

A_MAX = 30
MU = 6.75
P_PRICE, P_OPER, P_INFRA = -0.3, -0.15, -0.3
G_TO_MT = 1e-12

# 2022 fleet totals by powertrain (vehicles)
TOTAL_ICEV = 35.519509e6
TOTAL_EV = 0.276883e6

# EV fleet age mix in 2022: shares of ages 0..4, reflecting the steep recent
# ramp-up of EV sales. The trajectory fit is insensitive to the exact split
# (all mass sits in the unit-survival age range); this fixes the free
# directions to something plausible.
EV_AGE_SHARES = [0.45, 0.28, 0.15, 0.08, 0.04]

# --- Historical panel construction constants (synthetic, calibration only) ---
# Survival ratios: affine law for ages 6+, above-unity young-age ratios from
# used-vehicle imports. Ratios at ages 1..5:
YOUNG_RATIOS = [1.031, 1.028, 1.026, 1.020, 1.012]
# Annual mileage (km) implied by the national inventory, 2011..2022:
MILEAGE_KM = [13146, 13262, 13268, 13322, 13379, 13399, 13410, 13430,
              13399, 11309, 13113, 13550]
# Professional ownership share by age (rest is private):
def professional_share(age):
    return 0.32 * np.exp(-age / 2.5) + 0.08


def read_rows(path):
    with open(path) as f:
        return list(csv.DictReader(f))


def load_inputs():
    exo = read_rows(os.path.join(DATA, "exogenous.csv"))
    years = [int(r["year"]) for r in exo]
    assert years == list(range(2022, 2051)), "exogenous.csv must cover 2022..2050"
    cols = {k: {int(r["year"]): float(r[k]) for r in exo} for k in exo[0] if k != "year"}
    eta = np.array([float(r["eta"]) for r in read_rows(os.path.join(DATA, "survival.csv"))])
    assert eta.size == A_MAX
    eps = {int(r["year"]): float(r["eps_gpkm"])
           for r in read_rows(os.path.join(DATA, "emission_factors.csv"))}
    return cols, eta, eps


def load_reference():
    def series(name):
        rows = read_rows(os.path.join(DATA, "reference", name + ".csv"))
        key = [k for k in rows[0] if k != "year"][0]
        return {int(r["year"]): float(r[key]) for r in rows}
    ref_e = {s: series("emissions_" + s) for s in ("i0", "ic", "ip", "bi")}
    ref_s2 = {s: series("ev_stock_" + s) for s in ("i0", "ic", "ip", "bi")}
    return ref_e, ref_s2, series("ev_sales_ic")


def ev_share(cols, t, u):
    """Binary logit share of EVs among new sales. Mean costs exclude the
    incentive, matching the simulator."""
    cp1, cp2 = cols["CP_icev_keur"][t], cols["CP_ev_keur"][t]
    co1, co2 = cols["CO_icev_eur"][t], cols["CO_ev_eur"][t]
    cbar_p, cbar_o = 0.5 * (cp1 + cp2), 0.5 * (co1 + co2)
    u1 = P_PRICE * cp1 / cbar_p + P_OPER * co1 / cbar_o
    u2 = (1.0 - cols["cA_ev"][t]) * (P_PRICE * (cp2 - u) / cbar_p
                                     + P_OPER * co2 / cbar_o
                                     + P_INFRA * (1.0 - cols["cI_ev"][t]))
    m = max(u1, u2)
    e1, e2 = np.exp(MU * (u1 - m)), np.exp(MU * (u2 - m))
    return e2 / (e1 + e2)


def simulate(cols, eta, eps, S0, mode):
    """Batched forward run 2022..2050. S0: (B, 2, A_MAX+1). Returns per-year
    emissions (Mt), EV stock, and EV sales, matching the C++ simulator."""
    S = S0.copy()
    B = S.shape[0]
    E = np.empty((B, 29))
    S2 = np.empty((B, 29))
    N2 = np.empty((B, 28))

    def emissions(S, t):
        ev = np.array([eps.get(t - a, 176.0) for a in range(A_MAX + 1)])
        return (S[:, 0, :] * ev).sum(1) * cols["M_km"][t] * G_TO_MT

    E[:, 0] = emissions(S, 2022)
    S2[:, 0] = S[:, 1, :].sum(1)
    for k, t in enumerate(range(2023, 2051)):
        O = np.zeros_like(S)
        O[:, :, 1:A_MAX] = eta[0:A_MAX - 1] * S[:, :, 0:A_MAX - 1]
        O[:, :, A_MAX] = eta[A_MAX - 1] * (S[:, :, A_MAX - 1] + S[:, :, A_MAX])
        N = cols["G_Mvkm"][t] * 1e6 / cols["M_km"][t] - O.sum((1, 2))
        if (N <= 0).any():
            raise RuntimeError("negative new-vehicle demand during reconstruction")
        p2 = {"bi": 1.0,
              "ip": ev_share(cols, t, cols["CP_ev_keur"][t]),
              "ic": ev_share(cols, t, 5.0),
              "i0": ev_share(cols, t, 0.0)}[mode]
        S = O
        S[:, 0, 0] = (1.0 - p2) * N
        S[:, 1, 0] = p2 * N
        E[:, k + 1] = emissions(S, t)
        S2[:, k + 1] = S[:, 1, :].sum(1)
        N2[:, k] = p2 * N
    return E, S2, N2


def reconstruct_initial_fleet(cols, eta, eps, ref_e, ref_s2, ref_n2, smooth=3e-9):
    """Solve for the thermal age profile; EV profile is fixed by EV_AGE_SHARES."""
    n = A_MAX + 1
    d = np.zeros(n)
    d[:len(EV_AGE_SHARES)] = np.array(EV_AGE_SHARES) * TOTAL_EV

    basis = np.zeros((n + 1, 2, n))
    for j in range(n):
        basis[j + 1, 0, j] = 1.0
    dstate = np.stack([np.stack([np.zeros(n), d])])

    rows_A, rows_b = [], []
    for mode in ("i0", "ic", "ip", "bi"):
        E, S2, N2 = simulate(cols, eta, eps, basis, mode)
        Ed, S2d, N2d = simulate(cols, eta, eps, dstate, mode)
        for series, dser, ref, scale in ((E, Ed, ref_e[mode], 1.0),
                                         (S2, S2d, ref_s2[mode], 1e-6)):
            y = np.array([ref[t] for t in range(2022, 2051)])
            A = (series[1:] - series[0]).T * scale
            b = dser[0] * scale
            w = 1.0 / y
            rows_A.append(A * w[:, None])
            rows_b.append((y - b) * w)
        if mode == "ic":
            y = np.array([ref_n2[t] for t in range(2023, 2051)])
            A = (N2[1:] - N2[0]).T * 1e-6
            b = N2d[0] * 1e-6
            w = 1.0 / y
            rows_A.append(A * w[:, None])
            rows_b.append((y - b) * w)

    rows_A.append(np.ones((1, n)) / TOTAL_ICEV * 1e4)
    rows_b.append(np.array([1e4]))

    D = np.zeros((n - 2, n))
    for i in range(n - 2):
        D[i, i], D[i, i + 1], D[i, i + 2] = 1.0, -2.0, 1.0
    rows_A.append(D * smooth)
    rows_b.append(np.zeros(n - 2))

    res = lsq_linear(np.vstack(rows_A), np.concatenate(rows_b),
                     bounds=(0, np.inf), method="bvls", tol=1e-14)
    return res.x, d


def validate(cols, eta, eps, c, d, ref_e, ref_s2, ref_n2):
    S0 = np.stack([np.stack([c, d])])
    worst = 0.0
    for mode in ("i0", "ic", "ip", "bi"):
        E, S2, N2 = simulate(cols, eta, eps, S0, mode)
        yE = np.array([ref_e[mode][t] for t in range(2022, 2051)])
        yS = np.array([ref_s2[mode][t] for t in range(2022, 2051)])
        eE = np.abs(E[0] / yE - 1).max()
        eS = np.abs(S2[0] * 1e-6 / yS - 1).max()
        print(f"  {mode}: emissions max rel err {eE:.2e}, EV stock max rel err {eS:.2e}")
        worst = max(worst, eE, eS)
        if mode == "ic":
            yN = np.array([ref_n2[t] for t in range(2023, 2051)])
            eN = np.abs(N2[0] * 1e-6 / yN - 1).max()
            print(f"  {mode}: EV sales max rel err {eN:.2e}")
            worst = max(worst, eN)
    return worst


def write_initial_fleet(c, d):
    with open(os.path.join(DATA, "initial_fleet.csv"), "w") as f:
        f.write("type,age,count\n")
        for a in range(A_MAX + 1):
            f.write(f"thermal,{a},{c[a]:.6f}\n")
        for a in range(A_MAX + 1):
            f.write(f"electric,{a},{d[a]:.6f}\n")


def build_historical_panel(cols, eps, c, d):
    """Backcast a 2011..2022 stock panel from the 2022 profiles with the
    survival-ratio law (exact, so the ratio fit recovers it), then derive the
    fleet-emission series from the target mileage path."""
    ratios = np.empty(A_MAX + 1)  # ratio into age a (index 1..30 used)
    ratios[1:6] = YOUNG_RATIOS
    for a in range(6, A_MAX + 1):
        ratios[a] = 1.05 - 0.01 * a

    years = list(range(2011, 2023))
    panel = {2022: np.stack([c, d])}
    for t in range(2022, 2011, -1):
        prev = np.zeros_like(panel[t])
        prev[:, 0:A_MAX] = panel[t][:, 1:A_MAX + 1] / ratios[1:A_MAX + 1]
        # the age-30 bin feeds nothing observable a year later; continue the tail
        prev[:, A_MAX] = prev[:, A_MAX - 1] * 0.85
        panel[t - 1] = prev

    with open(os.path.join(DATA, "historical", "stock_by_age.csv"), "w") as f:
        f.write("year,type,ownership,age,count\n")
        for t in years:
            for vi, vname in ((0, "thermal"), (1, "electric")):
                for a in range(A_MAX + 1):
                    cnt = panel[t][vi, a]
                    pro = cnt * professional_share(a)
                    f.write(f"{t},{vname},professional,{a},{pro:.6f}\n")
                    f.write(f"{t},{vname},private,{a},{cnt - pro:.6f}\n")

    with open(os.path.join(DATA, "historical", "fleet_emissions.csv"), "w") as f:
        f.write("year,e1_Mt\n")
        for t, m in zip(years, MILEAGE_KM):
            ev = np.array([eps.get(t - a, 176.0) for a in range(A_MAX + 1)])
            e1 = (panel[t][0] * ev).sum() * m * G_TO_MT
            f.write(f"{t},{e1:.9f}\n")


def main():
    cols, eta, eps = load_inputs()
    ref_e, ref_s2, ref_n2 = load_reference()
    print("reconstructing 2022 age profile from reference trajectories...")
    c, d = reconstruct_initial_fleet(cols, eta, eps, ref_e, ref_s2, ref_n2)
    print("reproduction of reference trajectories:")
    worst = validate(cols, eta, eps, c, d, ref_e, ref_s2, ref_n2)
    print(f"  worst: {worst:.2e}")
    if worst > 0.01:
        sys.exit("reconstruction failed: worst relative error above 1%")
    write_initial_fleet(c, d)
    build_historical_panel(cols, eps, c, d)
    print("wrote initial_fleet.csv and historical panel")


if __name__ == "__main__":
    main()
