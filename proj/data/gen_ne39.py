#!/usr/bin/env python3
"""Builds ne39.case.json from the public New England 39-bus benchmark tables.

Network, load and generation data follow the Athay et al. (1979) system as
distributed in MATPOWER's case39; machine inertia and transient reactances
follow Pai (1989). All quantities converted to per-unit on the 100 MVA base.
"""
import json

# bus, Pd (MW), Qd (MVAr)
LOADS = {
    1: (97.6, 44.2), 3: (322.0, 2.4), 4: (500.0, 184.0), 7: (233.8, 84.0),
    8: (522.0, 176.6), 9: (6.5, -66.6), 12: (8.5, 88.0), 15: (320.0, 153.0),
    16: (329.0, 32.3), 18: (158.0, 30.0), 20: (680.0, 103.0), 21: (274.0, 115.0),
    23: (247.5, 84.6), 24: (308.6, -92.2), 25: (224.0, 47.2), 26: (139.0, 17.0),
    27: (281.0, 75.5), 28: (206.0, 27.6), 29: (283.5, 26.9), 31: (9.2, 4.6),
    39: (1104.0, 250.0),
}

# bus, Pg (MW), Vg ; bus 31 is the slack
GENS_PF = {
    30: (250.0, 1.0499), 31: (None, 0.982), 32: (650.0, 0.9841), 33: (632.0, 0.9972),
    34: (508.0, 1.0123), 35: (650.0, 1.0494), 36: (560.0, 1.0636), 37: (540.0, 1.0275),
    38: (830.0, 1.0265), 39: (1000.0, 1.03),
}

# fbus, tbus, r, x, b, tap (0 = plain line)
BRANCHES = [
    (1, 2, 0.0035, 0.0411, 0.6987, 0), (1, 39, 0.0010, 0.0250, 0.7500, 0),
    (2, 3, 0.0013, 0.0151, 0.2572, 0), (2, 25, 0.0070, 0.0086, 0.1460, 0),
    (2, 30, 0.0000, 0.0181, 0.0000, 1.025), (3, 4, 0.0013, 0.0213, 0.2214, 0),
    (3, 18, 0.0011, 0.0133, 0.2138, 0), (4, 5, 0.0008, 0.0128, 0.1342, 0),
    (4, 14, 0.0008, 0.0129, 0.1382, 0), (5, 6, 0.0002, 0.0026, 0.0434, 0),
    (5, 8, 0.0008, 0.0112, 0.1476, 0), (6, 7, 0.0006, 0.0092, 0.1130, 0),
    (6, 11, 0.0007, 0.0082, 0.1389, 0), (6, 31, 0.0000, 0.0250, 0.0000, 1.070),
    (7, 8, 0.0004, 0.0046, 0.0780, 0), (8, 9, 0.0023, 0.0363, 0.3804, 0),
    (9, 39, 0.0010, 0.0250, 1.2000, 0), (10, 11, 0.0004, 0.0043, 0.0729, 0),
    (10, 13, 0.0004, 0.0043, 0.0729, 0), (10, 32, 0.0000, 0.0200, 0.0000, 1.070),
    (12, 11, 0.0016, 0.0435, 0.0000, 1.006), (12, 13, 0.0016, 0.0435, 0.0000, 1.006),
    (13, 14, 0.0009, 0.0101, 0.1723, 0), (14, 15, 0.0018, 0.0217, 0.3660, 0),
    (15, 16, 0.0009, 0.0094, 0.1710, 0), (16, 17, 0.0007, 0.0089, 0.1342, 0),
    (16, 19, 0.0016, 0.0195, 0.3040, 0), (16, 21, 0.0008, 0.0135, 0.2548, 0),
    (16, 24, 0.0003, 0.0059, 0.0680, 0), (17, 18, 0.0007, 0.0082, 0.1319, 0),
    (17, 27, 0.0013, 0.0173, 0.3216, 0), (19, 20, 0.0007, 0.0138, 0.0000, 1.060),
    (19, 33, 0.0007, 0.0142, 0.0000, 1.070), (20, 34, 0.0009, 0.0180, 0.0000, 1.009),
    (21, 22, 0.0008, 0.0140, 0.2565, 0), (22, 23, 0.0006, 0.0096, 0.1846, 0),
    (22, 35, 0.0000, 0.0143, 0.0000, 1.025), (23, 24, 0.0022, 0.0350, 0.3610, 0),
    (23, 36, 0.0005, 0.0272, 0.0000, 1.000), (25, 26, 0.0032, 0.0323, 0.5310, 0),
    (25, 37, 0.0006, 0.0232, 0.0000, 1.025), (26, 27, 0.0014, 0.0147, 0.2396, 0),
    (26, 28, 0.0043, 0.0474, 0.7802, 0), (26, 29, 0.0057, 0.0625, 1.0290, 0),
    (28, 29, 0.0014, 0.0151, 0.2490, 0), (29, 38, 0.0008, 0.0156, 0.0000, 1.025),
]

# generator id -> (bus, H [s], xd' [p.u.]); unit 1 aggregates the external grid
MACHINES = {
    1: (39, 500.0, 0.006), 2: (31, 30.3, 0.0697), 3: (32, 35.8, 0.0531),
    4: (33, 28.6, 0.0436), 5: (34, 26.0, 0.132), 6: (35, 34.8, 0.05),
    7: (36, 26.4, 0.049), 8: (37, 24.3, 0.057), 9: (38, 34.5, 0.057),
    10: (30, 42.0, 0.031),
}

total_load = sum(p for p, q in LOADS.values())
assert abs(total_load - 6254.2) < 1e-9, total_load
assert len(BRANCHES) == 46
assert sum(1 for b in BRANCHES if b[5] > 0) == 12

buses = []
for bus_id in range(1, 40):
    p, q = LOADS.get(bus_id, (0.0, 0.0))
    entry = {"id": bus_id}
    if bus_id == 31:
        entry["kind"] = "slack"
    elif bus_id in GENS_PF:
        entry["kind"] = "PV"
    else:
        entry["kind"] = "PQ"
    entry["p_load"] = round(p / 100.0, 10)
    entry["q_load"] = round(q / 100.0, 10)
    if bus_id in GENS_PF:
        pg, vg = GENS_PF[bus_id]
        if pg is not None:
            entry["p_gen"] = round(pg / 100.0, 10)
        entry["v_setpoint"] = vg
    entry["v_min"] = 0.8
    entry["v_max"] = 1.2
    buses.append(entry)

lines = []
for f, t, r, x, b, tap in BRANCHES:
    entry = {"id": f"{f:02d}{t:02d}", "from": f, "to": t, "r": r, "x": x, "b": b}
    if tap > 0:
        entry["tap"] = tap
    lines.append(entry)

gens = []
for gid in range(1, 11):
    bus, h, xdp = MACHINES[gid]
    gens.append({"id": gid, "bus": bus, "h": h, "d": 0.0, "xd_p": xdp})

case = {
    "schema": "gridrrt-case-1",
    "name": "New England 39-bus, 10-machine system",
    "provenance": "network/load/generation data per Athay et al. 1979 as distributed in "
                  "MATPOWER case39; machine H and xd' per Pai, Energy Function Analysis "
                  "for Power System Stability, 1989; classical-model realization",
    "base_mva": 100.0,
    "freq_hz": 60.0,
    "load_model": "constant_impedance",
    "infinite_bus": False,
    "buses": buses,
    "lines": lines,
    "generators": gens,
    "modes": [
        {"id": 0, "label": "line-0203-open", "open_lines": ["0203"]},
        {"id": 1, "label": "all-lines-closed", "open_lines": []},
    ],
    "edges": [[0, 1], [1, 0]],
    "control": {"target": 8, "inputs": [-0.5, -0.4, -0.3, -0.2, -0.1, 0.0, 0.1, 0.2, 0.3, 0.4, 0.5]},
}

with open("ne39.case.json", "w") as fh:
    json.dump(case, fh, indent=1)
    fh.write("\n")
print("wrote ne39.case.json:", len(buses), "buses,", len(lines), "branches,", len(gens), "generators")
