"""Acceptance gate: every criterion at its stated tolerance.

Each test prints one PASS/FAIL line.  The Monte-Carlo criteria read their
shot budgets from STQEC_ACCEPT_SHOTS (default 10,000 per point) and use
STQEC_ACCEPT_WORKERS processes (default 2); they are marked ``acceptance``
and dominate the suite's runtime.
"""

import math
import os

import numpy as np
import pytest

from stqec import channels as C
from stqec import circuits as CC
from stqec import decoder as D
from stqec import experiment as E
from stqec import gates as G
from stqec import memory as M

ACCEPT_SHOTS = int(os.environ.get("STQEC_ACCEPT_SHOTS", "10000"))
ACCEPT_WORKERS = int(os.environ.get("STQEC_ACCEPT_WORKERS", "2"))


def report(name, ok, detail=""):
    print(f"\nACCEPTANCE {name}: {'PASS' if ok else 'FAIL'} {detail}")
    assert ok, f"{name}: {detail}"


# ---------------------------------------------------------------------- #
# Gadget algebra (Appendix-A behaviour).                                  #
# ---------------------------------------------------------------------- #

def test_gadget_algebra():
    gad = CC.build_leakage_gadget()
    ops = gad.compiled()
    rng = np.random.default_rng(2024)
    zero, one = C.basis_state(2, 0b01), C.basis_state(2, 0b10)
    ok = True
    for _ in range(50):
        amps = rng.normal(size=2) + 1j * rng.normal(size=2)
        amps /= np.linalg.norm(amps)
        psi = C.product_state([amps[0] * zero + amps[1] * one, C.SINGLET])
        out = C.run_ops(psi, ops, 4)
        proj = C.apply_unitary(out, np.outer(C.SINGLET, C.SINGLET.conj()),
                               (0, 1), 4)
        p_s = float(np.vdot(proj, proj).real)
        target = C.product_state([C.SINGLET, amps[1] * zero + amps[0] * one])
        fid = abs(np.vdot(target, proj / math.sqrt(max(p_s, 1e-300))))
        ok &= p_s >= 1 - 1e-10 and fid >= 1 - 1e-10

    for _ in range(50):
        amps = rng.normal(size=2) + 1j * rng.normal(size=2)
        amps /= np.linalg.norm(amps)
        psi = C.product_state([amps[0] * C.UP_UP + amps[1] * C.DOWN_DOWN,
                               C.SINGLET])
        out = C.run_ops(psi, ops, 4)
        p_even = 0.0
        # The up-up branch leaves the fresh pair in the state recorded as
        # |0> once the deterministic X frame update is applied.
        for comp, rec in ((C.UP_UP, (1,)), (C.DOWN_DOWN, (0,))):
            proj = C.apply_unitary(out, np.outer(comp, comp.conj()), (0, 1), 4)
            p = float(np.vdot(proj, proj).real)
            p_even += p
            if p > 1e-12:
                dist = C.pair_distribution(proj / math.sqrt(p), 4, [(2, 3)])
                ok &= abs(dist.get(rec, 0.0) - 1.0) < 1e-10
        amp_uu = abs(amps[0]) ** 2
        proj = C.apply_unitary(out, np.outer(C.UP_UP, C.UP_UP.conj()), (0, 1), 4)
        ok &= abs(float(np.vdot(proj, proj).real) - amp_uu) < 1e-10
        ok &= abs(p_even - 1.0) < 1e-10
    report("gadget-algebra", ok)


# ---------------------------------------------------------------------- #
# Fidelity formulas (Appendix-C calibrations).                            #
# ---------------------------------------------------------------------- #

def test_fidelity_formulas():
    rng = np.random.default_rng(7)
    worst = 0.0
    for family in G.FAMILIES:
        for fbar in (0.999, 0.994):
            sigma = G.calibrate_sigma(family, fbar)
            t0 = G.nominal_duration(family)
            target = G.ideal_gate(family)
            total = 0.0
            n = 120_000
            for t in rng.normal(t0, sigma, size=n):
                total += G.average_fidelity(G.calibrated_gate(family, t),
                                            target)
            rel = abs(total / n - fbar) / fbar
            worst = max(worst, rel)
    report("fidelity-formulas", worst < 1e-3, f"worst rel err {worst:.2e}")


# ---------------------------------------------------------------------- #
# CJ / twirl identities (Appendix D).                                     #
# ---------------------------------------------------------------------- #

def test_cj_twirl_identities():
    ok = True
    for theta in (0.1, 0.5, 1.0):
        rz = np.diag([np.exp(-1j * theta / 2), np.exp(1j * theta / 2)])
        tab = C.pauli_twirl([C.KrausBranch("S", [rz], 1.0)], np.eye(2))
        ok &= abs(tab.probability("I", "S") - math.cos(theta / 2) ** 2) < 1e-9
        ok &= abs(tab.probability("Z", "S") - math.sin(theta / 2) ** 2) < 1e-9

    from stqec import tables as T
    noise = G.NoiseConfig.from_common_infidelity(0.006)
    rng = np.random.default_rng(5)
    for build in (lambda: CC.build_css_stabiliser("X"),
                  CC.build_xzzx_stabiliser, CC.build_leakage_gadget,
                  lambda: CC.build_ld_stabiliser("Z")):
        circ = build()
        tab = T.compile_table(circ, T.draw_durations(circ, rng, noise.sigma_t))
        ok &= abs(float(tab.cum[-1]) - 1.0) < 1e-9
        clean = T.compile_table(
            circ, [G.nominal_duration(g.family) for g in circ.gates])
        ok &= len(clean.cum) == 1 and clean.legs[0] == 0 and clean.anc[0] == 0
    report("cj-twirl-identities", ok)


@pytest.mark.slow
def test_cj_18_spin_extraction():
    # Bell-doubled data register of the exchange-only check: 2^18 state.
    circ = CC.build_css_stabiliser("Z")
    n_data, n = 8, 18
    psi = np.zeros((2,) * n, dtype=complex)
    amp = 1.0 / math.sqrt(2 ** n_data) / math.sqrt(2)
    for bits in range(2 ** n_data):
        idx = tuple((bits >> (n_data - 1 - i)) & 1 for i in range(n_data))
        psi[idx + idx + (0, 1)] = amp
        psi[idx + idx + (1, 0)] = -amp
    psi = psi.reshape(-1)
    ops = [(u, tuple(s if s < 8 else s + 8 for s in spins))
           for u, spins in circ.compiled()]
    out = C.run_ops(psi, ops, n)
    total = 0.0
    for comp in (C.SINGLET, C.TRIPLET0, C.UP_UP, C.DOWN_DOWN):
        proj = C.apply_unitary(out, np.outer(comp, comp.conj()), (16, 17), n)
        total += float(np.vdot(proj, proj).real)
    report("cj-18-spin-extraction", abs(total - 1.0) < 1e-9)


# ---------------------------------------------------------------------- #
# Frame-rule oracle equivalence.                                          #
# ---------------------------------------------------------------------- #

@pytest.mark.acceptance
def test_frame_rule_oracle_equivalence():
    mismatches = 0
    total = 0
    for name, build in CC.LIBRARY.items():
        circ = build()
        for ics in CC.oracle_input_sets(circ):
            cases = [(ics, None, None, None)]
            for q in circ.data_in:
                for s in circ.pair(q):
                    for p in ("X", "Y", "Z"):
                        cases.append((ics, {s: p}, None, None))
                for tag in ("T+", "T-"):
                    cases.append((ics, None, None, {q: tag}))
            for gf in CC.fault_points(circ):
                cases.append((ics, None, gf, None))
            for ics2, infault, gf, leaks in cases:
                total += 1
                br = CC.simulate_frames(circ, ics2, input_fault=infault,
                                        gate_fault=gf, leaked_inputs=leaks)
                for proto in ("a", "b"):
                    fd = CC.frame_distribution(br, circ, proto)
                    sd = CC.statevector_distribution(
                        circ, ics2, input_fault=infault, gate_fault=gf,
                        leaked_inputs=leaks, protocol=proto)
                    if not CC.distributions_match(fd, sd, 1e-9):
                        mismatches += 1
                        break
    report("frame-rule-oracle", mismatches == 0,
           f"{mismatches}/{total} mismatches")


# ---------------------------------------------------------------------- #
# Hook errors and bias properties.                                        #
# ---------------------------------------------------------------------- #

def test_hook_and_bias_properties():
    ok = True
    detail = []
    for name in ("leakage_gadget", "css_x_stabiliser", "css_z_stabiliser",
                 "xzzx_stabiliser"):
        rep = CC.enumerate_hook_errors(CC.LIBRARY[name]())
        n_dr = sum(1 for e in rep for b in e["branches"]
                   if b["distance_reducing"])
        ok &= n_dr == 0
        detail.append(f"{name}:{n_dr}")
    rep = CC.enumerate_hook_errors(CC.build_xzzx_stabiliser())
    two_z = sum(1 for e in rep for b in e["branches"]
                if sum(1 for v in b["reduced"].values() if v == "Z") >= 2)
    ok &= two_z == 0
    rep = CC.enumerate_hook_errors(CC.build_leakage_gadget())
    unflagged = sum(1 for e in rep for b in e["branches"]
                    if b["reduced"].get(1, "I") in ("X", "Y")
                    and b["outcome"] != "T0")
    ok &= unflagged == 0
    report("hook-and-bias", ok,
           f"dr=({','.join(detail)}) two_z={two_z} unflagged_x={unflagged}")


# ---------------------------------------------------------------------- #
# Threshold reproduction at desk scale.                                   #
# ---------------------------------------------------------------------- #

GRIDS = {
    "css_ld": [0.0020, 0.0030, 0.0040, 0.0050],
    "css_st": [0.0035, 0.0045, 0.0055, 0.0065],
    "xzzx_st": [0.0090, 0.0110, 0.0130, 0.0150],
}
PAPER_THRESHOLDS = {"css_ld": 0.0045, "css_st": 0.0049, "xzzx_st": 0.013}


@pytest.fixture(scope="module")
def threshold_rows():
    rows = []
    for family, grid in GRIDS.items():
        shots = ACCEPT_SHOTS if family != "xzzx_st" else max(
            2000, ACCEPT_SHOTS // 2)
        cfg = E.CampaignConfig(families=[family], distances=[5, 7, 9],
                               p_values=grid, shots=shots, seed=2024,
                               workers=ACCEPT_WORKERS)
        rows.extend(E.run_campaign(cfg, progress=lambda r: print(
            f"  {r['family']} d={r['d']} p={r['p']:.4f}: "
            f"P_L={r['p_l']:.5f}", flush=True)))
    E.write_csv(rows, os.path.join(os.path.dirname(__file__), "..",
                                   "results", "acceptance_threshold.csv"))
    return rows


@pytest.mark.acceptance
def test_threshold_reproduction(threshold_rows):
    import json
    crossings = E.estimate_crossings(threshold_rows)
    path = os.path.join(os.path.dirname(__file__), "..", "results",
                        "acceptance_crossings.json")
    with open(path, "w") as fh:
        json.dump(crossings, fh, indent=2)
    ok = True
    details = []
    for family, target in PAPER_THRESHOLDS.items():
        est = crossings[family]["estimate"]
        details.append(f"{family}: {est if est is None else round(est, 5)}"
                       f" (paper {target})")
        ok &= est is not None and abs(est - target) <= 0.002
    est = {f: crossings[f]["estimate"] for f in PAPER_THRESHOLDS}
    ordering = (est["css_ld"] is not None and est["css_st"] is not None
                and est["xzzx_st"] is not None
                and est["css_ld"] < est["css_st"] < est["xzzx_st"])
    report("threshold-reproduction", ok and ordering,
           "; ".join(details) + f"; ordering={'ok' if ordering else 'BAD'}")


# ---------------------------------------------------------------------- #
# Shuttling comparison (matched effective distance).                      #
# ---------------------------------------------------------------------- #

@pytest.mark.acceptance
def test_shuttling_comparison():
    shots_ld = ACCEPT_SHOTS * 2
    shots_st = ACCEPT_SHOTS * 4
    cfg_ld = E.CampaignConfig(families=["css_ld"], distances=[5, 7],
                              p_values=[0.001], shots=shots_ld, seed=41,
                              workers=ACCEPT_WORKERS, p_sh_ld=0.005,
                              p_sh_st=0.001)
    rows_ld = E.run_campaign(cfg_ld)
    cfg_st = E.CampaignConfig(families=["xzzx_st"], distances=[7, 9],
                              p_values=[0.001], shots=shots_st, seed=41,
                              workers=ACCEPT_WORKERS, p_sh_ld=0.005,
                              p_sh_st=0.001)
    rows_st = E.run_campaign(cfg_st)
    E.write_csv(rows_ld + rows_st,
                os.path.join(os.path.dirname(__file__), "..", "results",
                             "acceptance_shuttling.csv"))
    # Matched pairs at d_eff ~= 5 and ~= 6.4.
    ld5 = next(r for r in rows_ld if r["d"] == 5)
    ld7 = next(r for r in rows_ld if r["d"] == 7)
    st7 = next(r for r in rows_st if r["d"] == 7)
    st9 = next(r for r in rows_st if r["d"] == 9)
    floor_st7 = max(st7["p_l"], 1.0 / shots_st)
    floor_st9 = max(st9["p_l"], 1.0 / shots_st)
    r1 = ld5["p_l"] / floor_st7
    r2 = ld7["p_l"] / floor_st9
    ok = r1 >= 10.0 and r2 >= 10.0
    report("shuttling-comparison", ok,
           f"LD(d5)/ST(d7)={r1:.1f}x, LD(d7)/ST(d9)={r2:.1f}x "
           f"(P_L: {ld5['p_l']:.5f}/{st7['p_l']:.6f}, "
           f"{ld7['p_l']:.5f}/{st9['p_l']:.6f})")


# ---------------------------------------------------------------------- #
# Decoder optimality.                                                     #
# ---------------------------------------------------------------------- #

@pytest.mark.acceptance
def test_decoder_optimality():
    from scipy.sparse.csgraph import dijkstra
    from stqec.lattice import build_layout
    rng = np.random.default_rng(99)
    worst = 0.0
    for family, check, p in (("css_st", "X", None), ("css_st", "Z", None),
                             ("css_ld", "X", None), ("xzzx_st", "XZZX", 0.01)):
        layout = build_layout(family, 5)
        skel = D.build_graph(layout, check, p=p)
        graph = D.MatchingGraph(skel)
        for _ in range(1000):
            m = int(rng.integers(2, 9))
            defects = sorted(rng.choice(skel.n_det, size=m,
                                        replace=False).tolist())
            dist, _ = dijkstra(graph._adj, indices=defects,
                               return_predecessors=True)
            dd = dist[:, defects]
            db = dist[:, skel.n_det]
            pairs_b = D._min_weight_pairing(dd, db)
            # Force the blossom path as well and compare both to brute force.
            w = np.zeros((2 * m, 2 * m))
            w[:m, :m] = dd
            w[:m, m:] = db[:, None]
            w[m:, :m] = db[None, :]
            big = float(w.max()) + 1.0
            w = big - w
            w[m:, m:] = big
            np.fill_diagonal(w, 0.0)
            mate = D.max_weight_perfect_matching_dense(w)
            blossom_weight = 0.0
            for i in range(m):
                j = int(mate[i])
                if j >= m:
                    blossom_weight += db[i]
                elif i < j:
                    blossom_weight += dd[i, j]
            best = sum(db[i] if j == -1 else dd[i, j]
                       for i, j in D._exhaustive_pairing(dd, db))
            got = sum(db[i] if j == -1 else dd[i, j] for i, j in pairs_b)
            worst = max(worst, abs(got - best), abs(blossom_weight - best))
    report("decoder-optimality", worst < 1e-9, f"worst gap {worst:.2e}")


# ---------------------------------------------------------------------- #
# Determinism.                                                            #
# ---------------------------------------------------------------------- #

@pytest.mark.acceptance
def test_csv_determinism_across_workers():
    texts = []
    for workers in (1, 2, 3):
        cfg = E.CampaignConfig(families=["css_st"], distances=[3],
                               p_values=[0.005], shots=600, seed=31,
                               workers=workers)
        texts.append(E.rows_to_csv_text(E.run_campaign(cfg)))
    ok = texts[0] == texts[1] == texts[2]
    report("csv-determinism", ok)
