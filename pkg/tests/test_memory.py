import numpy as np
import pytest

from stqec import experiment as E
from stqec import gates as G
from stqec import memory as M
from stqec import tables as T


@pytest.fixture(scope="module")
def quiet_exp():
    noise = G.NoiseConfig.from_common_infidelity(0.0)
    return {fam: M.compile_experiment(fam, 3, noise, 0.004, seed=11)
            for fam in ("css_ld", "css_st", "xzzx_st")}


@pytest.fixture(scope="module")
def noisy_exp():
    noise = G.NoiseConfig.from_common_infidelity(0.006)
    return M.compile_experiment("css_st", 3, noise, 0.006, seed=11)


def test_zero_noise_runs_clean(quiet_exp):
    for fam, exp in quiet_exp.items():
        for shot in range(25):
            rec = M.simulate_rounds(exp, M.shot_seed(1, 0, shot))
            assert rec.anc3.max() == 0, fam
            assert rec.final_b.max() == 0
            res = M.decode_shot(exp, rec)
            assert not res.fail_x and not res.fail_z


def test_kernels_bit_identical(noisy_exp):
    from stqec.kernel import KERNEL_BACKEND
    if KERNEL_BACKEND != "cython":
        pytest.skip("compiled kernel not built")
    for shot in range(60):
        seed = M.shot_seed(42, 1, shot)
        a = M.simulate_rounds_py(noisy_exp, seed)
        b = M.simulate_rounds(noisy_exp, seed)
        assert np.array_equal(a.anc3, b.anc3)
        assert np.array_equal(a.gad3, b.gad3)
        assert np.array_equal(a.final_b, b.final_b)
        assert np.array_equal(a.final_leaked, b.final_leaked)
        assert np.array_equal(a.fx, b.fx) and np.array_equal(a.fz, b.fz)
        assert a.rng_state == b.rng_state


def test_single_data_error_fires_detector_pairs(quiet_exp):
    # A single frame error injected between rounds produces an even number
    # of detection events in the bulk (or one against the boundary, closed
    # by the perfect final round).
    exp = quiet_exp["css_st"]
    d, ns = exp.d, exp.n_stabs
    for q in range(exp.n_data):
        for bit in ("x", "z"):
            rec = M.simulate_rounds(exp, M.shot_seed(2, 0, 0))
            if bit == "x":
                rec.fx[q] ^= 1
            else:
                rec.fz[q] ^= 1
            # Error exists only in the final frames: rebuild the final
            # syndrome it implies.
            for s in exp.layout.stabilisers:
                if q in s.qubits:
                    leg = s.leg(q)
                    flips = (leg == "Z" and bit == "x") or \
                            (leg == "X" and bit == "z")
                    if flips:
                        rec.final_b[s.index] ^= 1
            res = M.decode_shot(exp, rec)
            # A single error on the last layer is always correctable.
            assert not res.fail_x and not res.fail_z, (q, bit)


def test_leaked_qubit_flagged_by_gadget():
    # Force a leak via a doctored gadget table and check detection.
    noise = G.NoiseConfig.from_common_infidelity(0.0)
    exp = M.compile_experiment("css_st", 3, noise, 0.004, seed=11)
    leak_code = 0x1        # X on the first spin of the pair
    exp.gad_cum = [np.array([1.0])] * exp.n_data
    exp.gad_legs = [np.array([0], dtype=np.uint32)] * exp.n_data
    exp.gad_anc = [np.array([0], dtype=np.int8)] * exp.n_data
    exp.gad_legs[4] = np.array([leak_code], dtype=np.uint32)
    if hasattr(exp, "_kernel_pack"):
        del exp._kernel_pack
    rec = M.simulate_rounds(exp, M.shot_seed(3, 0, 0))
    # The doctored table leaks qubit 4 every round; the leak created in
    # round r is detected by the round r+1 gadget.
    assert rec.gad3[1, 4] == 2
    assert rec.gad3[2, 4] == 2


def test_sampling_frequencies_match_probabilities(noisy_exp):
    # Spot-check the kernel's table sampling against the table weights.
    exp = noisy_exp
    s = 0
    cum = exp.stab_cum[s]
    probs = np.diff(np.concatenate([[0.0], cum]))
    counts = np.zeros(len(cum))
    sm = M.SplitMix(12345)
    n = 100_000
    for _ in range(n):
        u = sm.uniform()
        k = int(np.searchsorted(cum, u, side="right"))
        counts[min(k, len(cum) - 1)] += 1
    for k in np.argsort(probs)[-5:]:
        p = probs[k]
        sigma = np.sqrt(n * p * (1 - p))
        assert abs(counts[k] - n * p) < 4 * sigma + 1


def test_residual_stabiliser_product_is_no_failure(quiet_exp):
    # A residual equal to a stabiliser acts trivially on the logicals.
    exp = quiet_exp["css_st"]
    rec = M.simulate_rounds(exp, M.shot_seed(4, 0, 0))
    s = exp.layout.stabilisers[0]
    for q in s.qubits:
        if s.stype == "X":
            rec.fx[q] ^= 1
        else:
            rec.fz[q] ^= 1
    # Stabiliser products leave every check parity invariant, so the
    # perfect final round stays trivial and decoding changes nothing.
    res = M.decode_shot(exp, rec)
    assert not res.fail_x and not res.fail_z


def test_logical_failure_on_full_string(quiet_exp):
    exp = quiet_exp["css_st"]
    rec = M.simulate_rounds(exp, M.shot_seed(5, 0, 0))
    for q, letter in exp.logical_z.items():
        rec.fz[q] ^= 1
    res = M.decode_shot(exp, rec)
    assert res.fail_z and not res.fail_x


def test_shot_seed_worker_independence():
    cfg = E.CampaignConfig(families=["css_ld"], distances=[3],
                           p_values=[0.004], shots=300, seed=9, workers=1)
    rows1 = E.run_campaign(cfg)
    cfg2 = E.CampaignConfig(families=["css_ld"], distances=[3],
                            p_values=[0.004], shots=300, seed=9, workers=2)
    rows2 = E.run_campaign(cfg2)
    for a, b in zip(rows1, rows2):
        assert a["failures_x"] == b["failures_x"]
        assert a["failures_z"] == b["failures_z"]
        assert a["failures"] == b["failures"]


def test_csv_round_trip(tmp_path):
    cfg = E.CampaignConfig(families=["css_ld"], distances=[3],
                           p_values=[0.004], shots=120, seed=9)
    rows = E.run_campaign(cfg)
    path = tmp_path / "rows.csv"
    E.write_csv(rows, path)
    back = E.read_csv(str(path))
    assert back[0]["failures"] == rows[0]["failures"]
    assert back[0]["p_l"] == pytest.approx(rows[0]["p_l"])


def test_crossing_estimator_planted():
    rows = []
    # Two synthetic distances crossing exactly at p = 0.005.
    for d, slope in ((5, 1.0), (7, 2.0)):
        for p in (0.003, 0.004, 0.005, 0.006, 0.007):
            pl = 0.05 * (p / 0.005) ** slope
            rows.append({"family": "fake", "d": d, "p": p, "p_l": pl})
    est = E.estimate_crossings(rows)["fake"]
    assert est["estimate"] == pytest.approx(0.005, abs=1e-4)


def test_campaign_config_validation():
    with pytest.raises(ValueError):
        E.CampaignConfig(families=["css_ld"], distances=[4],
                         p_values=[0.01])
    with pytest.raises(ValueError):
        E.CampaignConfig(families=["css_ld"], distances=[3],
                         p_values=[0.01], shots=0)


def test_parity_flip_prob():
    assert M.parity_flip_prob(0.0, 5) == 0.0
    assert M.parity_flip_prob(0.5, 3) == pytest.approx(0.5)
    p = 0.01
    single = M.parity_flip_prob(p, 1)
    assert single == pytest.approx(p)
    assert M.parity_flip_prob(p, 2) == pytest.approx(2 * p * (1 - p))


def test_sparse_gadget_mode_runs():
    noise = G.NoiseConfig.from_common_infidelity(0.01)
    exp = M.compile_experiment("css_st", 3, noise, 0.01, seed=13,
                               sparse_gadgets=True)
    ran = 0
    for shot in range(40):
        rec = M.simulate_rounds(exp, M.shot_seed(6, 0, shot))
        ran += int((rec.gad3 != 3).sum())
        M.decode_shot(exp, rec)
    # Sparse mode runs gadgets only next to leaked ancilla readouts.
    full = 40 * exp.d * exp.n_data
    assert 0 < ran < full


def test_table_channel_round_trip(noisy_exp):
    tab = T.ShotTable(cum=noisy_exp.stab_cum[0], legs=noisy_exp.stab_legs[0],
                      anc=noisy_exp.stab_anc[0], header={})
    circ_spins = 10
    chan = T.table_to_channel(tab, circ_spins)
    chan.check_normalised(1e-9)


def test_shot_record_replay_round_trip(tmp_path, noisy_exp):
    rec = M.simulate_rounds(noisy_exp, M.shot_seed(8, 0, 3))
    path = tmp_path / "shot.npz"
    with open(path, "wb") as fh:
        rec.save(fh)
    with open(path, "rb") as fh:
        back = M.ShotRecord.load(fh)
    assert np.array_equal(back.anc3, rec.anc3)
    assert back.rng_state == rec.rng_state
    a = M.decode_shot(noisy_exp, rec)
    b = M.decode_shot(noisy_exp, back)
    assert (a.fail_x, a.fail_z) == (b.fail_x, b.fail_z)


def test_disjoint_shot_ranges_agree():
    # Under one frozen experiment, disjoint per-shot seed ranges give
    # estimates within three binomial standard errors of each other.
    noise = G.NoiseConfig.from_common_infidelity(0.006)
    exp = M.compile_experiment("css_ld", 3, noise, 0.006, seed=100)
    n = 1500
    rates = []
    for lo in (0, n):
        fails = 0
        for shot in range(lo, lo + n):
            res = M.run_shot(exp, 100, 0, shot)
            fails += res.fail_x or res.fail_z
        rates.append(fails / n)
    sigma = np.sqrt(sum(r * (1 - r) / n for r in rates))
    assert abs(rates[0] - rates[1]) < 3 * max(sigma, 1e-3)


def test_verify_negative_control(monkeypatch):
    # A broken conversion table must fail the verification suite.
    from click.testing import CliRunner
    from stqec import cli as cli_mod
    from stqec import paulis as P

    real = P.st_from_spins

    def broken(a, b):
        out = real(a, b)
        if (a, b) == ("Z", "I"):
            return P.STError("I")
        return out

    monkeypatch.setattr(P, "st_from_spins", broken)
    result = CliRunner().invoke(cli_mod.main, ["verify", "--fast"])
    assert result.exit_code != 0
    assert "FAIL  spin-pair conversion table" in result.output


def test_logical_failure_operation(quiet_exp):
    exp = quiet_exp["css_st"]
    nq = exp.n_data
    fx = np.zeros(nq, dtype=np.uint8)
    fz = np.zeros(nq, dtype=np.uint8)
    assert M.logical_failure(exp.layout, fx, fz) == (False, False)
    for q in exp.logical_z:
        fz[q] ^= 1
    assert M.logical_failure(exp.layout, fx, fz) == (False, True)
    # A stabiliser product leaves both logical parities untouched.
    fz[:] = 0
    s = next(s for s in exp.layout.stabilisers if s.stype == "Z")
    for q in s.qubits:
        fz[q] ^= 1
    assert M.logical_failure(exp.layout, fx, fz) == (False, False)
