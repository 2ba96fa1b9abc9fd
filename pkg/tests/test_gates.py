import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stqec import gates as G


def unitarity_defect(u):
    return np.abs(u @ u.conj().T - np.eye(u.shape[0])).max()


@pytest.mark.parametrize("family,variant", [
    ("1qld", ""), ("1qld", "h"), ("h", ""), ("cz", ""),
    ("cnot", ""), ("cnot", "anti"),
])
def test_calibrated_gate_hits_target_at_nominal_duration(family, variant):
    u = G.calibrated_gate(family, G.nominal_duration(family), variant)
    assert np.abs(u - G.ideal_gate(family, variant)).max() < 1e-12


@pytest.mark.parametrize("family", G.FAMILIES)
@given(dt=st.floats(-0.8, 0.8))
@settings(max_examples=30, deadline=None)
def test_calibrated_gate_unitary_for_any_duration(family, dt):
    u = G.calibrated_gate(family, G.nominal_duration(family) + dt)
    assert unitarity_defect(u) < 1e-12


def test_drive_1q_matches_lab_frame_structure():
    p = G.canonical_params("1qld")
    u = G.unitary_drive_1q(p)
    assert unitarity_defect(u) < 1e-12
    # delta_omega = 0, Omega_r T = pi: X up to global phase and lab phases.
    ph = np.exp(-1j * p.omega * p.duration / 2)
    expected = np.array([[0, -1j * ph], [-1j * ph.conjugate(), 0]])
    assert np.abs(u - expected).max() < 1e-12


def test_drive_1q_zero_duration_is_identity():
    p = G.canonical_params("1qld", duration=0.0)
    assert np.abs(G.unitary_drive_1q(p) - np.eye(2)).max() == 0


def test_drive_1q_degenerate_frequency_raises():
    p = G.GateParams(family="1qld", rabi=0.0, omega=5.0, omega_q=5.0,
                     duration=1.0)
    with pytest.raises(ValueError):
        G.unitary_drive_1q(p)


def test_drive_1q_overrotation_fidelity_closed_form():
    # Omega_r T = pi + 0.1 against a perfect X.
    p = G.canonical_params("1qld", duration=math.pi + 0.1)
    u = G.calibrated_gate("1qld", p.duration)
    f = G.average_fidelity(u, G.ideal_gate("1qld"))
    assert abs(f - (2 + 4 * math.cos(0.05) ** 2) / 6) < 1e-12


def test_exchange_lab_frame_structure():
    for fam in ("h", "cz"):
        p = G.canonical_params(fam)
        u = G.unitary_exchange(p)
        assert unitarity_defect(u) < 1e-12
        # Outer diagonal Zeeman phases.
        assert abs(u[0, 0] - np.exp(-1j * p.ez * p.duration)) < 1e-12
        assert abs(u[3, 3] - np.exp(1j * p.ez * p.duration)) < 1e-12
        # Spin conservation: parity sectors never mix.
        mask = np.zeros((4, 4), dtype=bool)
        mask[0, 1:3] = mask[3, 1:3] = True
        mask[1:3, 0] = mask[1:3, 3] = True
        mask[0, 3] = mask[3, 0] = True
        assert np.abs(u[mask]).max() < 1e-14


@given(dt=st.floats(-0.5, 0.5))
@settings(max_examples=40, deadline=None)
def test_exchange_nonzero_pattern_for_any_duration(dt):
    p = G.canonical_params("cz", duration=G.nominal_duration("cz") + dt)
    u = G.unitary_exchange(p)
    zero = [(0, 1), (0, 2), (0, 3), (1, 0), (2, 0), (3, 0),
            (1, 3), (2, 3), (3, 1), (3, 2)]
    for i, j in zero:
        assert abs(u[i, j]) < 1e-14


def test_exchange_zero_duration_is_identity():
    p = G.canonical_params("h", duration=0.0)
    assert np.abs(G.unitary_exchange(p) - np.eye(4)).max() == 0


@pytest.mark.parametrize("family", ["h", "cz"])
def test_virtual_phase_correction_reaches_ideal(family):
    p = G.canonical_params(family)
    corrected = G.exchange_virtual_z(p) @ G.unitary_exchange(p)
    assert np.abs(corrected - G.ideal_gate(family)).max() < 1e-12


def test_cnot_block_structure_and_truth_table():
    p = G.canonical_params("cnot")
    u = G.unitary_cnot(p)
    assert np.abs(u - G.ideal_gate("cnot")).max() < 1e-12
    # Anti-controlled variant flips on a spin-up control.
    ua = G.unitary_cnot(p, anti=True)
    assert np.abs(ua - G.ideal_gate("cnot", "anti")).max() < 1e-12
    # Off calibration: block diagonal with zero cross blocks.
    p2 = G.canonical_params("cnot", duration=math.pi + 0.3)
    u2 = G.unitary_cnot(p2)
    assert np.abs(u2[:2, 2:]).max() == 0 and np.abs(u2[2:, :2]).max() == 0
    assert unitarity_defect(u2) < 1e-12


def test_cnot_zero_rotation_is_identity_block():
    p = G.canonical_params("cnot", duration=0.0)
    u = G.unitary_cnot(p)
    # theta2 = 0: both blocks are the identity up to the fixed per-block
    # calibration phases (virtual Z on the control spin).
    for block in (u[:2, :2], u[2:, 2:]):
        assert np.abs(block - block[0, 0] * np.eye(2)).max() < 1e-12
        assert abs(abs(block[0, 0]) - 1) < 1e-12


def test_cnot_sync_violation_raises():
    p = G.GateParams(family="cnot", rabi=1.0, duration=1.0,
                     theta2=1.0, theta1=1.5)
    with pytest.raises(ValueError):
        G.unitary_cnot(p)


def test_cnot_overrotation_fidelity_closed_form():
    dth = 0.2
    u = G.calibrated_gate("cnot", math.pi + dth)
    f = G.average_fidelity(u, G.ideal_gate("cnot"))
    expected = (4 + abs(2 * math.cos(dth) + 2 * math.cos(dth / 2)) ** 2) / 20
    assert abs(f - expected) < 1e-12


def test_average_fidelity_basics():
    x = G.PAULI_X
    assert G.average_fidelity(x, x) == 1.0
    # Traceless residual: U = Z X against X.
    f = G.average_fidelity(G.PAULI_Z @ x, x)
    assert abs(f - 1 / 3) < 1e-12
    with pytest.raises(ValueError):
        G.average_fidelity(np.eye(2), np.eye(4))


def test_average_fidelity_global_phase_invariance():
    rng = np.random.default_rng(3)
    m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    q, _ = np.linalg.qr(m)
    t = G.ideal_gate("cz")
    f0 = G.average_fidelity(q, t)
    assert abs(G.average_fidelity(np.exp(1j * 0.7) * q, t) - f0) < 1e-12
    assert abs(G.average_fidelity(q, np.exp(-1j * 1.2) * t) - f0) < 1e-12


def test_cz_small_angle_expansion():
    dth = 0.1
    u = G.calibrated_gate("cz", G.nominal_duration("cz")
                          + dth / G.family_frequency("cz"))
    f = G.average_fidelity(u, G.ideal_gate("cz"))
    assert abs(f - (1 - dth ** 2 / 10)) < 1e-5


@pytest.mark.parametrize("family", G.FAMILIES)
@pytest.mark.parametrize("fbar", [0.999, 0.994])
def test_calibration_round_trip(family, fbar):
    sigma = G.calibrate_sigma(family, fbar)
    numeric = G.numeric_fbar(family, sigma)
    assert abs(numeric - fbar) / fbar < 1e-3


def test_calibrate_sigma_monte_carlo_oracle():
    # Independent check: raw Monte-Carlo integration of the exact fidelity.
    rng = np.random.default_rng(11)
    fbar = 0.999
    sigma = G.calibrate_sigma("h", fbar)
    t0 = G.nominal_duration("h")
    target = G.ideal_gate("h")
    samples = rng.normal(t0, sigma, size=120_000)
    total = 0.0
    om = G.family_frequency("h")
    for t in samples:
        dth = om * (t - t0)
        total += (4 + abs(2 + 2 * math.cos(dth / 2)) ** 2) / 20
    assert abs(total / len(samples) - fbar) < 5e-5


def test_calibrate_sigma_edge_cases():
    assert G.calibrate_sigma("cnot", 1.0) == 0.0
    assert abs(G.calibrate_sigma("cnot", 0.999) - math.sqrt(0.002)) < 1e-15
    with pytest.raises(G.CalibrationError):
        G.calibrate_sigma("h", 0.8)


def test_sample_locations_reproducible_and_frozen():
    noise = G.NoiseConfig.from_common_infidelity(0.004)
    fams = ["h", "cz", "cnot", "1qld"] * 5
    loc1 = G.sample_locations(np.random.default_rng(5), fams, noise)
    loc2 = G.sample_locations(np.random.default_rng(5), fams, noise)
    assert all(a.params.duration == b.params.duration
               for a, b in zip(loc1, loc2))
    with pytest.raises(Exception):
        loc1[0].params.duration = 1.0     # frozen dataclass


def test_sample_locations_zero_sigma():
    noise = G.NoiseConfig.from_common_infidelity(0.0)
    locs = G.sample_locations(np.random.default_rng(0), ["cz"] * 4, noise)
    assert all(l.params.duration == G.nominal_duration("cz") for l in locs)


def test_sampled_infidelity_matches_analytic_mean():
    # Law of large numbers over many frozen locations.
    noise = G.NoiseConfig.from_common_infidelity(0.006)
    locs = G.sample_locations(np.random.default_rng(17), ["cz"] * 20_000, noise)
    target = G.ideal_gate("cz")
    infid = [1 - G.average_fidelity(
        G.calibrated_gate("cz", l.params.duration), target) for l in locs]
    assert abs(np.mean(infid) - 0.006) / 0.006 < 0.05


def test_noise_config_validation():
    with pytest.raises(ValueError):
        G.NoiseConfig(p_meas_ld=1.5)
    with pytest.raises(ValueError):
        G.NoiseConfig(sigma_t={"h": -0.1})


def test_calibration_report_round_trip(tmp_path):
    path = tmp_path / "calib.json"
    G.dump_calibration({"h": 0.999, "cnot": 0.994}, path)
    import json
    rows = json.loads(path.read_text())
    assert {r["family"] for r in rows} == {"h", "cnot"}
    for r in rows:
        assert abs(r["fbar_numeric"] - r["fbar_analytic"]) < 1e-3
