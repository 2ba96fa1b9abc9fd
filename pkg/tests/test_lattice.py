import numpy as np
import pytest

from stqec import lattice as L


@pytest.mark.parametrize("family", ["css_ld", "css_st", "xzzx_st"])
@pytest.mark.parametrize("d", [3, 5, 7])
def test_layout_structure(family, d):
    lay = L.build_layout(family, d)
    assert len(lay.stabilisers) == d * d - 1
    if family != "xzzx_st":
        n_x = sum(1 for s in lay.stabilisers if s.stype == "X")
        assert n_x == (d * d - 1) // 2
    stab, lx, lz = L.check_matrices(lay)
    n = len(lay.stabilisers)
    for i in range(n):
        for j in range(i + 1, n):
            assert L.symplectic_commutes(stab[i], stab[j])
        assert L.symplectic_commutes(stab[i], lx)
        assert L.symplectic_commutes(stab[i], lz)
    assert not L.symplectic_commutes(lx, lz)


@pytest.mark.parametrize("family", ["css_st", "xzzx_st"])
def test_schedule_slots_conflict_free(family):
    lay = L.build_layout(family, 5)
    used = set()
    for s in lay.stabilisers:
        for q, slot, _ in s.support:
            assert (q, slot) not in used
            used.add((q, slot))


def test_every_single_error_detectable():
    for family in ("css_ld", "css_st", "xzzx_st"):
        lay = L.build_layout(family, 5)
        for q in range(lay.n_data):
            for e in ("X", "Z"):
                ends = L.edge_endpoints(lay, q, e)
                assert 1 <= len(ends) <= 2


def test_xzzx_leg_geometry():
    # X errors must connect the SW and NE neighbours (their legs are Z).
    lay = L.build_layout("xzzx_st", 5)
    q = lay.qubit_index(2, 2)
    ends = L.edge_endpoints(lay, q, "X")
    anchors = sorted(lay.stabilisers[s].anchor for s in ends)
    assert anchors == [(1, 2), (2, 1)]      # NE and SW plaquettes
    ends = L.edge_endpoints(lay, q, "Z")
    anchors = sorted(lay.stabilisers[s].anchor for s in ends)
    assert anchors == [(1, 1), (2, 2)]      # NW and SE plaquettes


def test_d_eff_convention():
    assert L.build_layout("css_ld", 5).d_eff == 5
    assert L.build_layout("css_st", 5).d_eff == pytest.approx(5 / np.sqrt(2))


def test_invalid_distance_rejected():
    with pytest.raises(ValueError):
        L.build_layout("css_st", 4)
    with pytest.raises(ValueError):
        L.build_layout("heavy_hex", 3)
