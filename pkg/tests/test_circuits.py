import json
import math

import pytest
from hypothesis import given, strategies as st

from circuitann.circuits import (
    CLASS_IDS,
    BranchElement,
    CircuitInstance,
    MechanicalParams,
    ann_architecture,
    circuit_class,
    circuit_from_features,
    circuit_from_json,
    circuit_to_json,
    electrical_to_mechanical,
    feature_names,
    features_of,
    grid_topology,
    impedance,
    mechanical_to_electrical,
    reactance_from_components,
)
from circuitann.data import default_sampler, generate_dataset

from oracles import grid_edges


@pytest.mark.parametrize(
    "branch, expected",
    [
        (BranchElement(3, 4, 0), 3 + 4j),
        (BranchElement(5, 0, 0), 5 + 0j),
        (BranchElement(0.1, 2, 7), 0.1 - 5j),
    ],
)
def test_impedance(branch, expected):
    assert impedance(branch) == pytest.approx(expected)


@pytest.mark.parametrize(
    "l, c, omega, expected",
    [(1, 1, 1, (1, 1)), (0, 0.5, 2, (0, 1)), (0.25, 0.01, 100, (25, 1))],
)
def test_reactance_from_components(l, c, omega, expected):
    assert reactance_from_components(l, c, omega) == pytest.approx(expected)


@pytest.mark.parametrize("c, omega", [(0, 1), (-1, 1), (1, 0)])
def test_reactance_rejects_degenerate(c, omega):
    with pytest.raises(ValueError):
        reactance_from_components(1, c, omega)


@pytest.mark.parametrize(
    "params, expected",
    [
        (MechanicalParams(2, 3, 4, 10, 1), (2, 3, 0.25, 10, 1)),
        (MechanicalParams(1, 1, 1, 1, 1), (1, 1, 1, 1, 1)),
        (MechanicalParams(0.5, 0, 2, 5, 3), (0.5, 0, 0.5, 5, 3)),
    ],
)
def test_mechanical_to_electrical(params, expected):
    assert mechanical_to_electrical(params) == pytest.approx(expected)


def test_mechanical_params_reject_nonpositive_stiffness():
    with pytest.raises(ValueError):
        MechanicalParams(1, 1, 0, 1, 1)


pos = st.floats(1e-3, 1e3)


@given(m=pos, b=st.floats(0, 1e3), k=pos, f0=pos, omega=pos)
def test_mechanical_round_trip(m, b, k, f0, omega):
    p = MechanicalParams(m, b, k, f0, omega)
    back = electrical_to_mechanical(*mechanical_to_electrical(p))
    for a, c in zip((back.m, back.b, back.k, back.f0, back.omega), (m, b, k, f0, omega)):
        assert a == pytest.approx(c, rel=1e-12, abs=0)


small = st.floats(0, 100)


@given(st.tuples(small, small, small), st.tuples(small, small, small))
def test_impedance_is_additive(a, b):
    za = impedance(BranchElement(*a))
    zb = impedance(BranchElement(*b))
    zs = impedance(BranchElement(*(x + y for x, y in zip(a, b))))
    assert abs(za + zb - zs) <= 1e-12 * (1 + abs(zs))


@pytest.mark.parametrize(
    "cls, n_in, hidden, n_out",
    [
        ("1a", 2, (3,), 1),
        ("1b", 14, (8, 8), 1),
        ("1c", 24, (16, 16), 1),
        ("2a", 4, (3, 3), 2),
        ("2b", 22, (15, 15), 2),
        ("2c", 48, (25, 25), 2),
        ("amp_electrical", 3, (3, 3), 1),
        ("amp_electronic", 3, (3, 3), 1),
    ],
)
def test_architecture_table(cls, n_in, hidden, n_out):
    arch = ann_architecture(cls)
    assert (arch.input_count, arch.hidden_layers, arch.output_count) == (n_in, hidden, n_out)


@pytest.mark.parametrize("cls", CLASS_IDS)
def test_architecture_matches_generated_features(cls):
    ds = generate_dataset(default_sampler(cls, count=3))
    assert ds.features.shape[1] == ann_architecture(cls).input_count
    assert ds.targets.shape[1] == ann_architecture(cls).output_count


def test_feature_orders():
    assert feature_names("1a") == ["R", "V"]
    assert feature_names("2a") == ["XL", "XC", "R", "E"]
    assert feature_names("2b")[:3] == ["R1", "XC1", "XL1"]
    assert feature_names("2b")[-1] == "E"
    assert feature_names("2c")[-12:] == [f"E{i}" for i in range(1, 13)]
    assert feature_names("amp_electronic") == ["R1", "R6", "V"]


@pytest.mark.parametrize("cls, rows, cols", [("1b", 2, 3), ("1c", 3, 3)])
def test_grid_branch_count_by_enumeration(cls, rows, cols):
    topo = grid_topology(cls)
    assert len(grid_edges(rows, cols)) == topo.branch_count == circuit_class(cls).branch_count
    assert len(topo.meshes) == circuit_class(cls).mesh_count
    # planar grid: branches = meshes + nodes - 1
    assert topo.branch_count == len(topo.meshes) + rows * cols - 1


def test_single_mesh_topology():
    assert grid_topology("1a").meshes == (((0, 1),),)


@pytest.mark.parametrize("cls", CLASS_IDS)
def test_topology_incidence_consistent(cls):
    topo = grid_topology(cls)
    inc = topo.incidence()
    for b in range(topo.branch_count):
        col = [row[b] for row in inc]
        members = [o for o in col if o]
        assert 1 <= len(members) <= 2
        if len(members) == 2:
            assert sum(members) == 0


@pytest.mark.parametrize("cls", ["1b", "1c"])
def test_meshes_are_closed_loops(cls):
    topo = grid_topology(cls)
    for mesh in topo.meshes:
        net = {}
        for b, o in mesh:
            t, h = topo.nodes[b]
            if o < 0:
                t, h = h, t
            net[t] = net.get(t, 0) - 1
            net[h] = net.get(h, 0) + 1
        assert all(v == 0 for v in net.values())


def test_probe_branches():
    assert circuit_class("1b").probe_branch == 5
    assert circuit_class("2c").probe_branch == 5
    assert circuit_class("1a").probe_branch == 0


def test_category_one_rejects_reactance():
    with pytest.raises(ValueError):
        CircuitInstance(circuit_class("1a"), (BranchElement(1, 1, 0, 1),))


def test_2b_single_source():
    branches = [BranchElement(1, 1, 1, 0)] * 7
    two = [BranchElement(1, 1, 1, 5)] * 2 + branches[2:]
    with pytest.raises(ValueError):
        CircuitInstance(circuit_class("2b"), tuple(two))


def test_amplifier_middle_resistance_fixed():
    c = circuit_from_features("amp_electrical", [2, 3, 11])
    assert c.branches[1].r == 1.0
    with pytest.raises(ValueError):
        CircuitInstance(circuit_class("amp_electrical"), (BranchElement(2), BranchElement(2), BranchElement(3)))


def test_branch_rejects_nonfinite():
    with pytest.raises(ValueError):
        BranchElement(math.inf)
    with pytest.raises(ValueError):
        BranchElement(-1)


@pytest.mark.parametrize("cls", CLASS_IDS)
def test_features_round_trip(cls, rng):
    n = len(feature_names(cls))
    values = [float(v) for v in rng.uniform(0.5, 20, n)]
    assert features_of(circuit_from_features(cls, values)) == values


def test_json_round_trip():
    c = circuit_from_features("2a", [4, 1, 3, 10])
    text = circuit_to_json(c)
    doc = json.loads(text)
    assert doc["class"] == "2a"
    assert set(doc["branches"][0]) == {"r", "xl", "xc", "e", "source_phase"}
    assert circuit_from_json(text) == c


def test_json_malformed():
    with pytest.raises(ValueError):
        circuit_from_json('{"class": "1a", "branches": [{"r": 1}]}')
