import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from circuitann.circuits import BranchElement, CircuitInstance, circuit_class, circuit_from_features
from circuitann.solver import (
    DegenerateCircuitError,
    gauss_solve,
    kvl_residual,
    phasor_response,
    probe_response,
    solve_amplifier_electrical,
    solve_amplifier_electronic,
    solve_by_superposition,
    solve_mesh,
    solve_ohm,
    solve_series_rlc,
)

from conftest import random_circuit
from oracles import circuit_nodal_currents, grid_branch_nodes


@pytest.mark.parametrize("v, r, i", [(10, 5, 2.0), (1, 1, 1.0), (0.1, 100, 0.001)])
def test_ohm(v, r, i):
    assert solve_ohm(v, r) == pytest.approx(i, rel=1e-15)


@pytest.mark.parametrize("r", [0, -1])
def test_ohm_rejects(r):
    with pytest.raises(ValueError):
        solve_ohm(1, r)


@pytest.mark.parametrize(
    "args, mag, phase",
    [((10, 3, 4, 0), 2.0, -53.130102354), ((10, 5, 0, 0), 2.0, 0.0), ((10, 2, 7, 7), 5.0, 0.0)],
)
def test_series_rlc(args, mag, phase):
    out = solve_series_rlc(*args)
    assert out.current_mag == pytest.approx(mag, abs=1e-6)
    assert out.phase_deg == pytest.approx(phase, abs=1e-6)


def test_series_rlc_capacitive_leads():
    assert solve_series_rlc(10, 3, 0, 4).phase_deg == pytest.approx(53.130102354)


def test_series_rlc_rejects_zero_impedance():
    with pytest.raises(DegenerateCircuitError):
        solve_series_rlc(1, 0, 3, 3)


def test_phasor_zero_current_has_zero_phase():
    assert phasor_response(0j).phase_deg == 0.0
    assert phasor_response(-1 + 0j).phase_deg == 180.0
    assert phasor_response(complex(-1, -0.0)).phase_deg == 180.0


def _three_branch(r1, r6, v):
    # same layout as the amplifier pair: source in loop 1, shared R3 = 1
    return circuit_from_features("amp_electrical", [r1, r6, v])


def test_two_mesh_closed_form():
    sol = solve_mesh(_three_branch(2, 3, 11))
    assert abs(sol.branch_currents[2]) == pytest.approx(1.0, abs=1e-9)
    assert probe_response(_three_branch(2, 3, 11)).current_mag == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("cls", ["1a", "2a"])
def test_single_mesh_reduction(cls, rng):
    for _ in range(200):
        c = random_circuit(cls, rng)
        b = c.branches[0]
        got = probe_response(c)
        ref = solve_series_rlc(b.e, b.r, b.xl, b.xc)
        assert got.current_mag == pytest.approx(ref.current_mag, rel=1e-12)
        assert got.phase_deg == pytest.approx(ref.phase_deg, abs=1e-12 * 180)


def test_probe_examples():
    r = probe_response(circuit_from_features("1a", [5, 10]))
    assert (r.current_mag, r.phase_deg) == (pytest.approx(2.0), pytest.approx(0.0))
    r = probe_response(circuit_from_features("2a", [4, 0, 3, 10]))
    assert r.current_mag == pytest.approx(2.0)
    assert r.phase_deg == pytest.approx(-53.130102354)


def _uniform_1b(e_branch=0):
    cls = circuit_class("1b")
    return CircuitInstance(
        cls, tuple(BranchElement(1.0, e=1.0 if i == e_branch else 0.0) for i in range(cls.branch_count))
    )


def test_1b_unit_grid_against_nodal_oracle():
    c = _uniform_1b()
    got = np.array(solve_mesh(c).branch_currents)
    ref = circuit_nodal_currents(c)
    assert np.max(np.abs(got - ref)) <= 1e-12
    assert probe_response(c).current_mag == pytest.approx(abs(ref[5]), abs=1e-12)


@pytest.mark.parametrize("cls", ["1b", "1c", "2b", "2c"])
def test_mesh_matches_nodal_oracle(cls, rng):
    for _ in range(50):
        c = random_circuit(cls, rng)
        got = np.array(solve_mesh(c).branch_currents)
        ref = circuit_nodal_currents(c)
        assert np.max(np.abs(got - ref)) <= 1e-9 * max(1.0, np.max(np.abs(ref)))


def _mirror_map(rows, cols):
    ends = grid_branch_nodes(rows, cols)
    refl = lambda n: (n // cols) * cols + (cols - 1 - n % cols)  # noqa: E731
    lookup = {frozenset(e): i for i, e in enumerate(ends)}
    return [lookup[frozenset(map(refl, e))] for e in ends]


@pytest.mark.parametrize("src", [7, 10])
def test_mirror_symmetry(src, rng):
    mirror = _mirror_map(3, 3)
    assert mirror[src] == src
    r = rng.uniform(1, 50, 12)
    r = (r + r[mirror]) / 2
    cls = circuit_class("1c")
    c = CircuitInstance(cls, tuple(BranchElement(float(r[i]), e=5.0 if i == src else 0.0) for i in range(12)))
    mag = np.abs(solve_mesh(c).branch_currents)
    assert np.max(np.abs(mag - mag[mirror])) <= 1e-9


@pytest.mark.parametrize("cls", ["1a", "1b", "1c", "2a", "2b", "2c"])
def test_kvl_residual(cls, rng):
    for _ in range(100):
        c = random_circuit(cls, rng)
        e_inf = max(b.e for b in c.branches)
        assert kvl_residual(c, solve_mesh(c)) <= 1e-9 * (1 + e_inf)


@pytest.mark.parametrize("cls", ["1b", "1c", "2b", "2c"])
def test_superposition(cls, rng):
    for _ in range(100):
        c = random_circuit(cls, rng)
        a = np.array(solve_mesh(c).branch_currents)
        b = np.array(solve_by_superposition(c).branch_currents)
        assert np.max(np.abs(a - b)) <= 1e-9 * max(1e-300, np.max(np.abs(a)))


def test_superposition_single_source_identical(rng):
    c = random_circuit("1c", rng, sources=3)
    assert solve_by_superposition(c).branch_currents == pytest.approx(solve_mesh(c).branch_currents, rel=1e-15)


def test_superposition_two_source_two_mesh():
    c = circuit_from_features("amp_electrical", [2, 3, 11]).with_sources([11.0, 0.0, 4.0])
    a = np.array(solve_mesh(c).branch_currents)
    b = np.array(solve_by_superposition(c).branch_currents)
    assert np.max(np.abs(a - b)) <= 1e-9 * np.max(np.abs(a))


def test_all_sources_zero(rng):
    c = random_circuit("2c", rng).with_sources([0.0] * 12)
    assert all(x == 0 for x in solve_by_superposition(c).branch_currents)
    assert all(x == 0 for x in solve_mesh(c).branch_currents)
    assert probe_response(c).phase_deg == 0.0


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), alpha=st.floats(0.01, 100))
def test_linearity(seed, alpha):
    rng = np.random.default_rng(seed)
    c = random_circuit("2c", rng)
    scaled = c.with_sources([alpha * b.e for b in c.branches])
    base, big = probe_response(c), probe_response(scaled)
    assert big.current_mag == pytest.approx(alpha * base.current_mag, rel=1e-9)
    d = (big.phase_deg - base.phase_deg + 180) % 360 - 180
    assert abs(d) <= 1e-9 * 180


@pytest.mark.parametrize("cls", ["1b", "1c"])
def test_reciprocity(cls, rng):
    n = circuit_class(cls).branch_count
    for _ in range(30):
        c = random_circuit(cls, rng, sources=0)
        a, b = (int(v) for v in rng.choice(n, 2, replace=False))
        e = [0.0] * n
        e[a] = 1.0
        i_b = solve_mesh(c.with_sources(e)).branch_currents[b]
        e[a], e[b] = 0.0, 1.0
        i_a = solve_mesh(c.with_sources(e)).branch_currents[a]
        assert abs(i_a - i_b) <= 1e-9 * max(1.0, abs(i_a))


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), cls=st.sampled_from(["1a", "2a", "1b", "1c", "2b", "2c"]))
def test_phase_range(seed, cls):
    p = probe_response(random_circuit(cls, np.random.default_rng(seed))).phase_deg
    assert -180 < p <= 180


def test_gauss_solve_matches_numpy(rng):
    for n in range(1, 8):
        a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        b = rng.normal(size=n) + 1j * rng.normal(size=n)
        assert np.allclose(gauss_solve(a, b), np.linalg.solve(a, b), rtol=1e-10, atol=1e-12)


def test_gauss_solve_pivots():
    # zero leading pivot requires a row swap
    assert np.allclose(gauss_solve([[0, 1], [1, 0]], [2, 3]), [3, 2])


@pytest.mark.parametrize("a", [[[1, 2], [2, 4]], [[0, 0], [0, 0]], [[1, 1], [1, 1 + 1e-15]]])
def test_gauss_solve_singular(a):
    with pytest.raises(DegenerateCircuitError):
        gauss_solve(a, [1, 1])


def test_degenerate_circuit():
    cls = circuit_class("1b")
    branches = tuple(BranchElement(0.0, e=1.0 if i == 0 else 0.0) for i in range(7))
    with pytest.raises(DegenerateCircuitError):
        solve_mesh(CircuitInstance(cls, branches))


@pytest.mark.parametrize(
    "args, expected", [((1, 1, 3), 1.0), ((2, 3, 11), 1.0), ((100, 1, 1), 1 / 201)]
)
def test_amplifier_electrical(args, expected):
    assert solve_amplifier_electrical(*args) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("args, expected", [((1, 1, 2), 1.0), ((3, 0.5, 8), 4.0), ((1, 1, 0.1), 0.05)])
def test_amplifier_electronic(args, expected):
    assert solve_amplifier_electronic(*args) == pytest.approx(expected, rel=1e-12)


@given(r1=st.floats(0.1, 100), r6=st.floats(0.1, 100), v=st.floats(0.1, 20))
def test_amplifier_electrical_equals_mesh(r1, r6, v):
    mesh = probe_response(_three_branch(r1, r6, v)).current_mag
    assert mesh == pytest.approx(solve_amplifier_electrical(r1, r6, v), rel=1e-9)


@pytest.mark.parametrize("fn", [solve_amplifier_electrical, solve_amplifier_electronic])
def test_amplifier_rejects_nonpositive(fn):
    with pytest.raises(ValueError):
        fn(0, 1, 1)
    with pytest.raises(ValueError):
        fn(1, -1, 1)


def test_amplifier_oracles_differ():
    assert solve_amplifier_electrical(1, 1, 2) == pytest.approx(2 / 3)
    assert solve_amplifier_electronic(1, 1, 2) == pytest.approx(1.0)
    assert not math.isclose(solve_amplifier_electrical(1, 1, 2), solve_amplifier_electronic(1, 1, 2))
