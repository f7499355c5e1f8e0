"""Exact steady-state solvers used as ground truth.

Phase convention: the reported phase is that of the current phasor
relative to a 0 degree source, so a net-inductive branch gives a negative
phase.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .circuits import AMPLIFIER_MIDDLE_R, CircuitInstance, grid_topology, impedance

__all__ = [
    "BranchResponse",
    "DegenerateCircuitError",
    "MeshSolution",
    "gauss_solve",
    "kvl_residual",
    "mesh_system",
    "phasor_response",
    "probe_response",
    "solve_amplifier_electrical",
    "solve_amplifier_electronic",
    "solve_by_superposition",
    "solve_mesh",
    "solve_ohm",
    "solve_series_rlc",
]


class DegenerateCircuitError(ValueError):
    """The mesh impedance matrix is singular."""


@dataclass(frozen=True)
class BranchResponse:
    current_mag: float
    phase_deg: float


@dataclass(frozen=True)
class MeshSolution:
    mesh_currents: tuple[complex, ...]
    branch_currents: tuple[complex, ...]


def _wrap_phase(deg: float) -> float:
    """Map an angle onto (-180, 180]."""
    deg = math.fmod(deg, 360.0)
    if deg <= -180.0:
        deg += 360.0
    elif deg > 180.0:
        deg -= 360.0
    return deg


def phasor_response(current: complex) -> BranchResponse:
    mag = abs(current)
    if mag == 0.0:
        return BranchResponse(0.0, 0.0)
    return BranchResponse(mag, _wrap_phase(math.degrees(cmath.phase(current))))


def solve_ohm(v: float, r: float) -> float:
    if not r > 0:
        raise ValueError("resistance must be positive")
    return v / r


def solve_series_rlc(e: float, r: float, xl: float, xc: float) -> BranchResponse:
    z = complex(r, xl - xc)
    if abs(z) == 0.0:
        raise DegenerateCircuitError("series impedance is zero")
    phase = -math.degrees(math.atan2(xl - xc, r))
    return BranchResponse(e / abs(z), _wrap_phase(phase))


def gauss_solve(a, b, rel_tol: float = 1e-12) -> np.ndarray:
    """Solve ``a x = b`` by Gaussian elimination with partial pivoting.

    Works on complex matrices. A pivot whose magnitude falls below
    ``rel_tol`` times the infinity norm of its original row is treated as a
    singular system.
    """
    a = np.array(a, dtype=complex)
    b = np.array(b, dtype=complex).reshape(len(a), -1)
    n = len(a)
    if a.shape != (n, n):
        raise ValueError("matrix must be square")
    row_norm = np.abs(a).sum(axis=1)
    aug = np.hstack([a, b])
    for k in range(n):
        p = k + int(np.argmax(np.abs(aug[k:, k])))
        if p != k:
            aug[[k, p]] = aug[[p, k]]
            row_norm[[k, p]] = row_norm[[p, k]]
        pivot = aug[k, k]
        if abs(pivot) < rel_tol * max(row_norm[k], np.finfo(float).tiny):
            raise DegenerateCircuitError(f"singular mesh matrix (pivot {abs(pivot):.3g} at step {k})")
        if k + 1 < n:
            factors = aug[k + 1:, k] / pivot
            aug[k + 1:, k:] -= np.outer(factors, aug[k, k:])
    x = np.zeros_like(aug[:, n:])
    for k in range(n - 1, -1, -1):
        x[k] = (aug[k, n:] - aug[k, k + 1:n] @ x[k + 1:]) / aug[k, k]
    return x[:, 0] if x.shape[1] == 1 else x


def _source_phasors(circuit: CircuitInstance) -> np.ndarray:
    return np.array(
        [b.e * cmath.exp(1j * math.radians(b.source_phase)) for b in circuit.branches], dtype=complex
    )


def mesh_system(circuit: CircuitInstance) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Mesh impedance matrix, mesh EMF vector and mesh-branch incidence."""
    topo = grid_topology(circuit.cls)
    inc = np.array(topo.incidence(), dtype=float)
    z = np.array([impedance(b) for b in circuit.branches], dtype=complex)
    m = (inc * z) @ inc.T
    rhs = inc @ _source_phasors(circuit)
    return m, rhs, inc


def solve_mesh(circuit: CircuitInstance) -> MeshSolution:
    m, rhs, inc = mesh_system(circuit)
    mesh = gauss_solve(m, rhs)
    branch = inc.T @ mesh
    return MeshSolution(tuple(complex(x) for x in mesh), tuple(complex(x) for x in branch))


def kvl_residual(circuit: CircuitInstance, solution: MeshSolution) -> float:
    """Infinity norm of ``M x - E`` for a mesh solution."""
    m, rhs, _ = mesh_system(circuit)
    return float(np.max(np.abs(m @ np.array(solution.mesh_currents) - rhs)))


def probe_response(circuit: CircuitInstance, solution: MeshSolution | None = None) -> BranchResponse:
    if solution is None:
        solution = solve_mesh(circuit)
    return phasor_response(solution.branch_currents[circuit.probe_branch])


def solve_by_superposition(circuit: CircuitInstance) -> MeshSolution:
    """Sum of single-source solutions, every other EMF set to exactly zero."""
    n_mesh = circuit.cls.mesh_count
    mesh = np.zeros(n_mesh, dtype=complex)
    branch = np.zeros(circuit.cls.branch_count, dtype=complex)
    emfs = [b.e for b in circuit.branches]
    for k, e in enumerate(emfs):
        if e == 0:
            continue
        only_k = [0.0] * len(emfs)
        only_k[k] = e
        part = solve_mesh(circuit.with_sources(only_k))
        mesh += part.mesh_currents
        branch += part.branch_currents
    return MeshSolution(tuple(complex(x) for x in mesh), tuple(complex(x) for x in branch))


def _check_amplifier(r1, r6):
    if not (r1 > 0 and r6 > 0):
        raise ValueError("amplifier resistances must be positive")


def solve_amplifier_electrical(r1: float, r6: float, v: float) -> float:
    """Output current of the two-loop resistive network with R3 = 1."""
    _check_amplifier(r1, r6)
    r3 = AMPLIFIER_MIDDLE_R
    return v * r3 / (r1 * r3 + r1 * r6 + r3 * r6)


def solve_amplifier_electronic(r1: float, r6: float, v: float) -> float:
    """Output current with zero base current.

    The input loop is a plain R1/R3 divider; the divided voltage then drives
    the output resistance by Ohm's law.
    """
    _check_amplifier(r1, r6)
    r3 = AMPLIFIER_MIDDLE_R
    v_mid = v * r3 / (r1 + r3)
    return v_mid / r6
