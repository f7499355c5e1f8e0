"""
Exact circuit responses
=======================

The solver is the ground truth for everything else in the package. This
walk-through goes from a single series loop to the twelve-branch grid and
checks the mesh answer two independent ways.
"""

# %%
# A single series loop. A net-inductive branch makes the current lag the
# source, so its phase comes out negative.
from circuitann.solver import solve_series_rlc

resp = solve_series_rlc(e=10, r=3, xl=4, xc=0)
print(f"series RLC: |i| = {resp.current_mag:.4f} A, phase = {resp.phase_deg:.3f} deg")

# %%
# Multi-loop circuits are described by class id plus per-branch elements.
# ``circuit_from_features`` takes values in the class's feature order.
import numpy as np

from circuitann.circuits import feature_names, circuit_from_features, grid_topology
from circuitann.solver import probe_response, solve_mesh, solve_by_superposition

names = feature_names("1c")
print("1c features:", names)
values = [10.0, 22.0, 15.0, 40.0, 5.0, 12.0, 7.0, 30.0, 18.0, 9.0, 25.0, 11.0] + [2.0] * 12
circuit = circuit_from_features("1c", values)
for k, mesh in enumerate(grid_topology("1c").meshes):
    print(f"mesh {k}: branches {[b for b, _ in mesh]}")

# %%
# Solve, then read the probe branch (i6). The superposition route solves
# once per source and sums; it must land on the same currents.
sol = solve_mesh(circuit)
summed = solve_by_superposition(circuit)
dev = np.max(np.abs(np.array(sol.branch_currents) - np.array(summed.branch_currents)))
print(f"i6 = {probe_response(circuit, sol).current_mag:.6f} A")
print(f"mesh vs superposition, max deviation: {dev:.2e} A")

# %%
# The two amplifier readings share a topology but not a model: the
# electronic one ignores base current, so it sees a plain divider.
from circuitann.solver import solve_amplifier_electrical, solve_amplifier_electronic

print("electrical i6 (1, 1, 2):", solve_amplifier_electrical(1, 1, 2))
print("electronic i6 (1, 1, 2):", solve_amplifier_electronic(1, 1, 2))
