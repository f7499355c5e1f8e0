"""
Sweeping a design grid
======================

Once trained, the network is cheap enough to score every design on a
quantized grid. Only the designs whose predicted current lands in a
target band are kept, nearest to the band centre first.
"""

# %%
import numpy as np

from circuitann.experiments import SweepCriterion, run_ohm_experiment, sweep
from circuitann.solver import solve_ohm

net, ds, _ = run_ohm_experiment()
grid = {"R": np.arange(5.0, 20.01, 0.5), "V": [10.0]}
hits = sweep("1a", net, ds.context, grid, SweepCriterion(current=(1.9, 2.1)))
for h in hits:
    print(f"R={h.values['R']:.1f}  predicted {h.current:.4f} A  exact {solve_ohm(10, h.values['R']):.4f} A")

# %%
# Enumeration is capped; an oversized grid raises instead of running away.
from circuitann.experiments import SweepTooLargeError

try:
    sweep("1a", net, ds.context, {"R": np.linspace(1, 20, 2000), "V": np.linspace(1, 20, 2000)},
          SweepCriterion((1, 2)))
except SweepTooLargeError as exc:
    print("refused:", exc)
