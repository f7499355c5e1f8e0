"""
Saving weights and resuming training
====================================

Weights go to JSON with exact float round-tripping. Because each cycle's
shuffle is seeded by (seed, cycle), training n cycles, saving, and then
training one more cycle gives the same weights as n + 1 cycles straight.
"""

# %%
import os
import tempfile

from circuitann.circuits import ann_architecture
from circuitann.data import default_sampler, generate_dataset
from circuitann.mlp import TrainConfig, init_network, load_weights, save_weights, saved_cycles, train

ds = generate_dataset(default_sampler("2a", count=60, seed=1))
arch = ann_architecture("2a")

straight, _ = train(init_network(arch, 0), ds, TrainConfig(cycles=101, seed=3))

part, _ = train(init_network(arch, 0), ds, TrainConfig(cycles=100, seed=3))
path = os.path.join(tempfile.mkdtemp(), "weights.json")
save_weights(part, path, cycles_completed=100)

# %%
resumed, report = train(load_weights(path, arch), ds, TrainConfig(cycles=1, seed=3),
                        start_cycle=saved_cycles(path))
print("resumed equals uninterrupted:", resumed.equals(straight))
print(f"loss after cycle 101: {report.final_loss:.6g}")
